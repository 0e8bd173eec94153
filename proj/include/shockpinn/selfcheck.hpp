#pragma once

// Numerical self-tests behind the `check` subcommand and the acceptance suite.

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace shockpinn::selfcheck {

struct CheckResult {
    std::string name;
    bool passed = false;
    std::string detail;
    double seconds = 0.0;
};

/// Parameter gradients of a PINN loss on random small networks against central
/// differences with step 1e-4. Passes when at least 99% of the entries agree
/// within relative 1e-5 and none exceeds 1e-4. The relative error uses
/// max(|ad|, |fd|, 1e-8) as denominator.
CheckResult autodiff_gradients(std::uint64_t seed = 7, std::size_t networks = 50);

/// eta'(U) G_k'(U) = phi_k'(U) for k = 1, 2 at random admissible states, relative 1e-7.
CheckResult entropy_pair_identity(std::uint64_t seed = 11, std::size_t states = 100);

/// Smooth advected wave: unsteady and relu-entropy residuals below 1e-10 with
/// closed-form derivatives at `points` random points.
CheckResult smooth_exact_residuals(std::uint64_t seed = 13, std::size_t points = 10000);

/// Prandtl-Meyer fan: nondimensional steady residual below 1e-6 with central
/// differences (h = 1e-6) at points whose distance to both fan edges and to the
/// wall is at least `margin`.
CheckResult expansion_exact_residuals(std::uint64_t seed = 17, std::size_t points = 2000, double margin = 1e-2);

/// Tabulated oblique-shock states, rounded to four significant figures, against
/// the jump relations (1%) and the normal-shock density ratio (0.5%).
CheckResult oblique_tabulated_states();

/// xpinn_loss with one subdomain equals pinn_loss, and stitched_forward with one
/// network equals forward, bit for bit.
CheckResult single_subdomain_equivalence(std::uint64_t seed = 19, std::size_t configs = 20);

struct NamedCheck {
    std::string name;
    std::function<CheckResult()> run;
};
std::vector<NamedCheck> all_checks();

/// Runs every check, printing one line each; returns true if all pass.
bool run_all(std::ostream& out);

}  // namespace shockpinn::selfcheck
