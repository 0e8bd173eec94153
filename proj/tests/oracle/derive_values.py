#!/usr/bin/env python3
"""Independent reference values for the C++ test suite.

Every number is computed here with numpy/scipy and written to
derived_values.hpp as constexpr doubles. The header is committed; the
`oracle-fresh` ctest entry regenerates it into a temporary file and compares,
so a drift in this script or its libraries shows up as a failing test.

Usage: derive_values.py [output.hpp]
"""

import math
import sys

import numpy as np
from scipy import optimize

GAMMA = 1.4


def nu(m, g=GAMMA):
    k = math.sqrt((g + 1.0) / (g - 1.0))
    return k * math.atan(math.sqrt((m * m - 1.0) / (k * k))) - math.atan(math.sqrt(m * m - 1.0))


def inverse_nu(target, g=GAMMA):
    return optimize.brentq(lambda m: nu(m, g) - target, 1.0, 50.0, xtol=1e-15, rtol=1e-15)


def isentropic_pressure_ratio(m1, m2, g=GAMMA):
    h = 0.5 * (g - 1.0)
    return ((1.0 + h * m1 * m1) / (1.0 + h * m2 * m2)) ** (g / (g - 1.0))


def isentropic_density_ratio(m1, m2, g=GAMMA):
    h = 0.5 * (g - 1.0)
    return ((1.0 + h * m1 * m1) / (1.0 + h * m2 * m2)) ** (1.0 / (g - 1.0))


def theta_of_beta(beta, m, g=GAMMA):
    num = m * m * math.sin(beta) ** 2 - 1.0
    den = m * m * (g + math.cos(2.0 * beta)) + 2.0
    return math.atan(2.0 / math.tan(beta) * num / den)


def weak_beta(m, theta, g=GAMMA):
    mu = math.asin(1.0 / m)
    betas = np.linspace(mu, math.pi / 2, 200001)
    thetas = np.array([theta_of_beta(b, m, g) for b in betas[::100]])
    b_max = betas[::100][int(np.argmax(thetas))]
    return optimize.brentq(lambda b: theta_of_beta(b, m, g) - theta, mu + 1e-12, b_max, xtol=1e-15)


def normal_shock_density(mn, g=GAMMA):
    return (g + 1.0) * mn * mn / ((g - 1.0) * mn * mn + 2.0)


def normal_shock_pressure(mn, g=GAMMA):
    return 1.0 + 2.0 * g / (g + 1.0) * (mn * mn - 1.0)


def rh_relative(pre, post, beta, g=GAMMA):
    n = np.array([math.sin(beta), -math.cos(beta)])
    t = np.array([math.cos(beta), math.sin(beta)])

    def fluxes(w):
        rho, u, v, p = w
        vel = np.array([u, v])
        vn = vel @ n
        rho_e = p / (g - 1.0) + 0.5 * rho * (u * u + v * v)
        return np.array([rho * vn, rho * vn * vn + p, rho * vn * (vel @ t), vn * (rho_e + p)])

    a = fluxes(pre)
    b = fluxes(post)
    return (a - b) / np.abs(a)


def fan_state(m1, phi, g=GAMMA):
    """Mach number and turn at polar angle phi inside a centred fan."""
    nu1 = nu(m1, g)
    m = optimize.brentq(lambda mm: math.asin(1.0 / mm) - (nu(mm, g) - nu1) - phi, m1, 10.0, xtol=1e-15)
    return m, nu(m, g) - nu1


def lbfgs_reference():
    """scipy's L-BFGS on a condition-number-100 quadratic from (1, 1)."""
    h = np.diag([1.0, 100.0])
    f = lambda x: 0.5 * x @ h @ x
    grad = lambda x: h @ x
    res = optimize.minimize(f, np.array([1.0, 1.0]), jac=grad, method="L-BFGS-B",
                            options={"gtol": 1e-12, "ftol": 0.0, "maxiter": 100})
    return res.nit, float(np.linalg.norm(grad(res.x)))


def main():
    values = []

    def put(name, value, note):
        values.append((name, float(value), note))

    deg = math.pi / 180.0

    # Prandtl-Meyer expansion at M = 2 turned by 10 degrees.
    m1 = 2.0
    nu2 = nu(m1)
    m_down = inverse_nu(nu2 + 10.0 * deg)
    put("kNuMach2Deg", nu2 / deg, "nu(2) in degrees")
    put("kExpansionDownstreamMach", m_down, "inverse_nu(nu(2) + 10 deg)")
    put("kExpansionPressureRatio", isentropic_pressure_ratio(m1, m_down), "p2 / p_inf behind the fan")
    put("kExpansionDensityRatio", isentropic_density_ratio(m1, m_down), "rho2 / rho_inf behind the fan")
    put("kExpansionLeadAngleDeg", math.asin(1.0 / m1) / deg, "leading Mach line")
    put("kExpansionTailAngleDeg", math.asin(1.0 / m_down) / deg - 10.0, "trailing Mach line polar angle")
    m_fan, turn_fan = fan_state(m1, 20.0 * deg)
    put("kFanMachAt20Deg", m_fan, "local Mach on the 20 degree ray")
    put("kFanTurnAt20DegDeg", turn_fan / deg, "flow turn on the 20 degree ray")
    put("kFanPressureRatioAt20Deg", isentropic_pressure_ratio(m1, m_fan), "p / p_inf on the 20 degree ray")
    put("kNuMaxDeg", (math.sqrt((GAMMA + 1) / (GAMMA - 1)) - 1.0) * 90.0, "limit of nu as M grows")

    # Nondimensional inlet pressure of the expansion case.
    put("kExpansionPStar", 1.01e5 / (1.23 * 678.1 ** 2), "p_inf / (rho_inf u_inf^2)")

    # Oblique shock from the tabulated pre-shock state.
    pre = (0.06688, 738.2, 0.0, 9485.0)
    a_pre = math.sqrt(GAMMA * pre[3] / pre[0])
    m_pre = pre[1] / a_pre
    beta = weak_beta(m_pre, 10.0 * deg)
    mn = m_pre * math.sin(beta)
    put("kObliquePreMach", m_pre, "738.2 / sqrt(1.4 * 9485 / 0.06688)")
    put("kObliqueBetaDeg", beta / deg, "weak-branch shock angle at 10 degrees")
    put("kObliqueDensityRatio", normal_shock_density(mn), "normal-shock density ratio at M sin(beta)")
    put("kObliquePressureRatio", normal_shock_pressure(mn), "normal-shock pressure ratio at M sin(beta)")
    put("kObliqueTabulatedDensityRatio", 0.09515 / 0.06688, "ratio of the tabulated densities")
    for tag, post in (("CosSin", (0.09515, 635.9 * math.cos(10 * deg), 635.9 * math.sin(10 * deg), 1.5e4)),
                      ("SinCos", (0.09515, 635.9 * math.sin(10 * deg), 635.9 * math.cos(10 * deg), 1.5e4))):
        r = rh_relative(pre, post, beta)
        for k, label in enumerate(("Mass", "NormalMomentum", "TangentialMomentum", "Energy")):
            put(f"kRh{tag}{label}", r[k], f"relative jump residual, {tag} ordering")
    put("kDetachmentThetaDegMach2", max(theta_of_beta(b, 2.0) for b in np.linspace(0.5236, 1.5707, 200001)) / deg,
        "maximum deflection at M = 2")

    # Euler algebra at (rho, u, v, p) = (1, 0.7, 0.3, 1).
    rho, u, v, p = 1.0, 0.7, 0.3, 1.0
    rho_e = p / (GAMMA - 1.0) + 0.5 * rho * (u * u + v * v)
    put("kRhoE", rho_e, "rho E")
    for k, g in enumerate((rho * u, p + rho * u * u, rho * u * v, u * (rho_e + p))):
        put(f"kG1_{k}", g, "G1 component")
    put("kEntropyAtState", -1.2 * math.log(0.8 / 1.2 ** GAMMA) / (GAMMA - 1.0), "eta at rho = 1.2, p = 0.8")

    # Network evaluation and parameter count.
    put("kTanhHalf", math.tanh(0.5), "one-neuron network output")
    sizes = [2] + [40] * 6 + [4]
    count = sum(sizes[i] * sizes[i + 1] + sizes[i + 1] for i in range(len(sizes) - 1))
    put("kParameterCount6x40", count, "weights and biases of [2, 40 x 6, 4]")

    # Optimizers.
    b1, b2, lr, eps, g = 0.9, 0.999, 1e-3, 1e-8, 1.0
    m_hat = ((1 - b1) * g) / (1 - b1)
    v_hat = ((1 - b2) * g * g) / (1 - b2)
    put("kAdamFirstStep", -lr * m_hat / (math.sqrt(v_hat) + eps), "first Adam step for g = 1")
    nit, gnorm = lbfgs_reference()
    put("kScipyLbfgsIterations", nit, "scipy L-BFGS iterations on diag(1, 100) from (1, 1)")
    put("kScipyLbfgsGradNorm", gnorm, "final gradient norm of that run")

    # Loss and analysis arithmetic.
    put("kDynamicWeightUpdate", 0.9 * 1.0 + 0.1 * (10.0 / 2.0), "omega after one update")
    put("kRelativeL2Constant", np.linalg.norm(np.full(7, 2.2) - 2.0) / np.linalg.norm(np.full(7, 2.0)),
        "constant 2.2 against 2")
    put("kLinearMassResidual", 0.1, "d/dx((1 + 0.1 x) * 1)")

    # Closed boundary integral of (x, 0) . n over the unit square, by Gauss-Legendre.
    nodes, weights = np.polynomial.legendre.leggauss(4)
    flux = 0.0
    for (ax, ay), (bx, by) in (((0, 0), (1, 0)), ((1, 0), (1, 1)), ((1, 1), (0, 1)), ((0, 1), (0, 0))):
        tx, ty = bx - ax, by - ay
        nx, ny = ty, -tx
        for s, w in zip(nodes, weights):
            x = ax + 0.5 * (s + 1.0) * tx
            flux += 0.5 * w * (x * nx)
    put("kUnitSquareMassFlux", flux, "boundary integral of rho u = x")
    for k in range(4):
        put(f"kGaussLegendre4Node{k}", nodes[k], "order-4 node")
        put(f"kGaussLegendre4Weight{k}", weights[k], "order-4 weight")

    # Smooth advected wave and its density gradient at (0.1, 0.3, 0.2).
    x, y, t = 0.1, 0.3, 0.2
    arg = math.pi * (x + y - (u + v) * t)
    put("kSmoothRhoAtSample", 1.0 + 0.2 * math.sin(arg), "rho(0.1, 0.3, 0.2)")
    put("kSmoothDrhoDxAtSample", 0.2 * math.pi * math.cos(arg), "d rho / dx there")
    put("kSmoothDrhoDtAtSample", -0.2 * math.pi * (u + v) * math.cos(arg), "d rho / dt there")
    put("kSinPiDerivative", math.pi * math.cos(math.pi * 0.5), "d/dx sin(pi (x + y)) at (0.25, 0.25)")

    lines = [
        "#pragma once",
        "",
        "// Generated by tests/oracle/derive_values.py. Do not edit by hand.",
        "",
        "namespace oracle {",
        "",
    ]
    for name, value, note in values:
        lines.append(f"inline constexpr double {name} = {value!r};  // {note}")
    lines += ["", "}  // namespace oracle", ""]
    text = "\n".join(lines)

    out = sys.argv[1] if len(sys.argv) > 1 else None
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


if __name__ == "__main__":
    main()
