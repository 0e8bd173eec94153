#pragma once

// Generated by tests/oracle/derive_values.py. Do not edit by hand.

namespace oracle {

inline constexpr double kNuMach2Deg = 26.379760813416457;  // nu(2) in degrees
inline constexpr double kExpansionDownstreamMach = 2.3848871545930694;  // inverse_nu(nu(2) + 10 deg)
inline constexpr double kExpansionPressureRatio = 0.5479687312769054;  // p2 / p_inf behind the fan
inline constexpr double kExpansionDensityRatio = 0.6507242381423533;  // rho2 / rho_inf behind the fan
inline constexpr double kExpansionLeadAngleDeg = 30.000000000000004;  // leading Mach line
inline constexpr double kExpansionTailAngleDeg = 14.790846460131934;  // trailing Mach line polar angle
inline constexpr double kFanMachAt20Deg = 2.2434345502970334;  // local Mach on the 20 degree ray
inline constexpr double kFanTurnAt20DegDeg = 6.471021105813539;  // flow turn on the 20 degree ray
inline constexpr double kFanPressureRatioAt20Deg = 0.6836615496501747;  // p / p_inf on the 20 degree ray
inline constexpr double kNuMaxDeg = 130.45407685048605;  // limit of nu as M grows
inline constexpr double kExpansionPStar = 0.17857833670515133;  // p_inf / (rho_inf u_inf^2)
inline constexpr double kObliquePreMach = 1.656683274100102;  // 738.2 / sqrt(1.4 * 9485 / 0.06688)
inline constexpr double kObliqueBetaDeg = 48.747663837633624;  // weak-branch shock angle at 10 degrees
inline constexpr double kObliqueDensityRatio = 1.4207630663060005;  // normal-shock density ratio at M sin(beta)
inline constexpr double kObliquePressureRatio = 1.6431948175623319;  // normal-shock pressure ratio at M sin(beta)
inline constexpr double kObliqueTabulatedDensityRatio = 1.4226973684210527;  // ratio of the tabulated densities
inline constexpr double kRhCosSinMass = -0.020273717730193874;  // relative jump residual, CosSin ordering
inline constexpr double kRhCosSinNormalMomentum = 0.00041086685718303936;  // relative jump residual, CosSin ordering
inline constexpr double kRhCosSinTangentialMomentum = -0.03954316994110315;  // relative jump residual, CosSin ordering
inline constexpr double kRhCosSinEnergy = -0.0005024742863313132;  // relative jump residual, CosSin ordering
inline constexpr double kRhSinCosMass = 1.8457154934471165;  // relative jump residual, SinCos ordering
inline constexpr double kRhSinCosNormalMomentum = 0.15717730080319003;  // relative jump residual, SinCos ordering
inline constexpr double kRhSinCosTangentialMomentum = 1.9445310244356109;  // relative jump residual, SinCos ordering
inline constexpr double kRhSinCosEnergy = 1.8293269041748297;  // relative jump residual, SinCos ordering
inline constexpr double kDetachmentThetaDegMach2 = 22.973531760836572;  // maximum deflection at M = 2
inline constexpr double kRhoE = 2.7900000000000005;  // rho E
inline constexpr double kG1_0 = 0.7;  // G1 component
inline constexpr double kG1_1 = 1.49;  // G1 component
inline constexpr double kG1_2 = 0.21;  // G1 component
inline constexpr double kG1_3 = 2.653;  // G1 component
inline constexpr double kEntropyAtState = 1.4351811924772386;  // eta at rho = 1.2, p = 0.8
inline constexpr double kTanhHalf = 0.46211715726000974;  // one-neuron network output
inline constexpr double kParameterCount6x40 = 8484.0;  // weights and biases of [2, 40 x 6, 4]
inline constexpr double kAdamFirstStep = -0.0009999999900000003;  // first Adam step for g = 1
inline constexpr double kScipyLbfgsIterations = 6.0;  // scipy L-BFGS iterations on diag(1, 100) from (1, 1)
inline constexpr double kScipyLbfgsGradNorm = 5.125963209450786e-13;  // final gradient norm of that run
inline constexpr double kDynamicWeightUpdate = 1.4;  // omega after one update
inline constexpr double kRelativeL2Constant = 0.10000000000000009;  // constant 2.2 against 2
inline constexpr double kLinearMassResidual = 0.1;  // d/dx((1 + 0.1 x) * 1)
inline constexpr double kUnitSquareMassFlux = 0.9999999999999999;  // boundary integral of rho u = x
inline constexpr double kGaussLegendre4Node0 = -0.8611363115940526;  // order-4 node
inline constexpr double kGaussLegendre4Weight0 = 0.3478548451374537;  // order-4 weight
inline constexpr double kGaussLegendre4Node1 = -0.33998104358485626;  // order-4 node
inline constexpr double kGaussLegendre4Weight1 = 0.6521451548625462;  // order-4 weight
inline constexpr double kGaussLegendre4Node2 = 0.33998104358485626;  // order-4 node
inline constexpr double kGaussLegendre4Weight2 = 0.6521451548625462;  // order-4 weight
inline constexpr double kGaussLegendre4Node3 = 0.8611363115940526;  // order-4 node
inline constexpr double kGaussLegendre4Weight3 = 0.3478548451374537;  // order-4 weight
inline constexpr double kSmoothRhoAtSample = 1.1175570504584946;  // rho(0.1, 0.3, 0.2)
inline constexpr double kSmoothDrhoDxAtSample = 0.508320369231526;  // d rho / dx there
inline constexpr double kSmoothDrhoDtAtSample = -0.508320369231526;  // d rho / dt there
inline constexpr double kSinPiDerivative = 1.9236706937217898e-16;  // d/dx sin(pi (x + y)) at (0.25, 0.25)

}  // namespace oracle
