#pragma once

// Recovery of (delta_ef, omega, g) from population time series by damped
// Gauss-Newton (Levenberg-Marquardt) with kappa held fixed.

#include <Eigen/Core>

#include <array>
#include <cstdint>
#include <vector>

#include "ep3/dynamics.hpp"

namespace ep3 {

/// Free fit parameters (delta_ef, omega, g).
using FitVector = Eigen::Vector3d;

inline Params with_kappa(const FitVector& x, double kappa) { return Params{x(0), x(1), x(2), kappa}; }

struct ObservationSet {
  std::vector<double> times;
  std::vector<std::array<double, 3>> observed;  // (P_g, P_e, P_f), P_g = p_g1 + p_g0
  std::vector<double> sigma;                    // per point, default 1

  std::size_t size() const { return times.size(); }
  void validate() const;
};

/// Model RK4 step bound used for synthesis and fitting: 0.002 / rate scale.
double default_max_dt(const Params& p);

/// Model populations (P_g, P_e, P_f) at the sample times.
std::vector<std::array<double, 3>> model_populations(const Params& p, const StateVector& psi0,
                                                     const std::vector<double>& times,
                                                     const std::vector<int>& substeps);

ObservationSet simulate_observations(const FitVector& truth, double kappa, const StateVector& psi0,
                                     const std::vector<double>& times, double noise_sd, std::uint64_t seed);

struct FitOptions {
  int max_iterations{200};
  double step_tolerance{1e-10};
  double decrease_tolerance{1e-12};
  double ill_posed_condition{1e12};
  bool canonical_signs{true};
};

struct FitResult {
  FitVector params{FitVector::Zero()};
  double kappa_fixed{0};
  double residual_rms{0};
  double initial_rms{0};
  int iterations{0};
  bool converged{false};
  /// sigma_max / sigma_min of the residual Jacobian; +inf when a singular
  /// value sits below the finite-difference noise floor.
  double jacobian_condition{0};
  bool ill_posed{false};
  /// Sign flips of (omega, g) that leave the populations unchanged for this
  /// initial state; the reported params are the representative with the
  /// most non-negative entries among them.
  bool sign_canonicalised{false};
};

FitResult fit_parameters(const ObservationSet& data, double kappa, const StateVector& psi0,
                         const FitVector& initial_guess, const FitOptions& opt = {});

/// Parameter maps (delta, omega, g) -> (c d, c s_o omega, c s_g g) that leave
/// the populations from psi0 unchanged. The identity is always first.
std::vector<Eigen::Vector3d> population_symmetries(const StateVector& psi0);

}  // namespace ep3
