#pragma once

// Time evolution  i d psi/dt = H(t) psi  without renormalisation, overlaps
// with instantaneous right eigenstates, and (T, omega0) fidelity maps for
// rectangular loops in the (omega, delta_ef) plane at fixed g.

#include <array>
#include <functional>
#include <string>
#include <vector>

#include "ep3/spectral.hpp"

namespace ep3 {

using StateVector = Vector3cd;

/// Basis states in the order (|e,0>, |f,0>, |g,1>).
inline StateVector basis_state(int k) {
  StateVector v = StateVector::Zero();
  v(k) = 1.0;
  return v;
}

/// Parameters as a function of time.
using Schedule = std::function<Params(double)>;

inline Schedule constant_schedule(const Params& p) {
  return [p](double) { return p; };
}

enum class Direction { CW, CCW };

const char* to_string(Direction d);
Direction parse_direction(const std::string& s);

/// Rectangle with corners {omega0, omega_m} x {-a, +a} in (omega, delta_ef),
/// started and ended at (omega0, 0). CCW first moves to delta_ef = -a.
/// omega0 == omega_m is allowed and gives a zero-width loop.
struct RectangleLoopSchedule {
  double g_fixed{0};
  double omega0{0};
  double omega_m{0};
  double a{0};
  double kappa{0};
  double period{1};
  Direction direction{Direction::CCW};

  void validate() const;
  Params at(double t) const;
  Params start() const { return at(0); }
  Schedule schedule() const;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<StateVector> states;
  std::vector<double> norms;  // squared norms
  /// |psi_dt(T) - psi_dt/2(T)|, or -1 when not estimated.
  double error_estimate{-1};

  const StateVector& final_state() const { return states.back(); }
};

struct EvolveOptions {
  bool estimate_error{true};
  bool record{true};  // keep every step; otherwise only the end points
};

Trajectory evolve(const Schedule& h, const StateVector& psi0, double T, double dt, const EvolveOptions& opt = {});
Trajectory evolve(const Params& p, const StateVector& psi0, double T, double dt, const EvolveOptions& opt = {});
/// Loop evolution over one period; dt defaults to period / 8192.
Trajectory evolve(const RectangleLoopSchedule& loop, const StateVector& psi0, double dt = 0,
                  const EvolveOptions& opt = {});

/// One classical RK4 step of d psi/dt = -i H(t) psi.
StateVector rk4_step(const Schedule& h, const StateVector& psi, double t, double dt);

/// F_j = |<r_j|psi>|^2 / |psi|^2 with unit right eigenvectors in canonical order.
std::array<double, 3> overlaps(const StateVector& psi, const Params& p);

struct EnclosedEPs {
  int count{0};
  bool slice_has_eps{false};
  std::vector<double> ep_omegas;  // both signs, ascending
};

EnclosedEPs enclosed_ep_count(const RectangleLoopSchedule& loop);

struct FidelityCell {
  std::array<double, 3> f{0, 0, 0};
  std::string error;  // empty on success

  bool ok() const { return error.empty(); }
  /// 1-based label of the dominant eigenstate, 0 for a failed cell.
  int argmax() const;
};

struct FidelityMap {
  double g_fixed{0}, omega_m{0}, a{0}, kappa{0};
  std::vector<double> t_grid;
  std::vector<double> omega0_grid;
  std::vector<Direction> directions;
  std::vector<int> ep_count;  // per omega0
  std::vector<FidelityCell> cells;  // index (d * n_t + i_t) * n_omega0 + i_omega0

  const FidelityCell& at(std::size_t d, std::size_t i_t, std::size_t i_o) const {
    return cells[(d * t_grid.size() + i_t) * omega0_grid.size() + i_o];
  }
};

struct FidelityOptions {
  int steps_per_period{8192};
  unsigned threads{0};  // 0: hardware concurrency
};

FidelityMap fidelity_map(double g_fixed, double omega_m, double a, double kappa, const std::vector<double>& t_grid,
                         const std::vector<double>& omega0_grid, const std::vector<Direction>& directions,
                         const FidelityOptions& opt = {});

struct PopulationSeries {
  std::vector<double> times;
  std::vector<double> p_e, p_f, p_g1, p_g0;

  std::size_t size() const { return times.size(); }
};

PopulationSeries population_dynamics(const Params& p, const StateVector& psi0, double T, double dt);

/// Populations at arbitrary increasing sample times (t >= 0) for constant
/// parameters. substeps[k] RK4 steps cover (t_{k-1}, t_k], t_{-1} = 0.
std::vector<int> substep_plan(const std::vector<double>& times, double max_dt);
PopulationSeries populations_at(const Params& p, const StateVector& psi0, const std::vector<double>& times,
                                const std::vector<int>& substeps);

}  // namespace ep3
