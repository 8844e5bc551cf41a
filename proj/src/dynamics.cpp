#include "ep3/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "ep3/atlas.hpp"

namespace ep3 {

namespace {

constexpr std::complex<double> kMinusI{0.0, -1.0};

void check_state(const StateVector& psi0) {
  if (!psi0.allFinite()) throw InvalidParameter("initial state must be finite");
  if (std::abs(psi0.squaredNorm() - 1.0) > 1e-9) throw InvalidParameter("initial state must have unit norm");
}

struct Run {
  StateVector psi;
  std::vector<double> times;
  std::vector<StateVector> states;
  std::vector<double> norms;
};

Run integrate(const Schedule& h, const StateVector& psi0, double T, long n, bool record) {
  const double dt = n > 0 ? T / static_cast<double>(n) : 0.0;
  Run r{psi0, {}, {}, {}};
  const auto keep = [&](double t, const StateVector& s) {
    r.times.push_back(t);
    r.states.push_back(s);
    r.norms.push_back(s.squaredNorm());
  };
  keep(0.0, psi0);
  double norm = psi0.squaredNorm();
  for (long k = 0; k < n; ++k) {
    const double t = dt * static_cast<double>(k);
    r.psi = rk4_step(h, r.psi, t, dt);
    const double next = r.psi.squaredNorm();
    if (!std::isfinite(next) || next - norm > 1e-6)
      throw InstabilityError("norm grew during integration at t = " + std::to_string(t + dt) + "; reduce dt");
    norm = next;
    if (record || k + 1 == n) keep(k + 1 == n ? T : dt * static_cast<double>(k + 1), r.psi);
  }
  return r;
}

long step_count(double T, double dt) {
  if (!std::isfinite(T) || T < 0) throw InvalidParameter("evolution time must be finite and non-negative");
  if (!std::isfinite(dt) || !(dt > 0)) throw InvalidParameter("time step must be positive");
  const double n = std::ceil(T / dt - 1e-9);
  if (n > 1e9) throw InvalidParameter("time step too small for the evolution time");
  return static_cast<long>(std::max(n, T > 0 ? 1.0 : 0.0));
}

}  // namespace

const char* to_string(Direction d) { return d == Direction::CW ? "CW" : "CCW"; }

Direction parse_direction(const std::string& s) {
  if (s == "CW" || s == "cw") return Direction::CW;
  if (s == "CCW" || s == "ccw") return Direction::CCW;
  throw InvalidParameter("direction must be CW or CCW, got '" + s + "'");
}

void RectangleLoopSchedule::validate() const {
  for (double x : {g_fixed, omega0, omega_m, a, kappa, period})
    if (!std::isfinite(x)) throw InvalidParameter("rectangle schedule values must be finite");
  if (omega0 > omega_m) throw InvalidParameter("rectangle needs omega0 <= omega_m");
  if (a < 0) throw InvalidParameter("rectangle half-height must be non-negative");
  if (kappa < 0) throw InvalidParameter("kappa must be non-negative");
  if (!(period > 0)) throw InvalidParameter("loop period must be positive");
}

Params RectangleLoopSchedule::at(double t) const {
  double u = std::clamp(t / period, 0.0, 1.0);
  if (direction == Direction::CW) u = 1.0 - u;
  const auto lerp = [](double x, double y, double f) { return x + (y - x) * f; };
  double omega, delta;
  if (u < 0.125) {
    omega = omega0;
    delta = lerp(0, -a, u / 0.125);
  } else if (u < 0.375) {
    omega = lerp(omega0, omega_m, (u - 0.125) / 0.25);
    delta = -a;
  } else if (u < 0.625) {
    omega = omega_m;
    delta = lerp(-a, a, (u - 0.375) / 0.25);
  } else if (u < 0.875) {
    omega = lerp(omega_m, omega0, (u - 0.625) / 0.25);
    delta = a;
  } else {
    omega = omega0;
    delta = lerp(a, 0, (u - 0.875) / 0.125);
  }
  return Params{delta, omega, g_fixed, kappa};
}

Schedule RectangleLoopSchedule::schedule() const {
  return [copy = *this](double t) { return copy.at(t); };
}

StateVector rk4_step(const Schedule& h, const StateVector& psi, double t, double dt) {
  const Matrix3cd h0 = build_hamiltonian(h(t));
  const Matrix3cd hm = build_hamiltonian(h(t + dt / 2));
  const Matrix3cd h1 = build_hamiltonian(h(t + dt));
  const StateVector k1 = kMinusI * (h0 * psi);
  const StateVector k2 = kMinusI * (hm * (psi + dt / 2 * k1));
  const StateVector k3 = kMinusI * (hm * (psi + dt / 2 * k2));
  const StateVector k4 = kMinusI * (h1 * (psi + dt * k3));
  return psi + dt / 6 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

Trajectory evolve(const Schedule& h, const StateVector& psi0, double T, double dt, const EvolveOptions& opt) {
  check_state(psi0);
  const long n = step_count(T, dt);
  Run r = integrate(h, psi0, T, n, opt.record);
  Trajectory out{std::move(r.times), std::move(r.states), std::move(r.norms), -1};
  if (opt.estimate_error && n > 0) {
    const Run fine = integrate(h, psi0, T, 2 * n, false);
    out.error_estimate = (fine.psi - out.final_state()).norm();
  }
  return out;
}

Trajectory evolve(const Params& p, const StateVector& psi0, double T, double dt, const EvolveOptions& opt) {
  p.validate();
  return evolve(constant_schedule(p), psi0, T, dt, opt);
}

Trajectory evolve(const RectangleLoopSchedule& loop, const StateVector& psi0, double dt, const EvolveOptions& opt) {
  loop.validate();
  if (dt == 0) dt = loop.period / 8192;
  if (dt > loop.period / 1000 * (1 + 1e-12)) throw InvalidParameter("loop evolution needs dt <= period / 1000");
  return evolve(loop.schedule(), psi0, loop.period, dt, opt);
}

std::array<double, 3> overlaps(const StateVector& psi, const Params& p) {
  p.validate();
  const double n2 = psi.squaredNorm();
  if (!(n2 > 0) || !std::isfinite(n2)) throw InvalidParameter("state must be finite and nonzero");
  const auto es = eigensystem(p);
  if (es.defective()) throw DegenerateEigenbasis("eigenbasis is defective at these parameters");
  std::array<double, 3> f{};
  for (int j = 0; j < 3; ++j) f[j] = std::min(1.0, std::norm(es.right[j].dot(psi)) / n2);
  return f;
}

EnclosedEPs enclosed_ep_count(const RectangleLoopSchedule& loop) {
  loop.validate();
  if (!(loop.kappa > 0)) throw InvalidParameter("EP counting needs kappa > 0");
  EnclosedEPs out;
  out.ep_omegas = slice_ep_omegas(loop.g_fixed, loop.kappa);
  out.slice_has_eps = !out.ep_omegas.empty();
  for (double w : out.ep_omegas)
    if (w >= loop.omega0 && w <= loop.omega_m) ++out.count;
  return out;
}

int FidelityCell::argmax() const {
  if (!ok()) return 0;
  return static_cast<int>(std::max_element(f.begin(), f.end()) - f.begin()) + 1;
}

FidelityMap fidelity_map(double g_fixed, double omega_m, double a, double kappa, const std::vector<double>& t_grid,
                         const std::vector<double>& omega0_grid, const std::vector<Direction>& directions,
                         const FidelityOptions& opt) {
  if (t_grid.empty() || omega0_grid.empty() || directions.empty())
    throw ValidationError("fidelity map grids must be nonempty");
  if (opt.steps_per_period < 1000) throw InvalidParameter("fidelity map needs at least 1000 steps per period");
  for (double t : t_grid)
    if (!std::isfinite(t) || !(t > 0)) throw ValidationError("loop periods must be positive");
  for (double w : omega0_grid)
    if (!std::isfinite(w) || w > omega_m) throw ValidationError("omega0 grid must not exceed omega_m");

  FidelityMap map{g_fixed, omega_m, a, kappa, t_grid, omega0_grid, directions, {}, {}};
  const std::size_t n_t = t_grid.size(), n_o = omega0_grid.size();
  for (double w : omega0_grid)
    map.ep_count.push_back(enclosed_ep_count({g_fixed, w, omega_m, a, kappa, 1.0, Direction::CCW}).count);
  map.cells.resize(directions.size() * n_t * n_o);

  const std::size_t total = map.cells.size();
  unsigned workers = opt.threads ? opt.threads : std::thread::hardware_concurrency();
  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(total)));
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t idx = w; idx < total; idx += workers) {
        const std::size_t i_o = idx % n_o;
        const std::size_t i_t = (idx / n_o) % n_t;
        const std::size_t d = idx / (n_o * n_t);
        FidelityCell& cell = map.cells[idx];
        try {
          const RectangleLoopSchedule loop{g_fixed, omega0_grid[i_o], omega_m, a, kappa, t_grid[i_t], directions[d]};
          const auto es = eigensystem(loop.start());
          if (es.defective()) throw DegenerateEigenbasis("start point is exceptional");
          const Trajectory tr = evolve(loop, es.right[1], loop.period / opt.steps_per_period, {false, false});
          cell.f = overlaps(tr.final_state(), loop.start());
        } catch (const Error& e) {
          cell.error = e.what();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  return map;
}

PopulationSeries population_dynamics(const Params& p, const StateVector& psi0, double T, double dt) {
  const Trajectory tr = evolve(p, psi0, T, dt, {false, true});
  PopulationSeries out;
  out.times = tr.times;
  for (std::size_t k = 0; k < tr.states.size(); ++k) {
    const auto& s = tr.states[k];
    out.p_e.push_back(std::norm(s(0)));
    out.p_f.push_back(std::norm(s(1)));
    out.p_g1.push_back(std::norm(s(2)));
    out.p_g0.push_back(1.0 - tr.norms[k]);
  }
  return out;
}

std::vector<int> substep_plan(const std::vector<double>& times, double max_dt) {
  if (!(max_dt > 0)) throw InvalidParameter("max_dt must be positive");
  std::vector<int> plan;
  double prev = 0;
  for (double t : times) {
    if (!std::isfinite(t) || t < prev) throw InvalidParameter("sample times must be finite, non-negative and increasing");
    plan.push_back(t > prev ? static_cast<int>(std::ceil((t - prev) / max_dt)) : 0);
    prev = t;
  }
  return plan;
}

PopulationSeries populations_at(const Params& p, const StateVector& psi0, const std::vector<double>& times,
                                const std::vector<int>& substeps) {
  p.validate();
  check_state(psi0);
  if (substeps.size() != times.size()) throw InvalidParameter("substep plan does not match sample times");
  const Schedule h = constant_schedule(p);
  PopulationSeries out;
  StateVector psi = psi0;
  double prev = 0;
  for (std::size_t k = 0; k < times.size(); ++k) {
    const int n = substeps[k];
    const double dt = n > 0 ? (times[k] - prev) / n : 0.0;
    for (int i = 0; i < n; ++i) psi = rk4_step(h, psi, prev + i * dt, dt);
    prev = times[k];
    out.times.push_back(times[k]);
    out.p_e.push_back(std::norm(psi(0)));
    out.p_f.push_back(std::norm(psi(1)));
    out.p_g1.push_back(std::norm(psi(2)));
    out.p_g0.push_back(1.0 - psi.squaredNorm());
  }
  return out;
}

}  // namespace ep3
