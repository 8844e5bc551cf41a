#include "ep3/fit.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <random>

namespace ep3 {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

class Model {
 public:
  // `unit` is the rate scale of the problem; finite-difference steps are
  // 1e-6 max(unit, |x_i|) so the fit commutes with a change of rate unit.
  Model(const ObservationSet& data, double kappa, const StateVector& psi0, const std::vector<int>& plan, double unit)
      : data_(data), kappa_(kappa), psi0_(psi0), plan_(plan), unit_(unit) {}

  VectorXd residuals(const FitVector& x) const {
    const auto pops = model_populations(with_kappa(x, kappa_), psi0_, data_.times, plan_);
    VectorXd r(3 * static_cast<Eigen::Index>(pops.size()));
    for (std::size_t k = 0; k < pops.size(); ++k)
      for (int c = 0; c < 3; ++c) r(3 * k + c) = (pops[k][c] - data_.observed[k][c]) / data_.sigma[k];
    return r;
  }

  double rms(const FitVector& x) const {
    const auto pops = model_populations(with_kappa(x, kappa_), psi0_, data_.times, plan_);
    double acc = 0;
    for (std::size_t k = 0; k < pops.size(); ++k)
      for (int c = 0; c < 3; ++c) acc += std::pow(pops[k][c] - data_.observed[k][c], 2);
    return std::sqrt(acc / (3.0 * pops.size()));
  }

  MatrixXd jacobian(const FitVector& x, const VectorXd& r0) const {
    MatrixXd j(r0.size(), 3);
    for (int i = 0; i < 3; ++i) {
      FitVector xh = x;
      const double h = 1e-6 * std::max(unit_, std::abs(x(i)));
      xh(i) += h;
      j.col(i) = (residuals(xh) - r0) / (xh(i) - x(i));
    }
    return j;
  }

  // Smallest singular value that finite differences can resolve.
  double noise_floor(const FitVector& x) const {
    double max_w = 0;
    for (double s : data_.sigma) max_w = std::max(max_w, 1.0 / s);
    const double h = 1e-6 * std::max(unit_, x.cwiseAbs().minCoeff());
    const double m = 3.0 * data_.size();
    return std::sqrt(m) * 8 * std::numeric_limits<double>::epsilon() / h * max_w;
  }

 private:
  const ObservationSet& data_;
  double kappa_;
  StateVector psi0_;
  std::vector<int> plan_;
  double unit_;
};

double condition_of(const MatrixXd& j, double floor) {
  const Eigen::JacobiSVD<MatrixXd> svd(j);
  const auto& s = svd.singularValues();
  if (s.size() == 0 || s(0) == 0) return std::numeric_limits<double>::infinity();
  const double smin = s(s.size() - 1);
  if (smin <= floor) return std::numeric_limits<double>::infinity();
  return s(0) / smin;
}

}  // namespace

void ObservationSet::validate() const {
  if (observed.size() != times.size() || sigma.size() != times.size())
    throw ValidationError("observation columns have different lengths");
  double prev = -std::numeric_limits<double>::infinity();
  double z2 = 0;
  for (std::size_t k = 0; k < times.size(); ++k) {
    if (!std::isfinite(times[k]) || times[k] < 0 || times[k] <= prev)
      throw ValidationError("observation times must be finite, non-negative and strictly increasing");
    prev = times[k];
    if (!(sigma[k] > 0) || !std::isfinite(sigma[k])) throw ValidationError("observation sigma must be positive");
    double sum = 0;
    for (double v : observed[k]) {
      if (!(v >= 0 && v <= 1)) throw ValidationError("observed populations must lie in [0, 1]");
      sum += v;
    }
    z2 += (sum - 1) * (sum - 1) / (sigma[k] * sigma[k]);
  }
  // Independent noise of scale sigma on each channel gives the triple sum a
  // spread of sqrt(3) sigma; the bound is three times that, over the whole set.
  if (!times.empty() && std::sqrt(z2 / times.size()) > 3 * std::sqrt(3.0) + 1e-9)
    throw ValidationError("observed populations do not sum to 1 within the stated sigma");
}

double default_max_dt(const Params& p) { return 0.002 / p.rate_scale(); }

std::vector<std::array<double, 3>> model_populations(const Params& p, const StateVector& psi0,
                                                     const std::vector<double>& times,
                                                     const std::vector<int>& substeps) {
  const PopulationSeries s = populations_at(p, psi0, times, substeps);
  std::vector<std::array<double, 3>> out(s.size());
  for (std::size_t k = 0; k < s.size(); ++k) out[k] = {s.p_g1[k] + s.p_g0[k], s.p_e[k], s.p_f[k]};
  return out;
}

ObservationSet simulate_observations(const FitVector& truth, double kappa, const StateVector& psi0,
                                     const std::vector<double>& times, double noise_sd, std::uint64_t seed) {
  if (!std::isfinite(noise_sd) || noise_sd < 0) throw InvalidParameter("noise_sd must be non-negative");
  const Params p = with_kappa(truth, kappa);
  p.validate();
  ObservationSet obs;
  obs.times = times;
  obs.observed = model_populations(p, psi0, times, substep_plan(times, default_max_dt(p)));
  obs.sigma.assign(times.size(), noise_sd > 0 ? noise_sd : 1.0);
  if (noise_sd > 0) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, noise_sd);
    for (auto& row : obs.observed)
      for (double& v : row) v = std::clamp(v + noise(rng), 0.0, 1.0);
  }
  return obs;
}

std::vector<Eigen::Vector3d> population_symmetries(const StateVector& psi0) {
  std::vector<Eigen::Vector3d> out;
  const StateVector unit = psi0.normalized();
  for (int c : {1, -1})
    for (int so : {1, -1})
      for (int sg : {1, -1}) {
        // D H(d, o, g) D = H(d, so o, sg g) with D = diag(so, 1, sg); complex
        // conjugation maps H(d, o, g) to -H(-d, -o, -g)^*.
        StateVector moved = unit;
        moved(0) *= so;
        moved(2) *= sg;
        if (c < 0) moved = moved.conjugate();
        if (std::abs(std::abs(unit.dot(moved)) - 1) < 1e-12) out.emplace_back(c, c * so, c * sg);
      }
  return out;
}

FitResult fit_parameters(const ObservationSet& data, double kappa, const StateVector& psi0,
                         const FitVector& initial_guess, const FitOptions& opt) {
  data.validate();
  if (data.size() < 10) throw ValidationError("fitting needs at least 10 time points");
  if (!initial_guess.allFinite()) throw InvalidParameter("initial guess must be finite");
  if (!std::isfinite(kappa) || kappa < 0) throw InvalidParameter("kappa must be finite and non-negative");
  if (std::abs(psi0.squaredNorm() - 1) > 1e-9) throw InvalidParameter("initial state must have unit norm");

  // The step plan is frozen so the model is a smooth function of x.
  const auto plan = substep_plan(data.times, default_max_dt(with_kappa(initial_guess, kappa)));
  const Model model(data, kappa, psi0, plan, with_kappa(initial_guess, kappa).rate_scale());

  FitResult res;
  res.kappa_fixed = kappa;
  FitVector x = initial_guess;
  VectorXd r = model.residuals(x);
  double cost = r.squaredNorm();
  res.initial_rms = model.rms(x);

  double mu = -1;
  for (res.iterations = 0; res.iterations < opt.max_iterations && !res.converged;) {
    if (cost == 0) {
      res.converged = true;
      break;
    }
    ++res.iterations;
    const MatrixXd j = model.jacobian(x, r);
    const Eigen::Matrix3d a = j.transpose() * j;
    const Eigen::Vector3d g = j.transpose() * r;
    if (mu < 0) mu = 1e-3 * std::max(a.diagonal().maxCoeff(), 1e-300);

    bool accepted = false;
    while (!accepted) {
      const Eigen::Vector3d step = -(a + mu * Eigen::Matrix3d::Identity()).ldlt().solve(g);
      const FitVector trial = x + step;
      const VectorXd rt = model.residuals(trial);
      const double ct = rt.squaredNorm();
      if (step.allFinite() && std::isfinite(ct) && ct < cost) {
        accepted = true;
        const double decrease = (cost - ct) / cost;
        x = trial;
        r = rt;
        cost = ct;
        mu /= 10;
        if (step.norm() < opt.step_tolerance * std::max(x.norm(), 1e-300) || decrease < opt.decrease_tolerance)
          res.converged = true;
      } else {
        mu *= 10;
        // No descent direction left at any damping: the point is a minimum
        // to working precision.
        if (mu > 1e20 * std::max(a.diagonal().maxCoeff(), 1e-300)) {
          res.converged = true;
          break;
        }
      }
    }
  }

  const MatrixXd j = model.jacobian(x, r);
  res.jacobian_condition = condition_of(j, model.noise_floor(x));
  res.ill_posed = !(res.jacobian_condition <= opt.ill_posed_condition);

  if (opt.canonical_signs) {
    const auto syms = population_symmetries(psi0);
    int best_score = -1;
    Eigen::Vector3d best = syms.front();
    for (const auto& s : syms) {
      const FitVector y = s.cwiseProduct(x);
      const int score = (y(1) >= 0) + (y(2) >= 0);
      if (score > best_score) {
        best_score = score;
        best = s;
      }
    }
    res.sign_canonicalised = best != syms.front();
    x = best.cwiseProduct(x);
  }
  res.params = x;
  res.residual_rms = model.rms(x);
  return res;
}

}  // namespace ep3
