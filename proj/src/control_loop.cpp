#include "ep3/control_loop.hpp"

#include <algorithm>
#include <cmath>

namespace ep3 {

namespace {

ControlPoint arc_point(const ControlLoop::Arc& a, double angle) {
  return a.center + a.radius * (std::cos(angle) * a.u + std::sin(angle) * a.v);
}

ControlPoint piece_start(const ControlLoop::Piece& p) {
  return std::visit(
      [](const auto& x) -> ControlPoint {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, ControlLoop::Line>) return x.from;
        else if constexpr (std::is_same_v<T, ControlLoop::Arc>) return arc_point(x, x.start_angle);
        else return x.loop->base_point();
      },
      p);
}

ControlPoint piece_end(const ControlLoop::Piece& p) {
  return std::visit(
      [](const auto& x) -> ControlPoint {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, ControlLoop::Line>) return x.to;
        else if constexpr (std::is_same_v<T, ControlLoop::Arc>) return arc_point(x, x.start_angle + x.sweep);
        else return x.loop->base_point();
      },
      p);
}

}  // namespace

ControlPoint ControlLoop::point_at(double s) const {
  if (segments_.empty()) return base_;
  s = std::clamp(s, 0.0, 1.0);
  const auto it = std::lower_bound(cumulative_.begin(), cumulative_.end(), s);
  const std::size_t k = std::min<std::size_t>(it - cumulative_.begin(), segments_.size() - 1);
  const double left = k == 0 ? 0.0 : cumulative_[k - 1];
  const double right = cumulative_[k];
  const double t = right > left ? std::clamp((s - left) / (right - left), 0.0, 1.0) : 1.0;

  return std::visit(
      [t](const auto& x) -> ControlPoint {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, Line>) return (1.0 - t) * x.from + t * x.to;
        else if constexpr (std::is_same_v<T, Arc>) return arc_point(x, x.start_angle + t * x.sweep);
        else return x.loop->point_at(t);
      },
      segments_[k].piece);
}

Params ControlLoop::at(double s) const {
  const ControlPoint p = point_at(s);
  return Params{p(0), p(1), p(2), kappa_};
}

void ControlLoop::finalize() {
  double total = 0;
  for (const auto& seg : segments_) total += seg.weight;
  cumulative_.clear();
  double acc = 0;
  for (const auto& seg : segments_) {
    acc += seg.weight;
    cumulative_.push_back(acc / total);
  }
  if (!cumulative_.empty()) cumulative_.back() = 1.0;
}

ControlLoop ControlLoop::concatenate(const std::vector<ControlLoop>& loops, std::string name) {
  if (loops.empty()) throw InvalidParameter("cannot concatenate an empty list of loops");
  Builder b(loops.front().base_point(), loops.front().kappa());
  for (const auto& l : loops) {
    if (l.kappa() != loops.front().kappa())
      throw InvalidParameter("concatenated loops must share kappa");
    b.loop(l);
  }
  return b.close(std::move(name));
}

ControlLoop ControlLoop::constant(const ControlPoint& base, double kappa) {
  return Builder(base, kappa).line_to(base).close("constant");
}

ControlLoop::Builder::Builder(const ControlPoint& base, double kappa) : cursor_(base) {
  if (!base.allFinite() || !std::isfinite(kappa) || kappa < 0)
    throw InvalidParameter("loop base point and kappa must be finite, kappa >= 0");
  loop_.base_ = base;
  loop_.kappa_ = kappa;
}

double ControlLoop::Builder::tolerance() const {
  return 1e-12 * std::max({1.0, loop_.base_.cwiseAbs().maxCoeff(), loop_.kappa_});
}

ControlLoop::Builder& ControlLoop::Builder::line_to(const ControlPoint& to, double weight) {
  if (!to.allFinite()) throw InvalidParameter("loop vertex must be finite");
  if (!(weight > 0)) throw InvalidParameter("segment weight must be positive");
  loop_.segments_.push_back({Line{cursor_, to}, weight});
  cursor_ = to;
  return *this;
}

ControlLoop::Builder& ControlLoop::Builder::arc(const ControlPoint& center, const ControlPoint& u,
                                                const ControlPoint& v, double radius, double start_angle,
                                                double sweep, double weight) {
  if (!(weight > 0)) throw InvalidParameter("segment weight must be positive");
  if (!(radius > 0) || !std::isfinite(sweep) || !center.allFinite())
    throw InvalidParameter("arc needs a finite center, positive radius and finite sweep");
  if (std::abs(u.norm() - 1) > 1e-9 || std::abs(v.norm() - 1) > 1e-9 || std::abs(u.dot(v)) > 1e-9)
    throw InvalidParameter("arc plane vectors must be orthonormal");
  Arc a{center, u, v, radius, start_angle, sweep};
  if ((piece_start(a) - cursor_).norm() > 1e-9 * std::max(1.0, radius))
    throw InvalidParameter("arc does not start at the current loop position");
  loop_.segments_.push_back({a, weight});
  cursor_ = piece_end(a);
  return *this;
}

ControlLoop::Builder& ControlLoop::Builder::loop(const ControlLoop& nested, double weight) {
  if (!(weight > 0)) throw InvalidParameter("segment weight must be positive");
  if ((nested.base_point() - cursor_).norm() > tolerance())
    throw InvalidParameter("nested loop must start at the current loop position");
  if (nested.kappa() != loop_.kappa_) throw InvalidParameter("nested loop must share kappa");
  loop_.segments_.push_back({Nested{std::make_shared<const ControlLoop>(nested)}, weight});
  return *this;
}

ControlLoop ControlLoop::Builder::close(std::string name) {
  if (loop_.segments_.empty()) throw InvalidParameter("loop has no segments");
  if ((cursor_ - loop_.base_).norm() > tolerance())
    throw InvalidParameter("loop does not return to its base point");
  ControlLoop out = loop_;
  out.name_ = std::move(name);
  out.finalize();
  return out;
}

}  // namespace ep3
