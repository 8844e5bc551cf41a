#pragma once

#include <Eigen/Core>

#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "ep3/spectral.hpp"

namespace ep3 {

/// Point of the (delta_ef, omega, g) control space; kappa is fixed per loop.
using ControlPoint = Eigen::Vector3d;

inline ControlPoint control_point(double delta_ef, double omega, double g) {
  return ControlPoint(delta_ef, omega, g);
}

/// Closed parametric path s in [0, 1] -> SystemParams, built from line
/// segments, planar circular arcs and nested loops. Each segment owns a share
/// of [0, 1] proportional to its weight.
class ControlLoop {
 public:
  struct Line {
    ControlPoint from, to;
  };
  /// center + radius (cos(a) u + sin(a) v) for a from start_angle to
  /// start_angle + sweep. u and v are orthonormal.
  struct Arc {
    ControlPoint center, u, v;
    double radius{0}, start_angle{0}, sweep{0};
  };
  struct Nested {
    std::shared_ptr<const ControlLoop> loop;
  };
  using Piece = std::variant<Line, Arc, Nested>;

  struct Segment {
    Piece piece;
    double weight{1};
  };

  class Builder;

  ControlLoop() = default;

  double kappa() const { return kappa_; }
  const ControlPoint& base_point() const { return base_; }
  const std::vector<Segment>& segments() const { return segments_; }
  const std::string& name() const { return name_; }
  void set_name(std::string n) { name_ = std::move(n); }

  ControlPoint point_at(double s) const;
  Params at(double s) const;

  /// Loops traversed one after another, first-listed first. All must share
  /// base point and kappa.
  static ControlLoop concatenate(const std::vector<ControlLoop>& loops, std::string name = {});

  /// A loop that stays at `base` for the whole of s in [0, 1].
  static ControlLoop constant(const ControlPoint& base, double kappa);

 private:
  double kappa_{0};
  ControlPoint base_{ControlPoint::Zero()};
  std::vector<Segment> segments_;
  std::vector<double> cumulative_;  // right edge of each segment in [0, 1]
  std::string name_;

  void finalize();
};

/// Incremental construction with continuity checks. Each added piece must
/// start where the previous one ended; close() requires the path to end at
/// the base point.
class ControlLoop::Builder {
 public:
  Builder(const ControlPoint& base, double kappa);

  Builder& line_to(const ControlPoint& to, double weight = 1);
  Builder& arc(const ControlPoint& center, const ControlPoint& u, const ControlPoint& v, double radius,
               double start_angle, double sweep, double weight = 1);
  Builder& loop(const ControlLoop& nested, double weight = 1);

  const ControlPoint& current() const { return cursor_; }

  ControlLoop close(std::string name = {});

 private:
  ControlLoop loop_;
  ControlPoint cursor_;
  double tolerance() const;
};

}  // namespace ep3
