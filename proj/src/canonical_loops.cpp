#include "ep3/strands.hpp"

#include <cmath>

#include "ep3/atlas.hpp"
#include "ep3/errors.hpp"

namespace ep3 {

namespace {

enum class Branch { Lower, Upper };

double branch_g(double omega, double kappa, Branch b) {
  const auto row = ep2_row(omega, kappa);
  if (!row) throw NumericError("EP2 branch lookup failed");
  return b == Branch::Lower ? row->first : row->second;
}

// Base -> bottom of a circle linking one EP2 branch -> full turn -> base.
// The circle lies in the plane spanned by the in-plane branch normal and the
// delta_ef axis, centred on the branch halfway between omega = 0 and the cusp.
ControlLoop encircle_branch(double kappa, Branch b, const std::string& name) {
  const EP3Location ep3 = ep3_location(kappa);
  const double omega = ep3.omega_star / 2;
  const auto row = ep2_row(omega, kappa);
  if (!row) throw NumericError("EP2 branch lookup failed");
  const double radius = 0.35 * (row->second - row->first);

  const double h = 1e-5 * kappa;
  const double dg = branch_g(omega + h, kappa, b) - branch_g(omega - h, kappa, b);
  Eigen::Vector2d tangent(2 * h, dg);
  tangent.normalize();

  const ControlPoint center = control_point(0, omega, b == Branch::Lower ? row->first : row->second);
  const ControlPoint normal = control_point(0, -tangent.y(), tangent.x());
  const ControlPoint delta_axis = control_point(1, 0, 0);
  const ControlPoint base = control_point(0, 0.25 * kappa, 0.05 * kappa);
  const ControlPoint bottom = center - radius * delta_axis;
  const double pi = std::numbers::pi;

  return ControlLoop::Builder(base, kappa)
      .line_to(bottom, 1)
      .arc(center, normal, delta_axis, radius, -pi / 2, 2 * pi, 2)
      .line_to(base, 1)
      .close(name);
}

}  // namespace

std::map<std::string, ControlLoop> canonical_loops(double kappa) {
  if (!std::isfinite(kappa) || !(kappa > 0)) throw InvalidParameter("kappa must be positive and finite");
  std::map<std::string, ControlLoop> out;
  const ControlLoop red = encircle_branch(kappa, Branch::Lower, "red");
  const ControlLoop blue = encircle_branch(kappa, Branch::Upper, "blue");
  out.emplace("red", red);
  out.emplace("blue", blue);
  out.emplace("green", ControlLoop::concatenate({red, red}, "green"));
  out.emplace("brown", ControlLoop::concatenate({blue, red}, "brown"));
  out.emplace("purple", ControlLoop::concatenate({red, blue}, "purple"));
  return out;
}

ControlLoop canonical_loop(const std::string& name, double kappa) {
  auto all = canonical_loops(kappa);
  const auto it = all.find(name);
  if (it == all.end()) throw InvalidParameter("unknown loop '" + name + "'");
  return it->second;
}

}  // namespace ep3
