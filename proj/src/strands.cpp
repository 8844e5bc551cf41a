#include "ep3/strands.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ep3/errors.hpp"

namespace ep3 {

namespace {

using Values = std::array<std::complex<double>, 3>;

constexpr std::array<Perm3, 6> kAllPerms{{{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}}};

Values eigenvalues_at(const ControlLoop& loop, double s) { return eigenvalues_cardano(loop.at(s)).lambdas; }

struct Match {
  Values values;
  double best, second;
};

// Assign the new raw eigenvalues to the strands by minimal total squared jump.
Match match(const Values& prev, const Values& raw) {
  double best = std::numeric_limits<double>::infinity(), second = best;
  Perm3 arg = identity_perm;
  for (const auto& p : kAllPerms) {
    double cost = 0;
    for (int i = 0; i < 3; ++i) cost += std::norm(raw[p[i]] - prev[i]);
    if (cost < best) {
      second = best;
      best = cost;
      arg = p;
    } else if (cost < second) {
      second = cost;
    }
  }
  Match m{{}, best, second};
  for (int i = 0; i < 3; ++i) m.values[i] = raw[arg[i]];
  return m;
}

double projected_key(std::complex<double> z, double angle) { return (z * std::polar(1.0, -angle)).real(); }

int order_flips(const Values& a, const Values& b, double angle) {
  int n = 0;
  for (int i = 0; i < 3; ++i)
    for (int j = i + 1; j < 3; ++j) {
      const double d0 = projected_key(a[i], angle) - projected_key(a[j], angle);
      const double d1 = projected_key(b[i], angle) - projected_key(b[j], angle);
      if ((d0 < 0) != (d1 < 0)) ++n;
    }
  return n;
}

class Sampler {
 public:
  Sampler(const ControlLoop& loop, const StrandOptions& opt, StrandSet& out) : loop_(loop), opt_(opt), out_(out) {}

  void advance(double s0, const Values& v0, double s1, int depth) {
    const Values raw = eigenvalues_at(loop_, s1);
    const Match m = match(v0, raw);
    const bool ambiguous = m.second <= opt_.ambiguity_ratio * m.best;
    const bool crowded = order_flips(v0, m.values, opt_.projection_angle) > 1;
    if (ambiguous || crowded) {
      if (depth >= opt_.max_depth) {
        if (ambiguous) throw DegenerateLoop("eigenvalue strands cannot be followed; loop passes through an EP", s0, s1);
        // Simultaneous crossings that refinement cannot separate are left
        // for the crossing finder to order or reject.
      } else {
        const double mid = 0.5 * (s0 + s1);
        advance(s0, v0, mid, depth + 1);
        const Values vm = out_.values.back();
        advance(mid, vm, s1, depth + 1);
        return;
      }
    }
    push(s1, m.values);
  }

  void push(double s, const Values& v) {
    out_.s.push_back(s);
    out_.values.push_back(v);
    for (int i = 0; i < 3; ++i)
      for (int j = i + 1; j < 3; ++j) out_.min_gap = std::min(out_.min_gap, std::abs(v[i] - v[j]));
    out_.rate_scale = std::max(out_.rate_scale, loop_.at(s).rate_scale());
  }

 private:
  const ControlLoop& loop_;
  const StrandOptions& opt_;
  StrandSet& out_;
};

}  // namespace

double StrandSet::key(std::size_t k, int strand) const { return projected_key(values[k][strand], projection_angle); }

double StrandSet::depth(std::size_t k, int strand) const {
  return (values[k][strand] * std::polar(1.0, -projection_angle)).imag();
}

StrandSet sample_strands(const ControlLoop& loop, int n_initial, const StrandOptions& opt) {
  if (n_initial < 2) throw InvalidParameter("strand sampling needs at least 2 initial samples");
  if (opt.max_depth < 0 || !(opt.ambiguity_ratio >= 1)) throw InvalidParameter("bad strand sampling options");

  StrandSet out;
  out.projection_angle = opt.projection_angle;
  out.min_gap = std::numeric_limits<double>::infinity();
  out.rate_scale = 0;

  Values start = eigenvalues_at(loop, 0.0);
  std::sort(start.begin(), start.end(), [&](auto a, auto b) {
    return projected_key(a, opt.projection_angle) < projected_key(b, opt.projection_angle);
  });

  Sampler sampler(loop, opt, out);
  sampler.push(0.0, start);
  for (int k = 1; k <= n_initial; ++k) {
    const double s0 = static_cast<double>(k - 1) / n_initial;
    const double s1 = k == n_initial ? 1.0 : static_cast<double>(k) / n_initial;
    const Values v0 = out.values.back();
    sampler.advance(s0, v0, s1, 0);
  }

  // Closure: strand i ends where strand closure[i] started.
  const Values& end = out.values.back();
  const double tol = 1e-9 * std::max(out.rate_scale, 1e-300);
  for (int i = 0; i < 3; ++i) {
    int hit = -1;
    double best = std::numeric_limits<double>::infinity();
    for (int j = 0; j < 3; ++j) {
      const double d = std::abs(end[i] - start[j]);
      if (d < best) {
        best = d;
        hit = j;
      }
    }
    if (best > tol) throw NumericError("strands do not close; loop is not closed in parameter space");
    out.closure[i] = hit;
  }
  std::array<bool, 3> used{};
  for (int c : out.closure) {
    if (used[c]) throw DegenerateLoop("strand closure is ambiguous; base point is degenerate", 0.0, 1.0);
    used[c] = true;
  }
  return out;
}

std::vector<Crossing> find_crossings(const StrandSet& strands) {
  std::vector<Crossing> out;
  if (strands.size() < 2) return out;
  std::array<int, 3> order{0, 1, 2};  // order[pos] = strand
  std::sort(order.begin(), order.end(), [&](int a, int b) { return strands.key(0, a) < strands.key(0, b); });

  struct Event {
    double f;
    int lower, upper;
  };
  for (std::size_t k = 1; k < strands.size(); ++k) {
    std::vector<Event> events;
    for (int pa = 0; pa < 3; ++pa)
      for (int pb = pa + 1; pb < 3; ++pb) {
        const int a = order[pa], b = order[pb];
        const double d0 = strands.key(k - 1, a) - strands.key(k - 1, b);
        const double d1 = strands.key(k, a) - strands.key(k, b);
        if (d1 > 0) {
          const double f = d1 - d0 != 0 ? std::clamp(-d0 / (d1 - d0), 0.0, 1.0) : 0.5;
          events.push_back({f, a, b});
        }
      }
    std::sort(events.begin(), events.end(), [](const Event& x, const Event& y) { return x.f < y.f; });
    for (const auto& ev : events) {
      const auto pos = [&](int strand) { return static_cast<int>(std::find(order.begin(), order.end(), strand) - order.begin()); };
      const int pl = pos(ev.lower), pu = pos(ev.upper);
      const double s = strands.s[k - 1] + ev.f * (strands.s[k] - strands.s[k - 1]);
      if (pu - pl != 1) throw AmbiguousCrossing("non-adjacent strands swap near s = " + std::to_string(s));
      const double dl = (1 - ev.f) * strands.depth(k - 1, ev.lower) + ev.f * strands.depth(k, ev.lower);
      const double du = (1 - ev.f) * strands.depth(k - 1, ev.upper) + ev.f * strands.depth(k, ev.upper);
      const int generator = pl + 1;
      out.push_back({s, dl < du ? generator : -generator});
      std::swap(order[pl], order[pu]);
    }
  }
  return out;
}

BraidWord extract_braid_word(const StrandSet& strands) {
  std::vector<int> letters;
  for (const auto& c : find_crossings(strands)) letters.push_back(c.letter);
  return free_reduce(BraidWord(std::move(letters)));
}

}  // namespace ep3
