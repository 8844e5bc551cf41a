#pragma once

// Spectral core of the three-level non-Hermitian Hamiltonian
//
//        | -delta_ef   omega      0       |
//   H =  |  omega      0          g       |     basis (|e,0>, |f,0>, |g,1>)
//        |  0          g     -i kappa/2   |
//
// Everything here is templated on the real scalar type and header-only.
// All quantities share one rate unit; time is measured in its inverse.

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <string>

#include "ep3/errors.hpp"

namespace ep3 {

template <typename Scalar>
using Complex = std::complex<Scalar>;
template <typename Scalar>
using Matrix3c = Eigen::Matrix<std::complex<Scalar>, 3, 3>;
template <typename Scalar>
using Vector3c = Eigen::Matrix<std::complex<Scalar>, 3, 1>;

using Matrix3cd = Matrix3c<double>;
using Vector3cd = Vector3c<double>;

template <typename Scalar>
struct SystemParams {
  Scalar delta_ef{0};
  Scalar omega{0};
  Scalar g{0};
  Scalar kappa{0};

  bool finite() const {
    using std::isfinite;
    return isfinite(delta_ef) && isfinite(omega) && isfinite(g) && isfinite(kappa);
  }

  void validate() const {
    if (!finite()) throw InvalidParameter("system parameters must be finite");
    if (kappa < Scalar(0)) throw InvalidParameter("kappa must be non-negative");
  }

  // Largest rate in the problem; the unit that tolerances are measured in.
  Scalar rate_scale() const {
    using std::abs;
    const Scalar s = std::max({abs(delta_ef), abs(omega), abs(g), kappa / Scalar(2)});
    return s > Scalar(0) ? s : Scalar(1);
  }

  SystemParams scaled(Scalar c) const { return {c * delta_ef, c * omega, c * g, c * kappa}; }

  friend bool operator==(const SystemParams&, const SystemParams&) = default;
};

using Params = SystemParams<double>;

template <typename Scalar>
Matrix3c<Scalar> build_hamiltonian(const SystemParams<Scalar>& p) {
  p.validate();
  using C = Complex<Scalar>;
  Matrix3c<Scalar> h;
  h << C(-p.delta_ef), C(p.omega), C(0),
       C(p.omega), C(0), C(p.g),
       C(0), C(p.g), C(0, -p.kappa / Scalar(2));
  return h;
}

/// Monic cubic lambda^3 + b lambda^2 + c1 lambda + c0 together with its
/// depressed form t^3 + p t + q (lambda = t - b/3) and the Cardano
/// discriminant delta = (q/2)^2 + (p/3)^3.
///
/// Naming follows the usual convention: p is the linear coefficient and q the
/// constant term of the depressed cubic. Some texts call the constant term
/// "p" in the root formula; that quantity is this struct's q.
template <typename Scalar>
struct CubicCoefficients {
  Complex<Scalar> b, c1, c0;
  Complex<Scalar> p, q, delta;

  static CubicCoefficients from_monic(Complex<Scalar> b, Complex<Scalar> c1, Complex<Scalar> c0) {
    CubicCoefficients c{b, c1, c0, {}, {}, {}};
    const Complex<Scalar> three(3);
    c.p = c1 - b * b / three;
    c.q = Scalar(2) * b * b * b / Scalar(27) - b * c1 / three + c0;
    c.delta = (c.q / Scalar(2)) * (c.q / Scalar(2)) + (c.p / three) * (c.p / three) * (c.p / three);
    return c;
  }

  Complex<Scalar> operator()(Complex<Scalar> x) const { return ((x + b) * x + c1) * x + c0; }
  Complex<Scalar> derivative(Complex<Scalar> x) const {
    return (Scalar(3) * x + Scalar(2) * b) * x + c1;
  }

  // Root-residual scale max(1, |b|^3 + |c1||b| + |c0|).
  Scalar residual_scale() const {
    using std::abs;
    const Scalar ab = abs(b);
    return std::max(Scalar(1), ab * ab * ab + abs(c1) * ab + abs(c0));
  }

  // Rate-like magnitude of the roots.
  Scalar root_scale() const {
    using std::abs;
    using std::cbrt;
    using std::sqrt;
    return std::max({abs(b), sqrt(abs(c1)), cbrt(abs(c0))});
  }
};

template <typename Scalar>
CubicCoefficients<Scalar> characteristic_coefficients(const SystemParams<Scalar>& p) {
  p.validate();
  using C = Complex<Scalar>;
  const Scalar d = p.delta_ef, k = p.kappa;
  const Scalar gg = p.g * p.g, ww = p.omega * p.omega;
  const C b(d, k / Scalar(2));
  const C c1 = -C(gg + ww, -k * d / Scalar(2));
  const C c0 = -C(gg * d, k * ww / Scalar(2));
  return CubicCoefficients<Scalar>::from_monic(b, c1, c0);
}

// Characteristic coefficients of an arbitrary 3x3 complex matrix.
template <typename Scalar>
CubicCoefficients<Scalar> characteristic_coefficients(const Matrix3c<Scalar>& m) {
  const Complex<Scalar> tr = m.trace();
  const Complex<Scalar> minors = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0) + m(0, 0) * m(2, 2) -
                                 m(0, 2) * m(2, 0) + m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1);
  return CubicCoefficients<Scalar>::from_monic(-tr, minors, -m.determinant());
}

namespace detail {

template <typename Scalar>
Complex<Scalar> principal_cbrt(Complex<Scalar> z) {
  using std::abs;
  if (abs(z) == Scalar(0)) return {};
  return std::polar(std::cbrt(abs(z)), std::arg(z) / Scalar(3));
}

// Stable 3-element sort: ascending real part, real parts within `tol` are
// ties broken by ascending imaginary part.
template <typename Scalar>
std::array<int, 3> canonical_order(const std::array<Complex<Scalar>, 3>& z, Scalar tol) {
  std::array<int, 3> idx{0, 1, 2};
  std::stable_sort(idx.begin(), idx.end(),
                   [&](int a, int b) { return z[a].real() < z[b].real(); });
  for (int pass = 0; pass < 2; ++pass) {
    for (int i = 0; i < 2; ++i) {
      const auto& lo = z[idx[i]];
      const auto& hi = z[idx[i + 1]];
      if (std::abs(lo.real() - hi.real()) <= tol && hi.imag() < lo.imag()) std::swap(idx[i], idx[i + 1]);
    }
  }
  return idx;
}

}  // namespace detail

template <typename Scalar>
struct Spectrum {
  /// Eigenvalues in canonical order (ascending Re, ties by ascending Im).
  std::array<Complex<Scalar>, 3> lambdas;
  /// labeling[k] is the index (0..2) of the raw Cardano branch placed at position k.
  std::array<int, 3> labeling{0, 1, 2};
  CubicCoefficients<Scalar> coefficients;

  const Complex<Scalar>& operator[](int k) const { return lambdas[k]; }

  Scalar min_gap() const {
    using std::abs;
    return std::min({abs(lambdas[0] - lambdas[1]), abs(lambdas[0] - lambdas[2]),
                     abs(lambdas[1] - lambdas[2])});
  }
};

/// The three Cardano roots in raw branch order k = 0, 1, 2 (cube-root branch
/// u * omega^k paired with v * omega^-k, u v = -p/3).
template <typename Scalar>
std::array<Complex<Scalar>, 3> cardano_roots(const CubicCoefficients<Scalar>& c) {
  using C = Complex<Scalar>;
  using std::abs;
  const Scalar s = c.root_scale();
  const C shift = -c.b / Scalar(3);
  if (s == Scalar(0)) return {C{}, C{}, C{}};

  const Scalar tiny = Scalar(1e-14);
  if (abs(c.p) < tiny * s * s && abs(c.q) < tiny * s * s * s) return {shift, shift, shift};

  const C sq = std::sqrt(c.delta);
  const C w1 = -c.q / Scalar(2) + sq;
  const C w2 = -c.q / Scalar(2) - sq;
  const C w = abs(w1) >= abs(w2) ? w1 : w2;
  const C u = detail::principal_cbrt(w);
  const C v = abs(u) > Scalar(0) ? -c.p / (Scalar(3) * u) : C{};

  const Scalar pi = std::numbers::pi_v<Scalar>;
  std::array<C, 3> roots;
  for (int k = 0; k < 3; ++k) {
    const C rot = std::polar(Scalar(1), Scalar(2) * pi * Scalar(k) / Scalar(3));
    roots[k] = u * rot + v * std::conj(rot) + shift;
  }

  // One guarded Newton step on well-separated roots.
  for (int k = 0; k < 3; ++k) {
    const Scalar gap = std::min(abs(roots[k] - roots[(k + 1) % 3]), abs(roots[k] - roots[(k + 2) % 3]));
    if (gap < Scalar(1e-4) * s) continue;
    const C f = c(roots[k]);
    const C df = c.derivative(roots[k]);
    if (abs(df) == Scalar(0)) continue;
    const C refined = roots[k] - f / df;
    if (abs(c(refined)) < abs(f)) roots[k] = refined;
  }
  return roots;
}

template <typename Scalar>
Spectrum<Scalar> spectrum_from_roots(const std::array<Complex<Scalar>, 3>& raw,
                                     const CubicCoefficients<Scalar>& coeffs) {
  Spectrum<Scalar> out;
  out.coefficients = coeffs;
  const Scalar tol = Scalar(1e-9) * std::max(coeffs.root_scale(), std::numeric_limits<Scalar>::min());
  out.labeling = detail::canonical_order(raw, tol);
  for (int k = 0; k < 3; ++k) out.lambdas[k] = raw[out.labeling[k]];
  return out;
}

template <typename Scalar>
Spectrum<Scalar> eigenvalues_cardano(const SystemParams<Scalar>& p) {
  const auto coeffs = characteristic_coefficients(p);
  return spectrum_from_roots(cardano_roots(coeffs), coeffs);
}

/// Right/left eigenvectors of H extracted from the null space of H - lambda I.
///
/// Right vectors have unit norm with their largest-magnitude component real
/// and positive. Left vectors satisfy l^H H = lambda l^H and are rescaled so
/// <l_i|r_i> = 1. At an exceptional point the coalesced labels share the
/// available eigenvector(s), `coalesced` marks them and `condition` is +inf.
template <typename Scalar>
struct EigenSystem {
  Spectrum<Scalar> spectrum;
  std::array<Vector3c<Scalar>, 3> right;
  std::array<Vector3c<Scalar>, 3> left;
  Scalar condition{1};
  std::array<bool, 3> coalesced{false, false, false};
  int independent_count{3};

  bool defective() const { return !std::isfinite(condition); }
};

namespace detail {

template <typename Scalar>
void fix_phase(Vector3c<Scalar>& v) {
  v.normalize();
  Eigen::Index imax = 0;
  v.cwiseAbs().maxCoeff(&imax);
  const Complex<Scalar> a = v(imax);
  if (std::abs(a) > Scalar(0)) v *= std::abs(a) / a;
}

}  // namespace detail

template <typename Scalar>
EigenSystem<Scalar> eigensystem(const SystemParams<Scalar>& p) {
  using C = Complex<Scalar>;
  const Matrix3c<Scalar> h = build_hamiltonian(p);
  EigenSystem<Scalar> es;
  es.spectrum = eigenvalues_cardano(p);
  const auto& lam = es.spectrum.lambdas;

  const Scalar hnorm = std::max(h.norm(), std::numeric_limits<Scalar>::min());
  const Scalar rank_tol = Scalar(1e-8) * hnorm;
  const Scalar cluster_tol = Scalar(1e-6) * hnorm;

  // Group labels whose eigenvalues coincide within cluster_tol.
  std::array<int, 3> cluster{0, 1, 2};
  for (int i = 0; i < 3; ++i)
    for (int j = i + 1; j < 3; ++j)
      if (std::abs(lam[i] - lam[j]) <= cluster_tol) {
        const int from = cluster[j], to = cluster[i];
        for (auto& c : cluster)
          if (c == from) c = to;
      }

  es.independent_count = 0;
  bool any_defective = false;
  for (int root = 0; root < 3; ++root) {
    std::array<int, 3> members{};
    int k = 0;
    for (int i = 0; i < 3; ++i)
      if (cluster[i] == root) members[k++] = i;
    if (k == 0) continue;

    C mean{};
    for (int m = 0; m < k; ++m) mean += lam[members[m]];
    mean /= Scalar(k);
    const Matrix3c<Scalar> shifted = h - mean * Matrix3c<Scalar>::Identity();
    Eigen::JacobiSVD<Matrix3c<Scalar>> svd(shifted, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    int null_dim = 0;
    for (int i = 2; i >= 0 && sv(i) <= rank_tol; --i) ++null_dim;
    null_dim = std::max(null_dim, 1);

    if (null_dim >= k) {
      Eigen::Matrix<C, 3, Eigen::Dynamic> r(3, k), l(3, k);
      for (int m = 0; m < k; ++m) {
        Vector3c<Scalar> v = svd.matrixV().col(2 - m);
        detail::fix_phase(v);
        r.col(m) = v;
        l.col(m) = svd.matrixU().col(2 - m);
      }
      // Biorthogonalise within the cluster: (l')^H r = I.
      const Eigen::Matrix<C, Eigen::Dynamic, Eigen::Dynamic> gram = l.adjoint() * r;
      const Eigen::Matrix<C, 3, Eigen::Dynamic> lb = l * gram.inverse().adjoint();
      for (int m = 0; m < k; ++m) {
        es.right[members[m]] = r.col(m);
        es.left[members[m]] = lb.col(m);
      }
      es.independent_count += k;
    } else {
      any_defective = true;
      for (int m = 0; m < k; ++m) {
        const int avail = std::min(m, null_dim - 1);
        Vector3c<Scalar> v = svd.matrixV().col(2 - avail);
        detail::fix_phase(v);
        es.right[members[m]] = v;
        es.left[members[m]] = svd.matrixU().col(2 - avail);
        es.coalesced[members[m]] = true;
      }
      es.independent_count += null_dim;
    }
  }

  if (any_defective) {
    es.condition = std::numeric_limits<Scalar>::infinity();
  } else {
    Scalar cond = 1;
    for (int i = 0; i < 3; ++i) {
      const Scalar overlap = std::abs(es.left[i].dot(es.right[i]));
      cond = std::max(cond, es.left[i].norm() * es.right[i].norm() / overlap);
    }
    es.condition = cond;
  }
  return es;
}

/// Max distance between two eigenvalue triples under the best of the six
/// label matchings.
template <typename Scalar>
Scalar matched_distance(const std::array<Complex<Scalar>, 3>& a, const std::array<Complex<Scalar>, 3>& b) {
  std::array<int, 3> perm{0, 1, 2};
  Scalar best = std::numeric_limits<Scalar>::infinity();
  do {
    Scalar worst = 0;
    for (int i = 0; i < 3; ++i) worst = std::max(worst, std::abs(a[i] - b[perm[i]]));
    best = std::min(best, worst);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

template <typename Scalar>
std::array<Complex<Scalar>, 3> numerical_eigenvalues(const Matrix3c<Scalar>& m) {
  Eigen::ComplexEigenSolver<Matrix3c<Scalar>> solver(m, false);
  const auto& ev = solver.eigenvalues();
  return {ev(0), ev(1), ev(2)};
}

/// H with complex couplings omega e^{i phi} and g e^{i theta}, written as the
/// diagonal similarity transform of H (upper entries carry e^{+i.}, lower e^{-i.}).
template <typename Scalar>
Matrix3c<Scalar> gauge_hamiltonian(const SystemParams<Scalar>& p, Scalar phi, Scalar theta) {
  Matrix3c<Scalar> h = build_hamiltonian(p);
  h(0, 1) *= std::polar(Scalar(1), phi);
  h(1, 0) *= std::polar(Scalar(1), -phi);
  h(1, 2) *= std::polar(Scalar(1), theta);
  h(2, 1) *= std::polar(Scalar(1), -theta);
  return h;
}

template <typename Scalar>
struct GaugeReport {
  Scalar max_distance;
  std::array<Complex<Scalar>, 3> gauged;
  std::array<Complex<Scalar>, 3> reference;
};

template <typename Scalar>
GaugeReport<Scalar> gauge_transform(const SystemParams<Scalar>& p, Scalar phi, Scalar theta) {
  GaugeReport<Scalar> r;
  r.reference = eigenvalues_cardano(p).lambdas;
  if (phi == Scalar(0) && theta == Scalar(0)) {
    r.gauged = r.reference;
    r.max_distance = 0;
    return r;
  }
  r.gauged = numerical_eigenvalues(gauge_hamiltonian(p, phi, theta));
  r.max_distance = matched_distance(r.gauged, r.reference);
  return r;
}

template <typename Scalar>
struct SymmetryResiduals {
  Scalar pseudo_chirality;  // ||U H U^-1 + H^dagger||_F
  Scalar anti_pt;           // ||U H U^-1 + H^*||_F
};

template <typename Scalar>
SymmetryResiduals<Scalar> symmetry_residuals(const SystemParams<Scalar>& p) {
  const Matrix3c<Scalar> h = build_hamiltonian(p);
  const Eigen::DiagonalMatrix<Complex<Scalar>, 3> u(Complex<Scalar>(1), Complex<Scalar>(-1), Complex<Scalar>(1));
  const Matrix3c<Scalar> conj = u * h * u;  // U^-1 = U
  return {(conj + h.adjoint()).norm(), (conj + h.conjugate()).norm()};
}

}  // namespace ep3
