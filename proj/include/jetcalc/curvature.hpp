#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <map>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "jetcalc/errors.hpp"

namespace jetcalc {

using Complex = std::complex<double>;

/// One input coefficient c_{ij lambda mu}, indices 1-based as in files.
struct CurvatureEntry {
  int i = 1;
  int j = 1;
  int lambda = 1;
  int mu = 1;
  Complex value;
};

/// Second-order coefficients of a Hermitian metric on V in a frame
/// orthonormal at the center: <e_l, e_m> = delta_lm + sum c_{ij l m} z_i conj(z_j) + ...
/// Always Hermitian: c_{ij l m} = conj(c_{ji m l}). Accessors are 0-based.
class CurvatureTensor {
 public:
  int n() const { return n_; }
  int r() const { return r_; }

  const Complex& operator()(int i, int j, int l, int m) const { return c_[index(i, j, l, m)]; }

  /// r x r block C_{ij}(l, m).
  Eigen::MatrixXcd block(int i, int j) const {
    Eigen::MatrixXcd b(r_, r_);
    for (int l = 0; l < r_; ++l)
      for (int m = 0; m < r_; ++m) b(l, m) = (*this)(i, j, l, m);
    return b;
  }

  /// c_{ij l m} = delta_ij delta_lm.
  static CurvatureTensor identity(int n, int r) {
    CurvatureTensor t(n, r);
    for (int i = 0; i < n; ++i)
      for (int l = 0; l < r; ++l) t.c_[t.index(i, i, l, l)] = 1.0;
    return t;
  }

  static CurvatureTensor zero(int n, int r) { return CurvatureTensor(n, r); }

  CurvatureTensor scaled(double s) const {
    CurvatureTensor t = *this;
    for (auto& x : t.c_) x *= s;
    return t;
  }

  /// Coefficients in the rotated frame for which the contraction with U eta
  /// equals the original contraction with eta: C'_{ij} = conj(U) C_{ij} U^T.
  CurvatureTensor change_frame(const Eigen::MatrixXcd& u) const {
    if (u.rows() != r_ || u.cols() != r_) throw InputError("frame change must be r x r");
    CurvatureTensor t(n_, r_);
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < n_; ++j) {
        const Eigen::MatrixXcd b = u.conjugate() * block(i, j) * u.transpose();
        for (int l = 0; l < r_; ++l)
          for (int m = 0; m < r_; ++m) t.c_[t.index(i, j, l, m)] = b(l, m);
      }
    return t;
  }

  const std::vector<Complex>& data() const { return c_; }

  friend CurvatureTensor validate_tensor(int n, int r, std::vector<Complex> dense);

 private:
  CurvatureTensor(int n, int r) : n_(n), r_(r), c_(static_cast<std::size_t>(n * n * r * r)) {}

  std::size_t index(int i, int j, int l, int m) const {
    return static_cast<std::size_t>(((i * n_ + j) * r_ + l) * r_ + m);
  }

  int n_ = 0;
  int r_ = 0;
  std::vector<Complex> c_;
};

inline constexpr double kHermitianRejectTolerance = 1e-9;

/// Dense layout ((i*n + j)*r + l)*r + m, 0-based. Rejects asymmetry above
/// 1e-9 and replaces c by its Hermitian average.
inline CurvatureTensor validate_tensor(int n, int r, std::vector<Complex> dense) {
  if (n < 1 || r < 1) throw InputError("curvature tensor needs n >= 1 and r >= 1");
  if (dense.size() != static_cast<std::size_t>(n * n * r * r))
    throw InputError("curvature tensor has " + std::to_string(dense.size()) + " entries, expected " +
                     std::to_string(n * n * r * r));
  CurvatureTensor t(n, r);
  double worst = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int l = 0; l < r; ++l)
        for (int m = 0; m < r; ++m) {
          const Complex a = dense[t.index(i, j, l, m)];
          const Complex b = std::conj(dense[t.index(j, i, m, l)]);
          if (!std::isfinite(a.real()) || !std::isfinite(a.imag()))
            throw InputError("curvature tensor has a non-finite entry");
          worst = std::max(worst, std::abs(a - b));
          t.c_[t.index(i, j, l, m)] = 0.5 * (a + b);
        }
  if (worst > kHermitianRejectTolerance)
    throw InputError("curvature tensor violates Hermitian symmetry c_ijlm = conj(c_jiml) by " +
                     std::to_string(worst));
  return t;
}

/// Sparse 1-based entries; omitted entries are zero, duplicates rejected.
inline CurvatureTensor validate_tensor(int n, int r, std::span<const CurvatureEntry> entries) {
  if (n < 1 || r < 1) throw InputError("curvature tensor needs n >= 1 and r >= 1");
  std::vector<Complex> dense(static_cast<std::size_t>(n * n * r * r));
  std::vector<bool> seen(dense.size(), false);
  for (const auto& e : entries) {
    if (e.i < 1 || e.i > n || e.j < 1 || e.j > n || e.lambda < 1 || e.lambda > r || e.mu < 1 || e.mu > r)
      throw InputError("curvature entry index out of range: [" + std::to_string(e.i) + "," + std::to_string(e.j) +
                       "," + std::to_string(e.lambda) + "," + std::to_string(e.mu) + "]");
    const auto idx = static_cast<std::size_t>((((e.i - 1) * n + (e.j - 1)) * r + (e.lambda - 1)) * r + (e.mu - 1));
    if (seen[idx]) throw InputError("duplicate curvature entry");
    seen[idx] = true;
    dense[idx] = e.value;
  }
  return validate_tensor(n, r, std::move(dense));
}

/// Exponent p and level weights eps_1 > eps_2 > ... > 0 of the k-jet metrics.
struct MetricParams {
  int p = 2;
  std::vector<double> eps;

  /// p = 2 lcm(1..k), eps_s = 0.2^s.
  static MetricParams defaults(int k) {
    MetricParams m;
    m.p = 2 * lcm_up_to(k);
    for (int s = 1; s <= k; ++s) m.eps.push_back(std::pow(0.2, s));
    return m;
  }

  static int lcm_up_to(int k) {
    long long l = 1;
    for (int s = 2; s <= k; ++s) {
      l = std::lcm(l, static_cast<long long>(s));
      if (l > (1LL << 28)) throw DomainError("lcm(1..k) too large for the metric exponent");
    }
    return static_cast<int>(l);
  }

  /// Throws InputError unless the parameters are admissible for jet order k.
  void validate(int k) const {
    if (k < 1) throw InputError("jet order k must be >= 1");
    if (p <= 0 || p % 2 != 0) throw InputError("metric exponent p must be a positive even integer");
    const int step = 2 * lcm_up_to(k);
    if (p % step != 0)
      throw InputError("metric exponent p = " + std::to_string(p) + " must be divisible by 2*lcm(1..k) = " +
                       std::to_string(step));
    if (static_cast<int>(eps.size()) < k)
      throw InputError("need " + std::to_string(k) + " level weights eps, got " + std::to_string(eps.size()));
    for (int s = 0; s < k; ++s) {
      if (!(eps[s] > 0.0) || !std::isfinite(eps[s])) throw InputError("level weights eps must be positive");
      if (s > 0 && !(eps[s] < eps[s - 1])) throw InputError("level weights eps must be strictly decreasing");
    }
  }
};

/// ||v||_h^2 = |v|^2 + sum_{ij lm} c_{ij lm} z_i conj(z_j) v_l conj(v_m).
inline double hermitian_norm2(const CurvatureTensor& c, std::span<const Complex> z, std::span<const Complex> v) {
  if (static_cast<int>(z.size()) != c.n() || static_cast<int>(v.size()) != c.r())
    throw InputError("point or jet vector has the wrong dimension");
  double flat = 0.0;
  for (const auto& x : v) flat += std::norm(x);
  Complex corr = 0.0;
  for (int i = 0; i < c.n(); ++i)
    for (int j = 0; j < c.n(); ++j) {
      const Complex zz = z[i] * std::conj(z[j]);
      if (zz == 0.0) continue;
      for (int l = 0; l < c.r(); ++l)
        for (int m = 0; m < c.r(); ++m) corr += c(i, j, l, m) * zz * v[l] * std::conj(v[m]);
    }
  return flat + corr.real();
}

namespace detail {

inline std::vector<double> level_norms(const CurvatureTensor& c, std::span<const Complex> z,
                                       std::span<const std::vector<Complex>> jets, const char* what) {
  std::vector<double> out;
  for (std::size_t s = 0; s < jets.size(); ++s) {
    const double h2 = hermitian_norm2(c, z, jets[s]);
    if (h2 < 0.0)
      throw DomainError(std::string(what) + ": squared h-norm of level " + std::to_string(s + 1) + " is " +
                        std::to_string(h2) + " < 0; the second-order metric expansion is invalid at this z");
    out.push_back(h2);
  }
  return out;
}

// log(sum_s w_s x_s^{e_s}) over levels with x_s > 0, or -inf if none.
inline double log_weighted_power_sum(const std::vector<double>& x, const std::vector<double>& exponent,
                                     const std::vector<double>& weight) {
  std::vector<double> logs;
  for (std::size_t s = 0; s < x.size(); ++s)
    if (x[s] > 0.0) logs.push_back(std::log(weight[s]) + exponent[s] * std::log(x[s]));
  if (logs.empty()) return -INFINITY;
  const double top = *std::max_element(logs.begin(), logs.end());
  double acc = 0.0;
  for (double l : logs) acc += std::exp(l - top);
  return top + std::log(acc);
}

}  // namespace detail

/// Green-Griffiths k-jet metric (sum_s ||xi_s||_h^{2p/s})^{1/p}; `xi` holds the
/// k level vectors in C^r. Returns 0 when every level vanishes.
inline double gg_metric_eval(const CurvatureTensor& c, std::span<const Complex> z,
                             std::span<const std::vector<Complex>> xi, const MetricParams& params) {
  const int k = static_cast<int>(xi.size());
  params.validate(k);
  const auto h2 = detail::level_norms(c, z, xi, "gg_metric_eval");
  std::vector<double> expo, ones(static_cast<std::size_t>(k), 1.0);
  for (int s = 1; s <= k; ++s) expo.push_back(static_cast<double>(params.p) / s);  // (h^2)^{p/s}
  const double lg = detail::log_weighted_power_sum(h2, expo, ones);
  return std::isinf(lg) ? 0.0 : std::exp(lg / params.p);
}

/// Invariant k-jet metric in invariant coordinates eta_s (weight 2s-1):
/// (sum_s eps_s ||eta_s||_h^{p/(2s-1)})^{1/p} times the root of the sphere
/// average of |<eta_1, v>|^2, which is ||eta_1||_h^2 / r.
inline double inv_metric_eval(const CurvatureTensor& c, std::span<const Complex> z,
                              std::span<const std::vector<Complex>> eta, const MetricParams& params) {
  const int k = static_cast<int>(eta.size());
  params.validate(k);
  const auto h2 = detail::level_norms(c, z, eta, "inv_metric_eval");
  std::vector<double> expo;
  for (int s = 1; s <= k; ++s) expo.push_back(static_cast<double>(params.p) / (2.0 * (2 * s - 1)));
  const std::vector<double> w(params.eps.begin(), params.eps.begin() + k);
  const double lg = detail::log_weighted_power_sum(h2, expo, w);
  if (std::isinf(lg) || h2[0] == 0.0) return 0.0;
  return std::exp(lg / params.p) * std::sqrt(h2[0] / c.r());
}

/// Induced second-order coefficients on S^l V in the basis
/// e^alpha = sqrt(l!/alpha!) e_1^{alpha_1} ... e_r^{alpha_r}.
struct SymPowerCoeffs {
  int n = 0;
  int r = 0;
  int l = 0;
  std::vector<std::vector<int>> basis;  // multi-indices, exponent-descending lex order
  std::vector<double> scale;            // sqrt(l!/alpha!)
  std::vector<Complex> entries;         // ((i*n + j)*B + a)*B + b

  std::size_t dim() const { return basis.size(); }
  const Complex& operator()(int i, int j, std::size_t a, std::size_t b) const {
    return entries[((static_cast<std::size_t>(i) * n + j) * dim() + a) * dim() + b];
  }
};

/// Multi-indices alpha in N^r with |alpha| = l, largest leading exponent first.
inline std::vector<std::vector<int>> multi_indices(int r, int l) {
  std::vector<std::vector<int>> out;
  std::vector<int> cur(static_cast<std::size_t>(r), 0);
  auto rec = [&](auto& self, int pos, int left) -> void {
    if (pos == r - 1) {
      cur[pos] = left;
      out.push_back(cur);
      return;
    }
    for (int e = left; e >= 0; --e) {
      cur[pos] = e;
      self(self, pos + 1, left - e);
    }
  };
  rec(rec, 0, l);
  return out;
}

/// Metric on S^l V induced through S^l V -> V^{(x)l}. To first order in
/// c the Gram matrix of the scaled basis is the derivation extension of c,
/// i.e. <alpha| sum c_{lm} a_l^+ a_m |beta> on occupation-number states.
inline SymPowerCoeffs sym_power_metric_coeffs(const CurvatureTensor& c, int l) {
  if (l < 1) throw InputError("symmetric power l must be >= 1");
  SymPowerCoeffs out;
  out.n = c.n();
  out.r = c.r();
  out.l = l;
  out.basis = multi_indices(c.r(), l);
  const std::size_t dim = out.basis.size();
  std::map<std::vector<int>, std::size_t> position;
  for (std::size_t a = 0; a < dim; ++a) position[out.basis[a]] = a;

  for (const auto& alpha : out.basis) {
    double denom = 0.0;  // log alpha!
    for (int e : alpha) denom += std::lgamma(e + 1.0);
    out.scale.push_back(std::exp(0.5 * (std::lgamma(l + 1.0) - denom)));
  }

  out.entries.assign(static_cast<std::size_t>(c.n() * c.n()) * dim * dim, Complex{});
  for (std::size_t b = 0; b < dim; ++b) {
    const auto& beta = out.basis[b];
    for (int mu = 0; mu < c.r(); ++mu) {
      if (beta[mu] == 0) continue;
      for (int lam = 0; lam < c.r(); ++lam) {
        auto alpha = beta;
        --alpha[mu];
        ++alpha[lam];
        const std::size_t a = position.at(alpha);
        const double amp = std::sqrt(static_cast<double>(beta[mu]) * alpha[lam]);
        for (int i = 0; i < c.n(); ++i)
          for (int j = 0; j < c.n(); ++j)
            out.entries[((static_cast<std::size_t>(i) * c.n() + j) * dim + a) * dim + b] += amp * c(i, j, lam, mu);
      }
    }
  }
  return out;
}

}  // namespace jetcalc
