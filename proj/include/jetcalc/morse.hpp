#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/quadrature/gauss.hpp>

#include "jetcalc/curvature.hpp"
#include "jetcalc/errors.hpp"
#include "jetcalc/rng.hpp"

namespace jetcalc {

/// Point (eta_1..eta_k) of the weighted fiber with the RNG coordinates it came from.
struct FiberSample {
  std::vector<Eigen::VectorXcd> eta;
  std::uint64_t seed = 0;
  std::uint64_t index = 0;
  std::uint64_t draws = 0;
};

inline constexpr double kResampleNorm = 1e-300;

/// Each eta_s is a standard complex Gaussian in C^r, redrawn if |eta_s| < 1e-300.
inline FiberSample draw_fiber_sample(std::uint64_t seed, std::uint64_t index, int k, int r) {
  SampleStream stream(seed, index);
  FiberSample out;
  out.seed = seed;
  out.index = index;
  for (int s = 0; s < k; ++s) {
    Eigen::VectorXcd v(r);
    do
      for (int a = 0; a < r; ++a) v(a) = stream.complex_normal();
    while (v.norm() < kResampleNorm);
    out.eta.push_back(std::move(v));
  }
  out.draws = stream.draws();
  return out;
}

inline constexpr double kHermitianFormTolerance = 1e-10;

/// n x n Hermitian matrix M of the form (i/2pi) sum M_ij dz_i ^ dzbar_j.
class HermitianForm {
 public:
  explicit HermitianForm(const Eigen::MatrixXcd& m) {
    if (m.rows() != m.cols() || m.rows() == 0) throw InputError("Hermitian form must be a nonempty square matrix");
    const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
    if ((m - m.adjoint()).cwiseAbs().maxCoeff() > kHermitianFormTolerance * scale)
      throw DomainError("matrix is not Hermitian within 1e-10");
    m_ = 0.5 * (m + m.adjoint());
  }

  const Eigen::MatrixXcd& matrix() const { return m_; }
  int dim() const { return static_cast<int>(m_.rows()); }

  Eigen::VectorXd eigenvalues() const {
    return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd>(m_, Eigen::EigenvaluesOnly).eigenvalues();
  }

 private:
  Eigen::MatrixXcd m_;
};

struct MorseIndex {
  int negative = 0;    // eigenvalues < -1e-10
  int degenerate = 0;  // eigenvalues in [-1e-10, 1e-10]
  bool is_degenerate() const { return degenerate > 0; }
};

inline constexpr double kDegenerateEigenvalue = 1e-10;

inline MorseIndex morse_index(const HermitianForm& form) {
  MorseIndex out;
  for (double ev : form.eigenvalues()) {
    if (std::abs(ev) <= kDegenerateEigenvalue)
      ++out.degenerate;
    else if (ev < 0.0)
      ++out.negative;
  }
  return out;
}

/// det(M): density of gamma^n / n! against prod (i/2pi) dz_i ^ dzbar_i.
inline double top_power(const HermitianForm& form) { return form.matrix().partialPivLu().determinant().real(); }

namespace detail {

// sum_{lm} c_{ij l m} u_l conj(u_m).
inline Eigen::MatrixXcd contract(const CurvatureTensor& c, const Eigen::VectorXcd& u) {
  const Eigen::MatrixXcd outer = u * u.adjoint();  // outer(l, m) = u_l conj(u_m)
  Eigen::MatrixXcd m(c.n(), c.n());
  for (int i = 0; i < c.n(); ++i)
    for (int j = 0; j < c.n(); ++j) m(i, j) = c.block(i, j).cwiseProduct(outer).sum();
  return m;
}

inline void check_sample(const CurvatureTensor& c, const FiberSample& eta, const MetricParams& params) {
  const int k = static_cast<int>(eta.eta.size());
  params.validate(k);
  for (const auto& v : eta.eta)
    if (v.size() != c.r()) throw InputError("fiber sample has the wrong rank");
}

}  // namespace detail

/// M_ij = sum_s (1/s) w_s sum c_{ij l m} eta_sl conj(eta_sm) / |eta_s|^2 with
/// w_s = |eta_s|^{2p/s} / sum_t |eta_t|^{2p/t} evaluated in log space.
inline HermitianForm gamma_gg(const CurvatureTensor& c, const FiberSample& eta, const MetricParams& params) {
  detail::check_sample(c, eta, params);
  const int k = static_cast<int>(eta.eta.size());
  std::vector<double> logw(static_cast<std::size_t>(k), -INFINITY);
  double top = -INFINITY;
  for (int s = 1; s <= k; ++s) {
    const double n2 = eta.eta[s - 1].squaredNorm();
    if (n2 > 0.0) logw[s - 1] = (static_cast<double>(params.p) / s) * std::log(n2);
    top = std::max(top, logw[s - 1]);
  }
  if (std::isinf(top)) throw DomainError("gamma_gg: every eta_s is zero");
  double total = 0.0;
  for (double& l : logw) total += (l = std::exp(l - top));
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(c.n(), c.n());
  for (int s = 1; s <= k; ++s) {
    if (logw[s - 1] == 0.0) continue;
    const Eigen::VectorXcd& v = eta.eta[s - 1];
    m += (logw[s - 1] / total / s) * detail::contract(c, v / v.norm());
  }
  return HermitianForm(m);
}

/// Invariant-metric form: averaged base term b_ij = (1/r) sum_a c_{ij a a} plus
/// sum_s (1/s) sum c_{ij l m} u_sl conj(u_sm) with u_s = eta_s / |eta_s|.
inline HermitianForm gamma_inv(const CurvatureTensor& c, const FiberSample& eta, const MetricParams& params) {
  detail::check_sample(c, eta, params);
  Eigen::MatrixXcd m(c.n(), c.n());
  for (int i = 0; i < c.n(); ++i)
    for (int j = 0; j < c.n(); ++j) m(i, j) = c.block(i, j).trace() / static_cast<double>(c.r());
  bool any = false;
  for (std::size_t s = 0; s < eta.eta.size(); ++s) {
    const Eigen::VectorXcd& v = eta.eta[s];
    const double norm = v.norm();
    if (norm == 0.0) continue;
    any = true;
    m += (1.0 / static_cast<double>(s + 1)) * detail::contract(c, v / norm);
  }
  if (!any) throw DomainError("gamma_inv: every eta_s is zero");
  return HermitianForm(m);
}

enum class Variant { gg, invariant };

inline std::string to_string(Variant v) { return v == Variant::gg ? "gg" : "inv"; }

/// Binomial coefficient as a double; exact while it fits in 53 bits.
inline double binomial(int top, int bottom) {
  if (bottom < 0 || bottom > top) return 0.0;
  double out = 1.0;
  for (int i = 1; i <= bottom; ++i) out = out * (top - bottom + i) / i;
  return std::round(out);
}

/// (n+kr-1)! / (n!(kr-1)!) for gg and (n+k(r-1))! / (n!(k(r-1))!) for the invariant variant.
inline double volume_prefactor(Variant v, int n, int k, int r) {
  return v == Variant::gg ? binomial(n + k * r - 1, n) : binomial(n + k * (r - 1), n);
}

struct IndexEstimate {
  int q = 0;
  double value = 0.0;
  double std_error = 0.0;
  std::uint64_t count = 0;
};

struct IntegralEstimate {
  Variant variant = Variant::gg;
  int n = 0;
  int r = 0;
  int k = 0;
  std::vector<IndexEstimate> index;  // q = 0..n
  std::uint64_t degenerate = 0;
  std::uint64_t samples = 0;
  std::uint64_t seed = 0;
  double prefactor = 1.0;
  double alternating = 0.0;  // sum_q (-1)^q I_q
  double alternating_std_error = 0.0;
};

namespace detail {

inline constexpr std::uint64_t kChunkSamples = 4096;

struct ChunkSums {
  std::vector<double> sum, sum2;
  std::vector<std::uint64_t> count;
  std::uint64_t degenerate = 0;
  double alt = 0.0, alt2 = 0.0;
  std::exception_ptr error;

  explicit ChunkSums(int n) : sum(n + 1), sum2(n + 1), count(n + 1) {}
};

inline unsigned resolve_threads(unsigned threads) {
  if (threads > 0) return threads;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

// Standard error of the mean of N values with the given sums; N-1 denominator.
inline double mean_std_error(double sum, double sum2, std::uint64_t n) {
  if (n < 2) return std::numeric_limits<double>::quiet_NaN();
  const double nd = static_cast<double>(n), mean = sum / nd;
  const double var = std::max(0.0, (sum2 - nd * mean * mean) / (nd - 1.0));
  return std::sqrt(var / nd);
}

}  // namespace detail

/// Monte Carlo estimate of I_q = prefactor * E[1_{index = q} det gamma].
/// Samples are split into fixed chunks reduced in chunk order, so the result
/// is bit-identical for every thread count (0 = hardware concurrency).
inline IntegralEstimate mc_integrate(const CurvatureTensor& c, int k, const MetricParams& params, Variant variant,
                                     std::uint64_t samples, std::uint64_t seed, unsigned threads = 1) {
  if (samples < 1) throw InputError("sample count must be >= 1");
  params.validate(k);
  const int n = c.n(), r = c.r();
  const std::uint64_t chunks = (samples + detail::kChunkSamples - 1) / detail::kChunkSamples;
  std::vector<detail::ChunkSums> sums(chunks, detail::ChunkSums(n));
  std::atomic<std::uint64_t> next{0};

  auto worker = [&] {
    for (std::uint64_t ch = next++; ch < chunks; ch = next++) {
      auto& acc = sums[ch];
      try {
        const std::uint64_t end = std::min(samples, (ch + 1) * detail::kChunkSamples);
        for (std::uint64_t t = ch * detail::kChunkSamples; t < end; ++t) {
          const FiberSample eta = draw_fiber_sample(seed, t, k, r);
          const HermitianForm form = variant == Variant::gg ? gamma_gg(c, eta, params) : gamma_inv(c, eta, params);
          const double det = top_power(form);
          if (!std::isfinite(det) || !form.matrix().allFinite())
            throw DomainError("non-finite curvature form at seed " + std::to_string(seed) + ", sample counter " +
                              std::to_string(t));
          const MorseIndex idx = morse_index(form);
          if (idx.is_degenerate()) {
            ++acc.degenerate;
            continue;
          }
          acc.sum[idx.negative] += det;
          acc.sum2[idx.negative] += det * det;
          ++acc.count[idx.negative];
          const double signed_det = idx.negative % 2 == 0 ? det : -det;
          acc.alt += signed_det;
          acc.alt2 += det * det;
        }
      } catch (...) {
        acc.error = std::current_exception();
      }
    }
  };

  const unsigned nthreads = std::min<std::uint64_t>(detail::resolve_threads(threads), chunks);
  if (nthreads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < nthreads; ++w) pool.emplace_back(worker);
  }

  detail::ChunkSums total(n);
  for (const auto& acc : sums) {
    if (acc.error) std::rethrow_exception(acc.error);
    for (int q = 0; q <= n; ++q) {
      total.sum[q] += acc.sum[q];
      total.sum2[q] += acc.sum2[q];
      total.count[q] += acc.count[q];
    }
    total.degenerate += acc.degenerate;
    total.alt += acc.alt;
    total.alt2 += acc.alt2;
  }

  IntegralEstimate out;
  out.variant = variant;
  out.n = n;
  out.r = r;
  out.k = k;
  out.samples = samples;
  out.seed = seed;
  out.degenerate = total.degenerate;
  out.prefactor = volume_prefactor(variant, n, k, r);
  const double nd = static_cast<double>(samples);
  for (int q = 0; q <= n; ++q)
    out.index.push_back({q, out.prefactor * total.sum[q] / nd,
                         out.prefactor * detail::mean_std_error(total.sum[q], total.sum2[q], samples), total.count[q]});
  out.alternating = out.prefactor * total.alt / nd;
  out.alternating_std_error = out.prefactor * detail::mean_std_error(total.alt, total.alt2, samples);
  return out;
}

struct QuadratureResult {
  int n = 0;
  int r = 0;
  std::vector<double> density;      // per q, integral over P^{r-1} without prefactor
  std::vector<double> value;        // prefactor * density
  std::vector<double> error_bound;  // |fine - coarse| per q, scaled like value
  double degenerate_mass = 0.0;
  double prefactor = 1.0;
  std::size_t nodes = 0;
};

namespace detail {

struct Rule {
  std::vector<double> x, w;
};

// Neumaier compensated sum; node counts reach 10^5 and the oracle is compared
// against closed forms at rounding level.
struct CompensatedSum {
  double sum = 0.0, carry = 0.0;
  void add(double v) {
    const double t = sum + v;
    carry += std::abs(sum) >= std::abs(v) ? (sum - t) + v : (v - t) + sum;
    sum = t;
  }
  double value() const { return sum + carry; }
};

// Composite Gauss-Legendre on [0, 1] with `panels` equal panels.
inline Rule gauss_panels(int panels) {
  using G = boost::math::quadrature::gauss<double, 8>;
  Rule out;
  for (int p = 0; p < panels; ++p) {
    const double mid = (p + 0.5) / panels, half = 0.5 / panels;
    for (std::size_t a = 0; a < G::abscissa().size(); ++a)
      for (double sign : {-1.0, 1.0}) {
        out.x.push_back(mid + sign * half * G::abscissa()[a]);
        out.w.push_back(half * G::weights()[a]);
      }
  }
  return out;
}

// Periodic trapezoid rule on [0, 2pi) normalized to total weight 1.
inline Rule phase_rule(int m) {
  Rule out;
  for (int t = 0; t < m; ++t) {
    out.x.push_back(2.0 * std::numbers::pi * t / m);
    out.w.push_back(1.0 / m);
  }
  return out;
}

// Integrates 1_q det over P^{r-1} with its normalized Fubini-Study measure:
// |u_a|^2 is uniform on the simplex and the relative phases are uniform.
inline std::vector<double> fs_integrate(const CurvatureTensor& c, int panels, int phases, double& degenerate,
                                        std::size_t& nodes) {
  const int n = c.n(), r = c.r();
  std::vector<CompensatedSum> acc(static_cast<std::size_t>(n + 1));
  CompensatedSum deg, total;
  nodes = 0;
  auto visit = [&](const Eigen::VectorXcd& u, double weight) {
    ++nodes;
    total.add(weight);
    const HermitianForm form(contract(c, u));
    const MorseIndex idx = morse_index(form);
    if (idx.is_degenerate()) {
      deg.add(weight);
      return;
    }
    acc[idx.negative].add(weight * top_power(form));
  };
  const Rule gl = gauss_panels(panels), th = phase_rule(phases);
  Eigen::VectorXcd u(r);
  if (r == 1) {
    u(0) = 1.0;
    visit(u, 1.0);
  } else if (r == 2) {
    for (std::size_t a = 0; a < gl.x.size(); ++a)
      for (std::size_t t = 0; t < th.x.size(); ++t) {
        u(0) = std::sqrt(gl.x[a]);
        u(1) = std::polar(std::sqrt(1.0 - gl.x[a]), th.x[t]);
        visit(u, gl.w[a] * th.w[t]);
      }
  } else {
    // (x1, x2, x3) = (a, (1-a) b, (1-a)(1-b)); uniform simplex density 2 times Jacobian (1-a).
    for (std::size_t a = 0; a < gl.x.size(); ++a)
      for (std::size_t b = 0; b < gl.x.size(); ++b) {
        const double x1 = gl.x[a], x2 = (1.0 - x1) * gl.x[b], x3 = (1.0 - x1) * (1.0 - gl.x[b]);
        const double wab = gl.w[a] * gl.w[b] * 2.0 * (1.0 - x1);
        for (std::size_t t2 = 0; t2 < th.x.size(); ++t2)
          for (std::size_t t3 = 0; t3 < th.x.size(); ++t3) {
            u(0) = std::sqrt(x1);
            u(1) = std::polar(std::sqrt(x2), th.x[t2]);
            u(2) = std::polar(std::sqrt(x3), th.x[t3]);
            visit(u, wab * th.w[t2] * th.w[t3]);
          }
      }
  }
  // Renormalize so the discrete rule is an exact probability measure.
  const double mass = total.value();
  degenerate = deg.value() / mass;
  std::vector<double> out;
  for (const auto& a : acc) out.push_back(a.value() / mass);
  return out;
}

}  // namespace detail

/// Deterministic k = 1 reference for the gg variant: tensor-product quadrature
/// over P^{r-1} (>= 10^4 nodes for r >= 2), error bound from one refinement.
inline QuadratureResult quadrature_oracle(const CurvatureTensor& c, int n, int r) {
  if (c.n() != n || c.r() != r) throw InputError("curvature tensor does not match n and r");
  if (n < 1 || n > 2 || r < 1 || r > 3)
    throw InputError("quadrature oracle supports k = 1, n <= 2, r <= 3 only (got n = " + std::to_string(n) +
                     ", r = " + std::to_string(r) + ")");
  const int panels = r == 2 ? 32 : 2, phases = r == 2 ? 96 : 8;
  double deg_coarse = 0.0, deg_fine = 0.0;
  std::size_t nodes_coarse = 0, nodes_fine = 0;
  const auto coarse = detail::fs_integrate(c, panels, phases, deg_coarse, nodes_coarse);
  const auto fine = detail::fs_integrate(c, 2 * panels, 2 * phases, deg_fine, nodes_fine);
  QuadratureResult out;
  out.n = n;
  out.r = r;
  out.prefactor = volume_prefactor(Variant::gg, n, 1, r);
  out.nodes = nodes_fine;
  out.degenerate_mass = deg_fine;
  for (int q = 0; q <= n; ++q) {
    out.density.push_back(fine[q]);
    out.value.push_back(out.prefactor * fine[q]);
    out.error_bound.push_back(out.prefactor * std::abs(fine[q] - coarse[q]));
  }
  return out;
}

struct ScalingRow {
  int k = 0;
  IntegralEstimate estimate;
  double total = 0.0;  // sum_q (-1)^q I_q
  double total_std_error = 0.0;
  std::optional<double> ratio;  // total * n! (k!)^r / (log k)^n, k >= 2
  std::optional<double> ratio_std_error;
};

/// Invariant-variant estimates for k = 1..kmax with the normalized ratio.
/// Diagnostic only: nothing is asserted about the values.
inline std::vector<ScalingRow> scaling_report(const CurvatureTensor& c, int kmax, const MetricParams& params,
                                              std::uint64_t samples, std::uint64_t seed, unsigned threads = 1) {
  if (kmax < 2) throw InputError("scaling report needs kmax >= 2");
  params.validate(kmax);
  const int n = c.n(), r = c.r();
  std::vector<ScalingRow> rows;
  for (int k = 1; k <= kmax; ++k) {
    ScalingRow row;
    row.k = k;
    row.estimate = mc_integrate(c, k, params, Variant::invariant, samples, seed, threads);
    row.total = row.estimate.alternating;
    row.total_std_error = row.estimate.alternating_std_error;
    if (k >= 2) {
      const double norm = std::tgamma(n + 1.0) * std::pow(std::tgamma(k + 1.0), r) / std::pow(std::log(k), n);
      row.ratio = row.total * norm;
      row.ratio_std_error = row.total_std_error * norm;
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace jetcalc
