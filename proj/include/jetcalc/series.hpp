#pragma once

#include <cstddef>
#include <vector>

#include "jetcalc/coeff.hpp"
#include "jetcalc/errors.hpp"

namespace jetcalc {

/// Power series truncated after t^k, coefficients in a commutative ring R.
template <class R>
class TruncatedSeries {
 public:
  explicit TruncatedSeries(int k) : c_(static_cast<std::size_t>(k) + 1, R(0)) {
    if (k < 0) throw InputError("series truncation order must be >= 0");
  }
  TruncatedSeries(std::vector<R> coeffs) : c_(std::move(coeffs)) {  // NOLINT
    if (c_.empty()) throw InputError("series needs at least a constant term");
  }

  static TruncatedSeries identity(int k) {
    TruncatedSeries s(k);
    if (k >= 1) s.c_[1] = R(1);
    return s;
  }

  int order() const { return static_cast<int>(c_.size()) - 1; }
  const R& operator[](int i) const { return c_[static_cast<std::size_t>(i)]; }
  R& operator[](int i) { return c_[static_cast<std::size_t>(i)]; }
  const std::vector<R>& coefficients() const { return c_; }

  friend TruncatedSeries operator+(const TruncatedSeries& a, const TruncatedSeries& b) {
    TruncatedSeries out(std::min(a.order(), b.order()));
    for (int i = 0; i <= out.order(); ++i) out[i] = a[i] + b[i];
    return out;
  }

  friend TruncatedSeries operator*(const TruncatedSeries& a, const TruncatedSeries& b) {
    const int k = std::min(a.order(), b.order());
    TruncatedSeries out(k);
    for (int i = 0; i <= k; ++i) {
      if (is_zero(a[i])) continue;
      for (int j = 0; i + j <= k; ++j) {
        if (is_zero(b[j])) continue;
        out[i + j] += a[i] * b[j];
      }
    }
    return out;
  }

  friend bool operator==(const TruncatedSeries& a, const TruncatedSeries& b) { return a.c_ == b.c_; }

 private:
  std::vector<R> c_;
};

/// outer(inner(t)) truncated; inner must have zero constant term.
template <class R>
TruncatedSeries<R> compose(const TruncatedSeries<R>& outer, const TruncatedSeries<R>& inner) {
  if (!is_zero(inner[0])) throw InputError("inner series of a composition must vanish at 0");
  const int k = std::min(outer.order(), inner.order());
  TruncatedSeries<R> out(k);
  out[0] = outer[0];
  TruncatedSeries<R> power(k);
  power[0] = R(1);
  for (int j = 1; j <= k; ++j) {
    power = power * inner;
    if (is_zero(outer[j])) continue;
    for (int i = j; i <= k; ++i)
      if (!is_zero(power[i])) out[i] += outer[j] * power[i];
  }
  return out;
}

/// All powers inner^0 .. inner^k, truncated at t^k.
template <class R>
std::vector<TruncatedSeries<R>> powers(const TruncatedSeries<R>& inner) {
  const int k = inner.order();
  std::vector<TruncatedSeries<R>> out;
  out.reserve(static_cast<std::size_t>(k) + 1);
  TruncatedSeries<R> one(k);
  one[0] = R(1);
  out.push_back(one);
  for (int j = 1; j <= k; ++j) out.push_back(out.back() * inner);
  return out;
}

/// Compositional inverse of a series with zero constant term and invertible
/// linear coefficient; R must provide an ADL `unit_inverse`.
template <class R>
TruncatedSeries<R> reversion(const TruncatedSeries<R>& f) {
  const int k = f.order();
  if (!is_zero(f[0])) throw InputError("series reversion needs zero constant term");
  if (k < 1) return f;
  if (is_zero(f[1])) throw SingularJetError("series reversion needs a nonzero linear coefficient");
  const R inv_lead = unit_inverse(f[1]);
  TruncatedSeries<R> g(k);
  g[1] = inv_lead;
  for (int n = 2; n <= k; ++n) {
    // With g_n = 0, [t^n] f(g) collects every contribution except f_1 g_n.
    const TruncatedSeries<R> fg = compose(f, g);
    g[n] = R(0) - fg[n] * inv_lead;
  }
  return g;
}

inline GaussianRational unit_inverse(const GaussianRational& c) { return c.inverse(); }

}  // namespace jetcalc
