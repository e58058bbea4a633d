#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "jetcalc/coeff.hpp"
#include "jetcalc/errors.hpp"
#include "jetcalc/sparse_poly.hpp"

namespace jetcalc {

/// The jet indeterminate xi_{s,alpha} = f_alpha^{(s)}(0). Order 0 is reserved
/// for the base coordinate z_alpha = f_alpha(0), so the global term order puts
/// base variables first.
struct JetVariable {
  int order = 1;
  int component = 1;

  static constexpr JetVariable base(int i) { return {0, i}; }
  bool is_base() const { return order == 0; }
  /// Weighted degree of the variable: s for xi_s, 0 for z.
  int weight() const { return order; }

  auto operator<=>(const JetVariable&) const = default;
};

using JetMonomial = Monomial<JetVariable>;

inline int weighted_degree(const JetMonomial& m) {
  int d = 0;
  for (const auto& [v, e] : m.entries()) d += v.order * e;
  return d;
}

inline int max_order(const JetMonomial& m) {
  int k = 0;
  for (const auto& [v, e] : m.entries()) k = std::max(k, v.order);
  return k;
}

inline std::ostream& operator<<(std::ostream& os, const JetMonomial& m) {
  if (m.is_one()) return os << "1";
  bool first = true;
  for (const auto& [v, e] : m.entries()) {
    if (!first) os << "*";
    first = false;
    if (v.is_base())
      os << "z" << v.component;
    else
      os << "xi" << v.order << "_" << v.component;
    if (e != 1) os << "^" << e;
  }
  return os;
}

/// Polynomial in base variables z_1..z_r and jet variables xi_{s,alpha},
/// 1 <= s <= k, with coefficients in the ring C.
template <class C>
class BasicJetPolynomial {
 public:
  using Coefficient = C;
  using Terms = SparsePolynomial<JetMonomial, C>;

  explicit BasicJetPolynomial(int k = 0, int r = 1) : k_(k), r_(r) { check_shape(); }

  BasicJetPolynomial(Terms terms, int k, int r) : terms_(std::move(terms)), k_(k), r_(r) {
    check_shape();
    for (const auto& [m, c] : terms_.terms()) check_monomial(m);
  }

  static BasicJetPolynomial constant(const C& c, int k, int r) {
    return BasicJetPolynomial(Terms(c), k, r);
  }
  static BasicJetPolynomial xi(int s, int alpha, int k, int r) {
    if (s < 1) throw InputError("jet variable order must be >= 1");
    return BasicJetPolynomial(Terms(JetMonomial::variable({s, alpha}), C(1)), k, r);
  }
  static BasicJetPolynomial z(int i, int k, int r) {
    return BasicJetPolynomial(Terms(JetMonomial::variable(JetVariable::base(i)), C(1)), k, r);
  }

  int order() const { return k_; }
  int rank() const { return r_; }
  const Terms& terms() const { return terms_; }
  std::size_t size() const { return terms_.size(); }
  bool is_zero() const { return terms_.is_zero(); }
  friend bool is_zero(const BasicJetPolynomial& p) { return p.is_zero(); }

  /// Largest jet order actually present (0 if none).
  int max_present_order() const {
    int k = 0;
    for (const auto& [m, c] : terms_.terms()) k = std::max(k, max_order(m));
    return k;
  }

  BasicJetPolynomial with_order(int k) const { return BasicJetPolynomial(terms_, k, r_); }

  BasicJetPolynomial operator-() const { return {-terms_, k_, r_}; }

  friend BasicJetPolynomial operator+(const BasicJetPolynomial& a, const BasicJetPolynomial& b) {
    return {a.terms_ + b.terms_, std::max(a.k_, b.k_), std::max(a.r_, b.r_)};
  }
  friend BasicJetPolynomial operator-(const BasicJetPolynomial& a, const BasicJetPolynomial& b) {
    return {a.terms_ - b.terms_, std::max(a.k_, b.k_), std::max(a.r_, b.r_)};
  }
  friend BasicJetPolynomial operator*(const BasicJetPolynomial& a, const BasicJetPolynomial& b) {
    return {a.terms_ * b.terms_, std::max(a.k_, b.k_), std::max(a.r_, b.r_)};
  }
  friend BasicJetPolynomial operator*(const C& s, const BasicJetPolynomial& a) {
    return {a.terms_ * s, a.k_, a.r_};
  }
  friend BasicJetPolynomial operator*(const BasicJetPolynomial& a, const C& s) { return s * a; }

  BasicJetPolynomial& operator+=(const BasicJetPolynomial& o) { return *this = *this + o; }
  BasicJetPolynomial& operator-=(const BasicJetPolynomial& o) { return *this = *this - o; }
  BasicJetPolynomial& operator*=(const BasicJetPolynomial& o) { return *this = *this * o; }

  /// Equality compares term maps only; the declared order is not part of the value.
  friend bool operator==(const BasicJetPolynomial& a, const BasicJetPolynomial& b) {
    return a.terms_ == b.terms_;
  }

  template <class F>
  auto map_coefficients(F f) const {
    auto t = terms_.map_coefficients(f);
    return BasicJetPolynomial<typename decltype(t)::Coefficient>(std::move(t), k_, r_);
  }

  friend std::ostream& operator<<(std::ostream& os, const BasicJetPolynomial& p) {
    if (p.is_zero()) return os << "0";
    bool first = true;
    for (const auto& [m, c] : p.terms_.terms()) {
      if (!first) os << " + ";
      first = false;
      os << c << "*" << m;
    }
    return os;
  }

  std::string to_string() const {
    std::ostringstream os;
    os << *this;
    return os.str();
  }

 private:
  void check_shape() const {
    if (k_ < 0) throw InputError("declared jet order must be >= 0");
    if (r_ < 1) throw InputError("rank r must be >= 1");
  }
  void check_monomial(const JetMonomial& m) const {
    for (const auto& [v, e] : m.entries()) {
      if (v.order < 0 || v.order > k_)
        throw InputError("jet variable order " + std::to_string(v.order) +
                         " outside declared order " + std::to_string(k_));
      if (v.component < 1 || v.component > r_)
        throw InputError("component " + std::to_string(v.component) + " outside 1.." +
                         std::to_string(r_));
      if (e < 1) throw InputError("monomial exponents must be positive");
    }
  }

  Terms terms_;
  int k_ = 0;
  int r_ = 1;
};

using JetPolynomial = BasicJetPolynomial<GaussianRational>;

/// Formal derivative: delta = sum_a xi_{1,a} d/dz_a + sum_{s,a} xi_{s+1,a} d/dxi_{s,a}.
/// Raises the declared order by one.
template <class C>
BasicJetPolynomial<C> delta(const BasicJetPolynomial<C>& p) {
  typename BasicJetPolynomial<C>::Terms out;
  for (const auto& [m, c] : p.terms().terms()) {
    for (const auto& [v, e] : m.entries()) {
      const JetVariable next{v.order + 1, v.component};
      out.add_term(m.times_variable(v, -1).times_variable(next, 1), c * C(e));
    }
  }
  return {std::move(out), p.order() + 1, p.rank()};
}

/// Repeated formal derivative.
template <class C>
BasicJetPolynomial<C> delta(const BasicJetPolynomial<C>& p, int times) {
  BasicJetPolynomial<C> q = p;
  for (int i = 0; i < times; ++i) q = delta(q);
  return q;
}

/// Set of weighted degrees over the terms; nullopt for the zero polynomial.
template <class C>
std::optional<std::set<int>> weighted_degree(const BasicJetPolynomial<C>& p) {
  if (p.is_zero()) return std::nullopt;
  std::set<int> out;
  for (const auto& [m, c] : p.terms().terms()) out.insert(weighted_degree(m));
  return out;
}

/// The single weighted degree of a homogeneous polynomial, nullopt otherwise.
template <class C>
std::optional<int> homogeneous_degree(const BasicJetPolynomial<C>& p) {
  auto d = weighted_degree(p);
  if (!d || d->size() != 1) return std::nullopt;
  return *d->begin();
}

/// Decreasing filtration F^p: terms of weighted degree >= p.
template <class C>
BasicJetPolynomial<C> filter_F(const BasicJetPolynomial<C>& p, int level) {
  if (level < 0) throw InputError("filtration level must be >= 0");
  auto t = p.terms().filtered([&](const JetMonomial& m) { return weighted_degree(m) >= level; });
  return {std::move(t), p.order(), p.rank()};
}

/// Increasing filtration W_k: terms whose jet variables all have order <= k.
template <class C>
BasicJetPolynomial<C> truncate_W(const BasicJetPolynomial<C>& p, int k) {
  if (k < 1) throw InputError("truncation order must be >= 1");
  auto t = p.terms().filtered([&](const JetMonomial& m) { return max_order(m) <= k; });
  return {std::move(t), k, p.rank()};
}

/// Number of jet monomials in xi_{s,a} (s <= k, a <= r) of weighted degree m:
/// the coefficient of t^m in prod_{s=1..k} (1 - t^s)^{-r}.
inline std::uint64_t dim_fiber(int k, int r, int m) {
  if (k < 1 || r < 1 || m < 0) throw InputError("dim_fiber needs k >= 1, r >= 1, m >= 0");
  std::vector<std::uint64_t> dp(static_cast<std::size_t>(m) + 1, 0);
  dp[0] = 1;
  for (int s = 1; s <= std::min(k, m); ++s) {
    for (int a = 0; a < r; ++a) {
      for (int j = s; j <= m; ++j) {
        if (__builtin_add_overflow(dp[j], dp[j - s], &dp[j]))
          throw OverflowError("dim_fiber(" + std::to_string(k) + "," + std::to_string(r) + "," +
                              std::to_string(m) + ") overflows 64 bits");
      }
    }
  }
  return dp[m];
}

/// All jet monomials of weighted degree m, in the global term order.
inline std::vector<JetMonomial> enumerate_monomials(int k, int r, int m) {
  if (k < 1 || r < 1 || m < 0) throw InputError("enumerate_monomials needs k >= 1, r >= 1, m >= 0");
  std::vector<JetVariable> vars;
  for (int s = 1; s <= k; ++s)
    for (int a = 1; a <= r; ++a) vars.push_back({s, a});

  std::vector<JetMonomial> out;
  std::vector<JetMonomial::Entry> current;
  auto recurse = [&](auto& self, std::size_t idx, int remaining) -> void {
    if (remaining == 0) {
      out.push_back(JetMonomial::from_entries(current));
      return;
    }
    if (idx == vars.size()) return;
    const int w = vars[idx].weight();
    for (int e = remaining / w; e >= 0; --e) {
      if (e > 0) current.push_back({vars[idx], e});
      self(self, idx + 1, remaining - e * w);
      if (e > 0) current.pop_back();
    }
  };
  recurse(recurse, 0, m);
  return out;
}

/// Evaluates at a point; variables missing from the map evaluate to zero.
template <class C>
C evaluate(const BasicJetPolynomial<C>& p, const std::map<JetVariable, C>& point) {
  C total{};
  for (const auto& [m, c] : p.terms().terms()) {
    C term = c;
    for (const auto& [v, e] : m.entries()) {
      auto it = point.find(v);
      if (it == point.end()) {
        term = C{};
        break;
      }
      for (int i = 0; i < e; ++i) term *= it->second;
    }
    total += term;
  }
  return total;
}

}  // namespace jetcalc
