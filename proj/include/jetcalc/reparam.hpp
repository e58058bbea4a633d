#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "jetcalc/coeff.hpp"
#include "jetcalc/errors.hpp"
#include "jetcalc/jetpoly.hpp"
#include "jetcalc/series.hpp"
#include "jetcalc/sparse_poly.hpp"

namespace jetcalc {

/// Polynomials in the formal reparametrization coefficients a_1, a_2, ...
using ParamMonomial = Monomial<int>;
using ParamPolynomial = SparsePolynomial<ParamMonomial, GaussianRational>;

inline std::ostream& operator<<(std::ostream& os, const ParamMonomial& m) {
  if (m.is_one()) return os << "1";
  bool first = true;
  for (const auto& [s, e] : m.entries()) {
    if (!first) os << "*";
    first = false;
    os << "a" << s;
    if (e != 1) os << "^" << e;
  }
  return os;
}

/// The indeterminate a_s.
inline ParamPolynomial param(int s, int e = 1) {
  return ParamPolynomial(ParamMonomial::variable(s, e), GaussianRational(1));
}

/// k-jet of a reparametrization phi(t) = a_1 t + ... + a_k t^k of (C,0),
/// stored by normalized Taylor coefficients a_s = phi^{(s)}(0)/s!.
template <class R>
class BasicReparamJet {
 public:
  explicit BasicReparamJet(std::vector<R> a) : a_(std::move(a)) {
    if (a_.empty()) throw InputError("reparametrization jet needs order k >= 1");
    if (is_zero(a_.front())) throw SingularJetError("reparametrization jet has a_1 = 0");
  }

  static BasicReparamJet identity(int k) {
    std::vector<R> a(static_cast<std::size_t>(k), R(0));
    if (k >= 1) a[0] = R(1);
    return BasicReparamJet(std::move(a));
  }

  int order() const { return static_cast<int>(a_.size()); }
  /// a_s for 1 <= s <= k.
  const R& coefficient(int s) const { return a_.at(static_cast<std::size_t>(s - 1)); }
  const std::vector<R>& coefficients() const { return a_; }

  TruncatedSeries<R> series() const {
    TruncatedSeries<R> s(order());
    for (int i = 1; i <= order(); ++i) s[i] = a_[static_cast<std::size_t>(i - 1)];
    return s;
  }

  static BasicReparamJet from_series(const TruncatedSeries<R>& s) {
    std::vector<R> a;
    for (int i = 1; i <= s.order(); ++i) a.push_back(s[i]);
    return BasicReparamJet(std::move(a));
  }

  friend bool operator==(const BasicReparamJet& x, const BasicReparamJet& y) { return x.a_ == y.a_; }

 private:
  std::vector<R> a_;
};

using ReparamJet = BasicReparamJet<GaussianRational>;
using SymbolicReparamJet = BasicReparamJet<ParamPolynomial>;

/// phi(t) = a_1 t + ... + a_k t^k with every a_s a formal symbol.
inline SymbolicReparamJet symbolic_reparam(int k) {
  if (k < 1) throw InputError("symbolic reparametrization needs k >= 1");
  std::vector<ParamPolynomial> a;
  for (int s = 1; s <= k; ++s) a.push_back(param(s));
  return SymbolicReparamJet(std::move(a));
}

/// k-jet of phi o psi.
template <class R>
BasicReparamJet<R> compose(const BasicReparamJet<R>& phi, const BasicReparamJet<R>& psi) {
  if (phi.order() != psi.order()) throw InputError("compose needs equal jet orders");
  return BasicReparamJet<R>::from_series(compose(phi.series(), psi.series()));
}

/// Two-sided inverse in the jet group.
template <class R>
BasicReparamJet<R> invert(const BasicReparamJet<R>& phi) {
  return BasicReparamJet<R>::from_series(reversion(phi.series()));
}

/// Table T[s][j] (1 <= j <= s <= k) with (f o phi)^{(s)}(0) = sum_j T[s][j] f^{(j)}(0):
/// T[s][j] = s!/j! [t^s] phi(t)^j.
template <class R>
std::vector<std::vector<R>> action_coefficients(const BasicReparamJet<R>& phi, int k) {
  if (k < 1 || k > phi.order()) throw InputError("action order must lie in 1..order(phi)");
  TruncatedSeries<R> base(k);
  for (int i = 1; i <= k; ++i) base[i] = phi.coefficient(i);
  const auto pw = powers(base);
  std::vector<std::vector<R>> table(static_cast<std::size_t>(k) + 1);
  for (int s = 1; s <= k; ++s) {
    table[s].assign(static_cast<std::size_t>(s) + 1, R(0));
    for (int j = 1; j <= s; ++j) {
      Rational ratio = 1;
      for (int q = j + 1; q <= s; ++q) ratio *= q;
      table[s][j] = pw[j][s] * R(GaussianRational(ratio));
    }
  }
  return table;
}

/// Substitution xi_{s,a} -> (f o phi)^{(s)}(0) for s <= k, a <= r.
template <class R>
std::map<JetVariable, BasicJetPolynomial<R>> act(const BasicReparamJet<R>& phi, int k, int r) {
  const auto table = action_coefficients(phi, k);
  std::map<JetVariable, BasicJetPolynomial<R>> out;
  for (int s = 1; s <= k; ++s) {
    for (int a = 1; a <= r; ++a) {
      typename BasicJetPolynomial<R>::Terms t;
      for (int j = 1; j <= s; ++j) t.add_term(JetMonomial::variable({j, a}), table[s][j]);
      out.emplace(JetVariable{s, a}, BasicJetPolynomial<R>(std::move(t), k, r));
    }
  }
  return out;
}

/// P(jets of f o phi) as a polynomial in the jets of f (coefficients in R).
template <class R>
BasicJetPolynomial<R> pullback(const BasicReparamJet<R>& phi, const JetPolynomial& p) {
  using Terms = typename BasicJetPolynomial<R>::Terms;
  const int k = p.max_present_order();
  if (k > phi.order())
    throw InputError("pullback: polynomial order " + std::to_string(k) +
                     " exceeds reparametrization order " + std::to_string(phi.order()));
  if (k == 0) return p.map_coefficients([](const GaussianRational& c) { return R(c); });

  const auto subst = act(phi, k, p.rank());
  std::map<JetVariable, std::vector<Terms>> power_cache;
  auto subst_power = [&](const JetVariable& v, int e) -> const Terms& {
    auto& cache = power_cache[v];
    if (cache.empty()) cache.push_back(Terms(R(1)));
    while (static_cast<int>(cache.size()) <= e) cache.push_back(cache.back() * subst.at(v).terms());
    return cache[static_cast<std::size_t>(e)];
  };

  Terms total;
  for (const auto& [m, c] : p.terms().terms()) {
    std::vector<JetMonomial::Entry> base;
    for (const auto& entry : m.entries())
      if (entry.first.is_base()) base.push_back(entry);
    Terms term(JetMonomial::from_entries(base), R(c));
    for (const auto& [v, e] : m.entries())
      if (!v.is_base()) term = term * subst_power(v, e);
    total += term;
  }
  return BasicJetPolynomial<R>(std::move(total), p.order(), p.rank());
}

struct InvarianceWitness {
  ReparamJet phi;
  std::map<JetVariable, GaussianRational> point;
  GaussianRational pulled_back;  // P evaluated on the jets of f o phi
  GaussianRational expected;     // a_1^m P evaluated on the jets of f
  int reference_weight = 0;      // m used for `expected`
};

struct InvarianceReport {
  bool invariant = false;
  std::optional<int> weight;
  std::optional<InvarianceWitness> witness;
};

namespace detail {

inline std::optional<InvarianceWitness> try_witness(const JetPolynomial& p, int m,
                                                    const std::vector<GaussianRational>& a,
                                                    const std::map<JetVariable, GaussianRational>& point) {
  const ReparamJet phi(a);
  const GaussianRational lhs = evaluate(pullback(phi, p), point);
  GaussianRational scale = 1;
  for (int i = 0; i < m; ++i) scale *= a.front();
  const GaussianRational rhs = scale * evaluate(p, point);
  if (lhs == rhs) return std::nullopt;
  return InvarianceWitness{phi, point, lhs, rhs, m};
}

inline std::vector<JetVariable> variables_of(int k, int r) {
  std::vector<JetVariable> vars;
  for (int a = 1; a <= r; ++a) vars.push_back(JetVariable::base(a));
  for (int s = 1; s <= k; ++s)
    for (int a = 1; a <= r; ++a) vars.push_back({s, a});
  return vars;
}

/// Searches for a rational reparametrization and jet value that separate
/// pullback(phi, P) from a_1^m P. Structured candidates first, then
/// pseudo-random integer points from a fixed seed.
inline InvarianceWitness find_witness(const JetPolynomial& p, int k, int m) {
  const auto vars = variables_of(k, p.rank());
  {
    std::vector<GaussianRational> a(static_cast<std::size_t>(k), GaussianRational(0));
    a[0] = 1;
    if (k >= 2) a[1] = 1;
    std::map<JetVariable, GaussianRational> point;
    for (const auto& v : vars) point[v] = (v.order <= 1) ? 1 : 0;
    if (auto w = try_witness(p, m, a, point)) return *w;
    for (const auto& v : vars) point[v] = 1;
    if (auto w = try_witness(p, m, a, point)) return *w;
  }
  std::mt19937_64 gen(0x6a65746361ULL);
  std::uniform_int_distribution<int> coord(-97, 97);
  std::uniform_int_distribution<int> lead(1, 97);
  for (int attempt = 0; attempt < 64; ++attempt) {
    std::vector<GaussianRational> a;
    a.push_back(GaussianRational(lead(gen) * (attempt % 2 ? -1 : 1)));
    for (int s = 2; s <= k; ++s) a.push_back(GaussianRational(coord(gen)));
    std::map<JetVariable, GaussianRational> point;
    for (const auto& v : vars) point[v] = coord(gen);
    if (auto w = try_witness(p, m, a, point)) return *w;
  }
  throw Error("invariance_weight: no separating witness found for a non-identity");
}

}  // namespace detail

/// Decides symbolically whether pullback(phi, P) = a_1^m P for every
/// reparametrization phi; on failure returns a concrete rational witness.
inline InvarianceReport invariance_weight(const JetPolynomial& p) {
  if (p.is_zero()) throw InputError("invariance_weight needs a nonzero polynomial");
  const int k = std::max(1, p.max_present_order());
  const auto degrees = *weighted_degree(p);
  InvarianceReport report;
  if (degrees.size() == 1) {
    const int m = *degrees.begin();
    const auto pulled = pullback(symbolic_reparam(k), p);
    const ParamPolynomial lead_power = pow(param(1), m);
    const auto target =
        p.map_coefficients([&](const GaussianRational& c) { return ParamPolynomial(c) * lead_power; });
    if (pulled == target) {
      report.invariant = true;
      report.weight = m;
      return report;
    }
    report.witness = detail::find_witness(p, k, m);
    return report;
  }
  report.witness = detail::find_witness(p, k, *degrees.rbegin());
  return report;
}

/// Wronskian det[ delta^j u_i ]_{i, j = 1..s} of the jet polynomials u_i(f).
/// Columns start at the first derivative.
inline JetPolynomial wronskian(std::span<const JetPolynomial> u, std::optional<int> max_order = std::nullopt) {
  const int s = static_cast<int>(u.size());
  if (s < 1) throw InputError("wronskian needs at least one function");
  if (s > 20) throw OrderOverflowError("wronskian size too large");
  if (max_order && s > *max_order)
    throw OrderOverflowError("wronskian of " + std::to_string(s) + " functions needs jet order " +
                             std::to_string(s) + " > budget " + std::to_string(*max_order));
  int r = 1;
  int k = 0;
  for (const auto& p : u) {
    r = std::max(r, p.rank());
    k = std::max(k, p.order());
  }
  std::vector<std::vector<JetPolynomial>> entry(static_cast<std::size_t>(s));
  for (int i = 0; i < s; ++i) {
    JetPolynomial d = u[static_cast<std::size_t>(i)];
    for (int j = 0; j < s; ++j) {
      d = delta(d);
      entry[i].push_back(d);
    }
  }
  // Laplace expansion along rows, memoized on the set of remaining columns.
  std::unordered_map<std::uint32_t, JetPolynomial> memo;
  auto det = [&](auto& self, int row, std::uint32_t cols) -> JetPolynomial {
    if (row == s) return JetPolynomial::constant(1, k + s, r);
    if (auto it = memo.find(cols); it != memo.end()) return it->second;
    JetPolynomial total(k + s, r);
    int seen = 0;
    for (int c = 0; c < s; ++c) {
      if (!(cols & (1u << c))) continue;
      const JetPolynomial& a = entry[row][c];
      if (!a.is_zero()) {
        JetPolynomial minor = self(self, row + 1, cols & ~(1u << c));
        JetPolynomial prod = a * minor;
        total = (seen % 2 == 0) ? total + prod : total - prod;
      }
      ++seen;
    }
    memo.emplace(cols, total);
    return total;
  };
  return det(det, 0, (1u << s) - 1u).with_order(k + s);
}

/// [P, Q] = P delta(Q)/deg Q - Q delta(P)/deg P for weighted-homogeneous P, Q.
/// Homogeneous of weighted degree deg P + deg Q + 1; invariant when P, Q are.
inline JetPolynomial bracket(const JetPolynomial& p, const JetPolynomial& q) {
  const auto dp = homogeneous_degree(p);
  const auto dq = homogeneous_degree(q);
  if (!dp || !dq) throw DegreeError("bracket needs weighted-homogeneous nonzero arguments");
  if (*dp == 0 || *dq == 0) throw DegreeError("bracket needs arguments of nonzero weighted degree");
  const GaussianRational inv_p(Rational(1, *dp));
  const GaussianRational inv_q(Rational(1, *dq));
  return inv_q * (p * delta(q)) - inv_p * (q * delta(p));
}

struct GeneratorMember {
  std::vector<int> index;  // components bracketed in, outermost first
  JetPolynomial polynomial;
  int weight = 0;
};

struct GeneratorFamily {
  int level = 0;
  int rank = 0;
  std::vector<GeneratorMember> members;
  std::string empty_reason;  // set iff members is empty
};

/// Q_2 = {[xi_{1,j}, xi_{1,l}] : j < l}; Q_m = {[xi_{1,j}, q] : j, q in Q_{m-1}}.
inline GeneratorFamily qk_family(int k, int r) {
  if (k < 2) throw InputError("qk_family needs k >= 2");
  if (r < 1) throw InputError("qk_family needs r >= 1");
  GeneratorFamily fam{k, r, {}, {}};
  if (r == 1) {
    fam.empty_reason = "rank 1: the exterior square of V vanishes";
    return fam;
  }
  std::vector<GeneratorMember> level;
  for (int j = 1; j <= r; ++j)
    for (int l = j + 1; l <= r; ++l) {
      auto b = bracket(JetPolynomial::xi(1, j, 1, r), JetPolynomial::xi(1, l, 1, r));
      level.push_back({{j, l}, b, *homogeneous_degree(b)});
    }
  for (int m = 3; m <= k; ++m) {
    std::vector<GeneratorMember> next;
    for (int j = 1; j <= r; ++j)
      for (const auto& q : level) {
        auto b = bracket(JetPolynomial::xi(1, j, 1, r), q.polynomial);
        if (b.is_zero()) continue;
        std::vector<int> idx{j};
        idx.insert(idx.end(), q.index.begin(), q.index.end());
        next.push_back({std::move(idx), b, *homogeneous_degree(b)});
      }
    level = std::move(next);
  }
  fam.members = std::move(level);
  if (fam.members.empty()) fam.empty_reason = "all brackets vanish";
  return fam;
}

/// Element N / xi_{1,1}^e of the jet polynomial ring localized at xi_{1,1},
/// kept reduced (e minimal).
class XiUnitFraction {
 public:
  XiUnitFraction() = default;
  XiUnitFraction(long long c) : num_(JetPolynomial::constant(c, 0, 1)) {}  // NOLINT
  XiUnitFraction(const GaussianRational& c) : num_(JetPolynomial::constant(c, 0, 1)) {}  // NOLINT
  XiUnitFraction(JetPolynomial num, int den) : num_(std::move(num)), den_(den) { normalize(); }

  static constexpr JetVariable unit{1, 1};

  const JetPolynomial& numerator() const { return num_; }
  int denominator_exponent() const { return den_; }
  bool is_zero() const { return num_.is_zero(); }
  friend bool is_zero(const XiUnitFraction& x) { return x.is_zero(); }

  XiUnitFraction operator-() const { return {-num_, den_}; }

  friend XiUnitFraction operator+(const XiUnitFraction& a, const XiUnitFraction& b) {
    const int d = std::max(a.den_, b.den_);
    return {a.lifted(d) + b.lifted(d), d};
  }
  friend XiUnitFraction operator-(const XiUnitFraction& a, const XiUnitFraction& b) { return a + (-b); }
  friend XiUnitFraction operator*(const XiUnitFraction& a, const XiUnitFraction& b) {
    return {a.num_ * b.num_, a.den_ + b.den_};
  }
  XiUnitFraction& operator+=(const XiUnitFraction& o) { return *this = *this + o; }
  XiUnitFraction& operator*=(const XiUnitFraction& o) { return *this = *this * o; }

  friend bool operator==(const XiUnitFraction& a, const XiUnitFraction& b) {
    return a.den_ == b.den_ && a.num_ == b.num_;
  }

  /// Inverse of c * xi_{1,1}^e; anything else is not a unit.
  friend XiUnitFraction unit_inverse(const XiUnitFraction& x) {
    const auto& terms = x.num_.terms().terms();
    if (terms.size() != 1) throw DomainError("element is not a unit of the localized ring");
    const auto& [m, c] = *terms.begin();
    const int e = m.exponent(unit);
    if (m.entries().size() != (e > 0 ? 1u : 0u)) throw DomainError("element is not a unit of the localized ring");
    const GaussianRational inv = c.inverse();
    if (x.den_ >= e) return {JetPolynomial(JetPolynomial::Terms(JetMonomial::variable(unit, x.den_ - e), inv), 1, x.num_.rank()), 0};
    return {JetPolynomial::constant(inv, 0, x.num_.rank()), e - x.den_};
  }

 private:
  JetPolynomial lifted(int d) const {
    if (d == den_) return num_;
    const auto shift = JetPolynomial(JetPolynomial::Terms(JetMonomial::variable(unit, d - den_), 1), 1, 1);
    return num_ * shift;
  }

  void normalize() {
    if (num_.is_zero()) {
      den_ = 0;
      return;
    }
    int common = den_;
    for (const auto& [m, c] : num_.terms().terms()) common = std::min(common, m.exponent(unit));
    if (common <= 0) return;
    JetPolynomial::Terms t;
    for (const auto& [m, c] : num_.terms().terms()) t.add_term(m.times_variable(unit, -common), c);
    num_ = JetPolynomial(std::move(t), num_.order(), num_.rank());
    den_ -= common;
  }

  JetPolynomial num_{0, 1};
  int den_ = 0;
};

struct CoordinateNumerator {
  int component = 0;  // j >= 2
  int order = 0;      // s: derivative order of g_j
  JetPolynomial numerator;
  int denominator_exponent = 0;  // power of xi_{1,1} below the numerator
  int weight = 0;                // weighted degree of the numerator
};

/// Derivatives g_j^{(s)}(0), 1 <= s <= k, of g_j = f_j o f_1^{-1} for j = 2..r,
/// each written as numerator / xi_{1,1}^e in lowest terms.
inline std::vector<CoordinateNumerator> invariant_coords(int k, int r) {
  if (k < 2 || r < 2) throw InputError("invariant_coords needs k >= 2 and r >= 2");
  auto jet_series = [&](int component) {
    TruncatedSeries<XiUnitFraction> s(k);
    for (int i = 1; i <= k; ++i)
      s[i] = XiUnitFraction(JetPolynomial::xi(i, component, k, r) * factorial(i).inverse(), 0);
    return s;
  };
  const auto inverse_first = reversion(jet_series(1));
  std::vector<CoordinateNumerator> out;
  for (int j = 2; j <= r; ++j) {
    const auto g = compose(jet_series(j), inverse_first);
    for (int s = 1; s <= k; ++s) {
      const XiUnitFraction d = g[s] * XiUnitFraction(factorial(s));
      JetPolynomial num = d.numerator().with_order(k);
      const int w = homogeneous_degree(num).value_or(-1);
      out.push_back({j, s, std::move(num), d.denominator_exponent(), w});
    }
  }
  return out;
}

}  // namespace jetcalc
