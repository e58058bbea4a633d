#pragma once

#include <algorithm>
#include <cstddef>
#include <functional>
#include <map>
#include <ostream>
#include <utility>
#include <vector>

namespace jetcalc {

/// Sparse monomial over ordered variable keys: sorted (key, exponent) pairs,
/// every exponent positive.
template <class Key>
class Monomial {
 public:
  using Entry = std::pair<Key, int>;

  Monomial() = default;

  static Monomial variable(const Key& k, int e = 1) {
    Monomial m;
    if (e > 0) m.entries_.push_back({k, e});
    return m;
  }

  /// Builds from arbitrary (key, exponent) pairs; merges duplicates, drops zeros.
  static Monomial from_entries(std::vector<Entry> es) {
    std::sort(es.begin(), es.end(), [](const Entry& a, const Entry& b) { return a.first < b.first; });
    Monomial m;
    for (auto& [k, e] : es) {
      if (!m.entries_.empty() && m.entries_.back().first == k)
        m.entries_.back().second += e;
      else
        m.entries_.push_back({k, e});
    }
    std::erase_if(m.entries_, [](const Entry& x) { return x.second == 0; });
    return m;
  }

  const std::vector<Entry>& entries() const { return entries_; }
  bool is_one() const { return entries_.empty(); }

  int exponent(const Key& k) const {
    auto it = std::lower_bound(entries_.begin(), entries_.end(), k,
                               [](const Entry& a, const Key& key) { return a.first < key; });
    return (it != entries_.end() && it->first == k) ? it->second : 0;
  }

  int total_degree() const {
    int d = 0;
    for (const auto& e : entries_) d += e.second;
    return d;
  }

  /// Multiplies by k^e (e may be negative as long as the result stays polynomial).
  Monomial times_variable(const Key& k, int e) const {
    Monomial m;
    m.entries_.reserve(entries_.size() + 1);
    bool placed = false;
    for (const auto& x : entries_) {
      if (!placed && !(x.first < k)) {
        if (x.first == k) {
          if (x.second + e != 0) m.entries_.push_back({k, x.second + e});
          placed = true;
          continue;
        }
        if (e != 0) m.entries_.push_back({k, e});
        placed = true;
      }
      m.entries_.push_back(x);
    }
    if (!placed && e != 0) m.entries_.push_back({k, e});
    return m;
  }

  friend Monomial operator*(const Monomial& a, const Monomial& b) {
    Monomial m;
    m.entries_.reserve(a.entries_.size() + b.entries_.size());
    auto i = a.entries_.begin();
    auto j = b.entries_.begin();
    while (i != a.entries_.end() || j != b.entries_.end()) {
      if (j == b.entries_.end() || (i != a.entries_.end() && i->first < j->first)) {
        m.entries_.push_back(*i++);
      } else if (i == a.entries_.end() || j->first < i->first) {
        m.entries_.push_back(*j++);
      } else {
        m.entries_.push_back({i->first, i->second + j->second});
        ++i;
        ++j;
      }
    }
    return m;
  }

  friend bool operator==(const Monomial&, const Monomial&) = default;

  /// Global term order: lexicographic in ascending variable keys, larger
  /// exponent first.
  friend bool canonical_less(const Monomial& a, const Monomial& b) {
    auto i = a.entries_.begin();
    auto j = b.entries_.begin();
    for (; i != a.entries_.end() && j != b.entries_.end(); ++i, ++j) {
      if (i->first < j->first) return true;
      if (j->first < i->first) return false;
      if (i->second != j->second) return i->second > j->second;
    }
    return i != a.entries_.end();
  }

  struct Less {
    bool operator()(const Monomial& a, const Monomial& b) const { return canonical_less(a, b); }
  };

 private:
  std::vector<Entry> entries_;
};

namespace detail {
template <class C>
bool coeff_is_zero(const C& c) {
  return is_zero(c);
}
}  // namespace detail

/// Sparse polynomial: map from monomial to nonzero coefficient, kept in the
/// canonical term order. Coeff must provide ring operations and an ADL
/// `is_zero`.
template <class Mono, class Coeff>
class SparsePolynomial {
 public:
  using MonomialType = Mono;
  using Coefficient = Coeff;
  using TermMap = std::map<Mono, Coeff, typename Mono::Less>;

  SparsePolynomial() = default;
  explicit SparsePolynomial(const Coeff& c) { add_term(Mono{}, c); }
  SparsePolynomial(const Mono& m, const Coeff& c) { add_term(m, c); }

  const TermMap& terms() const { return terms_; }
  std::size_t size() const { return terms_.size(); }
  bool is_zero() const { return terms_.empty(); }
  friend bool is_zero(const SparsePolynomial& p) { return p.is_zero(); }

  void add_term(const Mono& m, const Coeff& c) {
    if (detail::coeff_is_zero(c)) return;
    auto [it, inserted] = terms_.try_emplace(m, c);
    if (!inserted) {
      it->second += c;
      if (detail::coeff_is_zero(it->second)) terms_.erase(it);
    }
  }

  Coeff coefficient(const Mono& m) const {
    auto it = terms_.find(m);
    return it == terms_.end() ? Coeff{} : it->second;
  }

  template <class F>
  SparsePolynomial filtered(F keep) const {
    SparsePolynomial out;
    for (const auto& [m, c] : terms_)
      if (keep(m)) out.terms_.emplace_hint(out.terms_.end(), m, c);
    return out;
  }

  SparsePolynomial operator-() const {
    SparsePolynomial out = *this;
    for (auto& [m, c] : out.terms_) c = -c;
    return out;
  }

  SparsePolynomial& operator+=(const SparsePolynomial& o) {
    for (const auto& [m, c] : o.terms_) add_term(m, c);
    return *this;
  }
  SparsePolynomial& operator-=(const SparsePolynomial& o) {
    for (const auto& [m, c] : o.terms_) add_term(m, -c);
    return *this;
  }
  SparsePolynomial& operator*=(const Coeff& s) {
    if (detail::coeff_is_zero(s)) {
      terms_.clear();
      return *this;
    }
    for (auto& [m, c] : terms_) c *= s;
    return *this;
  }

  friend SparsePolynomial operator+(SparsePolynomial a, const SparsePolynomial& b) { return a += b; }
  friend SparsePolynomial operator-(SparsePolynomial a, const SparsePolynomial& b) { return a -= b; }
  friend SparsePolynomial operator*(SparsePolynomial a, const Coeff& s) { return a *= s; }
  friend SparsePolynomial operator*(const Coeff& s, SparsePolynomial a) { return a *= s; }

  friend SparsePolynomial operator*(const SparsePolynomial& a, const SparsePolynomial& b) {
    SparsePolynomial out;
    for (const auto& [ma, ca] : a.terms_)
      for (const auto& [mb, cb] : b.terms_) out.add_term(ma * mb, ca * cb);
    return out;
  }
  SparsePolynomial& operator*=(const SparsePolynomial& o) { return *this = *this * o; }

  friend bool operator==(const SparsePolynomial& a, const SparsePolynomial& b) {
    return a.terms_ == b.terms_;
  }

  /// Substitutes every coefficient through `f`, dropping zeros.
  template <class F>
  auto map_coefficients(F f) const {
    using Out = decltype(f(std::declval<const Coeff&>()));
    SparsePolynomial<Mono, Out> out;
    for (const auto& [m, c] : terms_) out.add_term(m, f(c));
    return out;
  }

 private:
  TermMap terms_;
};

template <class Mono, class Coeff>
std::ostream& operator<<(std::ostream& os, const SparsePolynomial<Mono, Coeff>& p) {
  if (p.is_zero()) return os << "0";
  os << "(";
  bool first = true;
  for (const auto& [m, c] : p.terms()) {
    if (!first) os << " + ";
    first = false;
    os << c << "*" << m;
  }
  return os << ")";
}

template <class Mono, class Coeff>
SparsePolynomial<Mono, Coeff> pow(const SparsePolynomial<Mono, Coeff>& p, int e) {
  SparsePolynomial<Mono, Coeff> result{Coeff(1)};
  SparsePolynomial<Mono, Coeff> base = p;
  while (e > 0) {
    if (e & 1) result = result * base;
    e >>= 1;
    if (e) base = base * base;
  }
  return result;
}

}  // namespace jetcalc
