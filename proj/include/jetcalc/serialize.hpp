#pragma once

#include <cmath>
#include <fstream>
#include <limits>
#include <regex>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "jetcalc/curvature.hpp"
#include "jetcalc/errors.hpp"
#include "jetcalc/jetpoly.hpp"
#include "jetcalc/morse.hpp"
#include "jetcalc/reparam.hpp"

namespace jetcalc {

using Json = nlohmann::ordered_json;

namespace detail {

inline Json integer_to_json(const BigInt& v) {
  if (v >= std::numeric_limits<std::int64_t>::min() && v <= std::numeric_limits<std::int64_t>::max())
    return static_cast<std::int64_t>(v);
  return v.str();
}

inline BigInt integer_from_json(const Json& j, const char* what) {
  if (j.is_number_integer()) return BigInt(j.get<std::int64_t>());
  if (j.is_number_unsigned()) return BigInt(j.get<std::uint64_t>());
  if (j.is_string()) {
    static const std::regex digits("-?[0-9]+");
    const auto s = j.get<std::string>();
    if (std::regex_match(s, digits)) return BigInt(s);
  }
  throw InputError(std::string(what) + " must be an integer or a decimal integer string");
}

inline int small_int(const Json& j, const char* what) {
  if (!j.is_number_integer()) throw InputError(std::string(what) + " must be an integer");
  const auto v = j.get<std::int64_t>();
  if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max())
    throw InputError(std::string(what) + " out of range");
  return static_cast<int>(v);
}

inline const Json& field(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw InputError(std::string("missing field \"") + key + "\"");
  return j.at(key);
}

inline Rational rational_from(const Json& num, const Json& den) {
  BigInt d = integer_from_json(den, "denominator");
  BigInt n = integer_from_json(num, "numerator");
  if (d == 0) throw InputError("zero denominator in coefficient");
  if (d < 0) {  // cpp_rational rejects negative denominators
    d = -d;
    n = -n;
  }
  return Rational(n, d);
}

}  // namespace detail

/// [num_re, den_re, num_im, den_im] in lowest terms with positive denominators.
inline Json to_json(const GaussianRational& c) {
  using boost::multiprecision::denominator;
  using boost::multiprecision::numerator;
  return Json::array({detail::integer_to_json(numerator(c.real())), detail::integer_to_json(denominator(c.real())),
                      detail::integer_to_json(numerator(c.imag())), detail::integer_to_json(denominator(c.imag()))});
}

inline GaussianRational coefficient_from_json(const Json& j) {
  if (!j.is_array() || j.size() != 4) throw InputError("coefficient must be [num_re, den_re, num_im, den_im]");
  return {detail::rational_from(j[0], j[1]), detail::rational_from(j[2], j[3])};
}

/// {"k", "r", "terms": [{"coeff", "z": [[i, e]], "xi": [[s, alpha, e]]}]},
/// terms in canonical monomial order.
inline Json to_json(const JetPolynomial& p) {
  Json terms = Json::array();
  for (const auto& [m, c] : p.terms().terms()) {
    Json z = Json::array(), xi = Json::array();
    for (const auto& [v, e] : m.entries()) {
      if (v.is_base())
        z.push_back({v.component, e});
      else
        xi.push_back({v.order, v.component, e});
    }
    Json t;
    t["coeff"] = to_json(c);
    t["z"] = std::move(z);
    t["xi"] = std::move(xi);
    terms.push_back(std::move(t));
  }
  Json out;
  out["k"] = p.order();
  out["r"] = p.rank();
  out["terms"] = std::move(terms);
  return out;
}

/// Inverse of to_json; repeated monomials are summed.
inline JetPolynomial polynomial_from_json(const Json& j) {
  const int k = detail::small_int(detail::field(j, "k"), "k");
  const int r = detail::small_int(detail::field(j, "r"), "r");
  const Json& terms = detail::field(j, "terms");
  if (!terms.is_array()) throw InputError("\"terms\" must be an array");
  JetPolynomial::Terms acc;
  for (const auto& t : terms) {
    std::vector<JetMonomial::Entry> es;
    if (t.contains("z"))
      for (const auto& v : t.at("z")) {
        if (!v.is_array() || v.size() != 2) throw InputError("z entries must be [i, e]");
        es.push_back({JetVariable::base(detail::small_int(v[0], "z index")), detail::small_int(v[1], "exponent")});
      }
    if (t.contains("xi"))
      for (const auto& v : t.at("xi")) {
        if (!v.is_array() || v.size() != 3) throw InputError("xi entries must be [s, alpha, e]");
        const int s = detail::small_int(v[0], "xi order");
        if (s < 1) throw InputError("xi order must be >= 1");
        es.push_back({JetVariable{s, detail::small_int(v[1], "xi component")}, detail::small_int(v[2], "exponent")});
      }
    for (const auto& e : es)
      if (e.second < 1) throw InputError("exponents must be positive");
    acc.add_term(JetMonomial::from_entries(std::move(es)), coefficient_from_json(detail::field(t, "coeff")));
  }
  return JetPolynomial(std::move(acc), k, r);
}

inline Json to_json(const ReparamJet& phi) {
  Json a = Json::array();
  for (const auto& c : phi.coefficients()) a.push_back(to_json(c));
  Json out;
  out["k"] = phi.order();
  out["a"] = std::move(a);
  return out;
}

inline ReparamJet reparam_from_json(const Json& j) {
  const int k = detail::small_int(detail::field(j, "k"), "k");
  const Json& a = detail::field(j, "a");
  if (!a.is_array() || static_cast<int>(a.size()) != k) throw InputError("\"a\" must list exactly k coefficients");
  std::vector<GaussianRational> cs;
  for (const auto& c : a) cs.push_back(coefficient_from_json(c));
  return ReparamJet(std::move(cs));
}

/// {"n", "r", "c": [[i, j, lambda, mu, re, im]]}, 1-based, omitted entries zero.
inline CurvatureTensor curvature_from_json(const Json& j) {
  const int n = detail::small_int(detail::field(j, "n"), "n");
  const int r = detail::small_int(detail::field(j, "r"), "r");
  const Json& c = detail::field(j, "c");
  if (!c.is_array()) throw InputError("\"c\" must be an array");
  std::vector<CurvatureEntry> es;
  for (const auto& e : c) {
    if (!e.is_array() || e.size() != 6 || !e[4].is_number() || !e[5].is_number())
      throw InputError("curvature entries must be [i, j, lambda, mu, re, im]");
    es.push_back({detail::small_int(e[0], "i"), detail::small_int(e[1], "j"), detail::small_int(e[2], "lambda"),
                  detail::small_int(e[3], "mu"), Complex(e[4].get<double>(), e[5].get<double>())});
  }
  return validate_tensor(n, r, es);
}

/// Nonzero entries of a validated tensor in the input format.
inline Json to_json(const CurvatureTensor& c) {
  Json entries = Json::array();
  for (int i = 0; i < c.n(); ++i)
    for (int j = 0; j < c.n(); ++j)
      for (int l = 0; l < c.r(); ++l)
        for (int m = 0; m < c.r(); ++m) {
          const Complex v = c(i, j, l, m);
          if (v != Complex{}) entries.push_back({i + 1, j + 1, l + 1, m + 1, v.real(), v.imag()});
        }
  Json out;
  out["n"] = c.n();
  out["r"] = c.r();
  out["c"] = std::move(entries);
  return out;
}

inline Json to_json(const MetricParams& p) {
  Json out;
  out["p"] = p.p;
  out["eps"] = p.eps;
  return out;
}

inline Json to_json(const GeneratorMember& m) {
  Json out = to_json(m.polynomial);
  out["weight"] = m.weight;
  out["index"] = m.index;
  return out;
}

inline Json to_json(const CoordinateNumerator& c) {
  Json out = to_json(c.numerator);
  out["weight"] = c.weight;
  out["component"] = c.component;
  out["order"] = c.order;
  out["denominator_exponent"] = c.denominator_exponent;
  return out;
}

inline Json to_json(const SymPowerCoeffs& s) {
  Json basis = Json::array(), entries = Json::array();
  for (const auto& a : s.basis) basis.push_back(a);
  for (int i = 0; i < s.n; ++i)
    for (int j = 0; j < s.n; ++j)
      for (std::size_t a = 0; a < s.dim(); ++a)
        for (std::size_t b = 0; b < s.dim(); ++b) {
          const Complex v = s(i, j, a, b);
          if (v != Complex{}) entries.push_back({i + 1, j + 1, a + 1, b + 1, v.real(), v.imag()});
        }
  Json out;
  out["l"] = s.l;
  out["basis"] = std::move(basis);
  out["scale"] = s.scale;
  out["C"] = std::move(entries);
  return out;
}

namespace detail {

// NaN (undefined standard error) serializes as null.
inline Json real(double x) { return std::isfinite(x) ? Json(x) : Json(nullptr); }

}  // namespace detail

inline Json to_json(const IntegralEstimate& e) {
  Json idx = Json::array();
  for (const auto& q : e.index) {
    Json row;
    row["q"] = q.q;
    row["value"] = detail::real(q.value);
    row["stderr"] = detail::real(q.std_error);
    row["count"] = q.count;
    idx.push_back(std::move(row));
  }
  Json out;
  out["variant"] = to_string(e.variant);
  out["k"] = e.k;
  out["n"] = e.n;
  out["r"] = e.r;
  out["I"] = std::move(idx);
  out["alternating"] = {{"value", detail::real(e.alternating)}, {"stderr", detail::real(e.alternating_std_error)}};
  out["degenerate"] = e.degenerate;
  out["prefactor"] = e.prefactor;
  out["seed"] = e.seed;
  out["samples"] = e.samples;
  out["measure"] = "standard complex Gaussian per jet level";
  return out;
}

inline Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot read " + path);
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw InputError(path + ": " + e.what());
  }
}

}  // namespace jetcalc
