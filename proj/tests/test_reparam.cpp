#include <gtest/gtest.h>

#include <random>

#include "jetcalc/reparam.hpp"
#include "test_support.hpp"

namespace jetcalc {
namespace {

using testing::xi;
using testing::z;

ReparamJet jet(std::vector<long long> a) {
  std::vector<GaussianRational> c(a.begin(), a.end());
  return ReparamJet(std::move(c));
}

ReparamJet random_jet(std::mt19937_64& gen, int k) {
  std::uniform_int_distribution<int> num(-6, 6);
  std::uniform_int_distribution<int> den(1, 4);
  std::vector<GaussianRational> a;
  for (int s = 1; s <= k; ++s) {
    int n = num(gen);
    if (s == 1 && n == 0) n = 1;
    a.emplace_back(Rational(n, den(gen)), Rational(s == 1 ? 0 : num(gen), den(gen)));
  }
  return ReparamJet(std::move(a));
}

const JetPolynomial kW = xi(1, 1) * xi(2, 2) - xi(1, 2) * xi(2, 1);

// Independent chain-rule oracle for (f o phi)^{(s)}(0). Expressions are
// polynomials in F_j = f^{(j)}(phi(t)) (stored as xi_{j+1,1}) and
// P_i = phi^{(i)}(t) (stored as xi_{i,2}); d/dt sends F_j -> F_{j+1} P_1 and P_i -> P_{i+1}.
JetPolynomial chain_rule_derivative(const JetPolynomial& e) {
  JetPolynomial out(e.order() + 2, 2);
  for (const auto& [m, c] : e.terms().terms()) {
    for (const auto& [v, x] : m.entries()) {
      JetMonomial rest = m.times_variable(v, -1);
      JetMonomial repl = (v.component == 1)
                             ? JetMonomial::variable({v.order + 1, 1}) * JetMonomial::variable({1, 2})
                             : JetMonomial::variable({v.order + 1, 2});
      out += JetPolynomial(JetPolynomial::Terms(rest * repl, c * GaussianRational(x)), e.order() + 2, 2);
    }
  }
  return out;
}

GaussianRational oracle_act_value(const ReparamJet& phi, int s, const std::vector<GaussianRational>& f_jets) {
  JetPolynomial e = JetPolynomial::xi(1, 1, 1, 2);  // F_0
  for (int i = 0; i < s; ++i) e = chain_rule_derivative(e);
  std::map<JetVariable, GaussianRational> pt;
  for (int j = 1; j <= s; ++j) pt[{j + 1, 1}] = f_jets[static_cast<std::size_t>(j)];
  for (int i = 1; i <= s + 1; ++i)
    pt[{i, 2}] = i <= phi.order() ? factorial(i) * phi.coefficient(i) : GaussianRational(0);
  return evaluate(e, pt);
}

TEST(Compose, Examples) {
  const auto psi = jet({3, -1, 2});
  EXPECT_EQ(compose(ReparamJet::identity(3), psi), psi);
  EXPECT_EQ(compose(psi, ReparamJet::identity(3)), psi);
  EXPECT_EQ(compose(jet({2}), jet({3})), jet({6}));
  EXPECT_EQ(compose(jet({1, 1, 0}), jet({1, 1, 0})), jet({1, 2, 2}));
  EXPECT_THROW(compose(jet({1, 1}), jet({1})), InputError);
}

TEST(Compose, Associative) {
  std::mt19937_64 gen(21);
  for (int trial = 0; trial < 20; ++trial) {
    const auto a = random_jet(gen, 4), b = random_jet(gen, 4), c = random_jet(gen, 4);
    EXPECT_EQ(compose(compose(a, b), c), compose(a, compose(b, c)));
  }
}

TEST(Invert, Examples) {
  EXPECT_EQ(invert(ReparamJet::identity(3)), ReparamJet::identity(3));
  EXPECT_EQ(invert(jet({2, 0})), ReparamJet({GaussianRational(Rational(1, 2)), GaussianRational(0)}));
  EXPECT_EQ(invert(jet({1, 1, 0})), jet({1, -1, 2}));
}

TEST(Invert, TwoSidedInverse) {
  std::mt19937_64 gen(22);
  for (int trial = 0; trial < 20; ++trial) {
    const auto a = random_jet(gen, 5);
    EXPECT_EQ(compose(a, invert(a)), ReparamJet::identity(5));
    EXPECT_EQ(compose(invert(a), a), ReparamJet::identity(5));
  }
}

TEST(Invert, SingularJetRejected) {
  EXPECT_THROW(jet({0, 1}), SingularJetError);
}

TEST(Act, SymbolicLowOrders) {
  const auto sub = act(symbolic_reparam(3), 3, 2);
  using SymPoly = BasicJetPolynomial<ParamPolynomial>;
  auto term = [](const ParamPolynomial& c, int s, int a) {
    return SymPoly(SymPoly::Terms(JetMonomial::variable({s, a}), c), 3, 2);
  };
  const auto a1 = param(1), a2 = param(2), a3 = param(3);
  const ParamPolynomial two(GaussianRational(2)), six(GaussianRational(6));
  for (int a = 1; a <= 2; ++a) {
    EXPECT_EQ(sub.at({1, a}), term(a1, 1, a));
    EXPECT_EQ(sub.at({2, a}), term(two * a2, 1, a) + term(a1 * a1, 2, a));
    EXPECT_EQ(sub.at({3, a}), term(six * a3, 1, a) + term(six * a1 * a2, 2, a) + term(a1 * a1 * a1, 3, a));
  }
}

TEST(Act, MatchesChainRuleOracle) {
  std::mt19937_64 gen(23);
  std::uniform_int_distribution<int> num(-5, 5);
  for (int trial = 0; trial < 10; ++trial) {
    const int k = 5;
    const auto phi = random_jet(gen, k);
    std::vector<GaussianRational> f(k + 1);
    std::map<JetVariable, GaussianRational> pt;
    for (int j = 1; j <= k; ++j) {
      f[j] = num(gen);
      pt[{j, 1}] = f[j];
    }
    const auto sub = act(phi, k, 1);
    for (int s = 1; s <= k; ++s) EXPECT_EQ(evaluate(sub.at({s, 1}), pt), oracle_act_value(phi, s, f)) << s;
  }
}

TEST(Pullback, Examples) {
  const ReparamJet scale({GaussianRational(5), GaussianRational(0)});
  EXPECT_EQ(pullback(scale, xi(2, 1)), GaussianRational(25) * xi(2, 1));
  std::mt19937_64 gen(24);
  EXPECT_EQ(pullback(random_jet(gen, 3), testing::cst(7)), testing::cst(7));
  const auto a1 = param(1);
  const auto sym = pullback(symbolic_reparam(2), kW);
  EXPECT_EQ(sym, kW.map_coefficients([&](const GaussianRational& c) { return ParamPolynomial(c) * a1 * a1 * a1; }));
}

TEST(Pullback, BaseVariablesAreFixed) {
  std::mt19937_64 gen(25);
  const auto phi = random_jet(gen, 2);
  EXPECT_EQ(pullback(phi, z(1) * z(2)), z(1) * z(2));
}

TEST(Pullback, ScalingActsByWeightedDegree) {
  std::mt19937_64 gen(26);
  const GaussianRational lambda(Rational(-3, 2), Rational(1, 3));
  for (int m = 1; m <= 5; ++m) {
    const auto p = testing::random_homogeneous(gen, 4, 2, m, 6);
    GaussianRational lm = 1;
    for (int i = 0; i < m; ++i) lm *= lambda;
    std::vector<GaussianRational> a(4, GaussianRational(0));
    a[0] = lambda;
    EXPECT_EQ(pullback(ReparamJet(a), p), lm * p);
  }
}

TEST(Pullback, RespectsComposition) {
  // The substitution is a right action: pulling back by psi and then by phi
  // equals pulling back by phi o psi.
  std::mt19937_64 gen(27);
  for (int trial = 0; trial < 10; ++trial) {
    const auto phi = random_jet(gen, 3), psi = random_jet(gen, 3);
    const auto p = testing::random_polynomial(gen, 3, 2, 5);
    EXPECT_EQ(pullback(compose(phi, psi), p), pullback(phi, pullback(psi, p)));
  }
}

TEST(Pullback, OrderExceedingJetIsRejected) {
  EXPECT_THROW(pullback(jet({1, 1}), xi(3, 1)), InputError);
}

TEST(InvarianceWeight, Examples) {
  const auto r1 = invariance_weight(xi(1, 1));
  EXPECT_TRUE(r1.invariant);
  EXPECT_EQ(r1.weight, 1);

  const auto r2 = invariance_weight(xi(2, 1));
  EXPECT_FALSE(r2.invariant);
  ASSERT_TRUE(r2.witness);
  // First structured candidate: phi = t + t^2, xi11 = 1, xi21 = 0.
  EXPECT_EQ(r2.witness->phi, jet({1, 1}));
  EXPECT_EQ(r2.witness->point.at({1, 1}), GaussianRational(1));
  EXPECT_EQ(r2.witness->point.at({2, 1}), GaussianRational(0));
  EXPECT_EQ(r2.witness->pulled_back, GaussianRational(2));
  EXPECT_EQ(r2.witness->expected, GaussianRational(0));

  const auto r3 = invariance_weight(kW);
  EXPECT_TRUE(r3.invariant);
  EXPECT_EQ(r3.weight, 3);
}

TEST(InvarianceWeight, WitnessesReallySeparate) {
  std::mt19937_64 gen(28);
  int non_invariant = 0;
  for (int trial = 0; trial < 15; ++trial) {
    const auto p = testing::random_polynomial(gen, 3, 2, 4);
    if (p.is_zero()) continue;
    const auto rep = invariance_weight(p);
    if (rep.invariant) continue;
    ++non_invariant;
    ASSERT_TRUE(rep.witness);
    const auto& w = *rep.witness;
    GaussianRational lead = 1;
    for (int i = 0; i < w.reference_weight; ++i) lead *= w.phi.coefficient(1);
    EXPECT_EQ(evaluate(pullback(w.phi, p), w.point), w.pulled_back);
    EXPECT_EQ(lead * evaluate(p, w.point), w.expected);
    EXPECT_FALSE(w.pulled_back == w.expected);
  }
  EXPECT_GT(non_invariant, 0);
}

TEST(InvarianceWeight, NonHomogeneousIsNotInvariant) {
  const auto rep = invariance_weight(xi(1, 1) + kW);
  EXPECT_FALSE(rep.invariant);
  EXPECT_FALSE(rep.weight.has_value());
}

TEST(Wronskian, Examples) {
  const std::vector<JetPolynomial> one{z(1)};
  EXPECT_EQ(wronskian(one), xi(1, 1));
  const std::vector<JetPolynomial> two{z(1), z(2)};
  EXPECT_EQ(wronskian(two), kW);
  // delta(z1^2) = 2 z1 xi11, delta^2(z1^2) = 2 xi11^2 + 2 z1 xi21.
  const std::vector<JetPolynomial> sq{z(1), z(1) * z(1)};
  EXPECT_EQ(wronskian(sq), GaussianRational(2) * xi(1, 1) * xi(1, 1) * xi(1, 1));
}

TEST(Wronskian, OrderBudget) {
  const std::vector<JetPolynomial> three{z(1), z(2), z(3)};
  EXPECT_THROW(wronskian(three, 2), OrderOverflowError);
  EXPECT_NO_THROW(wronskian(three, 3));
  EXPECT_THROW(wronskian(std::span<const JetPolynomial>{}), InputError);
}

TEST(Wronskian, AntisymmetryAndRepeats) {
  std::mt19937_64 gen(29);
  for (int trial = 0; trial < 5; ++trial) {
    const auto u1 = testing::random_polynomial(gen, 0, 3, 3);
    const auto u2 = testing::random_polynomial(gen, 0, 3, 3);
    const auto u3 = testing::random_polynomial(gen, 0, 3, 3);
    const std::vector<JetPolynomial> a{u1, u2, u3}, b{u2, u1, u3}, rep{u1, u2, u1};
    EXPECT_EQ(wronskian(b), -wronskian(a));
    EXPECT_TRUE(wronskian(rep).is_zero());
  }
}

TEST(Wronskian, InvariantOfWeightTriangular) {
  std::mt19937_64 gen(30);
  for (int s = 1; s <= 4; ++s) {
    std::vector<JetPolynomial> u;
    for (int i = 0; i < s; ++i) u.push_back(testing::random_polynomial(gen, 0, 3, 2));
    const auto w = wronskian(u);
    if (w.is_zero()) continue;
    const auto rep = invariance_weight(w);
    EXPECT_TRUE(rep.invariant) << s;
    EXPECT_EQ(rep.weight, s * (s + 1) / 2);
  }
}

TEST(Bracket, Examples) {
  for (int j = 1; j <= 3; ++j)
    for (int l = 1; l <= 3; ++l)
      EXPECT_EQ(bracket(xi(1, j), xi(1, l)), xi(1, j) * xi(2, l) - xi(1, l) * xi(2, j));
  EXPECT_TRUE(bracket(kW, kW).is_zero());
  // [xi11, W] = (1/3) (xi11 delta(W) - 3 W xi21).
  const auto expected = GaussianRational(Rational(1, 3)) *
                        (xi(1, 1) * (xi(1, 1) * xi(3, 2) - xi(1, 2) * xi(3, 1)) -
                         GaussianRational(3) * kW * xi(2, 1));
  EXPECT_EQ(bracket(xi(1, 1), kW), expected);
}

TEST(Bracket, Errors) {
  EXPECT_THROW(bracket(xi(1, 1) + xi(2, 1), xi(1, 1)), DegreeError);
  EXPECT_THROW(bracket(testing::cst(2), xi(1, 1)), DegreeError);
  EXPECT_THROW(bracket(JetPolynomial(2, 2), xi(1, 1)), DegreeError);
}

TEST(Bracket, AntisymmetricAndDegreeAdditive) {
  std::mt19937_64 gen(31);
  for (int trial = 0; trial < 10; ++trial) {
    const auto p = testing::random_homogeneous(gen, 3, 2, 1 + trial % 3, 4);
    const auto q = testing::random_homogeneous(gen, 3, 2, 1 + trial % 4, 4);
    const auto b = bracket(p, q);
    EXPECT_EQ(b, -bracket(q, p));
    if (!b.is_zero()) EXPECT_EQ(homogeneous_degree(b), *homogeneous_degree(p) + *homogeneous_degree(q) + 1);
  }
}

TEST(Bracket, PreservesInvariance) {
  const std::vector<JetPolynomial> u{z(1), z(2) * z(3)};
  const auto w2 = wronskian(u);
  const std::vector<JetPolynomial> invariants{xi(1, 1), xi(1, 2), kW, w2};
  for (const auto& p : invariants)
    for (const auto& q : invariants) {
      const auto b = bracket(p, q);
      if (b.is_zero()) continue;
      const auto rep = invariance_weight(b);
      EXPECT_TRUE(rep.invariant);
      EXPECT_EQ(rep.weight, *homogeneous_degree(p) + *homogeneous_degree(q) + 1);
    }
}

TEST(QkFamily, Examples) {
  const auto q2 = qk_family(2, 2);
  ASSERT_EQ(q2.members.size(), 1u);
  EXPECT_EQ(q2.members[0].polynomial, kW);
  EXPECT_EQ(q2.members[0].weight, 3);
  EXPECT_EQ(q2.members[0].index, (std::vector<int>{1, 2}));

  const auto q3 = qk_family(3, 2);
  ASSERT_EQ(q3.members.size(), 2u);
  for (const auto& m : q3.members) {
    const auto rep = invariance_weight(m.polynomial);
    EXPECT_TRUE(rep.invariant);
    EXPECT_EQ(rep.weight, 5);
  }

  const auto q1 = qk_family(2, 1);
  EXPECT_TRUE(q1.members.empty());
  EXPECT_FALSE(q1.empty_reason.empty());
  EXPECT_THROW(qk_family(1, 2), InputError);
}

TEST(QkFamily, SizesAndWeights) {
  for (int r = 2; r <= 3; ++r)
    for (int k = 2; k <= 4; ++k) {
      const auto fam = qk_family(k, r);
      std::size_t expected = static_cast<std::size_t>(r * (r - 1) / 2);
      for (int m = 3; m <= k; ++m) expected *= static_cast<std::size_t>(r);
      EXPECT_EQ(fam.members.size(), expected);
      for (const auto& m : fam.members) EXPECT_EQ(m.weight, 2 * k - 1);
    }
}

// Quotient-rule oracle: g^{(s)} = N / xi11^e gives
// g^{(s+1)} = (delta(N) xi11 - e N xi21) / xi11^{e+2}.
std::vector<std::pair<JetPolynomial, int>> quotient_rule_coords(int k, int j) {
  std::vector<std::pair<JetPolynomial, int>> out;
  JetPolynomial n = xi(1, j, k, 3);
  int e = 1;
  out.push_back({n, e});
  for (int s = 2; s <= k; ++s) {
    n = delta(n) * xi(1, 1, k, 3) - GaussianRational(e) * n * xi(2, 1, k, 3);
    e += 2;
    out.push_back({n, e});
  }
  return out;
}

TEST(InvariantCoords, Examples) {
  const auto c2 = invariant_coords(2, 2);
  ASSERT_EQ(c2.size(), 2u);
  EXPECT_EQ(c2[0].numerator, xi(1, 2));
  EXPECT_EQ(c2[0].denominator_exponent, 1);
  EXPECT_EQ(c2[1].numerator, kW);
  EXPECT_EQ(c2[1].denominator_exponent, 3);

  const auto c3 = invariant_coords(3, 2);
  ASSERT_EQ(c3.size(), 3u);
  const auto expected = xi(1, 1) * (xi(1, 1) * xi(3, 2) - xi(1, 2) * xi(3, 1)) -
                        GaussianRational(3) * xi(2, 1) * kW;
  EXPECT_EQ(c3[2].numerator, expected);
  EXPECT_EQ(c3[2].denominator_exponent, 5);
  EXPECT_EQ(c3[2].weight, 5);
}

TEST(InvariantCoords, MatchQuotientRuleOracle) {
  for (int k = 2; k <= 5; ++k) {
    const auto coords = invariant_coords(k, 3);
    ASSERT_EQ(coords.size(), static_cast<std::size_t>(2 * k));
    for (const auto& c : coords) {
      const auto oracle = quotient_rule_coords(k, c.component)[static_cast<std::size_t>(c.order - 1)];
      EXPECT_EQ(c.numerator, oracle.first) << "j=" << c.component << " s=" << c.order;
      EXPECT_EQ(c.denominator_exponent, oracle.second);
      EXPECT_EQ(c.weight, 2 * c.order - 1);
      EXPECT_EQ(c.denominator_exponent, 2 * c.order - 1);
    }
  }
}

TEST(InvariantCoords, NumeratorsAreInvariant) {
  for (const auto& c : invariant_coords(4, 2)) {
    const auto rep = invariance_weight(c.numerator);
    EXPECT_TRUE(rep.invariant);
    EXPECT_EQ(rep.weight, 2 * c.order - 1);
  }
  EXPECT_THROW(invariant_coords(1, 2), InputError);
  EXPECT_THROW(invariant_coords(2, 1), InputError);
}

TEST(XiUnitFraction, Arithmetic) {
  const XiUnitFraction a(xi(1, 1) * xi(2, 2), 3);
  EXPECT_EQ(a.denominator_exponent(), 2);
  EXPECT_EQ(a.numerator(), xi(2, 2));
  const XiUnitFraction lead(GaussianRational(2) * xi(1, 1), 0);
  EXPECT_EQ(unit_inverse(lead) * lead, XiUnitFraction(1));
  EXPECT_THROW(unit_inverse(XiUnitFraction(xi(2, 1), 0)), DomainError);
}

}  // namespace
}  // namespace jetcalc
