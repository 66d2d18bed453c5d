#include "stabkit/grpfin.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <random>
#include <set>
#include <sstream>

using namespace stabkit;
using namespace stabkit::grpfin;

namespace {

const GroupTable& sl2(std::int64_t p, int N = 1) {
  static std::map<std::pair<std::int64_t, int>, std::unique_ptr<GroupTable>> cache;
  auto& slot = cache[{p, N}];
  if (!slot) slot = std::make_unique<GroupTable>(GroupTable::special_linear({2, p, N}));
  return *slot;
}

const GroupTable& sl3_f3() {
  static const GroupTable g = GroupTable::special_linear({3, 3, 1});
  return g;
}

// Conjugacy partition by conjugating with every element.
std::set<std::set<int>> naive_classes(const GroupTable& g) {
  std::set<std::set<int>> out;
  std::vector<bool> done(g.order(), false);
  for (int x = 0; x < g.order(); ++x) {
    if (done[x]) continue;
    std::set<int> cls;
    for (int y = 0; y < g.order(); ++y) cls.insert(g.multiply(g.multiply(y, x), g.inverse(y)));
    for (int c : cls) done[c] = true;
    out.insert(cls);
  }
  return out;
}

// Element-level convolution sum_y f(x y^-1) f'(y).
std::vector<Complex> naive_convolve(const ClassFunction& f, const ClassFunction& h) {
  const auto& g = f.group();
  std::vector<Complex> out(g.order());
  for (int x = 0; x < g.order(); ++x)
    for (int y = 0; y < g.order(); ++y) out[x] += f.at_element(g.multiply(x, g.inverse(y))) * h.at_element(y);
  return out;
}

ClassFunction random_class_function(const GroupTable& g, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1, 1);
  ClassFunction f(g);
  for (int c = 0; c < g.num_classes(); ++c) f[c] = Complex(u(rng), u(rng));
  return f;
}

std::multiset<int> degrees(const std::vector<IrreducibleCharacter>& chars) {
  std::multiset<int> d;
  for (const auto& c : chars) d.insert(c.degree);
  return d;
}

}  // namespace

TEST(Enumerate, OrdersAndClassCounts) {
  EXPECT_EQ(sl2(3).order(), 24);
  EXPECT_EQ(sl2(3).num_classes(), 7);
  EXPECT_EQ(sl2(5).order(), 120);
  EXPECT_EQ(sl2(5).num_classes(), 9);
  EXPECT_EQ(sl2(3, 2).order(), 648);
  EXPECT_EQ(sl2(7).order(), 7 * 48);
  EXPECT_EQ(sl3_f3().order(), 5616);
  for (std::int64_t p : {3, 5, 7}) EXPECT_EQ(sl2(p).order(), p * (p * p - 1));
}

TEST(Enumerate, ClassesMatchNaiveConjugation) {
  for (const GroupTable* g : {&sl2(3), &sl2(5), &sl2(3, 2)}) {
    std::set<std::set<int>> ours;
    int total = 0;
    for (int c = 0; c < g->num_classes(); ++c) {
      ours.insert(std::set<int>(g->class_members(c).begin(), g->class_members(c).end()));
      total += g->class_size(c);
      for (int x : g->class_members(c)) EXPECT_EQ(g->class_of(x), c);
    }
    EXPECT_EQ(total, g->order());
    EXPECT_EQ(ours, naive_classes(*g));
    EXPECT_EQ(g->class_rep(0), g->identity());
  }
}

TEST(Enumerate, DeterministicOrder) {
  const auto a = GroupTable::special_linear({2, 3, 1});
  for (int id = 0; id < a.order(); ++id) EXPECT_EQ(a.element(id), sl2(3).element(id));
}

TEST(Enumerate, CapacityAndArguments) {
  EXPECT_THROW(GroupTable::special_linear({3, 7, 1}), CapacityError);
  EXPECT_THROW(GroupTable::special_linear({2, 4, 1}), ArgumentError);
  EXPECT_THROW(GroupTable::special_linear({4, 3, 1}), ArgumentError);
}

TEST(Enumerate, SubgroupsAndNonSubgroups) {
  const auto torus = GroupTable::subgroup(sl2(5), [](const Matrix& m) { return m[1] == 0 && m[2] == 0; }, "T");
  EXPECT_EQ(torus.order(), 4);
  EXPECT_EQ(torus.num_classes(), 4);
  EXPECT_THROW(GroupTable::subgroup(sl2(5), [](const Matrix& m) { return m[1] <= 1 && m[2] == 0 && m[0] <= 2; }, "bad"),
               StructuralError);
}

TEST(CharacterTable, SL2F3Degrees) {
  const auto chars = character_table(sl2(3));
  ASSERT_EQ(chars.size(), 7u);
  EXPECT_EQ(degrees(chars), (std::multiset<int>{1, 1, 1, 2, 2, 2, 3}));
  // Binary tetrahedral structure: three linear characters factor through the
  // abelianization Z/3, so they are trivial on the center.
  int central_trivial = 0;
  for (const auto& c : chars)
    if (c.degree == 1 && std::abs(c.values[sl2(3).class_of(sl2(3).index_of({2, 0, 0, 2}))] - 1.0) < kTolerance)
      ++central_trivial;
  EXPECT_EQ(central_trivial, 3);
  EXPECT_EQ(chars.front().degree, 1);
  for (auto v : chars.front().values.values()) EXPECT_LT(std::abs(v - 1.0), kTolerance);
}

TEST(CharacterTable, OrthogonalityAndDegreeSum) {
  for (const GroupTable* g : {&sl2(3), &sl2(5), &sl2(7), &sl2(3, 2)}) {
    const auto chars = character_table(*g);
    EXPECT_EQ(static_cast<int>(chars.size()), g->num_classes());
    long long d2 = 0;
    for (const auto& c : chars) {
      d2 += static_cast<long long>(c.degree) * c.degree;
      EXPECT_LT(std::abs(c.values[0] - static_cast<double>(c.degree)), kTolerance);
    }
    EXPECT_EQ(d2, g->order());
    for (std::size_t a = 0; a < chars.size(); ++a)
      for (std::size_t b = 0; b < chars.size(); ++b)
        EXPECT_LT(std::abs(inner_product(chars[a].values, chars[b].values) - (a == b ? 1.0 : 0.0)), kTolerance);
  }
  EXPECT_EQ(character_table(sl2(5)).size(), 9u);
}

TEST(CharacterTable, DeterministicAcrossSeeds) {
  const auto a = character_table(sl2(5), 0);
  const auto b = character_table(sl2(5), 17);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_LT(a[i].values.distance(b[i].values), kTolerance);
}

TEST(Convolve, MatchesElementSum) {
  for (const GroupTable* g : {&sl2(3), &sl2(5)}) {
    const auto f = random_class_function(*g, 1), h = random_class_function(*g, 2);
    const auto fast = convolve(f, h);
    const auto slow = naive_convolve(f, h);
    for (int x = 0; x < g->order(); ++x) EXPECT_LT(std::abs(fast.at_element(x) - slow[x]), 1e-9);
  }
}

TEST(Convolve, UnitOrthogonalityAndSchur) {
  const auto& g = sl2(5);
  const auto chars = character_table(g);
  const auto f = random_class_function(g, 3);
  EXPECT_LT(convolve(ClassFunction::delta_identity(g), f).distance(f), kTolerance);
  for (std::size_t a = 0; a < chars.size(); ++a)
    for (std::size_t b = 0; b < chars.size(); ++b) {
      const auto c = convolve(chars[a].values, chars[b].values);
      if (a == b)
        EXPECT_LT(c.distance(chars[a].values * (static_cast<double>(g.order()) / chars[a].degree)), 1e-8);
      else
        EXPECT_LT(max_abs(c.values()), 1e-8);
    }
}

TEST(Convolve, AssociativeAndIdempotentBasis) {
  const auto& g = sl2(3);
  const auto a = random_class_function(g, 4), b = random_class_function(g, 5), c = random_class_function(g, 6);
  EXPECT_LT(convolve(convolve(a, b), c).distance(convolve(a, convolve(b, c))), 1e-9);
  for (const auto& chi : character_table(g)) {
    const auto e = chi.values * (static_cast<double>(chi.degree) / g.order());
    EXPECT_LT(convolve(e, e).distance(e), 1e-10);
  }
  EXPECT_THROW(convolve(ClassFunction(sl2(3)), ClassFunction(sl2(5))), StructuralError);
}

TEST(Gamma, Examples) {
  const auto& g = sl2(5);
  const auto chars = character_table(g);
  for (const auto& pi : chars) {
    EXPECT_LT(std::abs(gamma_scalar(ClassFunction::delta_identity(g), pi) - 1.0), kTolerance);
    const Complex expect = pi.degree == 1 && std::abs(pi.values[1] - 1.0) < kTolerance
                               ? Complex(static_cast<double>(g.order()))
                               : Complex(0);
    EXPECT_LT(std::abs(gamma_scalar(ClassFunction::constant(g, 1.0), pi) - expect), 1e-8);
    for (const auto& sigma : chars) {
      const Complex gm = gamma_scalar(sigma.values.conj(), pi);
      const double want = &sigma == &pi ? static_cast<double>(g.order()) / pi.degree : 0.0;
      EXPECT_LT(std::abs(gm - want), 1e-8);
    }
  }
}

TEST(Gamma, IsAlgebraMap) {
  const auto& g = sl2(5);
  const auto chars = character_table(g);
  const auto f = random_class_function(g, 7), h = random_class_function(g, 8);
  const auto fh = convolve(f, h);
  for (const auto& pi : chars)
    EXPECT_LT(std::abs(gamma_scalar(fh, pi) - gamma_scalar(f, pi) * gamma_scalar(h, pi)), 1e-6);
}

TEST(ParabolicRes, DeltaAndConstant) {
  const auto& g = sl2(3);
  const auto torus = GroupTable::subgroup(g, [](const Matrix& m) { return is_block_diagonal(m, 2, {1, 1}); }, "T");
  const Parabolic B(g, torus, {1, 1});
  EXPECT_EQ(B.unipotent().size(), 3u);
  EXPECT_EQ(B.parabolic_order(), 6);
  const auto r = parabolic_res_group(ClassFunction::delta_identity(g), B);
  // Oracle: only l = e, u = e contributes.
  for (int c = 0; c < torus.num_classes(); ++c)
    EXPECT_LT(std::abs(r[c] - (c == 0 ? 1.0 / 3.0 : 0.0)), kTightTolerance);
  const auto one = parabolic_res_group(ClassFunction::constant(g, 1.0), B);
  for (auto v : one.values()) EXPECT_LT(std::abs(v - 1.0), kTightTolerance);
}

TEST(ParabolicRes, TransitivityOnSL3) {
  const auto& G = sl3_f3();
  const int n = 3;
  auto diag = [&](std::vector<int> comp) {
    return GroupTable::subgroup(G, [=](const Matrix& m) { return is_block_diagonal(m, n, comp); }, "L");
  };
  const auto T = diag({1, 1, 1});
  const auto L21 = diag({2, 1});
  const auto L12 = diag({1, 2});
  EXPECT_EQ(T.order(), 4);
  EXPECT_EQ(L21.order(), 48);
  const Parabolic B(G, T, {1, 1, 1});
  const Parabolic P21(G, L21, {2, 1}), P12(G, L12, {1, 2});
  const Parabolic B_in_L21(L21, T, {1, 1, 1}), B_in_L12(L12, T, {1, 1, 1});
  for (std::uint64_t seed = 10; seed < 13; ++seed) {
    const auto f = random_class_function(G, seed);
    const auto direct = parabolic_res_group(f, B);
    EXPECT_LT(parabolic_res_group(parabolic_res_group(f, P21), B_in_L21).distance(direct), 1e-10);
    EXPECT_LT(parabolic_res_group(parabolic_res_group(f, P12), B_in_L12).distance(direct), 1e-10);
  }
}

TEST(ParabolicRes, InconsistentDataIsStructural) {
  const auto& g = sl2(3);
  const auto lower = GroupTable::subgroup(g, [](const Matrix& m) { return m[1] == 0; }, "lowerB");
  EXPECT_THROW(Parabolic(g, lower, {1, 1}), StructuralError);
}

TEST(Csv, CharacterTableExport) {
  const auto& g = sl2(3);
  const auto chars = character_table(g);
  std::ostringstream os;
  write_character_table_csv(os, g, chars);
  const auto text = os.str();
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 1 + g.num_classes());
  EXPECT_NE(text.find("\"[[1,0],[0,1]]\",1,1.0000000000+0.0000000000i"), std::string::npos);
}
