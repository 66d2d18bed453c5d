#include "stabkit/dlstable.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <sstream>

using namespace stabkit;
using namespace stabkit::dlstable;

namespace {

const SL2Series& series(std::int64_t q) {
  static const SL2Series s3(3), s5(5), s7(7);
  return q == 3 ? s3 : q == 5 ? s5 : s7;
}

std::vector<int> block_sizes(const SL2Series& s) {
  std::vector<int> out;
  for (const auto& b : s.partition().blocks) out.push_back(static_cast<int>(b.size()));
  return out;
}

int find_degree(const SL2Series& s, int degree) {
  for (std::size_t j = 0; j < s.characters().size(); ++j)
    if (s.characters()[j].degree == degree) return static_cast<int>(j);
  return -1;
}

}  // namespace

TEST(QuadraticField, NormOneGenerator) {
  for (std::int64_t q : {3, 5, 7, 11}) {
    QuadraticField F(q);
    const auto z = F.zeta();
    EXPECT_EQ(mod(z.a * z.a - F.d() * z.b * z.b, q), 1);
    std::set<std::pair<std::int64_t, std::int64_t>> powers;
    for (std::int64_t k = 0; k <= q; ++k) {
      const auto y = F.pow(z, k);
      powers.insert({y.a, y.b});
      EXPECT_EQ(F.log_zeta(y), k);
    }
    EXPECT_EQ(static_cast<std::int64_t>(powers.size()), q + 1);
    EXPECT_EQ(F.pow(z, q + 1), (QuadraticElement{1, 0}));
  }
}

TEST(QuadraticField, EllipticEigenvalueSolvesCharacteristicPolynomial) {
  for (std::int64_t q : {3, 5, 7}) {
    QuadraticField F(q);
    for (std::int64_t t = 0; t < q; ++t) {
      const std::int64_t disc = mod(t * t - 4, q);
      if (disc == 0 || is_square_mod(disc, q)) {
        EXPECT_THROW(F.elliptic_eigenvalue(t), ArgumentError);
        continue;
      }
      const auto l = F.elliptic_eigenvalue(t);
      // l^2 - t l + 1 = 0
      auto sq = F.mul(l, l);
      EXPECT_EQ(mod(sq.a - t * l.a + 1, q), 0);
      EXPECT_EQ(mod(sq.b - t * l.b, q), 0);
    }
  }
}

TEST(DualChart, Examples) {
  auto coords = [](std::int64_t q) {
    std::vector<std::int64_t> c;
    const auto ch = dual_chart(q);
    for (const auto& p : ch.points()) c.push_back(p.coordinate);
    return c;
  };
  EXPECT_EQ(coords(3), (std::vector<std::int64_t>{2, 1, 0}));
  EXPECT_EQ(coords(5), (std::vector<std::int64_t>{2, 3, 0, 4, 1}));
  for (std::int64_t q : {3, 5, 7}) {
    auto c = coords(q);
    EXPECT_EQ(std::set<std::int64_t>(c.begin(), c.end()).size(), static_cast<std::size_t>(q));
    const auto ch = dual_chart(q);
    EXPECT_EQ(ch[0].order, 1);
    EXPECT_EQ(ch[1].order, 2);
    EXPECT_EQ(ch[1].coordinate, q - 2);
  }
  EXPECT_EQ(dual_chart(3)[2].torus, TorusType::nonsplit);
  EXPECT_EQ(dual_chart(3)[2].order, 4);
  EXPECT_THROW(dual_chart(4), ArgumentError);
}

TEST(DualChart, CoordinatesMatchBruteForceEigenvalueSums) {
  // Every lambda in F_q^x or in the norm-one group of F_{q^2} lands on the
  // point built from its exponent.
  for (std::int64_t q : {3, 5, 7}) {
    const auto ch = dual_chart(q);
    const auto g = unit_group_generator(q).value();
    for (std::int64_t k = 0; k < q - 1; ++k) {
      const auto l = mod_pow(g, k, q);
      EXPECT_EQ(ch[ch.point_of(TorusType::split, k)].coordinate, mod(l + mod_inv(l, q), q));
    }
    const auto& F = ch.field();
    for (std::int64_t k = 0; k <= q; ++k) {
      const auto l = F.pow(F.zeta(), k);
      const auto inv = F.pow(F.zeta(), q + 1 - k);
      EXPECT_EQ(mod(l.b + inv.b, q), 0);
      EXPECT_EQ(ch[ch.point_of(TorusType::nonsplit, k)].coordinate, mod(l.a + inv.a, q));
    }
  }
}

TEST(DLCharacters, SplitMatchesFrobeniusReciprocity) {
  const auto& s = series(5);
  const auto& G = s.group();
  const auto g = unit_group_generator(5).value();
  std::vector<int> dlog(5, -1);
  for (int k = 0, x = 1; k < 4; ++k, x = static_cast<int>(mod_mul(x, g, 5))) dlog[x] = k;
  for (const auto& r : s.dl_characters()) {
    if (r.torus != TorusType::split) continue;
    for (std::size_t j = 0; j < s.characters().size(); ++j) {
      // <Ind theta, chi> = (1/|B|) sum_{b in B} theta(b) conj(chi(b))
      Complex acc = 0;
      for (int b = 0; b < G.order(); ++b) {
        if (!s.borel().contains(b)) continue;
        const double a = 2 * std::numbers::pi * static_cast<double>(r.theta * dlog[G.element(b)[0]]) / 4.0;
        acc += Complex(std::cos(a), std::sin(a)) * std::conj(s.characters()[j].values.at_element(b));
      }
      acc /= static_cast<double>(s.borel().parabolic_order());
      EXPECT_NEAR(acc.real(), r.coefficients[j], 1e-9);
      EXPECT_NEAR(acc.imag(), 0, 1e-9);
    }
  }
}

TEST(DLCharacters, Examples) {
  const auto& s = series(3);
  const auto& R1 = s.dl_characters().front();
  ASSERT_EQ(R1.torus, TorusType::split);
  ASSERT_EQ(R1.theta, 0);
  std::multiset<int> degs;
  for (std::size_t j = 0; j < R1.coefficients.size(); ++j) {
    EXPECT_GE(R1.coefficients[j], 0);
    if (R1.coefficients[j]) degs.insert(s.characters()[j].degree);
  }
  EXPECT_EQ(degs, (std::multiset<int>{1, 3}));
  for (std::int64_t q : {3, 5, 7}) {
    const auto& t = series(q);
    for (const auto& r : t.dl_characters()) {
      const double deg = r.torus == TorusType::split ? q + 1.0 : -(q - 1.0);
      EXPECT_NEAR(r.values[0].real(), deg, 1e-9);
      const std::int64_t order = r.torus == TorusType::split ? q - 1 : q + 1;
      const bool generic = mod(2 * r.theta, order) != 0;
      const Complex norm = grpfin::inner_product(r.values, r.values);
      EXPECT_NEAR(norm.real(), generic ? 1.0 : 2.0, 1e-9);
      if (generic && r.torus == TorusType::nonsplit) {
        int nz = 0;
        for (std::size_t j = 0; j < r.coefficients.size(); ++j)
          if (r.coefficients[j]) {
            ++nz;
            EXPECT_EQ(r.coefficients[j], -1);
            EXPECT_EQ(t.characters()[j].degree, q - 1);
          }
        EXPECT_EQ(nz, 1);
      }
    }
  }
}

TEST(DLCharacters, PairwiseInnerProductsAreWeylCounts) {
  for (std::int64_t q : {3, 5}) {
    const auto& s = series(q);
    for (const auto& a : s.dl_characters())
      for (const auto& b : s.dl_characters()) {
        const auto ip = grpfin::inner_product(a.values, b.values);
        EXPECT_NEAR(ip.imag(), 0, 1e-9);
        EXPECT_NEAR(ip.real(), std::round(ip.real()), 1e-9);
        int count = 0;
        if (a.torus == b.torus) {
          const std::int64_t ord = a.torus == TorusType::split ? q - 1 : q + 1;
          count = (mod(a.theta - b.theta, ord) == 0) + (mod(a.theta + b.theta, ord) == 0);
        }
        EXPECT_NEAR(ip.real(), count, 1e-9);
      }
  }
}

TEST(SeriesPartition, BlockSizes) {
  EXPECT_EQ(block_sizes(series(3)), (std::vector<int>{2, 4, 1}));
  EXPECT_EQ(block_sizes(series(5)), (std::vector<int>{2, 4, 1, 1, 1}));
  for (std::int64_t q : {3, 5, 7}) {
    const auto& s = series(q);
    int total = 0;
    for (int b : block_sizes(s)) total += b;
    EXPECT_EQ(total, static_cast<int>(s.characters().size()));
  }
}

TEST(SeriesPartition, LMapExamples) {
  for (std::int64_t q : {3, 5, 7}) {
    const auto& s = series(q);
    EXPECT_EQ(s.L_map(0), 0);  // trivial character
    EXPECT_EQ(s.L_map(find_degree(s, static_cast<int>(q))), 0);  // Steinberg
    // Discrete series: the constituent of a generic nonsplit R.
    for (const auto& r : s.dl_characters()) {
      if (r.torus != TorusType::nonsplit || mod(2 * r.theta, q + 1) == 0) continue;
      for (std::size_t j = 0; j < r.coefficients.size(); ++j)
        if (r.coefficients[j]) {
          EXPECT_EQ(s.characters()[j].degree, q - 1);
          EXPECT_EQ(s.L_map(static_cast<int>(j)), r.chart_point);
          EXPECT_EQ(s.chart()[r.chart_point].torus, TorusType::nonsplit);
        }
    }
  }
}

TEST(SeriesPartition, IndependentOfSeed) {
  SL2Series a(5, 0), b(5, 3);
  auto degs = [](const SL2Series& s) {
    std::vector<std::multiset<int>> out;
    for (const auto& bl : s.partition().blocks) {
      std::multiset<int> d;
      for (int j : bl) d.insert(s.characters()[j].degree);
      out.push_back(d);
    }
    return out;
  };
  EXPECT_EQ(degs(a), degs(b));
}

TEST(StableFunctions, Examples) {
  const auto& s = series(3);
  EXPECT_NEAR(s.f_s(0)[0].real(), 10.0, 1e-9);
  for (std::int64_t q : {3, 5, 7}) {
    const auto& t = series(q);
    const auto& G = t.group();
    grpfin::ClassFunction total(G), total_s(G);
    for (int p = 0; p < t.chart().size(); ++p) {
      total = total + t.f_theta(p);
      total_s = total_s + t.f_s(p);
      for (std::size_t j = 0; j < t.characters().size(); ++j) {
        const auto gam = grpfin::gamma_scalar(t.f_theta(p), t.characters()[j]);
        EXPECT_NEAR(std::abs(gam - Complex(t.L_map(static_cast<int>(j)) == p ? 1.0 : 0.0)), 0, 1e-9);
      }
    }
    EXPECT_LT(total.distance(grpfin::ClassFunction::delta_identity(G)), 1e-9);
    EXPECT_LT(total_s.distance(grpfin::ClassFunction::delta_identity(G) * static_cast<double>(G.order())), 1e-9);
  }
}

TEST(StableFunctions, OrthogonalIdempotents) {
  for (std::int64_t q : {3, 5}) {
    const auto& s = series(q);
    for (int a = 0; a < s.chart().size(); ++a)
      for (int b = 0; b < s.chart().size(); ++b) {
        const auto prod = grpfin::convolve(s.f_theta(a), s.f_theta(b));
        const auto expect = a == b ? s.f_theta(a) : grpfin::ClassFunction(s.group());
        EXPECT_LT(prod.distance(expect), 1e-9);
      }
  }
}

TEST(StableFunctions, SpanDimension) {
  for (std::int64_t q : {3, 5, 7}) {
    const auto& s = series(q);
    const int k = s.chart().size();
    // Gram matrices of f_s and f_theta are diagonal with positive entries.
    for (int a = 0; a < k; ++a)
      for (int b = 0; b < k; ++b) {
        const auto ip = grpfin::inner_product(s.f_theta(a), s.f_theta(b));
        if (a == b) EXPECT_GT(ip.real(), 1e-12);
        else EXPECT_LT(std::abs(ip), 1e-12);
        const auto ips = grpfin::inner_product(s.f_s(a), s.f_s(b));
        if (a != b) EXPECT_LT(std::abs(ips), 1e-9);
      }
    EXPECT_EQ(k, q);
  }
}

TEST(Vanishing, StableBasisAtBorel) {
  for (std::int64_t q : {3, 5, 7}) {
    const auto& s = series(q);
    for (int p = 0; p < s.chart().size(); ++p) {
      auto r1 = vanishing_check_group(s.f_s(p), s.borel());
      auto r2 = vanishing_check_group(s.f_theta(p), s.borel());
      EXPECT_LT(r1.max_abs, 1e-8);
      EXPECT_LT(r2.max_abs, 1e-8);
      EXPECT_EQ(r1.sites_checked, s.group().order() - s.borel().parabolic_order());
    }
  }
  EXPECT_EQ(vanishing_check_group(series(5).f_s(0), series(5).borel()).sites_checked, 100);
}

TEST(Vanishing, SingleCharacterHasWitness) {
  for (std::int64_t q : {3, 5}) {
    const auto& s = series(q);
    double best = 0;
    for (const auto& c : s.characters()) best = std::max(best, vanishing_check_group(c.values, s.borel()).max_abs);
    EXPECT_GT(best, 0.5);
    const int st = find_degree(s, static_cast<int>(q));
    auto rep = vanishing_check_group(s.characters()[st].values, s.borel());
    EXPECT_GT(rep.max_abs, 0.5);
    EXPECT_FALSE(s.borel().contains(rep.witness));
  }
}

TEST(Restriction, ChartDiagram) {
  for (std::int64_t q : {3, 5, 7}) EXPECT_LT(series(q).res_diagram_residual(), 1e-8);
}

TEST(Restriction, TorusIndicatorsAreIdempotents) {
  const auto& s = series(5);
  for (int a = 0; a < s.torus_chart_size(); ++a)
    for (int b = 0; b < s.torus_chart_size(); ++b) {
      auto prod = grpfin::convolve(s.torus_f(a), s.torus_f(b));
      EXPECT_LT(prod.distance(a == b ? s.torus_f(a) : grpfin::ClassFunction(s.torus())), 1e-9);
    }
}

TEST(Csv, Exports) {
  std::ostringstream a, b;
  write_series_csv(a, series(3));
  write_f_theta_csv(b, series(3));
  const std::string sa = a.str(), sb = b.str();
  EXPECT_EQ(sa.substr(0, sa.find('\n')), "coordinate,torus,exponent,order,characters,degrees");
  EXPECT_EQ(std::count(sa.begin(), sa.end(), '\n'), 4);
  EXPECT_EQ(std::count(sb.begin(), sb.end(), '\n'), 1 + 3 * series(3).group().num_classes());
}
