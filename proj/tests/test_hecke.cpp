#include "stabkit/hecke.hpp"

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include <cmath>
#include <set>

using namespace stabkit;
using namespace stabkit::hecke;

namespace {

constexpr std::int64_t kP = 3;
constexpr double kExact = 1e-9;

double to_double(const Rational& q) { return static_cast<double>(q.numerator()) / static_cast<double>(q.denominator()); }

// delta_D written on the finer level R inside D.
CosetFunction refined_delta(const Descriptor& D, const Descriptor& R) {
  CosetFunction f(kP, R);
  const double v = 1.0 / to_double(haar_measure(D, kP));
  for (const auto& q : coset_representatives(D, R, kP)) f.add(q, v);
  return f;
}

std::set<CosetKey> support(const CosetFunction& f) {
  std::set<CosetKey> s;
  for (const auto& [k, e] : f.entries()) s.insert(k);
  return s;
}

std::vector<PAdicMatrix> parahoric_generators(Parahoric P, int r) {
  const auto c = parahoric_conjugator(P, kP);
  std::vector<PAdicMatrix> out;
  for (const auto& g : descriptor_generators(parahoric_r(base_of(P), r), kP)) out.push_back(c * g * c.inverse());
  return out;
}

HeckeModel& model(int r) {
  static HeckeModel m0(kP, 0, 1), m1(kP, 1, 1);
  return r == 0 ? m0 : m1;
}

}  // namespace

TEST(CosetFunction, SubgroupAbsorption) {
  const auto lhs = delta_product(hyperspecial_plus(0), iwahori_plus(0), kP);
  EXPECT_LT(lhs.distance(delta(iwahori_plus(0), kP)), kExact);
  const WindowQuotient w(kP, 3);
  const auto direct = convolve_window(delta(hyperspecial_plus(0), kP), delta(iwahori_plus(0), kP), w);
  EXPECT_LT(direct.distance(delta(iwahori_plus(0), kP)), kExact);
  const auto idem = convolve_window(delta(iwahori(), kP), delta(iwahori(), kP), w);
  EXPECT_LT(idem.distance(delta(iwahori(), kP)), kExact);
}

TEST(CosetFunction, WindowConvolutionIsAssociativeAndBilinear) {
  const WindowQuotient w(kP, 3);
  CosetFunction f(kP, iwahori_plus(0)), g(kP, iwahori_plus(0)), h(kP, hyperspecial_plus(0));
  f.add(PAdicMatrix::upper(kP, 1), Complex(0.5, 1));
  f.add(PAdicMatrix::lower(kP, 1), Complex(-1, 0.25));
  g.add(PAdicMatrix::weyl_finite(kP), Complex(2, 0));
  g.add(PAdicMatrix::identity(kP), Complex(0, -1));
  h.add(PAdicMatrix::lower(kP, 2, 1), Complex(1.5, 0.5));
  const auto left = convolve_window(convolve_window(f, g, w), h, w);
  const auto right = convolve_window(f, convolve_window(g, h, w), w);
  EXPECT_LT(left.distance(right), 1e-8);
  const Complex a(0.3, -2);
  const auto lin = convolve_window(f * a + g, h, w);
  EXPECT_LT(lin.distance(convolve_window(f, h, w) * a + convolve_window(g, h, w)), 1e-8);
}

TEST(CosetFunction, ProductOfDeltasMatchesWindow) {
  const WindowQuotient w(kP, 3);
  const std::vector<Descriptor> ds{iwahori(), iwahori_plus(0), hyperspecial_r(0), hyperspecial_plus(0),
                                   second_hyperspecial_plus(0), iwahori_plus(1)};
  for (const auto& A : ds) {
    for (const auto& B : ds) {
      const auto exact = delta_product(A, B, kP);
      const auto window = convolve_window(delta(A, kP), delta(B, kP), w);
      EXPECT_EQ(support(exact), support(window)) << A.to_string() << " " << B.to_string();
      EXPECT_LT(exact.distance(window), kExact) << A.to_string() << " " << B.to_string();
    }
  }
}

TEST(CosetFunction, ConjugatedDeltaHasConjugatedLevel) {
  const auto g = PAdicMatrix::weyl_affine(kP);
  const auto f = delta(iwahori_plus(1), kP).conjugate(g);
  EXPECT_EQ(f.level(), iwahori_plus(1).conjugated_by(g.inverse()));
  EXPECT_LT(f.distance(delta(iwahori_plus(1).conjugated_by(g.inverse()), kP)), kExact);
}

TEST(CosetFunction, CoarseningIsTransitive) {
  CosetFunction f(kP, hyperspecial_plus(1));
  f.add(PAdicMatrix::upper(kP, 1), Complex(1, 2));
  f.add(PAdicMatrix::lower(kP, 2, 1), Complex(-3, 0));
  const auto direct = f.coarsen(iwahori_plus(0));
  EXPECT_LT(f.coarsen(iwahori_plus(1)).coarsen(iwahori_plus(0)).distance(direct), kExact);
  EXPECT_LT(f.coarsen(hyperspecial_plus(0)).coarsen(iwahori_plus(0)).distance(direct), kExact);
  EXPECT_LT(delta(hyperspecial_plus(1), kP).coarsen(hyperspecial_plus(0)).distance(delta(hyperspecial_plus(0), kP)), kExact);
}

TEST(CosetFunction, JsonCarriesExactEntries) {
  CosetFunction f(kP, iwahori());
  f.add(PAdicMatrix::weyl_affine(kP), Complex(1, -1));
  const auto j = nlohmann::json::parse(f.to_json());
  EXPECT_EQ(j["level"], nlohmann::json({0, 0, 1, 0}));
  ASSERT_EQ(j["entries"].size(), 1u);
  EXPECT_EQ(j["entries"][0]["rep"][1], "1/3");
  EXPECT_EQ(j["entries"][0]["im"], -1.0);
}

// delta_{P_J^+} * delta_B = delta_{P_J'^+} * delta_B whenever U_alpha lies in B.
TEST(DeltaProducts, SimpleRootAbsorption) {
  for (int r : {0, 1}) {
    struct Case {
      int alpha;
      Descriptor B;
    };
    for (const auto& c : {Case{1, second_hyperspecial_plus(r)}, Case{0, hyperspecial_plus(r)}}) {
      const auto small = delta_product(parahoric_plus(parahoric_of(1u << c.alpha), r), c.B, kP);
      const auto large = delta_product(parahoric_plus(Parahoric::I, r), c.B, kP);
      EXPECT_EQ(support(small), support(large));
      EXPECT_LT(small.distance(large), kExact);
    }
  }
}

TEST(DeltaProducts, ConjugatedLevelsAgreeOnValidTuples) {
  const HeckeModel& m = model(0);
  const auto& en = m.enumeration(4);
  int tuples = 0;
  for (int r : {0, 1}) {
    for (int len = 0; len <= 4; ++len) {
      for (const auto& w : en.shell(len)) {
        const auto wdot = m.weyl_lift(en.reduced_word(w));
        for (int alpha : {0, 1}) {
          for (auto Q : kParahorics) {
            for (int n : {0, 1}) {
              if (!rootsys::decomposition_precondition_failure(w, alpha, 0, m.label(Q), n).empty()) continue;
              ASSERT_TRUE(rootsys::verify_decomposition_roots(w, alpha, 0, m.label(Q), n, r).holds);
              const Descriptor B = parahoric_plus(Q, n + r).conjugated_by(wdot);
              const auto lhs = delta_product(parahoric_plus(parahoric_of(1u << alpha), r), B, kP);
              const auto rhs = delta_product(parahoric_plus(Parahoric::I, r), B, kP);
              EXPECT_EQ(support(lhs), support(rhs)) << w.to_string() << " alpha " << alpha;
              EXPECT_LT(lhs.distance(rhs), kExact);
              ++tuples;
            }
          }
        }
      }
    }
  }
  EXPECT_GT(tuples, 0);
}

TEST(Averaging, CellRepresentativesCountPowersOfQ) {
  const HeckeModel& m = model(0);
  EXPECT_EQ(m.cell_representatives({0}).size(), 3u);
  EXPECT_EQ(m.cell_representatives({1, 0, 1}).size(), 27u);
}

TEST(Averaging, WeylLiftConjugatesRootGroups) {
  const HeckeModel& m = model(0);
  const auto& d = m.datum();
  const auto& en = m.enumeration(4);
  for (int len = 0; len <= 4; ++len) {
    for (const auto& w : en.shell(len)) {
      const auto wdot = m.weyl_lift(en.reduced_word(w));
      for (int k : {0, 1}) {
        const auto image = rootsys::act(w, rootsys::affine_simple_root(d, k));
        const auto u = k == 0 ? PAdicMatrix::lower(kP, 1, 1) : PAdicMatrix::upper(kP, 1);
        const auto c = wdot * u * wdot.inverse();
        // Positive finite part: upper root group; the affine level is the valuation.
        const int slot = image.finite.positive() ? 1 : 2;
        EXPECT_EQ(c.valuation(3 - slot), kInfiniteValuation);
        EXPECT_EQ(c.valuation(slot), image.level) << w.to_string() << " k " << k;
        EXPECT_EQ(c.valuation(0), 0);
      }
    }
  }
}

TEST(Averaging, TrivialLowerSetGivesSignedDeltas) {
  const HeckeModel& m = model(0);
  const std::vector<LimitElement> hs{m.delta_family()};
  const std::vector<rootsys::AffineWeylElement> Y{rootsys::AffineWeylElement(m.datum())};
  const Descriptor R = iwahori_plus(1);
  const auto got = m.average(hs, Y, R).front();
  CosetFunction expected(kP, R);
  for (auto P : kParahorics) expected = expected + refined_delta(parahoric_plus(P, 0), R) * Complex(parahoric_sign(P));
  expected.prune(1e-12);
  EXPECT_LT(got.distance(expected), kExact);
}

TEST(Averaging, RejectsLevelsNotNormalInIwahori) {
  const HeckeModel& m = model(0);
  const std::vector<LimitElement> hs{m.delta_family()};
  const std::vector<rootsys::AffineWeylElement> Y{rootsys::AffineWeylElement(m.datum())};
  EXPECT_THROW(m.average(hs, Y, iwahori_plus(1).conjugated_by(PAdicMatrix::weyl_finite(kP))), ArgumentError);
}

class DepthTest : public ::testing::TestWithParam<int> {};

TEST_P(DepthTest, ChartUnitMapsToDeltaFamily) {
  const HeckeModel& m = model(GetParam());
  const auto deltas = m.delta_family();
  for (auto P : kParahorics) {
    std::vector<Complex> sum(deltas[P].size(), Complex(0));
    for (int t = 0; t < m.chart_size(); ++t) {
      const auto h = m.xi_image(t);
      for (std::size_t i = 0; i < sum.size(); ++i) sum[i] += h[P][i];
    }
    for (std::size_t i = 0; i < sum.size(); ++i) EXPECT_NEAR(std::abs(sum[i] - deltas[P][i]), 0, 1e-9);
  }
}

TEST_P(DepthTest, RestrictionSquaresCommute) {
  const HeckeModel& m = model(GetParam());
  const int r = GetParam();
  for (int t = 0; t < m.chart_size(); ++t) {
    const auto F = m.stable_function(Parahoric::K, t);
    for (auto Q : {Parahoric::K, Parahoric::Kp}) {
      const auto lhs = m.convolve_component(Q, F, iwahori_plus(r));
      const auto rhs = m.iota(Parahoric::I, m.restrict(F, Q == Parahoric::Kp));
      EXPECT_EQ(support(lhs), support(rhs)) << t;
      EXPECT_LT(lhs.distance(rhs), kExact) << "chart point " << t << " via " << json_name(Q);
    }
  }
}

TEST_P(DepthTest, StableImagesAreCompatibleFamilies) {
  const HeckeModel& m = model(GetParam());
  const int r = GetParam();
  for (const auto& h : m.stable_basis()) {
    const auto hI = m.component(h, Parahoric::I);
    for (auto Q : {Parahoric::K, Parahoric::Kp}) {
      const auto hQ = m.component(h, Q);
      EXPECT_LT(hQ.coarsen(parahoric_plus(Parahoric::I, r)).distance(hI), kExact) << h.label << " " << json_name(Q);
      EXPECT_LT(hQ.conjugation_defect(parahoric_generators(Q, 0)), kExact);
      EXPECT_LT(hQ.left_defect(parahoric_generators(Q, r + 1)), kExact);
    }
    EXPECT_LT(hI.conjugation_defect(parahoric_generators(Parahoric::I, 0)), kExact);
  }
}

TEST_P(DepthTest, AveragingEvaluatesToComponents) {
  const HeckeModel& m = model(GetParam());
  const auto basis = m.stable_basis();
  const auto rep = m.verify_evaluation(basis, GetParam() == 0 ? 3 : 2);
  EXPECT_LT(rep.residual, kExact);
  EXPECT_GT(rep.cosets_compared, 0);
}

TEST_P(DepthTest, AveragingStabilizesAtFirstIwahoriFiltration) {
  const HeckeModel& m = model(GetParam());
  const std::vector<LimitElement> hs{m.delta_family(), m.xi_image(0), m.xi_image(m.chart_size() - 1)};
  const auto rep = m.verify_stabilization(hs, 1, 3);
  EXPECT_EQ(rep.status, CheckStatus::pass) << "stab " << rep.stabilization_index << " containing " << rep.containing_index
                                           << " residual " << rep.residual;
  EXPECT_LE(rep.stabilization_index, rep.containing_index);
}

TEST(Stabilization, IncompatibleFamilyDoesNotCancel) {
  const HeckeModel& m = model(0);
  LimitElement h = m.xi_image(1);
  for (auto P : {Parahoric::K, Parahoric::Kp}) h[P].assign(h[P].size(), Complex(0));
  const std::vector<LimitElement> hs{h};
  const auto rep = m.verify_stabilization(hs, 1, 3);
  EXPECT_EQ(rep.status, CheckStatus::fail);
  EXPECT_GT(rep.shell_norms.back(), 0.1);
}

TEST(Stabilization, SecondFiltrationNeedsLongerWords) {
  const HeckeModel& m = model(0);
  const auto basis = m.stable_basis();
  const auto rep = m.verify_stabilization(basis, 2, 3);
  // Y(I_2^+) reaches length 3, so a length-3 chain cannot certify it.
  EXPECT_EQ(rep.containing_index, 3);
  EXPECT_EQ(rep.status, CheckStatus::inconclusive);
  EXPECT_EQ(rep.stabilization_index, 1);
}

INSTANTIATE_TEST_SUITE_P(Depths, DepthTest, ::testing::Values(0, 1));

TEST(LimitMaps, TruncatingTheSectionIsIdentity) {
  const HeckeModel& m = model(0);
  const auto basis = m.stable_basis();
  const auto lifted = m.section(basis, 4);
  for (std::size_t i = 0; i < basis.size(); ++i) {
    for (auto P : kParahorics) {
      const auto& hP1 = lifted[i][static_cast<int>(P)];
      EXPECT_EQ(hP1.level(), parahoric_plus(P, 1));
      EXPECT_LT(hP1.coarsen(parahoric_plus(P, 0)).distance(m.component(basis[i], P)), kExact)
          << basis[i].label << " " << json_name(P);
      EXPECT_LT(hP1.conjugation_defect(parahoric_generators(P, 0)), kExact);
    }
    for (auto Q : {Parahoric::K, Parahoric::Kp}) {
      EXPECT_LT(lifted[i][static_cast<int>(Q)].coarsen(iwahori_plus(1)).distance(lifted[i][0]), kExact);
    }
  }
  // Truncation sends the depth-one delta family to the depth-zero one.
  for (auto P : kParahorics) {
    EXPECT_LT(delta(parahoric_plus(P, 1), kP).coarsen(parahoric_plus(P, 0)).distance(delta(parahoric_plus(P, 0), kP)),
              kExact);
  }
}

TEST(Constants, NormalizingConstantAgreesAcrossParahorics) {
  const HeckeModel& m = model(1);
  EXPECT_EQ(m.c_mu_squared(Parahoric::I), m.c_mu_squared(Parahoric::K));
  EXPECT_EQ(m.c_mu_squared(Parahoric::K), m.c_mu_squared(Parahoric::Kp));
  EXPECT_NEAR(m.j_constant(Parahoric::I), std::pow(3.0, -2.5), 1e-12);
  EXPECT_EQ(haar_measure(iwahori_plus(1), kP) / haar_measure(hyperspecial_plus(1), kP), Rational(kP));
}

TEST(KTypes, DepthOneScalarsArePointEvaluations) {
  const HeckeModel& m = model(1);
  for (auto P : {Parahoric::K, Parahoric::I}) {
    const auto kts = m.ktypes(P);
    EXPECT_EQ(kts.size(), P == Parahoric::K ? 27u : 3u);
    for (const auto& kt : kts) {
      const int theta = m.theta_of_ktype(kt);
      std::vector<Complex> ones(m.chart_size(), Complex(1));
      EXPECT_NEAR(std::abs(m.xi_scalar(ones, kt) - Complex(1)), 0, 1e-6);
      for (int t = 0; t < m.chart_size(); ++t) {
        std::vector<Complex> z(m.chart_size(), Complex(0));
        z[t] = 1;
        EXPECT_NEAR(std::abs(m.xi_scalar(z, kt) - Complex(t == theta ? 1 : 0)), 0, 1e-6)
            << json_name(P) << " chi " << kt.chi << " point " << t;
      }
    }
  }
}

TEST(KTypes, NondegeneracyMatchesNonzeroParameter) {
  const HeckeModel& m = model(1);
  const auto sl2 = liestable::FinLieAlgebra::sl(2, kP);
  int nondegenerate = 0;
  for (const auto& kt : m.ktypes(Parahoric::K)) {
    const auto X = sl2.element(kt.chi);
    const bool nilpotent = stabkit::mod(X[0] * X[3] - X[1] * X[2], kP) == 0;
    EXPECT_EQ(kt.nondegenerate, !nilpotent);
    nondegenerate += kt.nondegenerate;
  }
  // 27 - 9 nilpotent elements of sl2(F_3).
  EXPECT_EQ(nondegenerate, 18);
  const MinimalKType split{Parahoric::K, 1, sl2.index_of({1, 0, 0, 2}), true};
  EXPECT_EQ(m.theta_of_ktype(split), sl2.chart_index({0, 2}));
  const MinimalKType nilpotent{Parahoric::K, 1, sl2.index_of({0, 1, 0, 0}), false};
  EXPECT_EQ(m.theta_of_ktype(nilpotent), sl2.chart_index({0, 0}));
}

TEST(KTypes, DepthZeroScalarsFollowSeries) {
  const HeckeModel& m = model(0);
  for (auto P : {Parahoric::K, Parahoric::I}) {
    for (const auto& kt : m.ktypes(P)) {
      const int theta = m.theta_of_ktype(kt);
      for (int t = 0; t < m.chart_size(); ++t) {
        std::vector<Complex> z(m.chart_size(), Complex(0));
        z[t] = 1;
        EXPECT_NEAR(std::abs(m.xi_scalar(z, kt) - Complex(t == theta ? 1 : 0)), 0, 1e-6)
            << json_name(P) << " sigma " << kt.chi << " point " << t;
      }
    }
  }
  int cuspidal = 0;
  for (const auto& kt : m.ktypes(Parahoric::K)) cuspidal += kt.nondegenerate;
  // SL2(F_3): the two characters of degree 1 from the nonsplit torus pair.
  EXPECT_GT(cuspidal, 0);
}

TEST(Perp, AnnihilatorOfParahoricLieLatticeIsItsRadical) {
  for (auto P : kParahorics) {
    EXPECT_TRUE(verify_perp(P, kP)) << json_name(P);
    EXPECT_TRUE(verify_perp(P, kP, 2)) << json_name(P);
  }
  EXPECT_THROW(verify_perp(Parahoric::I, kP, 3), ArgumentError);
}
