#pragma once
// Desk-scale model of SL2(Q_p): coset functions, the truncated Hecke
// algebras of the standard parahorics, the averaging operators and their
// stabilization, the maps from stable functions into the limit algebra, and
// scalars of minimal K-types.

#include "stabkit/algcore.hpp"
#include "stabkit/dlstable.hpp"
#include "stabkit/liestable.hpp"
#include "stabkit/padic.hpp"
#include "stabkit/rootsys.hpp"

#include <array>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <vector>

namespace stabkit::hecke {

// Standard parahorics of SL2: the Iwahori I, G(O), and eta G(O) eta^-1.
enum class Parahoric { I = 0, K = 1, Kp = 2 };
inline constexpr std::array<Parahoric, 3> kParahorics{Parahoric::I, Parahoric::K, Parahoric::Kp};

// "I", "hs0", "hs1".
std::string json_name(Parahoric P);
// Affine simple roots of the Levi: I -> {}, G(O) -> {alpha_1}, the other -> {alpha_0}.
rootsys::SimpleSet simple_set(Parahoric P);
// (-1)^(rank G - rank P).
int parahoric_sign(Parahoric P);
Descriptor parahoric_r(Parahoric P, int r);
Descriptor parahoric_plus(Parahoric P, int r);
// eta for the second hyperspecial, the identity otherwise.
PAdicMatrix parahoric_conjugator(Parahoric P, std::int64_t p);
// The group whose depth-r quotient carries the component values.
Parahoric base_of(Parahoric P);
Parahoric parahoric_of(rootsys::SimpleSet J);

// A finitely supported function on G / level, one value per coset.
class CosetFunction {
 public:
  struct Entry {
    PAdicMatrix rep;
    Complex value;
  };

  CosetFunction(std::int64_t p, Descriptor level) : p_(p), level_(level) {}

  std::int64_t p() const { return p_; }
  const Descriptor& level() const { return level_; }
  std::size_t size() const { return entries_.size(); }
  const std::map<CosetKey, Entry>& entries() const { return entries_; }

  void add(const PAdicMatrix& x, Complex v);
  // As add, for a key already computed at this level.
  void add_keyed(const CosetKey& k, const PAdicMatrix& x, Complex v);
  Complex at(const PAdicMatrix& x) const;
  CosetFunction operator+(const CosetFunction& o) const;
  CosetFunction operator-(const CosetFunction& o) const;
  CosetFunction operator*(Complex s) const;
  // Drops entries with |value| <= tol.
  void prune(double tol);
  // f * delta_D for D containing the level.
  CosetFunction coarsen(const Descriptor& D) const;
  // x -> f(g^-1 x g) for a monomial g.
  CosetFunction conjugate(const PAdicMatrix& g) const;
  // Largest |f - o| over the union of supports; levels must agree.
  double distance(const CosetFunction& o) const;
  // Largest |f(h x) - f(x)| over support cosets x and the given h.
  double left_defect(std::span<const PAdicMatrix> hs) const;
  // Largest |f(g x g^-1) - f(x)| over support cosets x and the given g.
  double conjugation_defect(std::span<const PAdicMatrix> gs) const;
  std::string to_json() const;

 private:
  std::int64_t p_;
  Descriptor level_;
  std::map<CosetKey, Entry> entries_;
};

// delta_D = mu(D)^-1 1_D.
CosetFunction delta(const Descriptor& D, std::int64_t p);
// delta_A * delta_B = mu(AB)^-1 1_AB, on B-cosets.
CosetFunction delta_product(const Descriptor& A, const Descriptor& B, std::int64_t p);
// Element-level convolution inside SL2(Z/p^N); levels must lie in G(O)
// with thresholds <= N. The result has the level of g.
CosetFunction convolve_window(const CosetFunction& f, const CosetFunction& g, const WindowQuotient& w);

// A family {h_P} with h_P a function on P_r / P_r^+, stored on the quotient
// of its base group (the second hyperspecial through eta).
struct LimitElement {
  std::string label;
  int r = 0;
  std::array<std::vector<Complex>, 3> values;
  const std::vector<Complex>& operator[](Parahoric P) const { return values[static_cast<int>(P)]; }
  std::vector<Complex>& operator[](Parahoric P) { return values[static_cast<int>(P)]; }
};

struct MinimalKType {
  Parahoric parahoric = Parahoric::K;
  int r = 0;
  // r > 0: index of Y in the quotient algebra with chi = psi(<., Y>);
  // r = 0: irreducible index (G(O)) or torus character exponent (I).
  std::int64_t chi = 0;
  bool nondegenerate = false;
};

enum class CheckStatus { pass, fail, inconclusive };
std::string to_string(CheckStatus s);

struct StabilizationReport {
  int n = 0;
  Descriptor level;                // I_{n+r}^+
  std::vector<double> shell_norms; // length k -> max over h of |shell contribution|
  int stabilization_index = 0;
  int containing_index = 0;        // largest length in Y(I_n^+)
  int length_max = 0;
  double residual = 0;             // max distance of later terms from the value at Y(I_n^+)
  CheckStatus status = CheckStatus::inconclusive;
};

struct EvaluationReport {
  double residual = 0;  // max over P, Y^(k), h of |[A^Y_h] * delta_{P_r^+} - h_P|
  int length_max = 0;
  std::int64_t cosets_compared = 0;
};

class HeckeModel {
 public:
  HeckeModel(std::int64_t p, int r, std::uint64_t seed = 0);
  ~HeckeModel();
  HeckeModel(const HeckeModel&) = delete;
  HeckeModel& operator=(const HeckeModel&) = delete;

  std::int64_t p() const { return p_; }
  int r() const { return r_; }
  const rootsys::FiniteRootDatum& datum() const;
  rootsys::ParahoricLabel label(Parahoric P) const;

  // The finite quotient B_r / B_r^+ of a base group B in {I, G(O)}.
  int quotient_size(Parahoric base) const;
  int project(Parahoric base, const PAdicMatrix& q) const;
  int combine(Parahoric base, int x, int y) const;
  int quotient_identity(Parahoric base) const;

  // Points of the chart indexing the stable basis.
  int chart_size() const;
  // f_theta (depth 0) or the stable function of the chart indicator (depth r)
  // on the quotient of the base group.
  std::vector<Complex> stable_function(Parahoric base, int chart_point) const;
  // Normalized parabolic restriction from the G(O) quotient to the I quotient,
  // along the upper or lower Borel.
  std::vector<Complex> restrict(std::span<const Complex> f, bool lower) const;

  // mu(P_r^+) (depth 0) or c_{mu,r} = mu(P_r^+) |quotient|^(1/2).
  double j_constant(Parahoric P) const;
  Rational c_mu_squared(Parahoric P) const;
  LimitElement delta_family() const;
  LimitElement xi_image(int chart_point) const;
  // delta family followed by the images of the chart basis.
  std::vector<LimitElement> stable_basis() const;

  // Coset function of level P_r^+ for values on P_r / P_r^+.
  CosetFunction iota(Parahoric P, std::span<const Complex> values) const;
  CosetFunction component(const LimitElement& h, Parahoric P) const;
  // Ad_c(iota_base(F)) * delta_R with c the conjugator of Q.
  CosetFunction convolve_component(Parahoric Q, std::span<const Complex> F, const Descriptor& R) const;

  PAdicMatrix weyl_lift(const std::vector<int>& word) const;
  // Iwahori digit representatives of I w I / I; verified distinct.
  const std::vector<PAdicMatrix>& cell_representatives(const std::vector<int>& word) const;
  // [A^Y_h] * delta_R for each h, with Y given by its elements; R must be
  // normal in I.
  std::vector<CosetFunction> average(std::span<const LimitElement> hs,
                                     std::span<const rootsys::AffineWeylElement> Y, const Descriptor& R) const;
  // The j_r section at depth 0 followed by truncation back to depth 0.
  std::vector<std::array<CosetFunction, 3>> section(std::span<const LimitElement> hs, int length_bound) const;

  StabilizationReport verify_stabilization(std::span<const LimitElement> hs, int n, int length_max) const;
  EvaluationReport verify_evaluation(std::span<const LimitElement> hs, int length_max) const;

  std::vector<MinimalKType> ktypes(Parahoric P) const;
  int theta_of_ktype(const MinimalKType& kt) const;
  Complex xi_scalar(std::span<const Complex> z, const MinimalKType& kt) const;

  const rootsys::WeylEnumeration& enumeration(int length) const;

 private:
  struct CellData;
  struct Accumulator;
  const CellData& cell_data(Parahoric base, const Descriptor& Rt) const;
  // Adds weight * Ad_yt(h) * delta_R for each value vector h on the base quotient;
  // m is the monomial part of yt.
  void accumulate(Parahoric base, const PAdicMatrix& yt, const PAdicMatrix& m, const Descriptor& R, double weight,
                  std::span<const std::vector<Complex>* const> vals, Accumulator& acc) const;
  void check_normal_in_iwahori(const Descriptor& R) const;
  std::vector<Complex> character_values(const MinimalKType& kt) const;

  std::int64_t p_;
  int r_;
  std::unique_ptr<dlstable::SL2Series> series_;
  std::unique_ptr<grpfin::Parabolic> lower_borel_;
  std::unique_ptr<liestable::FinLieAlgebra> sl2_, torus_alg_;
  std::unique_ptr<liestable::LieParabolic> upper_, lower_;
  mutable std::mutex cache_mutex_;
  mutable std::map<std::pair<int, Descriptor>, std::unique_ptr<CellData>> cells_;
  mutable std::map<std::vector<int>, std::vector<PAdicMatrix>> digit_reps_;
  mutable std::unique_ptr<rootsys::WeylEnumeration> enumeration_;
};

// The annihilator of Lie(P) modulo p under s * tr(XY) equals Lie(P^+):
// threshold formula and a brute-force check on a finite window of sl2(Q_p).
bool verify_perp(Parahoric P, std::int64_t p, std::int64_t scale = 1);

}  // namespace stabkit::hecke
