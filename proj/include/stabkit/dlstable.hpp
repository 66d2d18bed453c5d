#pragma once
// Deligne-Lusztig structure of SL2(F_q): the dual chart, virtual characters
// R_T^theta for the split and nonsplit tori, geometric series, the stable
// functions f_s and f_theta, and the parabolic vanishing check.

#include "stabkit/algcore.hpp"
#include "stabkit/grpfin.hpp"

#include <cstdint>
#include <iosfwd>
#include <map>
#include <memory>
#include <string>
#include <vector>

namespace stabkit::dlstable {

using grpfin::ClassFunction;
using grpfin::GroupTable;
using grpfin::IrreducibleCharacter;

// Arithmetic in F_{q^2} = F_q[sqrt(d)], d the smallest nonresidue.
struct QuadraticElement {
  std::int64_t a = 0, b = 0;  // a + b sqrt(d)
  bool operator==(const QuadraticElement&) const = default;
};
class QuadraticField {
 public:
  explicit QuadraticField(std::int64_t q);
  std::int64_t q() const { return q_; }
  std::int64_t d() const { return d_; }
  QuadraticElement mul(QuadraticElement x, QuadraticElement y) const;
  QuadraticElement pow(QuadraticElement x, std::int64_t e) const;
  // Generator of the norm-one subgroup (order q+1), fixed deterministically.
  QuadraticElement zeta() const { return zeta_; }
  // k with zeta^k = x for x of norm one.
  std::int64_t log_zeta(QuadraticElement x) const;
  // An eigenvalue in F_{q^2} of a matrix with trace t and determinant 1 whose
  // characteristic polynomial is irreducible over F_q.
  QuadraticElement elliptic_eigenvalue(std::int64_t t) const;

 private:
  std::int64_t q_, d_;
  QuadraticElement zeta_;
  std::map<std::pair<std::int64_t, std::int64_t>, std::int64_t> log_;
};

enum class TorusType { split, nonsplit };
std::string to_string(TorusType t);

// A semisimple class of the dual group, recorded by lambda + lambda^-1 where
// lambda = g^k (split, g the fixed primitive root) or zeta^k (nonsplit, zeta
// the fixed generator of the norm-one subgroup of F_{q^2}^x).
struct DualChartPoint {
  std::int64_t coordinate = 0;
  TorusType torus = TorusType::split;
  std::int64_t order = 1;     // multiplicative order of lambda
  std::int64_t exponent = 0;  // k
  std::string label() const;
};

class DualChart {
 public:
  explicit DualChart(std::int64_t q);
  std::int64_t q() const { return q_; }
  int size() const { return static_cast<int>(points_.size()); }
  const std::vector<DualChartPoint>& points() const { return points_; }
  const DualChartPoint& operator[](int i) const { return points_.at(i); }
  int index_of_coordinate(std::int64_t c) const;
  // Chart point of theta_k on the given torus.
  int point_of(TorusType t, std::int64_t k) const;
  const QuadraticField& field() const { return field_; }

 private:
  std::int64_t q_;
  QuadraticField field_;
  std::vector<std::int64_t> gpow_;  // g^k mod q
  std::vector<DualChartPoint> points_;
  std::map<std::int64_t, int> by_coordinate_;
};

DualChart dual_chart(std::int64_t q);

struct DLVirtualCharacter {
  TorusType torus = TorusType::split;
  std::int64_t theta = 0;  // exponent k of the character of T^F
  ClassFunction values;
  std::vector<int> coefficients;  // in the basis of irreducible characters
  int chart_point = 0;
};

struct SeriesPartition {
  std::vector<std::vector<int>> blocks;  // chart index -> irreducible indices
  std::vector<int> point_of;             // irreducible index -> chart index
};

struct GroupVanishingReport {
  double max_abs = 0;
  int witness = -1;  // ambient element outside the parabolic
  std::int64_t sites_checked = 0;
};

// All group-side data for SL2(F_q), q in {3, 5, 7}. Holds pointers into its
// own tables, so it is neither copied nor moved.
class SL2Series {
 public:
  explicit SL2Series(std::int64_t q, std::uint64_t seed = 0);
  SL2Series(const SL2Series&) = delete;
  SL2Series& operator=(const SL2Series&) = delete;

  std::int64_t q() const { return q_; }
  const GroupTable& group() const { return *group_; }
  const GroupTable& torus() const { return *torus_; }
  const grpfin::Parabolic& borel() const { return *borel_; }
  const std::vector<IrreducibleCharacter>& characters() const { return chars_; }
  const DualChart& chart() const { return chart_; }
  const std::vector<DLVirtualCharacter>& dl_characters() const { return dl_; }
  const SeriesPartition& partition() const { return partition_; }

  // Block of the dual chart containing the irreducible pi.
  int L_map(int pi) const { return partition_.point_of.at(pi); }
  // sum over the block of pi(1) pi.
  ClassFunction f_s(int point) const;
  // The class function with gamma(pi) = [L(pi) = point].
  ClassFunction f_theta(int point) const;

  // Torus side: characters phi_k(diag(a, a^-1)) = exp(2 pi i k log_g(a) / (q-1)).
  int torus_chart_size() const { return static_cast<int>(q_ - 1); }
  int torus_to_chart(int k) const { return chart_.point_of(TorusType::split, k); }
  // The torus function with gamma(phi_j) = [j = k].
  ClassFunction torus_f(int k) const;
  // Largest deviation of sum_{u in U} f_theta(t u) from the sum of torus_f over
  // the chart preimage of theta.
  double res_diagram_residual() const;

 private:
  void build_dl();
  ClassFunction split_character(std::int64_t k) const;
  DLVirtualCharacter nonsplit_character(std::int64_t k) const;
  void build_partition();

  std::int64_t q_;
  std::unique_ptr<GroupTable> group_;
  std::unique_ptr<GroupTable> torus_;
  std::unique_ptr<grpfin::Parabolic> borel_;
  std::vector<IrreducibleCharacter> chars_;
  DualChart chart_;
  std::vector<std::int64_t> dlog_;  // discrete log base g on F_q^x
  std::vector<DLVirtualCharacter> dl_;
  SeriesPartition partition_;
};

// Coefficients of f in the irreducible basis: <f, chi_pi>.
std::vector<Complex> character_coordinates(const ClassFunction& f, const std::vector<IrreducibleCharacter>& chars);

// sum_{u in U} f(x u) for every x outside the parabolic.
GroupVanishingReport vanishing_check_group(const ClassFunction& f, const grpfin::Parabolic& P);

void write_series_csv(std::ostream& os, const SL2Series& s);
void write_f_theta_csv(std::ostream& os, const SL2Series& s);

}  // namespace stabkit::dlstable
