#pragma once
// Finite Lie algebras sl_n(F_p) and their block-diagonal Levi subalgebras with
// the trace form, the Fourier transform in an orthogonal coordinate system,
// convolution, the Chevalley (characteristic polynomial) chart, stable
// functions, parabolic restriction and the parabolic vanishing check.

#include "stabkit/algcore.hpp"
#include "stabkit/grpfin.hpp"

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace stabkit::liestable {

using grpfin::Matrix;
using ChartPoint = std::vector<std::int64_t>;

// Traceless block-diagonal n x n matrices over F_p for a composition of n;
// the composition {n} gives sl_n. Elements are indexed by their coordinates
// in a trace-form orthogonal basis: index = sum_i x_i p^i.
class FinLieAlgebra {
 public:
  FinLieAlgebra(int n, std::int64_t p, std::vector<int> composition);
  static FinLieAlgebra sl(int n, std::int64_t p) { return FinLieAlgebra(n, p, {n}); }

  const std::string& name() const { return name_; }
  int n() const { return n_; }
  std::int64_t p() const { return p_; }
  const std::vector<int>& composition() const { return composition_; }
  int dim() const { return static_cast<int>(basis_.size()); }
  std::int64_t size() const { return size_; }
  const std::vector<Matrix>& basis() const { return basis_; }
  // <e_i, e_i> for the orthogonal basis.
  const std::vector<std::int64_t>& form_diagonal() const { return form_diag_; }

  Matrix element(std::int64_t idx) const;
  std::vector<std::int64_t> coordinates(std::int64_t idx) const;
  std::int64_t from_coordinates(const std::vector<std::int64_t>& x) const;
  std::optional<std::int64_t> find(const Matrix& X) const;
  std::int64_t index_of(const Matrix& X) const;  // throws ArgumentError if X is not in the space
  std::int64_t add(std::int64_t a, std::int64_t b) const;
  std::int64_t negate(std::int64_t a) const;
  std::int64_t zero() const { return 0; }
  std::int64_t trace_form(const Matrix& X, const Matrix& Y) const;
  // The form in coordinates: sum_i c_i x_i y_i.
  std::int64_t pairing(std::int64_t a, std::int64_t b) const;

  // Adjoint orbits of the block-diagonal determinant-one group.
  int num_orbits() const { return static_cast<int>(orbit_members_.size()); }
  int orbit_of(std::int64_t idx) const { return orbit_of_[idx]; }
  const std::vector<std::int64_t>& orbit_members(int o) const { return orbit_members_.at(o); }
  const std::vector<Matrix>& group_generators() const { return generators_; }

  // Chevalley chart: per block, the elementary symmetric functions of the
  // eigenvalues (characteristic polynomial coefficients).
  int chart_size() const { return static_cast<int>(chart_points_.size()); }
  const ChartPoint& chart_point(int i) const { return chart_points_.at(i); }
  int chart_index_of(std::int64_t element) const { return chart_of_[element]; }
  int chart_index(const ChartPoint& pt) const;
  // For sl_n: (c_2, ..., c_n); for a Levi the full per-block tuple.
  std::string chart_point_to_string(int i) const;
  std::int64_t fiber_size(int chart_idx) const { return fiber_sizes_.at(chart_idx); }

 private:
  void build_basis();
  void build_orbits();
  void build_chart();

  std::string name_;
  int n_;
  std::int64_t p_;
  std::vector<int> composition_;
  std::vector<int> block_of_;
  std::vector<Matrix> basis_;
  std::vector<std::int64_t> form_diag_;
  std::vector<std::int64_t> form_diag_inv_;
  std::int64_t size_ = 0;
  std::vector<std::int64_t> pow_;
  std::vector<Matrix> generators_;
  std::vector<int> orbit_of_;
  std::vector<std::vector<std::int64_t>> orbit_members_;
  std::vector<ChartPoint> chart_points_;
  std::map<ChartPoint, int> chart_lookup_;
  std::vector<int> chart_of_;
  std::vector<std::int64_t> fiber_sizes_;
};

// Per-block characteristic polynomial coefficients e_1..e_{n_b} of X.
ChartPoint chevalley(const Matrix& X, int n, std::int64_t p, const std::vector<int>& composition);

class LieClassFunction {
 public:
  explicit LieClassFunction(const FinLieAlgebra& g) : alg_(&g), values_(g.size(), Complex(0)) {}
  LieClassFunction(const FinLieAlgebra& g, std::vector<Complex> values);
  static LieClassFunction delta_zero(const FinLieAlgebra& g);
  static LieClassFunction constant(const FinLieAlgebra& g, Complex c);
  static LieClassFunction orbit_indicator(const FinLieAlgebra& g, int orbit);

  const FinLieAlgebra& algebra() const { return *alg_; }
  const std::vector<Complex>& values() const { return values_; }
  std::vector<Complex>& values() { return values_; }
  Complex operator[](std::int64_t i) const { return values_[i]; }
  Complex& operator[](std::int64_t i) { return values_[i]; }

  LieClassFunction operator+(const LieClassFunction& o) const;
  LieClassFunction operator-(const LieClassFunction& o) const;
  LieClassFunction operator*(Complex s) const;
  // Pointwise product.
  LieClassFunction pointwise(const LieClassFunction& o) const;
  // f^-(X) = f(-X).
  LieClassFunction negated_argument() const;
  double distance(const LieClassFunction& o) const;
  // Largest deviation from being constant on adjoint orbits.
  double invariance_defect() const;

 private:
  void check_same(const LieClassFunction& o) const;
  const FinLieAlgebra* alg_;
  std::vector<Complex> values_;
};

// |g|^{-1/2} sum_Y psi(<X,Y>) f(Y), one coordinate axis at a time.
LieClassFunction ft(const LieClassFunction& f);
// The same transform as a direct double sum.
LieClassFunction ft_naive(const LieClassFunction& f);
// |g|^{-1/2} sum_Y f(X - Y) f'(Y), computed through the transform.
LieClassFunction convolve_lie(const LieClassFunction& f, const LieClassFunction& g);
// The same convolution as a direct double sum.
LieClassFunction convolve_lie_direct(const LieClassFunction& f, const LieClassFunction& g);
// Direct convolution evaluated at a single point.
Complex convolve_lie_at(const LieClassFunction& f, const LieClassFunction& g, std::int64_t X);

// z on the chart, pulled back along the Chevalley map and transformed.
LieClassFunction stable_from_param(const FinLieAlgebra& g, const std::vector<Complex>& z);
LieClassFunction chart_indicator_function(const FinLieAlgebra& g, int chart_idx);
// Largest deviation of ft(f) from being constant on Chevalley fibers.
double stability_defect(const LieClassFunction& f);
bool is_stable(const LieClassFunction& f);
// Numerical rank of the span of the given functions (Gram matrix, Eigen).
int span_rank(const std::vector<LieClassFunction>& fs);

// Parabolic p = l + n inside an ambient algebra (sl_n or a Levi) for a finer
// block composition; n is the strictly block upper (or lower) part.
class LieParabolic {
 public:
  LieParabolic(const FinLieAlgebra& ambient, const FinLieAlgebra& levi, bool lower = false);
  const FinLieAlgebra& ambient() const { return *ambient_; }
  const FinLieAlgebra& levi() const { return *levi_; }
  const std::vector<std::int64_t>& nilradical() const { return nil_; }  // ambient indices
  bool in_parabolic(std::int64_t ambient_idx) const;
  std::int64_t levi_to_ambient(std::int64_t levi_idx) const { return levi_in_ambient_[levi_idx]; }
  // Ambient index of X with its nilradical entries cleared.
  std::int64_t coset_key(std::int64_t ambient_idx) const;
  // Chart map of the Levi into the ambient chart (product of block polynomials).
  const std::vector<int>& chart_map() const { return chart_map_; }

 private:
  const FinLieAlgebra* ambient_;
  const FinLieAlgebra* levi_;
  bool lower_;
  std::vector<std::int64_t> nil_;
  std::vector<std::int64_t> levi_in_ambient_;
  std::vector<int> chart_map_;
};

// Res(f)(v) = |n|^{-1} sum_{n} f(v + n).
LieClassFunction res_lie(const LieClassFunction& f, const LieParabolic& P);

struct VanishingReport {
  double max_abs = 0;
  std::int64_t witness = -1;  // element of the ambient algebra outside p
  std::int64_t sites_checked = 0;
};
// Evaluates sum_{n} f(X + n) for every X outside p.
VanishingReport vanishing_check_lie(const LieClassFunction& f, const LieParabolic& P);

void write_csv(std::ostream& os, const LieClassFunction& f);
LieClassFunction read_csv(std::istream& is, const FinLieAlgebra& g);

}  // namespace stabkit::liestable
