#pragma once
// Finite matrix groups SL_n(Z/p^N) and subgroups cut out by predicates,
// conjugacy classes, class functions with convolution, a character table
// computed from class multiplication coefficients, and parabolic restriction.

#include "stabkit/algcore.hpp"

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace stabkit::grpfin {

// Row-major n x n matrix with entries in [0, p^N).
using Matrix = std::vector<std::int64_t>;

inline constexpr std::int64_t kMaxGroupOrder = 1'000'000;

struct RingSpec {
  int n = 2;
  std::int64_t p = 3;
  int N = 1;
  std::int64_t modulus() const { return ipow(p, N); }
};

Matrix identity_matrix(int n);
Matrix mat_mul(const Matrix& a, const Matrix& b, int n, std::int64_t m);
// Adjugate-based inverse; the determinant must be a unit.
Matrix mat_inverse(const Matrix& a, int n, std::int64_t m);
std::int64_t mat_det(const Matrix& a, int n, std::int64_t m);
std::string matrix_to_string(const Matrix& a, int n);
// |SL_n(Z/p^N)| from the order formula.
std::int64_t special_linear_order(const RingSpec& r);

// Structure constants of the class algebra: K_i K_j = sum_k c(i,j,k) K_k.
class ClassAlgebra {
 public:
  ClassAlgebra(int k) : k_(k), c_(static_cast<std::size_t>(k) * k * k, 0) {}
  std::int64_t operator()(int i, int j, int k) const { return c_[(static_cast<std::size_t>(i) * k_ + j) * k_ + k]; }
  std::int64_t& at(int i, int j, int k) { return c_[(static_cast<std::size_t>(i) * k_ + j) * k_ + k]; }
  int num_classes() const { return k_; }

 private:
  int k_;
  std::vector<std::int64_t> c_;
};

class GroupTable {
 public:
  // Full SL_n(Z/p^N); throws CapacityError above kMaxGroupOrder.
  static GroupTable special_linear(const RingSpec& r);
  // Elements of SL_n(Z/p^N) satisfying pred; throws StructuralError unless
  // they form a subgroup.
  static GroupTable subgroup(const RingSpec& r, const std::function<bool(const Matrix&)>& pred, std::string name);
  static GroupTable subgroup(const GroupTable& ambient, const std::function<bool(const Matrix&)>& pred, std::string name);

  const std::string& name() const { return name_; }
  const RingSpec& ring() const { return ring_; }
  int n() const { return ring_.n; }
  std::int64_t modulus() const { return modulus_; }
  int order() const { return static_cast<int>(elements_.size()); }
  const Matrix& element(int id) const { return elements_.at(id); }
  std::optional<int> find(const Matrix& m) const;
  int index_of(const Matrix& m) const;  // throws ArgumentError if absent
  int identity() const { return identity_; }
  int multiply(int a, int b) const;
  int inverse(int a) const;
  int power(int a, std::int64_t e) const;
  int element_order(int a) const;
  std::int64_t exponent() const;

  int num_classes() const { return static_cast<int>(class_members_.size()); }
  int class_of(int id) const { return class_of_[id]; }
  // Class 0 is the identity; other classes ordered by smallest member id.
  int class_rep(int c) const { return class_members_.at(c).front(); }
  int class_size(int c) const { return static_cast<int>(class_members_.at(c).size()); }
  const std::vector<int>& class_members(int c) const { return class_members_.at(c); }
  int inverse_class(int c) const { return class_of(inverse(class_rep(c))); }
  // Computed on first use; O(|G| * classes) multiplications.
  const ClassAlgebra& class_algebra() const;

  bool operator==(const GroupTable& o) const { return this == &o; }

 private:
  GroupTable() = default;
  std::int64_t encode(const Matrix& m) const;
  void build(std::vector<Matrix> elems, const std::vector<Matrix>& generators);
  void compute_classes(const std::vector<int>& gens);

  std::string name_;
  RingSpec ring_;
  std::int64_t modulus_ = 0;
  std::vector<Matrix> elements_;
  std::unordered_map<std::int64_t, int> index_;
  int identity_ = 0;
  std::vector<int> generators_;
  std::vector<int> class_of_;
  std::vector<std::vector<int>> class_members_;
  struct AlgebraCache {
    std::once_flag once;
    std::unique_ptr<ClassAlgebra> value;
  };
  std::shared_ptr<AlgebraCache> algebra_ = std::make_shared<AlgebraCache>();
};

class ClassFunction {
 public:
  explicit ClassFunction(const GroupTable& g) : group_(&g), values_(g.num_classes(), Complex(0)) {}
  ClassFunction(const GroupTable& g, std::vector<Complex> values);
  // Class function from an element-indexed table; throws StructuralError if
  // the table is not constant on classes (tolerance kTolerance).
  static ClassFunction from_elements(const GroupTable& g, std::span<const Complex> per_element);
  static ClassFunction delta_identity(const GroupTable& g);
  static ClassFunction constant(const GroupTable& g, Complex c);

  const GroupTable& group() const { return *group_; }
  const std::vector<Complex>& values() const { return values_; }
  Complex operator[](int cls) const { return values_[cls]; }
  Complex& operator[](int cls) { return values_[cls]; }
  Complex at_element(int id) const { return values_[group_->class_of(id)]; }

  ClassFunction operator+(const ClassFunction& o) const;
  ClassFunction operator-(const ClassFunction& o) const;
  ClassFunction operator*(Complex s) const;
  ClassFunction conj() const;
  // Largest deviation from o over classes.
  double distance(const ClassFunction& o) const;

 private:
  void check_same(const ClassFunction& o) const;
  const GroupTable* group_;
  std::vector<Complex> values_;
};

// (1/|G|) sum_g f(g) conj(f'(g)).
Complex inner_product(const ClassFunction& f, const ClassFunction& g);
// f * f'(x) = sum_y f(x y^-1) f'(y), through the class algebra.
ClassFunction convolve(const ClassFunction& f, const ClassFunction& g);

struct IrreducibleCharacter {
  ClassFunction values;
  int degree = 0;
};

// Characters sorted by degree, then by rounded values class by class.
std::vector<IrreducibleCharacter> character_table(const GroupTable& g, std::uint64_t seed = 0);
inline constexpr int kCharacterTableAttempts = 8;

// (1/pi(1)) sum_g f(g) chi_pi(g).
Complex gamma_scalar(const ClassFunction& f, const IrreducibleCharacter& pi);

void write_character_table_csv(std::ostream& os, const GroupTable& g, const std::vector<IrreducibleCharacter>& chars);

// Block parabolic inside a matrix group H: P = block upper triangular
// elements of H for the composition, U = its block unitriangular part, and L
// the block diagonal elements, given as their own table. Set lower = true for
// the opposite (block lower triangular) parabolic.
class Parabolic {
 public:
  Parabolic(const GroupTable& ambient, const GroupTable& levi, std::vector<int> composition, bool lower = false);
  const GroupTable& ambient() const { return *ambient_; }
  const GroupTable& levi() const { return *levi_; }
  const std::vector<int>& composition() const { return composition_; }
  const std::vector<int>& unipotent() const { return unipotent_; }  // ids in ambient
  bool contains(int ambient_id) const { return in_parabolic_[ambient_id]; }
  int parabolic_order() const { return parabolic_order_; }
  // Ambient id of each levi element.
  int levi_to_ambient(int levi_id) const { return levi_in_ambient_[levi_id]; }

 private:
  const GroupTable* ambient_;
  const GroupTable* levi_;
  std::vector<int> composition_;
  bool lower_;
  std::vector<int> unipotent_;
  std::vector<bool> in_parabolic_;
  std::vector<int> levi_in_ambient_;
  int parabolic_order_ = 0;
};

// Block pattern helpers for the predicate-based constructors.
bool is_block_triangular(const Matrix& m, int n, const std::vector<int>& composition, bool lower);
bool is_block_diagonal(const Matrix& m, int n, const std::vector<int>& composition);

// Res(f)(l) = |U|^-1 sum_{u in U} f(l u) as a class function on the Levi.
ClassFunction parabolic_res_group(const ClassFunction& f, const Parabolic& P);
// The unnormalized sum sum_{u in U} f(l u).
ClassFunction parabolic_res_group_unnormalized(const ClassFunction& f, const Parabolic& P);

}  // namespace stabkit::grpfin
