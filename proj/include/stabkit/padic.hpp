#pragma once
// Exact 2x2 matrices over Z[1/p], subgroup descriptors of SL2(Q_p) given by
// valuation thresholds, canonical coset keys, Haar measure and the finite
// window SL2(Z/p^N).

#include "stabkit/algcore.hpp"
#include "stabkit/grpfin.hpp"

#include <array>
#include <compare>
#include <cstdint>
#include <limits>
#include <memory>
#include <string>
#include <vector>

namespace stabkit::hecke {

using Int = __int128;
inline constexpr int kInfiniteValuation = std::numeric_limits<int>::max();

std::string to_string(Int v);

// A matrix num / p^exp with integer entries (row-major), kept with exp >= 0
// minimal. Every element of GL2(Z[1/p]) with determinant +p^t is
// representable; products and inverses are exact and overflow raises
// CapacityError.
class PAdicMatrix {
 public:
  PAdicMatrix(std::int64_t p, std::array<Int, 4> num, int exp = 0);
  static PAdicMatrix identity(std::int64_t p) { return PAdicMatrix(p, {1, 0, 0, 1}); }
  // [[1, x p^k], [0, 1]] and [[1, 0], [x p^k, 1]].
  static PAdicMatrix upper(std::int64_t p, std::int64_t x, int k = 0);
  static PAdicMatrix lower(std::int64_t p, std::int64_t x, int k = 0);
  // diag(p^k, p^-k).
  static PAdicMatrix translation(std::int64_t p, int k);
  // diag(1, p^k); k = 1 gives the element conjugating G(O) to the second
  // hyperspecial parahoric.
  static PAdicMatrix eta(std::int64_t p, int k = 1);
  // [[0, 1], [-1, 0]] and [[0, p^-1], [-p, 0]].
  static PAdicMatrix weyl_finite(std::int64_t p);
  static PAdicMatrix weyl_affine(std::int64_t p);
  // Integer matrix in SL2(Z) congruent to m modulo p^M.
  static PAdicMatrix lift(std::int64_t p, const grpfin::Matrix& m, int M);

  std::int64_t p() const { return p_; }
  const std::array<Int, 4>& numerators() const { return num_; }
  int exponent() const { return exp_; }
  // Valuation of entry i (row-major), kInfiniteValuation for zero.
  int valuation(int i) const;
  // Valuation of entry i minus delta_{i,j} (entries a - 1 and d - 1).
  int valuation_minus_identity(int i) const;
  // t with det = p^t; throws ArgumentError if the determinant is not +p^t.
  int det_exponent() const;
  bool is_integral() const { return exp_ == 0; }
  grpfin::Matrix reduce(std::int64_t modulus) const;  // requires integral
  std::string entry_string(int i) const;              // "num/den"

  PAdicMatrix operator*(const PAdicMatrix& o) const;
  PAdicMatrix inverse() const;
  bool operator==(const PAdicMatrix& o) const = default;

 private:
  void normalize();
  std::int64_t p_;
  std::array<Int, 4> num_;
  int exp_;
};

// {g : val(a-1) >= la, val(b) >= lb, val(c) >= lc, val(d-1) >= ld}.
struct Descriptor {
  int la = 0, lb = 0, lc = 0, ld = 0;

  bool contains(const PAdicMatrix& g) const;
  Descriptor intersect(const Descriptor& o) const;
  // The descriptor of m^-1 D m for a monomial matrix m.
  Descriptor conjugated_by(const PAdicMatrix& m) const;
  // Shift by conjugation with eta^t: lb -> lb - t, lc -> lc + t.
  Descriptor eta_shift(int t) const { return {la, lb - t, lc + t, ld}; }
  bool subset_of(const Descriptor& o) const {
    return la >= o.la && lb >= o.lb && lc >= o.lc && ld >= o.ld;
  }
  int max_threshold() const;
  bool inside_integral_matrices() const { return la >= 0 && lb >= 0 && lc >= 0 && ld >= 0; }
  std::string to_string() const;
  auto operator<=>(const Descriptor&) const = default;
};

// Standard Moy-Prasad groups of SL2 at integer depth r >= 0.
Descriptor iwahori();                      // (0, 0, 1, 0)
Descriptor iwahori_r(int r);               // (r, r, r+1, r); r = 0 gives I
Descriptor iwahori_plus(int r);            // (r+1, r, r+1, r+1)
Descriptor hyperspecial_r(int r);          // level-r congruence subgroup; r = 0 gives G(O)
Descriptor hyperspecial_plus(int r);       // level r+1
Descriptor second_hyperspecial_r(int r);   // eta G(O)_r eta^-1 = (r, r-1, r+1, r)
Descriptor second_hyperspecial_plus(int r);

// Haar measure normalized by mu(I^+) = 1, from the Iwahori factorization
// (lb + lc >= 1, la = ld) or the index of I in G(O) (G(O) and its eta
// conjugates). Throws StructuralError for any other threshold pattern.
Rational haar_measure(const Descriptor& D, std::int64_t p);

// Canonical label of the right coset x D.
struct CosetKey {
  std::array<std::int64_t, 7> v{};
  auto operator<=>(const CosetKey&) const = default;
};
struct CosetKeyHash {
  std::size_t operator()(const CosetKey& k) const noexcept;
};
CosetKey coset_key(const PAdicMatrix& x, const Descriptor& D);

// Topological generators of a descriptor group inside SL2(Z): the two root
// subgroups and a lift of a torus generator.
std::vector<PAdicMatrix> descriptor_generators(const Descriptor& D, std::int64_t p);

// Representatives of A / (A cap B) for descriptor groups, A inside G(O),
// found by orbit search and checked against the measure index.
std::vector<PAdicMatrix> coset_representatives(const Descriptor& A, const Descriptor& B, std::int64_t p);

// The quotient SL2(Z/p^N) in which subgroup statements are checked.
class WindowQuotient {
 public:
  WindowQuotient(std::int64_t p, int N);
  std::int64_t p() const { return p_; }
  int N() const { return N_; }
  std::int64_t modulus() const { return modulus_; }
  grpfin::Matrix reduce(const PAdicMatrix& g) const;
  std::int64_t encode(const grpfin::Matrix& m) const;
  grpfin::Matrix multiply(const grpfin::Matrix& a, const grpfin::Matrix& b) const;
  // Elements of the image of D; D must lie in G(O) with thresholds <= N.
  std::vector<grpfin::Matrix> enumerate(const Descriptor& D) const;
  std::int64_t count(const Descriptor& D) const;
  // Closure of the image under products and inverses, via its generators.
  bool is_subgroup(const Descriptor& D) const;
  // Full Cayley table of SL2(Z/p^N), built on first use.
  const grpfin::GroupTable& group() const;

 private:
  void check(const Descriptor& D) const;
  std::int64_t p_;
  int N_;
  std::int64_t modulus_;
  mutable std::shared_ptr<grpfin::GroupTable> group_;
};

// mu(D) as the window index [D : I^+] for D inside G(O) with thresholds <= N.
Rational measure(const Descriptor& D, const WindowQuotient& w);

}  // namespace stabkit::hecke
