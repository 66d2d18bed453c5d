#pragma once
// Affine root systems of type A1/A2, affine Weyl groups, standard parahoric
// labels, S-sets with saturation certificates, Bruhat lower sets and the
// root-level decomposition check behind the stabilization statements.

#include "stabkit/algcore.hpp"

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace stabkit::rootsys {

// Root datum of type A_l (l = 1, 2). Roots are e_i - e_j on coordinates 0..l;
// simple roots alpha_k = e_{k-1} - e_k for k = 1..l; the affine node is 0.
struct FiniteRootDatum {
  std::string label;
  int rank = 0;
  std::vector<std::vector<int>> cartan_matrix;
  std::vector<std::vector<int>> positive_roots;  // coefficients in alpha_1..alpha_l
  std::vector<int> marks;                        // a_0..a_l

  // Shared immutable instances; elements keep a pointer to them.
  static const FiniteRootDatum& from_label(std::string_view label);  // "A1" or "A2"
  int num_affine_simple() const { return rank + 1; }
  bool operator==(const FiniteRootDatum& o) const { return label == o.label; }
};

struct FiniteRoot {
  int i = 0, j = 1;  // e_i - e_j, i != j
  bool positive() const { return i < j; }
  FiniteRoot negated() const { return {j, i}; }
  auto operator<=>(const FiniteRoot&) const = default;
};

// beta = finite + level * delta.
struct AffineRoot {
  FiniteRoot finite;
  int level = 0;
  bool positive() const { return level > 0 || (level == 0 && finite.positive()); }
  AffineRoot negated() const { return {finite.negated(), -level}; }
  auto operator<=>(const AffineRoot&) const = default;
};

// Coefficient vector of a finite root in the simple roots alpha_1..alpha_l.
std::vector<int> simple_coefficients(const FiniteRoot& r, int rank);
AffineRoot affine_simple_root(const FiniteRootDatum& d, int k);
std::vector<AffineRoot> all_finite_roots_at_level(const FiniteRootDatum& d, int level);

// w = t_lambda * sigma acting on the apartment by x -> sigma(x) + lambda.
class AffineWeylElement {
 public:
  explicit AffineWeylElement(const FiniteRootDatum& d);  // identity
  AffineWeylElement(const FiniteRootDatum& d, std::vector<int> perm, std::vector<int> translation);
  static AffineWeylElement simple_reflection(const FiniteRootDatum& d, int k);
  static AffineWeylElement from_word(const FiniteRootDatum& d, const std::vector<int>& word);

  const FiniteRootDatum& datum() const { return *datum_; }
  const std::vector<int>& perm() const { return perm_; }
  const std::vector<int>& translation() const { return translation_; }
  bool is_identity() const;

  AffineWeylElement operator*(const AffineWeylElement& o) const;
  AffineWeylElement inverse() const;
  AffineRoot act(const AffineRoot& beta) const;
  // Inversion set N(w) = {beta > 0 : w(beta) < 0}, enumerated directly.
  std::vector<AffineRoot> inversion_set() const;
  int length() const { return static_cast<int>(inversion_set().size()); }
  // Canonical key independent of any word.
  std::vector<int> key() const;
  bool operator==(const AffineWeylElement& o) const { return key() == o.key(); }
  bool operator<(const AffineWeylElement& o) const { return key() < o.key(); }
  std::string to_string() const;

 private:
  const FiniteRootDatum* datum_;
  std::vector<int> perm_;         // sigma(e_i) = e_{perm_[i]}
  std::vector<int> translation_;  // lambda, coordinates sum to zero
};

AffineRoot act(const AffineWeylElement& w, const AffineRoot& beta);

// Bit k set <=> alpha_k in J.
using SimpleSet = unsigned;

struct ParahoricLabel {
  SimpleSet J = 0;
  std::vector<Rational> facet_values;  // alpha_k(x_J) for k = 0..l

  static ParahoricLabel make(const FiniteRootDatum& d, SimpleSet J);
  int semisimple_rank() const;
  std::string to_string() const;
};

std::vector<ParahoricLabel> standard_parahorics(const FiniteRootDatum& d);
Rational evaluate(const AffineRoot& beta, const ParahoricLabel& P, int rank);
// U_beta inside (P_J)_m^+ (strict) or (P_J)_m (non-strict).
bool filtration_member(const AffineRoot& beta, const ParahoricLabel& P, int m, bool strict, int rank);
SimpleSet jw(const AffineWeylElement& w);

// Elements of the affine Weyl group grouped by length, with reduced words.
class WeylEnumeration {
 public:
  WeylEnumeration(const FiniteRootDatum& d, int max_length);
  int max_length() const { return max_length_; }
  const std::vector<AffineWeylElement>& shell(int length) const { return shells_.at(length); }
  const std::vector<int>& reduced_word(const AffineWeylElement& w) const;
  int length_of(const AffineWeylElement& w) const;
  bool contains(const AffineWeylElement& w) const;

 private:
  const FiniteRootDatum* datum_;
  int max_length_;
  std::vector<std::vector<AffineWeylElement>> shells_;
  std::map<std::vector<int>, std::pair<int, std::vector<int>>> info_;  // key -> (length, word)
};

// All u <= w in Bruhat order (subword products of a reduced word of w).
std::vector<AffineWeylElement> bruhat_interval_below(const AffineWeylElement& w, const std::vector<int>& reduced_word);
bool bruhat_leq(const AffineWeylElement& u, const AffineWeylElement& w, const std::vector<int>& reduced_word_of_w);

inline constexpr int kSaturationMargin = 3;

struct SSetResult {
  std::vector<AffineWeylElement> elements;  // sorted, always contains 1
  bool saturated = false;
  int max_member_length = 0;
  // For each length shell: min over w of max_alpha w(alpha)(x_Q), or nullopt for an empty shell.
  std::vector<std::optional<Rational>> shell_min_eval;
  std::string diagnostic;
};

SSetResult s_set(const ParahoricLabel& Q, int n, int length_bound, const WeylEnumeration& en);

struct UnsaturatedError : CapacityError {
  using CapacityError::CapacityError;
};

class LowerSetY {
 public:
  LowerSetY() = default;
  explicit LowerSetY(std::vector<AffineWeylElement> elements);
  const std::vector<AffineWeylElement>& elements() const { return elements_; }
  bool contains(const AffineWeylElement& w) const;
  std::size_t size() const { return elements_.size(); }
  bool is_lower_set(const WeylEnumeration& en) const;

 private:
  std::vector<AffineWeylElement> elements_;  // sorted by key
};

LowerSetY y_of(const ParahoricLabel& Q, int n, int length_bound, const WeylEnumeration& en);
LowerSetY lower_closure(const std::vector<AffineWeylElement>& gens, const WeylEnumeration& en);

// Checks, for every beta with beta(x_J) > r and beta(x_J') <= r (J' = J + alpha),
// that w(beta)(x_Q) > n + r. Throws ArgumentError naming a failed precondition.
struct DecompositionResult {
  bool holds = true;
  int roots_checked = 0;
  std::optional<AffineRoot> witness;
};
DecompositionResult verify_decomposition_roots(const AffineWeylElement& w, int alpha, SimpleSet J,
                                               const ParahoricLabel& Q, int n, int r);
// Precondition test without throwing; returns the name of the failed condition or empty.
std::string decomposition_precondition_failure(const AffineWeylElement& w, int alpha, SimpleSet J,
                                               const ParahoricLabel& Q, int n);

std::string set_to_string(SimpleSet J, int rank);

}  // namespace stabkit::rootsys
