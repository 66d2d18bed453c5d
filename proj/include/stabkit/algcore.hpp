#pragma once
// Scalar arithmetic: prime fields, residue rings Z/p^N, complex scalars,
// the additive character psi and the positive square root of q.

#include <boost/rational.hpp>

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace stabkit {

using Complex = std::complex<double>;
using Rational = boost::rational<std::int64_t>;

inline constexpr double kTolerance = 1e-8;
inline constexpr double kTightTolerance = 1e-12;

// Error taxonomy shared by every module.
struct StructuralError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ArgumentError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
struct CapacityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ConvergenceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

bool is_prime(std::int64_t n);
std::int64_t ipow(std::int64_t base, int exp);
// Nonnegative residue of a mod m.
std::int64_t mod(std::int64_t a, std::int64_t m);
std::int64_t mod_mul(std::int64_t a, std::int64_t b, std::int64_t m);
std::int64_t mod_pow(std::int64_t a, std::int64_t e, std::int64_t m);
// Inverse of a unit mod m; throws ArgumentError for non-units.
std::int64_t mod_inv(std::int64_t a, std::int64_t m);
// p-adic valuation of a nonzero integer.
int valuation(std::int64_t a, std::int64_t p);
int valuation(const Rational& r, std::int64_t p);
std::int64_t multiplicative_order(std::int64_t a, std::int64_t p);
bool is_square_mod(std::int64_t a, std::int64_t p);
std::int64_t smallest_nonresidue(std::int64_t p);

class PrimeFieldElement {
 public:
  PrimeFieldElement(std::int64_t value, std::int64_t p);
  std::int64_t value() const { return value_; }
  std::int64_t p() const { return p_; }
  PrimeFieldElement operator+(const PrimeFieldElement& o) const;
  PrimeFieldElement operator-(const PrimeFieldElement& o) const;
  PrimeFieldElement operator-() const;
  PrimeFieldElement operator*(const PrimeFieldElement& o) const;
  PrimeFieldElement inverse() const;
  PrimeFieldElement pow(std::int64_t e) const;
  bool operator==(const PrimeFieldElement& o) const = default;

 private:
  void check_same(const PrimeFieldElement& o) const;
  std::int64_t value_;
  std::int64_t p_;
};

class ResidueRingElement {
 public:
  ResidueRingElement(std::int64_t value, std::int64_t p, int N);
  std::int64_t value() const { return value_; }
  std::int64_t p() const { return p_; }
  int N() const { return N_; }
  std::int64_t modulus() const { return modulus_; }
  bool is_unit() const { return value_ % p_ != 0; }
  ResidueRingElement operator+(const ResidueRingElement& o) const;
  ResidueRingElement operator-(const ResidueRingElement& o) const;
  ResidueRingElement operator*(const ResidueRingElement& o) const;
  ResidueRingElement inverse() const;
  // Reduction to Z/p^M for M <= N.
  ResidueRingElement reduce(int M) const;
  bool operator==(const ResidueRingElement& o) const = default;

 private:
  void check_same(const ResidueRingElement& o) const;
  std::int64_t value_;
  std::int64_t p_;
  int N_;
  std::int64_t modulus_;
};

// exp(2 pi i t / p).
Complex psi(std::int64_t t, std::int64_t p);
Complex psi(const PrimeFieldElement& t);
// Smallest primitive root mod p.
PrimeFieldElement unit_group_generator(std::int64_t p);
// Positive real square root of q.
double sqrt_q(std::int64_t q);

// Reproducible description of the scalar conventions, recorded in reports.
struct ScalarConventions {
  std::int64_t p;
  std::string psi;        // "exp(2*pi*i*t/p)"
  std::int64_t generator; // smallest primitive root
  double sqrt_q;          // positive root
};
ScalarConventions scalar_conventions(std::int64_t p);

double max_abs_diff(const std::vector<Complex>& a, const std::vector<Complex>& b);
double max_abs(const std::vector<Complex>& a);

}  // namespace stabkit
