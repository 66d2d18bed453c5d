#include "stabkit/algcore.hpp"

#include <cmath>
#include <numbers>

namespace stabkit {

bool is_prime(std::int64_t n) {
  if (n < 2) return false;
  for (std::int64_t d = 2; d * d <= n; ++d)
    if (n % d == 0) return false;
  return true;
}

std::int64_t ipow(std::int64_t base, int exp) {
  std::int64_t r = 1;
  for (int i = 0; i < exp; ++i) r *= base;
  return r;
}

std::int64_t mod(std::int64_t a, std::int64_t m) {
  std::int64_t r = a % m;
  return r < 0 ? r + m : r;
}

std::int64_t mod_mul(std::int64_t a, std::int64_t b, std::int64_t m) {
  return static_cast<std::int64_t>(
      (static_cast<__int128>(mod(a, m)) * mod(b, m)) % m);
}

std::int64_t mod_pow(std::int64_t a, std::int64_t e, std::int64_t m) {
  std::int64_t r = 1 % m;
  a = mod(a, m);
  while (e > 0) {
    if (e & 1) r = mod_mul(r, a, m);
    a = mod_mul(a, a, m);
    e >>= 1;
  }
  return r;
}

std::int64_t mod_inv(std::int64_t a, std::int64_t m) {
  std::int64_t g = m, x = 0, x1 = 1, a1 = mod(a, m);
  while (a1 != 0) {
    std::int64_t q = g / a1;
    std::int64_t t = g - q * a1;
    g = a1;
    a1 = t;
    t = x - q * x1;
    x = x1;
    x1 = t;
  }
  if (g != 1) throw ArgumentError("mod_inv: " + std::to_string(a) + " is not a unit mod " + std::to_string(m));
  return mod(x, m);
}

int valuation(std::int64_t a, std::int64_t p) {
  if (a == 0) throw ArgumentError("valuation of zero");
  int v = 0;
  while (a % p == 0) {
    a /= p;
    ++v;
  }
  return v;
}

int valuation(const Rational& r, std::int64_t p) {
  return valuation(r.numerator(), p) - valuation(r.denominator(), p);
}

std::int64_t multiplicative_order(std::int64_t a, std::int64_t p) {
  a = mod(a, p);
  if (a == 0) throw ArgumentError("order of zero");
  std::int64_t x = a, k = 1;
  while (x != 1) {
    x = mod_mul(x, a, p);
    ++k;
  }
  return k;
}

bool is_square_mod(std::int64_t a, std::int64_t p) {
  a = mod(a, p);
  if (a == 0) return true;
  return mod_pow(a, (p - 1) / 2, p) == 1;
}

std::int64_t smallest_nonresidue(std::int64_t p) {
  for (std::int64_t a = 2; a < p; ++a)
    if (!is_square_mod(a, p)) return a;
  throw ArgumentError("no nonresidue mod " + std::to_string(p));
}

PrimeFieldElement::PrimeFieldElement(std::int64_t value, std::int64_t p)
    : value_(mod(value, p)), p_(p) {
  if (!is_prime(p)) throw ArgumentError("PrimeFieldElement: modulus not prime");
}

void PrimeFieldElement::check_same(const PrimeFieldElement& o) const {
  if (o.p_ != p_) throw StructuralError("PrimeFieldElement: field mismatch");
}

PrimeFieldElement PrimeFieldElement::operator+(const PrimeFieldElement& o) const {
  check_same(o);
  return {value_ + o.value_, p_};
}
PrimeFieldElement PrimeFieldElement::operator-(const PrimeFieldElement& o) const {
  check_same(o);
  return {value_ - o.value_, p_};
}
PrimeFieldElement PrimeFieldElement::operator-() const { return {-value_, p_}; }
PrimeFieldElement PrimeFieldElement::operator*(const PrimeFieldElement& o) const {
  check_same(o);
  return {mod_mul(value_, o.value_, p_), p_};
}
PrimeFieldElement PrimeFieldElement::inverse() const { return {mod_inv(value_, p_), p_}; }
PrimeFieldElement PrimeFieldElement::pow(std::int64_t e) const {
  if (e < 0) return inverse().pow(-e);
  return {mod_pow(value_, e, p_), p_};
}

ResidueRingElement::ResidueRingElement(std::int64_t value, std::int64_t p, int N)
    : p_(p), N_(N), modulus_(ipow(p, N)) {
  if (!is_prime(p) || N < 1) throw ArgumentError("ResidueRingElement: need prime p and N >= 1");
  value_ = mod(value, modulus_);
}

void ResidueRingElement::check_same(const ResidueRingElement& o) const {
  if (o.p_ != p_ || o.N_ != N_) throw StructuralError("ResidueRingElement: ring mismatch");
}

ResidueRingElement ResidueRingElement::operator+(const ResidueRingElement& o) const {
  check_same(o);
  return {value_ + o.value_, p_, N_};
}
ResidueRingElement ResidueRingElement::operator-(const ResidueRingElement& o) const {
  check_same(o);
  return {value_ - o.value_, p_, N_};
}
ResidueRingElement ResidueRingElement::operator*(const ResidueRingElement& o) const {
  check_same(o);
  return {mod_mul(value_, o.value_, modulus_), p_, N_};
}
ResidueRingElement ResidueRingElement::inverse() const {
  return {mod_inv(value_, modulus_), p_, N_};
}
ResidueRingElement ResidueRingElement::reduce(int M) const {
  if (M > N_ || M < 1) throw ArgumentError("ResidueRingElement::reduce: bad level");
  return {value_, p_, M};
}

Complex psi(std::int64_t t, std::int64_t p) {
  const double angle = 2.0 * std::numbers::pi * static_cast<double>(mod(t, p)) / static_cast<double>(p);
  return {std::cos(angle), std::sin(angle)};
}

Complex psi(const PrimeFieldElement& t) { return psi(t.value(), t.p()); }

PrimeFieldElement unit_group_generator(std::int64_t p) {
  if (!is_prime(p)) throw ArgumentError("unit_group_generator: p not prime");
  for (std::int64_t g = 1; g < p; ++g)
    if (multiplicative_order(g, p) == p - 1) return {g, p};
  throw StructuralError("no primitive root");
}

double sqrt_q(std::int64_t q) { return std::sqrt(static_cast<double>(q)); }

ScalarConventions scalar_conventions(std::int64_t p) {
  return {p, "exp(2*pi*i*t/p)", unit_group_generator(p).value(), sqrt_q(p)};
}

double max_abs_diff(const std::vector<Complex>& a, const std::vector<Complex>& b) {
  if (a.size() != b.size()) throw StructuralError("max_abs_diff: size mismatch");
  double m = 0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

double max_abs(const std::vector<Complex>& a) {
  double m = 0;
  for (const auto& x : a) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace stabkit
