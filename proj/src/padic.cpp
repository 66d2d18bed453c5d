#include "stabkit/padic.hpp"

#include <algorithm>
#include <deque>
#include <numeric>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace stabkit::hecke {

namespace {

Int checked_mul(Int a, Int b) {
  Int r;
  if (__builtin_mul_overflow(a, b, &r)) throw CapacityError("p-adic matrix entry overflow");
  return r;
}

Int checked_add(Int a, Int b) {
  Int r;
  if (__builtin_add_overflow(a, b, &r)) throw CapacityError("p-adic matrix entry overflow");
  return r;
}

Int checked_sub(Int a, Int b) {
  Int r;
  if (__builtin_sub_overflow(a, b, &r)) throw CapacityError("p-adic matrix entry overflow");
  return r;
}

Int int_pow(std::int64_t p, int e) {
  Int r = 1;
  for (int i = 0; i < e; ++i) r = checked_mul(r, p);
  return r;
}

int int_valuation(Int a, std::int64_t p) {
  if (a == 0) return kInfiniteValuation;
  int v = 0;
  while (a % p == 0) {
    a /= p;
    ++v;
  }
  return v;
}

std::int64_t int_mod(Int a, std::int64_t m) {
  Int r = a % m;
  if (r < 0) r += m;
  return static_cast<std::int64_t>(r);
}

Int int_abs(Int a) { return a < 0 ? -a : a; }

Int int_gcd(Int a, Int b) {
  a = int_abs(a);
  b = int_abs(b);
  while (b != 0) {
    Int t = a % b;
    a = b;
    b = t;
  }
  return a;
}

// Returns g = gcd(a, b) >= 0 and x, y with a x + b y = g.
Int ext_gcd(Int a, Int b, Int& x, Int& y) {
  Int old_r = a, r = b, old_s = 1, s = 0, old_t = 0, t = 1;
  while (r != 0) {
    Int q = old_r / r;
    Int tmp = old_r - q * r;
    old_r = r;
    r = tmp;
    tmp = old_s - q * s;
    old_s = s;
    s = tmp;
    tmp = old_t - q * t;
    old_t = t;
    t = tmp;
  }
  if (old_r < 0) {
    old_r = -old_r;
    old_s = -old_s;
    old_t = -old_t;
  }
  x = old_s;
  y = old_t;
  return old_r;
}

void require_odd_prime(std::int64_t p) {
  if (p < 3 || !is_prime(p)) throw ArgumentError("p must be an odd prime, got " + std::to_string(p));
}

}  // namespace

std::string to_string(Int v) {
  if (v == 0) return "0";
  bool neg = v < 0;
  std::string s;
  while (v != 0) {
    int digit = static_cast<int>(v % 10);
    s.push_back(static_cast<char>('0' + (neg ? -digit : digit)));
    v /= 10;
  }
  if (neg) s.push_back('-');
  std::reverse(s.begin(), s.end());
  return s;
}

PAdicMatrix::PAdicMatrix(std::int64_t p, std::array<Int, 4> num, int exp) : p_(p), num_(num), exp_(exp) {
  require_odd_prime(p);
  normalize();
}

void PAdicMatrix::normalize() {
  if (exp_ < 0) {
    Int f = int_pow(p_, -exp_);
    for (auto& x : num_) x = checked_mul(x, f);
    exp_ = 0;
  }
  while (exp_ > 0 && std::all_of(num_.begin(), num_.end(), [&](Int x) { return x % p_ == 0; })) {
    for (auto& x : num_) x /= p_;
    --exp_;
  }
}

PAdicMatrix PAdicMatrix::upper(std::int64_t p, std::int64_t x, int k) {
  if (k >= 0) return PAdicMatrix(p, {1, checked_mul(x, int_pow(p, k)), 0, 1});
  Int d = int_pow(p, -k);
  return PAdicMatrix(p, {d, x, 0, d}, -k);
}

PAdicMatrix PAdicMatrix::lower(std::int64_t p, std::int64_t x, int k) {
  if (k >= 0) return PAdicMatrix(p, {1, 0, checked_mul(x, int_pow(p, k)), 1});
  Int d = int_pow(p, -k);
  return PAdicMatrix(p, {d, 0, x, d}, -k);
}

PAdicMatrix PAdicMatrix::translation(std::int64_t p, int k) {
  int a = std::abs(k);
  Int big = int_pow(p, 2 * a);
  if (k >= 0) return PAdicMatrix(p, {big, 0, 0, 1}, a);
  return PAdicMatrix(p, {1, 0, 0, big}, a);
}

PAdicMatrix PAdicMatrix::eta(std::int64_t p, int k) {
  if (k >= 0) return PAdicMatrix(p, {1, 0, 0, int_pow(p, k)});
  return PAdicMatrix(p, {int_pow(p, -k), 0, 0, 1}, -k);
}

PAdicMatrix PAdicMatrix::weyl_finite(std::int64_t p) { return PAdicMatrix(p, {0, 1, -1, 0}); }

PAdicMatrix PAdicMatrix::weyl_affine(std::int64_t p) {
  return PAdicMatrix(p, {0, 1, -static_cast<Int>(p) * p, 0}, 1);
}

PAdicMatrix PAdicMatrix::lift(std::int64_t p, const grpfin::Matrix& m, int M) {
  if (m.size() != 4) throw ArgumentError("lift expects a 2x2 matrix");
  const std::int64_t mod_m = ipow(p, M);
  Int a = stabkit::mod(m[0], mod_m), b = stabkit::mod(m[1], mod_m);
  Int c = stabkit::mod(m[2], mod_m), d = stabkit::mod(m[3], mod_m);
  if (int_mod(a * d - b * c, mod_m) != 1 % mod_m) throw ArgumentError("lift expects determinant one");
  Int A = a == 0 ? mod_m : a;
  Int C = c;
  int tries = 0;
  while (int_gcd(A, C) != 1) {
    C += mod_m;
    if (++tries > 100000) throw StructuralError("lift: no coprime column found");
  }
  Int x, y;
  ext_gcd(A, C, x, y);  // A x + C y = 1
  Int D0 = x, B0 = -y;  // A D0 - C B0 = 1
  Int t;
  if (A % p != 0) {
    t = int_mod((b - B0) * mod_inv(int_mod(A, mod_m), mod_m), mod_m);
  } else {
    t = int_mod((d - D0) * mod_inv(int_mod(C, mod_m), mod_m), mod_m);
  }
  Int B = B0 + t * A, D = D0 + t * C;
  return PAdicMatrix(p, {A, B, C, D});
}

int PAdicMatrix::valuation(int i) const {
  int v = int_valuation(num_[i], p_);
  return v == kInfiniteValuation ? v : v - exp_;
}

int PAdicMatrix::valuation_minus_identity(int i) const {
  if (i == 1 || i == 2) return valuation(i);
  Int x = checked_sub(num_[i], int_pow(p_, exp_));
  int v = int_valuation(x, p_);
  return v == kInfiniteValuation ? v : v - exp_;
}

int PAdicMatrix::det_exponent() const {
  Int det = checked_sub(checked_mul(num_[0], num_[3]), checked_mul(num_[1], num_[2]));
  if (det <= 0) throw ArgumentError("determinant is not a positive power of p");
  int k = 0;
  while (det % p_ == 0) {
    det /= p_;
    ++k;
  }
  if (det != 1) throw ArgumentError("determinant is not a power of p");
  return k - 2 * exp_;
}

grpfin::Matrix PAdicMatrix::reduce(std::int64_t modulus) const {
  if (exp_ != 0) throw ArgumentError("reduce needs an integral matrix");
  grpfin::Matrix m(4);
  for (int i = 0; i < 4; ++i) m[i] = int_mod(num_[i], modulus);
  return m;
}

std::string PAdicMatrix::entry_string(int i) const {
  Int n = num_[i];
  int e = exp_;
  while (e > 0 && n % p_ == 0) {
    n /= p_;
    --e;
  }
  return to_string(n) + "/" + to_string(int_pow(p_, e));
}

PAdicMatrix PAdicMatrix::operator*(const PAdicMatrix& o) const {
  if (p_ != o.p_) throw ArgumentError("matrices over different primes");
  const auto& a = num_;
  const auto& b = o.num_;
  std::array<Int, 4> r{checked_add(checked_mul(a[0], b[0]), checked_mul(a[1], b[2])),
                       checked_add(checked_mul(a[0], b[1]), checked_mul(a[1], b[3])),
                       checked_add(checked_mul(a[2], b[0]), checked_mul(a[3], b[2])),
                       checked_add(checked_mul(a[2], b[1]), checked_mul(a[3], b[3]))};
  return PAdicMatrix(p_, r, exp_ + o.exp_);
}

PAdicMatrix PAdicMatrix::inverse() const {
  int t = det_exponent();
  return PAdicMatrix(p_, {num_[3], -num_[1], -num_[2], num_[0]}, exp_ + t);
}

bool Descriptor::contains(const PAdicMatrix& g) const {
  return g.valuation_minus_identity(0) >= la && g.valuation(1) >= lb && g.valuation(2) >= lc &&
         g.valuation_minus_identity(3) >= ld;
}

Descriptor Descriptor::intersect(const Descriptor& o) const {
  return {std::max(la, o.la), std::max(lb, o.lb), std::max(lc, o.lc), std::max(ld, o.ld)};
}

Descriptor Descriptor::conjugated_by(const PAdicMatrix& m) const {
  const auto& n = m.numerators();
  if (n[1] == 0 && n[2] == 0) {
    int vx = m.valuation(0), vy = m.valuation(3);
    return {la, lb + vy - vx, lc + vx - vy, ld};
  }
  if (n[0] == 0 && n[3] == 0) {
    int vx = m.valuation(1), vy = m.valuation(2);
    return {ld, lc + vx - vy, lb + vy - vx, la};
  }
  throw ArgumentError("descriptor conjugation needs a monomial matrix");
}

int Descriptor::max_threshold() const { return std::max({la, lb, lc, ld}); }

std::string Descriptor::to_string() const {
  std::ostringstream os;
  os << "(" << la << "," << lb << "," << lc << "," << ld << ")";
  return os.str();
}

Descriptor iwahori() { return {0, 0, 1, 0}; }
Descriptor iwahori_r(int r) { return {r, r, r + 1, r}; }
Descriptor iwahori_plus(int r) { return {r + 1, r, r + 1, r + 1}; }
Descriptor hyperspecial_r(int r) { return {r, r, r, r}; }
Descriptor hyperspecial_plus(int r) { return hyperspecial_r(r + 1); }
Descriptor second_hyperspecial_r(int r) { return {r, r - 1, r + 1, r}; }
Descriptor second_hyperspecial_plus(int r) { return second_hyperspecial_r(r + 1); }

namespace {

bool is_ktype(const Descriptor& D) { return D.la == 0 && D.ld == 0 && D.lb + D.lc == 0; }

bool is_factorizable(const Descriptor& D) {
  return D.la == D.ld && D.la >= 0 && D.lb + D.lc >= 1 && D.la <= D.lb + D.lc;
}

Rational rational_power(std::int64_t p, int e) {
  return e >= 0 ? Rational(ipow(p, e)) : Rational(1, ipow(p, -e));
}

}  // namespace

Rational haar_measure(const Descriptor& D, std::int64_t p) {
  if (is_ktype(D)) return Rational(p * p - 1);
  if (!is_factorizable(D)) throw StructuralError("no measure formula for descriptor " + D.to_string());
  Rational torus = D.la == 0 ? Rational(p - 1, p) : rational_power(p, -D.la);
  return rational_power(p, 2 - D.lb - D.lc) * torus;
}

std::size_t CosetKeyHash::operator()(const CosetKey& k) const noexcept {
  std::size_t h = 1469598103934665603ull;
  for (auto x : k.v) {
    h ^= static_cast<std::size_t>(x) + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
  }
  return h;
}

namespace {

// Canonical label of kD for k in SL2(Z/p^M) with a unit (1,1) entry and D
// factorizable with lc >= 1: (c/a mod p^lc, normalized a, normalized b).
std::array<std::int64_t, 3> plus_key(const grpfin::Matrix& k, const Descriptor& D, std::int64_t p, std::int64_t m) {
  const std::int64_t a = k[0], b = k[1], c = k[2];
  const std::int64_t ainv = mod_inv(a, m);
  const std::int64_t ratio = mod_mul(c, ainv, m);
  const std::int64_t rbar = ratio % ipow(p, D.lc);
  const std::int64_t delta = stabkit::mod(rbar - ratio, m);
  const std::int64_t denom = stabkit::mod(1 - mod_mul(mod_mul(delta, a, m), b, m), m);
  const std::int64_t y = mod_mul(mod_mul(delta, mod_mul(a, a, m), m), mod_inv(denom, m), m);
  const std::int64_t a2 = stabkit::mod(a + mod_mul(b, y, m), m);
  const std::int64_t a_norm = D.la == 0 ? 1 : a2 % ipow(p, D.la);
  const std::int64_t alpha = mod_mul(a_norm, mod_inv(a2, m), m);
  const std::int64_t b_scaled = mod_mul(b, mod_inv(alpha, m), m);
  const std::int64_t b_norm = D.lb <= 0 ? 0 : b_scaled % ipow(p, D.lb);
  return {rbar, a_norm, b_norm};
}

}  // namespace

CosetKey coset_key(const PAdicMatrix& x, const Descriptor& D) {
  const std::int64_t p = x.p();
  int t = 0;
  if (D.lb < 0) t = -D.lb;
  else if (D.lc < 0) t = D.lc;
  Descriptor Dp = D.eta_shift(-t);
  if (!Dp.inside_integral_matrices()) throw StructuralError("descriptor cannot be moved into G(O): " + D.to_string());
  PAdicMatrix xp = t == 0 ? x : x * PAdicMatrix::eta(p, t);

  // Upper triangular normal form h with xp = h k, k in SL2(Z).
  const int tdet = xp.det_exponent();
  const int v = std::min(xp.valuation(2), xp.valuation(3));
  const int T = tdet - v;
  const auto& n = xp.numerators();
  const int e = xp.exponent();
  // Bottom row divided by p^v, as integers.
  auto scaled = [&](Int num, int shift) -> Int {
    // num / p^(e + shift) known to be integral
    int s = e + shift;
    if (s >= 0) return num / int_pow(p, s);
    return checked_mul(num, int_pow(p, -s));
  };
  const Int cp = scaled(n[2], v), dp = scaled(n[3], v);
  Int s, tt;
  const Int g = ext_gcd(cp, dp, s, tt);
  // beta = (a s + b t) / g modulo p^T Z_p, with a, b = n[0], n[1] over p^e.
  const Int beta_num_raw = checked_add(checked_mul(n[0], s), checked_mul(n[1], tt));
  int E = std::max(e, -T);
  Int beta_scaled = E > e ? checked_mul(beta_num_raw, int_pow(p, E - e)) : beta_num_raw;
  std::int64_t beta_num = 0;
  int beta_exp = 0;
  if (E + T > 0) {
    const Int modulus = int_pow(p, E + T);
    if (modulus > std::numeric_limits<std::int64_t>::max()) throw CapacityError("coset key modulus too large");
    const std::int64_t mm = static_cast<std::int64_t>(modulus);
    std::int64_t bn = mod_mul(int_mod(beta_scaled, mm), mod_inv(int_mod(g, mm), mm), mm);
    beta_exp = E;
    while (beta_exp > 0 && bn % p == 0) {
      bn /= p;
      --beta_exp;
    }
    if (bn == 0) beta_exp = 0;
    beta_num = bn;
  }
  CosetKey key;
  key.v[0] = v;
  key.v[1] = beta_num;
  key.v[2] = beta_exp;
  if (is_ktype(Dp)) return key;
  if (!is_factorizable(Dp)) throw StructuralError("no coset normal form for descriptor " + D.to_string());

  // k = h^-1 xp with h = [[p^T, beta], [0, p^v]].
  const int E0 = std::max({beta_exp, -T, -v, 0});
  const PAdicMatrix h(p, {int_pow(p, T + E0), checked_mul(beta_num, int_pow(p, E0 - beta_exp)), 0, int_pow(p, v + E0)},
                      E0);
  const PAdicMatrix k = h.inverse() * xp;
  if (!k.is_integral() || k.det_exponent() != 0) throw StructuralError("coset normal form did not reach SL2(Z)");
  const int M = std::max({Dp.la, Dp.lb, Dp.lc, 1});
  const std::int64_t m = ipow(p, M);
  grpfin::Matrix kb = k.reduce(m);
  std::int64_t flip = 0;
  if (Dp.lc == 0) {
    kb = {stabkit::mod(-kb[1], m), kb[0], stabkit::mod(-kb[3], m), kb[2]};
    Dp = {Dp.ld, Dp.lc, Dp.lb, Dp.la};
    flip |= 2;
  }
  if (kb[0] % p == 0) {
    kb = {stabkit::mod(-kb[2], m), stabkit::mod(-kb[3], m), kb[0], kb[1]};
    flip |= 1;
  }
  auto pk = plus_key(kb, Dp, p, m);
  key.v[3] = flip;
  key.v[4] = pk[0];
  key.v[5] = pk[1];
  key.v[6] = pk[2];
  return key;
}

std::vector<PAdicMatrix> descriptor_generators(const Descriptor& D, std::int64_t p) {
  if (!D.inside_integral_matrices()) throw ArgumentError("generators need a descriptor inside G(O)");
  std::vector<PAdicMatrix> gens{PAdicMatrix::upper(p, 1, D.lb), PAdicMatrix::lower(p, 1, D.lc)};
  if (is_ktype(D)) return gens;
  const int l = D.la;
  const int M = std::max({D.la, D.lb, D.lc, 2}) + 1;
  const std::int64_t m = ipow(p, M);
  std::int64_t tau;
  if (l >= 1) {
    tau = 1 + ipow(p, l);
  } else {
    tau = 2;
    const std::int64_t p2 = p * p;
    while (std::gcd(tau, p) != 1 || multiplicative_order(tau % p, p) != p - 1 || mod_pow(tau, p - 1, p2) == 1) ++tau;
  }
  tau %= m;
  gens.push_back(PAdicMatrix::lift(p, {tau, 0, 0, mod_inv(tau, m)}, M));
  return gens;
}

std::vector<PAdicMatrix> coset_representatives(const Descriptor& A, const Descriptor& B, std::int64_t p) {
  int t = 0;
  if (A.lb < 0) t = -A.lb;
  else if (A.lc < 0) t = A.lc;
  const Descriptor As = A.eta_shift(-t);
  const Descriptor Cs = A.intersect(B).eta_shift(-t);
  if (!As.inside_integral_matrices()) throw ArgumentError("coset representatives need A conjugate into G(O)");
  const Rational index = haar_measure(As, p) / haar_measure(Cs, p);
  if (index.denominator() != 1) throw StructuralError("non-integral index " + As.to_string() + " / " + Cs.to_string());
  const std::int64_t expected = index.numerator();
  const int M = std::max({Cs.la, Cs.lb, Cs.lc, Cs.ld, 1});
  const std::int64_t m = ipow(p, M);
  const auto gens = descriptor_generators(As, p);
  std::vector<PAdicMatrix> reps{PAdicMatrix::identity(p)};
  std::unordered_set<CosetKey, CosetKeyHash> seen{coset_key(reps.front(), Cs)};
  for (std::size_t i = 0; i < reps.size(); ++i) {
    for (const auto& g : gens) {
      PAdicMatrix y = PAdicMatrix::lift(p, (g * reps[i]).reduce(m), M);
      if (seen.insert(coset_key(y, Cs)).second) {
        reps.push_back(y);
        if (static_cast<std::int64_t>(reps.size()) > expected) {
          throw StructuralError("coset search exceeded the index " + std::to_string(expected));
        }
      }
    }
  }
  if (static_cast<std::int64_t>(reps.size()) != expected) {
    throw StructuralError("coset search found " + std::to_string(reps.size()) + " cosets, expected " +
                          std::to_string(expected));
  }
  if (t != 0) {
    const PAdicMatrix e = PAdicMatrix::eta(p, t), einv = PAdicMatrix::eta(p, -t);
    for (auto& r : reps) r = e * r * einv;
  }
  return reps;
}

WindowQuotient::WindowQuotient(std::int64_t p, int N) : p_(p), N_(N), modulus_(ipow(p, N)) {
  require_odd_prime(p);
  if (N < 1) throw ArgumentError("window level must be positive");
}

grpfin::Matrix WindowQuotient::reduce(const PAdicMatrix& g) const { return g.reduce(modulus_); }

std::int64_t WindowQuotient::encode(const grpfin::Matrix& m) const {
  return ((m[0] * modulus_ + m[1]) * modulus_ + m[2]) * modulus_ + m[3];
}

grpfin::Matrix WindowQuotient::multiply(const grpfin::Matrix& a, const grpfin::Matrix& b) const {
  return grpfin::mat_mul(a, b, 2, modulus_);
}

void WindowQuotient::check(const Descriptor& D) const {
  if (!D.inside_integral_matrices()) throw ArgumentError("descriptor not inside G(O): " + D.to_string());
  if (D.max_threshold() > N_) throw CapacityError("descriptor " + D.to_string() + " exceeds window level " + std::to_string(N_));
}

namespace {

int residue_valuation(std::int64_t x, std::int64_t p, int N) {
  if (x == 0) return N;
  return std::min(valuation(x, p), N);
}

}  // namespace

std::vector<grpfin::Matrix> WindowQuotient::enumerate(const Descriptor& D) const {
  check(D);
  const std::int64_t m = modulus_;
  auto ok = [&](std::int64_t x, int l) { return residue_valuation(x, p_, N_) >= l; };
  const std::int64_t sa = ipow(p_, std::min(D.la, N_)), sb = ipow(p_, std::min(D.lb, N_)),
                     sc = ipow(p_, std::min(D.lc, N_));
  std::vector<grpfin::Matrix> out;
  for (std::int64_t a0 = 0; a0 < m; a0 += sa) {
    const std::int64_t a = (a0 + (D.la > 0 ? 1 : 0)) % m;
    for (std::int64_t b = 0; b < m; b += sb) {
      for (std::int64_t c = 0; c < m; c += sc) {
        if (a % p_ != 0) {
          const std::int64_t d = mod_mul(stabkit::mod(1 + mod_mul(b, c, m), m), mod_inv(a, m), m);
          if (ok(stabkit::mod(d - 1, m), D.ld)) out.push_back({a, b, c, d});
        } else if (c % p_ != 0) {
          const std::int64_t cinv = mod_inv(c, m);
          for (std::int64_t d = 0; d < m; ++d) {
            if (!ok(stabkit::mod(d - 1, m), D.ld)) continue;
            const std::int64_t bb = mod_mul(stabkit::mod(mod_mul(a, d, m) - 1, m), cinv, m);
            if (bb == b) out.push_back({a, b, c, d});
          }
        }
      }
    }
  }
  return out;
}

std::int64_t WindowQuotient::count(const Descriptor& D) const {
  return static_cast<std::int64_t>(enumerate(D).size());
}

bool WindowQuotient::is_subgroup(const Descriptor& D) const {
  const auto elems = enumerate(D);
  std::unordered_set<std::int64_t> members;
  for (const auto& e : elems) members.insert(encode(e));
  if (members.empty()) return false;
  std::vector<grpfin::Matrix> gens;
  for (const auto& g : descriptor_generators(D, p_)) gens.push_back(reduce(g));
  for (const auto& g : gens) {
    if (!members.count(encode(g))) return false;
  }
  std::unordered_set<std::int64_t> closure{encode(grpfin::identity_matrix(2))};
  std::deque<grpfin::Matrix> queue{grpfin::identity_matrix(2)};
  while (!queue.empty()) {
    auto x = queue.front();
    queue.pop_front();
    for (const auto& g : gens) {
      auto y = multiply(g, x);
      if (closure.insert(encode(y)).second) {
        if (!members.count(encode(y))) return false;
        queue.push_back(std::move(y));
      }
    }
  }
  return closure.size() == members.size();
}

const grpfin::GroupTable& WindowQuotient::group() const {
  if (!group_) {
    group_ = std::make_shared<grpfin::GroupTable>(grpfin::GroupTable::special_linear({2, p_, N_}));
  }
  return *group_;
}

Rational measure(const Descriptor& D, const WindowQuotient& w) {
  const std::int64_t base = w.count(iwahori_plus(0));
  const std::int64_t c = w.count(D);
  if (!w.is_subgroup(D)) throw StructuralError("descriptor " + D.to_string() + " is not a subgroup of the window");
  return Rational(c, base);
}

}  // namespace stabkit::hecke
