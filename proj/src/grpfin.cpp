#include "stabkit/grpfin.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <numeric>
#include <ostream>
#include <random>

namespace stabkit::grpfin {

Matrix identity_matrix(int n) {
  Matrix m(static_cast<std::size_t>(n) * n, 0);
  for (int i = 0; i < n; ++i) m[i * n + i] = 1;
  return m;
}

Matrix mat_mul(const Matrix& a, const Matrix& b, int n, std::int64_t m) {
  Matrix c(static_cast<std::size_t>(n) * n, 0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      std::int64_t s = 0;
      for (int k = 0; k < n; ++k) s += a[i * n + k] * b[k * n + j] % m;
      c[i * n + j] = mod(s, m);
    }
  return c;
}

std::int64_t mat_det(const Matrix& a, int n, std::int64_t m) {
  if (n == 1) return mod(a[0], m);
  if (n == 2) return mod(mod_mul(a[0], a[3], m) - mod_mul(a[1], a[2], m), m);
  if (n == 3) {
    auto e = [&](int i, int j) { return a[i * 3 + j]; };
    std::int64_t d = mod_mul(e(0, 0), mod(e(1, 1) * e(2, 2) - e(1, 2) * e(2, 1), m), m);
    d -= mod_mul(e(0, 1), mod(e(1, 0) * e(2, 2) - e(1, 2) * e(2, 0), m), m);
    d += mod_mul(e(0, 2), mod(e(1, 0) * e(2, 1) - e(1, 1) * e(2, 0), m), m);
    return mod(d, m);
  }
  throw ArgumentError("mat_det: only n <= 3");
}

Matrix mat_inverse(const Matrix& a, int n, std::int64_t m) {
  const std::int64_t dinv = mod_inv(mat_det(a, n, m), m);
  Matrix inv(static_cast<std::size_t>(n) * n);
  if (n == 1) {
    inv[0] = dinv;
  } else if (n == 2) {
    inv = {a[3], mod(-a[1], m), mod(-a[2], m), a[0]};
    for (auto& x : inv) x = mod_mul(x, dinv, m);
  } else if (n == 3) {
    auto e = [&](int i, int j) { return a[i * 3 + j]; };
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        // inv[i][j] = cofactor(j, i) / det
        const int r0 = (j + 1) % 3, r1 = (j + 2) % 3, c0 = (i + 1) % 3, c1 = (i + 2) % 3;
        inv[i * 3 + j] = mod_mul(mod(e(r0, c0) * e(r1, c1) - e(r0, c1) * e(r1, c0), m), dinv, m);
      }
  } else {
    throw ArgumentError("mat_inverse: only n <= 3");
  }
  return inv;
}

std::string matrix_to_string(const Matrix& a, int n) {
  std::string s = "[";
  for (int i = 0; i < n; ++i) {
    s += (i ? ",[" : "[");
    for (int j = 0; j < n; ++j) s += (j ? "," : "") + std::to_string(a[i * n + j]);
    s += "]";
  }
  return s + "]";
}

std::int64_t special_linear_order(const RingSpec& r) {
  std::int64_t order = ipow(r.p, r.n * (r.n - 1) / 2);
  for (int i = 2; i <= r.n; ++i) order *= ipow(r.p, i) - 1;
  for (int k = 1; k < r.N; ++k) order *= ipow(r.p, r.n * r.n - 1);
  return order;
}

namespace {

void check_ring(const RingSpec& r) {
  if (r.n < 1 || r.n > 3) throw ArgumentError("group: n must be 1, 2 or 3");
  if (!is_prime(r.p) || r.p == 2) throw ArgumentError("group: p must be an odd prime");
  if (r.N < 1) throw ArgumentError("group: N must be at least 1");
  const double code_bits = r.n * r.n * std::log2(static_cast<double>(r.modulus()));
  if (code_bits > 62) throw CapacityError("group: matrix encoding exceeds 62 bits");
}

// All matrices with determinant 1 over Z/p^N satisfying pred.
std::vector<Matrix> enumerate_special_linear(const RingSpec& r, const std::function<bool(const Matrix&)>& pred) {
  const std::int64_t m = r.modulus();
  const int nn = r.n * r.n;
  std::vector<Matrix> out;
  Matrix a(nn, 0);
  while (true) {
    if (mat_det(a, r.n, m) == 1 && (!pred || pred(a))) out.push_back(a);
    int pos = nn - 1;
    while (pos >= 0 && ++a[pos] == m) a[pos--] = 0;
    if (pos < 0) break;
  }
  return out;
}

std::vector<Matrix> elementary_generators(const RingSpec& r) {
  std::vector<Matrix> gens;
  for (int i = 0; i < r.n; ++i)
    for (int j = 0; j < r.n; ++j) {
      if (i == j) continue;
      Matrix e = identity_matrix(r.n);
      e[i * r.n + j] = 1;
      gens.push_back(e);
    }
  return gens;
}

}  // namespace

std::int64_t GroupTable::encode(const Matrix& mat) const {
  std::int64_t code = 0;
  for (auto x : mat) code = code * modulus_ + x;
  return code;
}

std::optional<int> GroupTable::find(const Matrix& m) const {
  if (m.size() != static_cast<std::size_t>(n() * n())) return std::nullopt;
  Matrix r(m);
  for (auto& x : r) x = mod(x, modulus_);
  auto it = index_.find(encode(r));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

int GroupTable::index_of(const Matrix& m) const {
  auto id = find(m);
  if (!id) throw ArgumentError("GroupTable " + name_ + ": matrix " + matrix_to_string(m, n()) + " not in group");
  return *id;
}

int GroupTable::multiply(int a, int b) const {
  auto id = find(mat_mul(elements_[a], elements_[b], n(), modulus_));
  if (!id) throw StructuralError("GroupTable " + name_ + ": product leaves the set");
  return *id;
}

int GroupTable::inverse(int a) const {
  auto id = find(mat_inverse(elements_[a], n(), modulus_));
  if (!id) throw StructuralError("GroupTable " + name_ + ": inverse leaves the set");
  return *id;
}

int GroupTable::power(int a, std::int64_t e) const {
  if (e < 0) return power(inverse(a), -e);
  int result = identity_, base = a;
  while (e > 0) {
    if (e & 1) result = multiply(result, base);
    base = multiply(base, base);
    e >>= 1;
  }
  return result;
}

int GroupTable::element_order(int a) const {
  int x = a, k = 1;
  while (x != identity_) {
    x = multiply(x, a);
    ++k;
  }
  return k;
}

std::int64_t GroupTable::exponent() const {
  std::int64_t e = 1;
  for (int c = 0; c < num_classes(); ++c) e = std::lcm(e, static_cast<std::int64_t>(element_order(class_rep(c))));
  return e;
}

void GroupTable::build(std::vector<Matrix> elems, const std::vector<Matrix>& generators) {
  modulus_ = ring_.modulus();
  std::vector<std::pair<std::int64_t, Matrix>> coded;
  coded.reserve(elems.size());
  for (auto& m : elems) coded.emplace_back(encode(m), std::move(m));
  std::sort(coded.begin(), coded.end(), [](const auto& x, const auto& y) { return x.first < y.first; });
  elements_.clear();
  index_.clear();
  index_.reserve(coded.size() * 2);
  for (auto& [code, m] : coded) {
    index_.emplace(code, static_cast<int>(elements_.size()));
    elements_.push_back(std::move(m));
  }
  identity_ = index_of(identity_matrix(n()));

  std::vector<int> gens;
  if (!generators.empty()) {
    for (const auto& g : generators) gens.push_back(index_of(g));
  } else {
    // Greedy generating set in element order; products leaving the set are
    // detected by multiply().
    std::vector<bool> reached(elements_.size(), false);
    reached[identity_] = true;
    for (int id = 0; id < order(); ++id) {
      if (reached[id]) continue;
      gens.push_back(id);
      std::vector<int> frontier;
      for (int x = 0; x < order(); ++x)
        if (reached[x]) frontier.push_back(x);
      while (!frontier.empty()) {
        std::vector<int> next;
        for (int x : frontier)
          for (int g : gens) {
            const int y = multiply(x, g);
            if (!reached[y]) {
              reached[y] = true;
              next.push_back(y);
            }
          }
        frontier = std::move(next);
      }
    }
  }
  generators_ = gens;

  // The generators must reach every element.
  std::vector<bool> seen(elements_.size(), false);
  std::vector<int> frontier{identity_};
  seen[identity_] = true;
  std::size_t count = 1;
  while (!frontier.empty()) {
    std::vector<int> next;
    for (int x : frontier)
      for (int g : gens) {
        const int y = multiply(x, g);
        if (!seen[y]) {
          seen[y] = true;
          ++count;
          next.push_back(y);
        }
      }
    frontier = std::move(next);
  }
  if (count != elements_.size()) throw StructuralError("GroupTable " + name_ + ": generators do not reach all elements");
  compute_classes(gens);
}

void GroupTable::compute_classes(const std::vector<int>& gens) {
  std::vector<int> gen_inv;
  for (int g : gens) gen_inv.push_back(inverse(g));
  class_of_.assign(elements_.size(), -1);
  class_members_.clear();
  auto orbit = [&](int start) {
    const int c = static_cast<int>(class_members_.size());
    std::vector<int> members{start};
    class_of_[start] = c;
    for (std::size_t head = 0; head < members.size(); ++head)
      for (std::size_t t = 0; t < gens.size(); ++t) {
        const int y = multiply(multiply(gens[t], members[head]), gen_inv[t]);
        if (class_of_[y] < 0) {
          class_of_[y] = c;
          members.push_back(y);
        }
      }
    std::sort(members.begin(), members.end());
    class_members_.push_back(std::move(members));
  };
  orbit(identity_);
  for (int id = 0; id < order(); ++id)
    if (class_of_[id] < 0) orbit(id);
}

GroupTable GroupTable::special_linear(const RingSpec& r) {
  check_ring(r);
  const auto expected = special_linear_order(r);
  if (expected > kMaxGroupOrder)
    throw CapacityError("SL_" + std::to_string(r.n) + "(Z/" + std::to_string(r.modulus()) + ") has order " +
                        std::to_string(expected) + " above the cap " + std::to_string(kMaxGroupOrder));
  GroupTable g;
  g.ring_ = r;
  g.name_ = "SL" + std::to_string(r.n) + "(Z/" + std::to_string(r.modulus()) + ")";
  auto elems = enumerate_special_linear(r, {});
  if (static_cast<std::int64_t>(elems.size()) != expected) throw StructuralError("SL enumeration disagrees with the order formula");
  g.build(std::move(elems), elementary_generators(r));
  return g;
}

GroupTable GroupTable::subgroup(const RingSpec& r, const std::function<bool(const Matrix&)>& pred, std::string name) {
  check_ring(r);
  if (special_linear_order(r) > 50 * kMaxGroupOrder) throw CapacityError("subgroup: ambient enumeration too large");
  GroupTable g;
  g.ring_ = r;
  g.name_ = std::move(name);
  auto elems = enumerate_special_linear(r, pred);
  if (elems.empty()) throw StructuralError("subgroup: empty set");
  g.build(std::move(elems), {});
  return g;
}

GroupTable GroupTable::subgroup(const GroupTable& ambient, const std::function<bool(const Matrix&)>& pred,
                                std::string name) {
  GroupTable g;
  g.ring_ = ambient.ring_;
  g.name_ = std::move(name);
  std::vector<Matrix> elems;
  for (const auto& m : ambient.elements_)
    if (pred(m)) elems.push_back(m);
  if (elems.empty()) throw StructuralError("subgroup: empty set");
  g.build(std::move(elems), {});
  return g;
}

const ClassAlgebra& GroupTable::class_algebra() const {
  std::call_once(algebra_->once, [this] {
    const int k = num_classes();
    auto alg = std::make_unique<ClassAlgebra>(k);
    std::vector<int> inv(elements_.size());
    for (int x = 0; x < order(); ++x) inv[x] = inverse(x);
    for (int c = 0; c < k; ++c) {
      const int z = class_rep(c);
      for (int x = 0; x < order(); ++x) ++alg->at(class_of_[x], class_of_[multiply(inv[x], z)], c);
    }
    algebra_->value = std::move(alg);
  });
  return *algebra_->value;
}

ClassFunction::ClassFunction(const GroupTable& g, std::vector<Complex> values) : group_(&g), values_(std::move(values)) {
  if (static_cast<int>(values_.size()) != g.num_classes()) throw StructuralError("ClassFunction: wrong number of values");
}

ClassFunction ClassFunction::from_elements(const GroupTable& g, std::span<const Complex> per_element) {
  if (static_cast<int>(per_element.size()) != g.order()) throw StructuralError("ClassFunction: wrong element count");
  ClassFunction f(g);
  for (int c = 0; c < g.num_classes(); ++c) {
    const Complex v = per_element[g.class_rep(c)];
    for (int x : g.class_members(c))
      if (std::abs(per_element[x] - v) > kTolerance) throw StructuralError("ClassFunction: values not constant on a class");
    f.values_[c] = v;
  }
  return f;
}

ClassFunction ClassFunction::delta_identity(const GroupTable& g) {
  ClassFunction f(g);
  f.values_[0] = 1.0;
  return f;
}

ClassFunction ClassFunction::constant(const GroupTable& g, Complex c) {
  return ClassFunction(g, std::vector<Complex>(g.num_classes(), c));
}

void ClassFunction::check_same(const ClassFunction& o) const {
  if (group_ != o.group_) throw StructuralError("ClassFunction: group mismatch");
}

ClassFunction ClassFunction::operator+(const ClassFunction& o) const {
  check_same(o);
  ClassFunction r(*this);
  for (std::size_t i = 0; i < values_.size(); ++i) r.values_[i] += o.values_[i];
  return r;
}

ClassFunction ClassFunction::operator-(const ClassFunction& o) const {
  check_same(o);
  ClassFunction r(*this);
  for (std::size_t i = 0; i < values_.size(); ++i) r.values_[i] -= o.values_[i];
  return r;
}

ClassFunction ClassFunction::operator*(Complex s) const {
  ClassFunction r(*this);
  for (auto& v : r.values_) v *= s;
  return r;
}

ClassFunction ClassFunction::conj() const {
  ClassFunction r(*this);
  for (auto& v : r.values_) v = std::conj(v);
  return r;
}

double ClassFunction::distance(const ClassFunction& o) const {
  check_same(o);
  return max_abs_diff(values_, o.values_);
}

Complex inner_product(const ClassFunction& f, const ClassFunction& g) {
  if (&f.group() != &g.group()) throw StructuralError("inner_product: group mismatch");
  const auto& G = f.group();
  Complex s = 0;
  for (int c = 0; c < G.num_classes(); ++c) s += static_cast<double>(G.class_size(c)) * f[c] * std::conj(g[c]);
  return s / static_cast<double>(G.order());
}

ClassFunction convolve(const ClassFunction& f, const ClassFunction& g) {
  if (&f.group() != &g.group()) throw StructuralError("convolve: group mismatch");
  const auto& G = f.group();
  const auto& alg = G.class_algebra();
  const int k = G.num_classes();
  ClassFunction out(G);
  for (int i = 0; i < k; ++i) {
    if (f[i] == Complex(0)) continue;
    for (int j = 0; j < k; ++j) {
      const Complex fg = f[i] * g[j];
      if (fg == Complex(0)) continue;
      for (int c = 0; c < k; ++c)
        if (const auto n = alg(i, j, c); n != 0) out[c] += fg * static_cast<double>(n);
    }
  }
  return out;
}

Complex gamma_scalar(const ClassFunction& f, const IrreducibleCharacter& pi) {
  if (&f.group() != &pi.values.group()) throw StructuralError("gamma_scalar: group mismatch");
  const auto& G = f.group();
  Complex s = 0;
  for (int c = 0; c < G.num_classes(); ++c) s += static_cast<double>(G.class_size(c)) * f[c] * pi.values[c];
  return s / static_cast<double>(pi.degree);
}

namespace {

// Linear algebra over F_P on row vectors.
using Vec = std::vector<std::int64_t>;

// Reduced row echelon form in place; returns pivot columns.
std::vector<int> rref(std::vector<Vec>& rows, std::int64_t P) {
  std::vector<int> pivots;
  if (rows.empty()) return pivots;
  const int cols = static_cast<int>(rows[0].size());
  int r = 0;
  for (int c = 0; c < cols && r < static_cast<int>(rows.size()); ++c) {
    int sel = -1;
    for (int i = r; i < static_cast<int>(rows.size()); ++i)
      if (rows[i][c] != 0) {
        sel = i;
        break;
      }
    if (sel < 0) continue;
    std::swap(rows[r], rows[sel]);
    const std::int64_t inv = mod_inv(rows[r][c], P);
    for (auto& x : rows[r]) x = mod_mul(x, inv, P);
    for (int i = 0; i < static_cast<int>(rows.size()); ++i) {
      if (i == r || rows[i][c] == 0) continue;
      const std::int64_t f = rows[i][c];
      for (int t = 0; t < cols; ++t) rows[i][t] = mod(rows[i][t] - mod_mul(f, rows[r][t], P), P);
    }
    pivots.push_back(c);
    ++r;
  }
  rows.resize(r);
  return pivots;
}

// Basis of {x : M x = 0} for a square matrix M (rows of M).
std::vector<Vec> nullspace(std::vector<Vec> M, std::int64_t P) {
  const int n = M.empty() ? 0 : static_cast<int>(M[0].size());
  const auto pivots = rref(M, P);
  std::vector<bool> is_pivot(n, false);
  for (int c : pivots) is_pivot[c] = true;
  std::vector<Vec> basis;
  for (int free = 0; free < n; ++free) {
    if (is_pivot[free]) continue;
    Vec v(n, 0);
    v[free] = 1;
    for (std::size_t r = 0; r < pivots.size(); ++r) v[pivots[r]] = mod(-M[r][free], P);
    basis.push_back(v);
  }
  return basis;
}

std::int64_t find_auxiliary_prime(std::int64_t exponent, std::int64_t order) {
  for (std::int64_t P = exponent + 1;; P += exponent)
    if (P > 2 * order && is_prime(P)) return P;
}

struct Subspace {
  std::vector<Vec> basis;  // rref rows
  std::vector<int> pivots;
};

std::optional<std::vector<IrreducibleCharacter>> try_character_table(const GroupTable& G, std::uint64_t seed) {
  const int k = G.num_classes();
  const auto& alg = G.class_algebra();
  const std::int64_t e = G.exponent();
  const std::int64_t P = find_auxiliary_prime(e, G.order());
  const std::int64_t z = mod_pow(unit_group_generator(P).value(), (P - 1) / e, P);

  std::vector<int> order_j(k);
  std::iota(order_j.begin(), order_j.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(order_j.begin(), order_j.end(), rng);

  std::vector<Subspace> spaces;
  {
    std::vector<Vec> id(k, Vec(k, 0));
    for (int i = 0; i < k; ++i) id[i][i] = 1;
    auto piv = rref(id, P);
    spaces.push_back({id, piv});
  }
  for (int j : order_j) {
    std::vector<Subspace> next;
    for (auto& S : spaces) {
      const int d = static_cast<int>(S.basis.size());
      if (d == 1) {
        next.push_back(S);
        continue;
      }
      // Matrix of A_j on S in the rref coordinates: (A_j b_s)[pivot_t].
      std::vector<Vec> images(d, Vec(k, 0));
      for (int s = 0; s < d; ++s)
        for (int i = 0; i < k; ++i) {
          std::int64_t acc = 0;
          for (int c = 0; c < k; ++c)
            if (S.basis[s][c]) acc = mod(acc + mod_mul(alg(i, j, c) % P, S.basis[s][c], P), P);
          images[s][i] = acc;
        }
      std::vector<Vec> X(d, Vec(d, 0));  // X[t][s]
      for (int s = 0; s < d; ++s)
        for (int t = 0; t < d; ++t) X[t][s] = images[s][S.pivots[t]];
      int found = 0;
      for (std::int64_t lam = 0; lam < P && found < d; ++lam) {
        auto Y = X;
        for (int t = 0; t < d; ++t) Y[t][t] = mod(Y[t][t] - lam, P);
        auto ker = nullspace(Y, P);
        if (ker.empty()) continue;
        found += static_cast<int>(ker.size());
        std::vector<Vec> rows;
        for (const auto& v : ker) {
          Vec full(k, 0);
          for (int s = 0; s < d; ++s)
            if (v[s])
              for (int c = 0; c < k; ++c) full[c] = mod(full[c] + mod_mul(v[s], S.basis[s][c], P), P);
          rows.push_back(full);
        }
        auto piv = rref(rows, P);
        next.push_back({rows, piv});
      }
      if (found != d) return std::nullopt;
    }
    spaces = std::move(next);
  }
  if (static_cast<int>(spaces.size()) != k) return std::nullopt;

  // Power maps on class representatives.
  std::vector<std::vector<int>> power_class(k, std::vector<int>(e));
  for (int c = 0; c < k; ++c) {
    int x = G.identity();
    for (std::int64_t l = 0; l < e; ++l) {
      power_class[c][l] = G.class_of(x);
      x = G.multiply(x, G.class_rep(c));
    }
  }
  std::vector<std::int64_t> zpow(e);
  zpow[0] = 1;
  for (std::int64_t l = 1; l < e; ++l) zpow[l] = mod_mul(zpow[l - 1], z, P);
  const std::int64_t e_inv = mod_inv(e % P, P);

  std::vector<IrreducibleCharacter> chars;
  for (const auto& S : spaces) {
    Vec w = S.basis[0];
    if (w[0] == 0) return std::nullopt;
    const std::int64_t scale = mod_inv(w[0], P);
    for (auto& x : w) x = mod_mul(x, scale, P);
    std::int64_t sum = 0;
    for (int i = 0; i < k; ++i)
      sum = mod(sum + mod_mul(mod_mul(w[i], w[G.inverse_class(i)], P), mod_inv(G.class_size(i), P), P), P);
    if (sum == 0) return std::nullopt;
    const std::int64_t d2 = mod_mul(G.order() % P, mod_inv(sum, P), P);
    const auto d = static_cast<std::int64_t>(std::llround(std::sqrt(static_cast<double>(d2))));
    if (d <= 0 || d * d != d2) return std::nullopt;
    Vec theta(k);
    for (int i = 0; i < k; ++i) theta[i] = mod_mul(mod_mul(d, w[i], P), mod_inv(G.class_size(i), P), P);
    std::vector<Complex> values(k);
    for (int i = 0; i < k; ++i) {
      std::int64_t total = 0;
      Complex v = 0;
      for (std::int64_t t = 0; t < e; ++t) {
        std::int64_t m = 0;
        for (std::int64_t l = 0; l < e; ++l)
          m = mod(m + mod_mul(theta[power_class[i][l]], zpow[mod(-t * l, e)], P), P);
        m = mod_mul(m, e_inv, P);
        if (m > d) return std::nullopt;
        total += m;
        const double angle = 2.0 * std::numbers::pi * static_cast<double>(t) / static_cast<double>(e);
        v += static_cast<double>(m) * Complex(std::cos(angle), std::sin(angle));
      }
      if (total != d) return std::nullopt;
      values[i] = v;
    }
    chars.push_back({ClassFunction(G, values), static_cast<int>(d)});
  }

  // Validation: both orthogonality relations and the degree sum.
  std::int64_t deg2 = 0;
  for (const auto& c : chars) deg2 += static_cast<std::int64_t>(c.degree) * c.degree;
  if (deg2 != G.order()) return std::nullopt;
  for (std::size_t a = 0; a < chars.size(); ++a)
    for (std::size_t b = 0; b < chars.size(); ++b)
      if (std::abs(inner_product(chars[a].values, chars[b].values) - (a == b ? 1.0 : 0.0)) > kTolerance) return std::nullopt;
  for (int c1 = 0; c1 < k; ++c1)
    for (int c2 = 0; c2 < k; ++c2) {
      Complex s = 0;
      for (const auto& c : chars) s += c.values[c1] * std::conj(c.values[c2]);
      const double expect = c1 == c2 ? static_cast<double>(G.order()) / G.class_size(c1) : 0.0;
      if (std::abs(s - expect) > kTolerance * G.order()) return std::nullopt;
    }

  auto key = [](const IrreducibleCharacter& c) {
    std::vector<std::int64_t> kk{c.degree};
    for (auto v : c.values.values()) {
      kk.push_back(-std::llround(v.real() * 1e6));
      kk.push_back(-std::llround(v.imag() * 1e6));
    }
    return kk;
  };
  std::stable_sort(chars.begin(), chars.end(), [&](const auto& a, const auto& b) { return key(a) < key(b); });
  return chars;
}

}  // namespace

std::vector<IrreducibleCharacter> character_table(const GroupTable& g, std::uint64_t seed) {
  for (int attempt = 0; attempt < kCharacterTableAttempts; ++attempt)
    if (auto chars = try_character_table(g, seed + attempt)) return std::move(*chars);
  throw ConvergenceError("character_table: no consistent table for " + g.name() + " after " +
                         std::to_string(kCharacterTableAttempts) + " seeds starting at " + std::to_string(seed));
}

namespace {

std::string format_complex(Complex v) {
  auto clean = [](double x) { return std::abs(x) < 5e-11 ? 0.0 : x; };
  char buf[96];
  std::snprintf(buf, sizeof buf, "%.10f%+.10fi", clean(v.real()), clean(v.imag()));
  return buf;
}

}  // namespace

void write_character_table_csv(std::ostream& os, const GroupTable& g, const std::vector<IrreducibleCharacter>& chars) {
  os << "class,rep,size";
  for (std::size_t c = 0; c < chars.size(); ++c) os << ",chi" << c << "(deg " << chars[c].degree << ")";
  os << "\n";
  for (int c = 0; c < g.num_classes(); ++c) {
    os << c << ",\"" << matrix_to_string(g.element(g.class_rep(c)), g.n()) << "\"," << g.class_size(c);
    for (const auto& ch : chars) os << "," << format_complex(ch.values[c]);
    os << "\n";
  }
}

namespace {

std::vector<int> block_index(int n, const std::vector<int>& composition) {
  std::vector<int> blk;
  for (std::size_t b = 0; b < composition.size(); ++b)
    for (int t = 0; t < composition[b]; ++t) blk.push_back(static_cast<int>(b));
  if (static_cast<int>(blk.size()) != n) throw ArgumentError("composition does not sum to n");
  return blk;
}

}  // namespace

bool is_block_triangular(const Matrix& m, int n, const std::vector<int>& composition, bool lower) {
  const auto blk = block_index(n, composition);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const bool outside = lower ? blk[i] < blk[j] : blk[i] > blk[j];
      if (outside && m[i * n + j] != 0) return false;
    }
  return true;
}

bool is_block_diagonal(const Matrix& m, int n, const std::vector<int>& composition) {
  const auto blk = block_index(n, composition);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (blk[i] != blk[j] && m[i * n + j] != 0) return false;
  return true;
}

Parabolic::Parabolic(const GroupTable& ambient, const GroupTable& levi, std::vector<int> composition, bool lower)
    : ambient_(&ambient), levi_(&levi), composition_(std::move(composition)), lower_(lower) {
  const int n = ambient.n();
  if (levi.n() != n || levi.modulus() != ambient.modulus()) throw StructuralError("Parabolic: levi over a different ring");
  const auto blk = block_index(n, composition_);
  in_parabolic_.assign(ambient.order(), false);
  for (int id = 0; id < ambient.order(); ++id) {
    const auto& m = ambient.element(id);
    if (!is_block_triangular(m, n, composition_, lower_)) continue;
    in_parabolic_[id] = true;
    ++parabolic_order_;
    bool unip = true;
    for (int i = 0; i < n && unip; ++i)
      for (int j = 0; j < n; ++j)
        if (blk[i] == blk[j] && m[i * n + j] != (i == j ? 1 : 0)) {
          unip = false;
          break;
        }
    if (unip) unipotent_.push_back(id);
  }
  for (int l = 0; l < levi.order(); ++l) {
    const auto& m = levi.element(l);
    if (!is_block_diagonal(m, n, composition_)) throw StructuralError("Parabolic: levi element not block diagonal");
    auto a = ambient.find(m);
    if (!a) throw StructuralError("Parabolic: levi element not in ambient group");
    levi_in_ambient_.push_back(*a);
  }
  if (static_cast<std::int64_t>(parabolic_order_) !=
      static_cast<std::int64_t>(levi.order()) * static_cast<std::int64_t>(unipotent_.size()))
    throw StructuralError("Parabolic: |P| != |L| |U|");
  if (static_cast<std::int64_t>(parabolic_order_) * static_cast<std::int64_t>(unipotent_.size()) > 50'000'000)
    throw CapacityError("Parabolic: normality check too large");
  std::vector<bool> in_u(ambient.order(), false);
  for (int u : unipotent_) in_u[u] = true;
  for (int p = 0; p < ambient.order(); ++p) {
    if (!in_parabolic_[p]) continue;
    const int pinv = ambient.inverse(p);
    for (int u : unipotent_)
      if (!in_u[ambient.multiply(ambient.multiply(p, u), pinv)]) throw StructuralError("Parabolic: U not normal in P");
  }
}

ClassFunction parabolic_res_group_unnormalized(const ClassFunction& f, const Parabolic& P) {
  if (&f.group() != &P.ambient()) throw StructuralError("parabolic_res_group: function not on the ambient group");
  const auto& L = P.levi();
  std::vector<Complex> per(L.order());
  for (int l = 0; l < L.order(); ++l) {
    const int a = P.levi_to_ambient(l);
    Complex s = 0;
    for (int u : P.unipotent()) s += f.at_element(P.ambient().multiply(a, u));
    per[l] = s;
  }
  return ClassFunction::from_elements(L, per);
}

ClassFunction parabolic_res_group(const ClassFunction& f, const Parabolic& P) {
  return parabolic_res_group_unnormalized(f, P) * (1.0 / static_cast<double>(P.unipotent().size()));
}

}  // namespace stabkit::grpfin
