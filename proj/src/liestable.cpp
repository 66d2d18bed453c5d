#include "stabkit/liestable.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

namespace stabkit::liestable {

using grpfin::identity_matrix;
using grpfin::mat_inverse;
using grpfin::mat_mul;

namespace {

std::vector<int> blocks_of(int n, const std::vector<int>& composition) {
  std::vector<int> blk;
  for (std::size_t b = 0; b < composition.size(); ++b) {
    if (composition[b] < 1) throw ArgumentError("composition parts must be positive");
    for (int t = 0; t < composition[b]; ++t) blk.push_back(static_cast<int>(b));
  }
  if (static_cast<int>(blk.size()) != n) throw ArgumentError("composition does not sum to n");
  return blk;
}

std::int64_t trace_product(const Matrix& X, const Matrix& Y, int n, std::int64_t p) {
  std::int64_t s = 0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) s += X[i * n + j] * Y[j * n + i];
  return mod(s, p);
}

Matrix axpy(std::int64_t a, const Matrix& X, const Matrix& Y, std::int64_t p) {
  Matrix r(Y);
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = mod(r[i] + a * X[i], p);
  return r;
}

// Elementary symmetric functions e_1..e_k of the eigenvalues of a k x k block.
std::vector<std::int64_t> block_invariants(const Matrix& X, int n, int start, int k, std::int64_t p) {
  auto e = [&](int i, int j) { return X[(start + i) * n + (start + j)]; };
  if (k == 1) return {mod(e(0, 0), p)};
  if (k == 2) return {mod(e(0, 0) + e(1, 1), p), mod(e(0, 0) * e(1, 1) - e(0, 1) * e(1, 0), p)};
  if (k == 3) {
    const std::int64_t tr = e(0, 0) + e(1, 1) + e(2, 2);
    const std::int64_t m2 = e(0, 0) * e(1, 1) - e(0, 1) * e(1, 0) + e(0, 0) * e(2, 2) - e(0, 2) * e(2, 0) +
                            e(1, 1) * e(2, 2) - e(1, 2) * e(2, 1);
    Matrix sub(9);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) sub[i * 3 + j] = mod(e(i, j), p);
    return {mod(tr, p), mod(m2, p), grpfin::mat_det(sub, 3, p)};
  }
  throw ArgumentError("block_invariants: blocks of size at most 3");
}

}  // namespace

ChartPoint chevalley(const Matrix& X, int n, std::int64_t p, const std::vector<int>& composition) {
  ChartPoint pt;
  int start = 0;
  for (int k : composition) {
    auto inv = block_invariants(X, n, start, k, p);
    pt.insert(pt.end(), inv.begin(), inv.end());
    start += k;
  }
  return pt;
}

FinLieAlgebra::FinLieAlgebra(int n, std::int64_t p, std::vector<int> composition)
    : n_(n), p_(p), composition_(std::move(composition)) {
  if (n < 2 || n > 3) throw ArgumentError("FinLieAlgebra: n must be 2 or 3");
  if (!is_prime(p) || p == 2) throw ArgumentError("FinLieAlgebra: p must be an odd prime");
  block_of_ = blocks_of(n, composition_);
  name_ = "sl" + std::to_string(n) + "(F" + std::to_string(p) + ")";
  if (composition_.size() > 1) {
    name_ = "l[";
    for (std::size_t b = 0; b < composition_.size(); ++b) name_ += (b ? "," : "") + std::to_string(composition_[b]);
    name_ += "](F" + std::to_string(p) + ")";
  }
  build_basis();
  const double bits = dim() * std::log2(static_cast<double>(p));
  if (bits > 24) throw CapacityError("FinLieAlgebra: " + name_ + " has more than 2^24 elements");
  size_ = ipow(p, dim());
  pow_.resize(dim() + 1);
  pow_[0] = 1;
  for (int i = 1; i <= dim(); ++i) pow_[i] = pow_[i - 1] * p;
  build_orbits();
  build_chart();
}

void FinLieAlgebra::build_basis() {
  const int n = n_;
  std::vector<Matrix> vecs;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      if (block_of_[i] != block_of_[j]) continue;
      Matrix s(n * n, 0), a(n * n, 0);
      s[i * n + j] = s[j * n + i] = 1;
      a[i * n + j] = 1;
      a[j * n + i] = p_ - 1;
      vecs.push_back(s);
      vecs.push_back(a);
    }
  for (int k = 0; k + 1 < n; ++k) {
    Matrix h(n * n, 0);
    h[k * n + k] = 1;
    h[(k + 1) * n + (k + 1)] = p_ - 1;
    vecs.push_back(h);
  }
  // Orthogonalize for the trace form; fails exactly when the form is degenerate.
  auto form = [&](const Matrix& X, const Matrix& Y) { return trace_product(X, Y, n, p_); };
  basis_.clear();
  form_diag_.clear();
  while (!vecs.empty()) {
    int pick = -1;
    for (std::size_t i = 0; i < vecs.size(); ++i)
      if (form(vecs[i], vecs[i]) != 0) {
        pick = static_cast<int>(i);
        break;
      }
    if (pick < 0) {
      for (std::size_t i = 0; i < vecs.size() && pick < 0; ++i)
        for (std::size_t j = i + 1; j < vecs.size(); ++j)
          if (form(vecs[i], vecs[j]) != 0) {
            vecs[i] = axpy(1, vecs[j], vecs[i], p_);
            pick = static_cast<int>(i);
            break;
          }
    }
    if (pick < 0)
      throw StructuralError("FinLieAlgebra: trace form is degenerate on " + name_ + " (its radical has dimension " + std::to_string(vecs.size()) + ")");
    const Matrix v = vecs[pick];
    vecs.erase(vecs.begin() + pick);
    const std::int64_t c = form(v, v);
    const std::int64_t cinv = mod_inv(c, p_);
    for (auto& u : vecs) u = axpy(mod(-mod_mul(form(u, v), cinv, p_), p_), v, u, p_);
    basis_.push_back(v);
    form_diag_.push_back(c);
  }
  form_diag_inv_.clear();
  for (auto c : form_diag_) form_diag_inv_.push_back(mod_inv(c, p_));
}

std::vector<std::int64_t> FinLieAlgebra::coordinates(std::int64_t idx) const {
  if (idx < 0 || idx >= size_) throw ArgumentError("FinLieAlgebra: index out of range");
  std::vector<std::int64_t> x(dim());
  for (int i = 0; i < dim(); ++i) {
    x[i] = idx % p_;
    idx /= p_;
  }
  return x;
}

std::int64_t FinLieAlgebra::from_coordinates(const std::vector<std::int64_t>& x) const {
  std::int64_t idx = 0;
  for (int i = dim() - 1; i >= 0; --i) idx = idx * p_ + mod(x[i], p_);
  return idx;
}

Matrix FinLieAlgebra::element(std::int64_t idx) const {
  const auto x = coordinates(idx);
  Matrix X(n_ * n_, 0);
  for (int i = 0; i < dim(); ++i)
    if (x[i])
      for (int t = 0; t < n_ * n_; ++t) X[t] += x[i] * basis_[i][t];
  for (auto& v : X) v = mod(v, p_);
  return X;
}

std::optional<std::int64_t> FinLieAlgebra::find(const Matrix& X) const {
  if (X.size() != static_cast<std::size_t>(n_ * n_)) return std::nullopt;
  std::vector<std::int64_t> x(dim());
  for (int i = 0; i < dim(); ++i) x[i] = mod_mul(trace_product(X, basis_[i], n_, p_), form_diag_inv_[i], p_);
  const std::int64_t idx = from_coordinates(x);
  Matrix Y(X);
  for (auto& v : Y) v = mod(v, p_);
  if (element(idx) != Y) return std::nullopt;
  return idx;
}

std::int64_t FinLieAlgebra::index_of(const Matrix& X) const {
  auto idx = find(X);
  if (!idx) throw ArgumentError("FinLieAlgebra " + name_ + ": matrix " + grpfin::matrix_to_string(X, n_) + " not in the space");
  return *idx;
}

std::int64_t FinLieAlgebra::add(std::int64_t a, std::int64_t b) const {
  std::int64_t r = 0;
  for (int i = 0; i < dim(); ++i) {
    r += ((a % p_ + b % p_) % p_) * pow_[i];
    a /= p_;
    b /= p_;
  }
  return r;
}

std::int64_t FinLieAlgebra::negate(std::int64_t a) const {
  std::int64_t r = 0;
  for (int i = 0; i < dim(); ++i) {
    r += ((p_ - a % p_) % p_) * pow_[i];
    a /= p_;
  }
  return r;
}

std::int64_t FinLieAlgebra::trace_form(const Matrix& X, const Matrix& Y) const { return trace_product(X, Y, n_, p_); }

std::int64_t FinLieAlgebra::pairing(std::int64_t a, std::int64_t b) const {
  std::int64_t s = 0;
  for (int i = 0; i < dim(); ++i) {
    s += form_diag_[i] * (a % p_) * (b % p_);
    a /= p_;
    b /= p_;
  }
  return mod(s, p_);
}

void FinLieAlgebra::build_orbits() {
  const int n = n_;
  generators_.clear();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j && block_of_[i] == block_of_[j]) {
        Matrix e = identity_matrix(n);
        e[i * n + j] = 1;
        generators_.push_back(e);
      }
  const std::int64_t g = unit_group_generator(p_).value();
  for (int k = 0; k + 1 < n; ++k) {
    Matrix t = identity_matrix(n);
    t[k * n + k] = g;
    t[(k + 1) * n + (k + 1)] = mod_inv(g, p_);
    generators_.push_back(t);
  }
  std::vector<Matrix> inv;
  for (const auto& m : generators_) inv.push_back(mat_inverse(m, n, p_));
  orbit_of_.assign(size_, -1);
  orbit_members_.clear();
  for (std::int64_t start = 0; start < size_; ++start) {
    if (orbit_of_[start] >= 0) continue;
    const int o = num_orbits();
    std::vector<std::int64_t> members{start};
    orbit_of_[start] = o;
    for (std::size_t head = 0; head < members.size(); ++head) {
      const Matrix X = element(members[head]);
      for (std::size_t t = 0; t < generators_.size(); ++t) {
        const auto y = index_of(mat_mul(mat_mul(generators_[t], X, n, p_), inv[t], n, p_));
        if (orbit_of_[y] < 0) {
          orbit_of_[y] = o;
          members.push_back(y);
        }
      }
    }
    std::sort(members.begin(), members.end());
    orbit_members_.push_back(std::move(members));
  }
}

void FinLieAlgebra::build_chart() {
  std::vector<ChartPoint> per(size_);
  for (std::int64_t x = 0; x < size_; ++x) {
    per[x] = chevalley(element(x), n_, p_, composition_);
    chart_lookup_.emplace(per[x], 0);
  }
  chart_points_.clear();
  for (auto& [pt, idx] : chart_lookup_) {
    idx = static_cast<int>(chart_points_.size());
    chart_points_.push_back(pt);
  }
  chart_of_.resize(size_);
  fiber_sizes_.assign(chart_points_.size(), 0);
  for (std::int64_t x = 0; x < size_; ++x) {
    chart_of_[x] = chart_lookup_.at(per[x]);
    ++fiber_sizes_[chart_of_[x]];
  }
  if (static_cast<std::int64_t>(chart_points_.size()) != ipow(p_, n_ - 1))
    throw StructuralError("FinLieAlgebra " + name_ + ": Chevalley image has " + std::to_string(chart_points_.size()) +
                          " points, expected p^(n-1)");
}

int FinLieAlgebra::chart_index(const ChartPoint& pt) const {
  auto it = chart_lookup_.find(pt);
  if (it == chart_lookup_.end()) throw ArgumentError("chart point not in the image");
  return it->second;
}

std::string FinLieAlgebra::chart_point_to_string(int i) const {
  const auto& pt = chart_point(i);
  std::string s = "(";
  if (composition_.size() == 1) {
    for (std::size_t k = 1; k < pt.size(); ++k) s += (k > 1 ? "," : "") + std::to_string(pt[k]);
    return s + ")";
  }
  for (std::size_t k = 0; k < pt.size(); ++k) s += (k ? "," : "") + std::to_string(pt[k]);
  return s + ")";
}

LieClassFunction::LieClassFunction(const FinLieAlgebra& g, std::vector<Complex> values) : alg_(&g), values_(std::move(values)) {
  if (static_cast<std::int64_t>(values_.size()) != g.size()) throw StructuralError("LieClassFunction: wrong size");
}

LieClassFunction LieClassFunction::delta_zero(const FinLieAlgebra& g) {
  LieClassFunction f(g);
  f.values_[0] = 1.0;
  return f;
}

LieClassFunction LieClassFunction::constant(const FinLieAlgebra& g, Complex c) {
  return LieClassFunction(g, std::vector<Complex>(g.size(), c));
}

LieClassFunction LieClassFunction::orbit_indicator(const FinLieAlgebra& g, int orbit) {
  LieClassFunction f(g);
  for (auto x : g.orbit_members(orbit)) f.values_[x] = 1.0;
  return f;
}

void LieClassFunction::check_same(const LieClassFunction& o) const {
  if (alg_ != o.alg_) throw StructuralError("LieClassFunction: algebra mismatch");
}

LieClassFunction LieClassFunction::operator+(const LieClassFunction& o) const {
  check_same(o);
  LieClassFunction r(*this);
  for (std::size_t i = 0; i < values_.size(); ++i) r.values_[i] += o.values_[i];
  return r;
}

LieClassFunction LieClassFunction::operator-(const LieClassFunction& o) const {
  check_same(o);
  LieClassFunction r(*this);
  for (std::size_t i = 0; i < values_.size(); ++i) r.values_[i] -= o.values_[i];
  return r;
}

LieClassFunction LieClassFunction::operator*(Complex s) const {
  LieClassFunction r(*this);
  for (auto& v : r.values_) v *= s;
  return r;
}

LieClassFunction LieClassFunction::pointwise(const LieClassFunction& o) const {
  check_same(o);
  LieClassFunction r(*this);
  for (std::size_t i = 0; i < values_.size(); ++i) r.values_[i] *= o.values_[i];
  return r;
}

LieClassFunction LieClassFunction::negated_argument() const {
  LieClassFunction r(*alg_);
  for (std::int64_t x = 0; x < alg_->size(); ++x) r.values_[x] = values_[alg_->negate(x)];
  return r;
}

double LieClassFunction::distance(const LieClassFunction& o) const {
  check_same(o);
  return max_abs_diff(values_, o.values_);
}

double LieClassFunction::invariance_defect() const {
  double d = 0;
  for (int o = 0; o < alg_->num_orbits(); ++o) {
    const auto& m = alg_->orbit_members(o);
    for (auto x : m) d = std::max(d, std::abs(values_[x] - values_[m.front()]));
  }
  return d;
}

LieClassFunction ft(const LieClassFunction& f) {
  const auto& g = f.algebra();
  const std::int64_t p = g.p();
  std::vector<Complex> data = f.values();
  std::vector<Complex> kernel(p * p), in(p), out(p);
  const double norm = 1.0 / std::sqrt(static_cast<double>(p));
  std::int64_t stride = 1;
  for (int axis = 0; axis < g.dim(); ++axis) {
    const std::int64_t c = g.form_diagonal()[axis];
    for (std::int64_t x = 0; x < p; ++x)
      for (std::int64_t y = 0; y < p; ++y) kernel[x * p + y] = psi(c * x * y, p) * norm;
    const std::int64_t block = stride * p;
    for (std::int64_t base = 0; base < g.size(); base += block)
      for (std::int64_t inner = 0; inner < stride; ++inner) {
        const std::int64_t start = base + inner;
        for (std::int64_t y = 0; y < p; ++y) in[y] = data[start + y * stride];
        for (std::int64_t x = 0; x < p; ++x) {
          Complex s = 0;
          for (std::int64_t y = 0; y < p; ++y) s += kernel[x * p + y] * in[y];
          out[x] = s;
        }
        for (std::int64_t x = 0; x < p; ++x) data[start + x * stride] = out[x];
      }
    stride = block;
  }
  return LieClassFunction(g, std::move(data));
}

LieClassFunction ft_naive(const LieClassFunction& f) {
  const auto& g = f.algebra();
  const double norm = 1.0 / std::sqrt(static_cast<double>(g.size()));
  LieClassFunction r(g);
  std::vector<Matrix> mats(g.size());
  for (std::int64_t x = 0; x < g.size(); ++x) mats[x] = g.element(x);
  for (std::int64_t x = 0; x < g.size(); ++x) {
    Complex s = 0;
    for (std::int64_t y = 0; y < g.size(); ++y) s += psi(g.trace_form(mats[x], mats[y]), g.p()) * f[y];
    r[x] = s * norm;
  }
  return r;
}

LieClassFunction convolve_lie(const LieClassFunction& f, const LieClassFunction& g) {
  if (&f.algebra() != &g.algebra()) throw StructuralError("convolve_lie: algebra mismatch");
  return ft(ft(f).pointwise(ft(g))).negated_argument();
}

Complex convolve_lie_at(const LieClassFunction& f, const LieClassFunction& g, std::int64_t X) {
  if (&f.algebra() != &g.algebra()) throw StructuralError("convolve_lie: algebra mismatch");
  const auto& a = f.algebra();
  Complex s = 0;
  for (std::int64_t y = 0; y < a.size(); ++y) s += f[a.add(X, a.negate(y))] * g[y];
  return s / std::sqrt(static_cast<double>(a.size()));
}

LieClassFunction convolve_lie_direct(const LieClassFunction& f, const LieClassFunction& g) {
  if (&f.algebra() != &g.algebra()) throw StructuralError("convolve_lie: algebra mismatch");
  const auto& a = f.algebra();
  LieClassFunction r(a);
  for (std::int64_t x = 0; x < a.size(); ++x) r[x] = convolve_lie_at(f, g, x);
  return r;
}

LieClassFunction stable_from_param(const FinLieAlgebra& g, const std::vector<Complex>& z) {
  if (static_cast<int>(z.size()) != g.chart_size()) throw ArgumentError("stable_from_param: z has the wrong size");
  LieClassFunction pull(g);
  for (std::int64_t x = 0; x < g.size(); ++x) pull[x] = z[g.chart_index_of(x)];
  return ft(pull);
}

LieClassFunction chart_indicator_function(const FinLieAlgebra& g, int chart_idx) {
  std::vector<Complex> z(g.chart_size(), 0.0);
  z.at(chart_idx) = 1.0;
  return stable_from_param(g, z);
}

double stability_defect(const LieClassFunction& f) {
  const auto& g = f.algebra();
  const auto F = ft(f);
  std::vector<std::optional<Complex>> ref(g.chart_size());
  double d = 0;
  for (std::int64_t x = 0; x < g.size(); ++x) {
    auto& r = ref[g.chart_index_of(x)];
    if (!r) r = F[x];
    else d = std::max(d, std::abs(F[x] - *r));
  }
  return d;
}

bool is_stable(const LieClassFunction& f) { return stability_defect(f) < kTolerance; }

int span_rank(const std::vector<LieClassFunction>& fs) {
  const auto k = static_cast<Eigen::Index>(fs.size());
  if (k == 0) return 0;
  Eigen::MatrixXcd gram(k, k);
  for (Eigen::Index a = 0; a < k; ++a)
    for (Eigen::Index b = 0; b < k; ++b) {
      Complex s = 0;
      const auto& va = fs[a].values();
      const auto& vb = fs[b].values();
      for (std::size_t x = 0; x < va.size(); ++x) s += std::conj(va[x]) * vb[x];
      gram(a, b) = s;
    }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(gram);
  const auto& ev = es.eigenvalues();
  const double top = ev.cwiseAbs().maxCoeff();
  int rank = 0;
  for (Eigen::Index i = 0; i < ev.size(); ++i)
    if (ev(i) > 1e-9 * top) ++rank;
  return rank;
}

LieParabolic::LieParabolic(const FinLieAlgebra& ambient, const FinLieAlgebra& levi, bool lower)
    : ambient_(&ambient), levi_(&levi), lower_(lower) {
  if (ambient.n() != levi.n() || ambient.p() != levi.p()) throw StructuralError("LieParabolic: algebras over different data");
  const int n = ambient.n();
  const auto ablk = blocks_of(n, ambient.composition());
  const auto lblk = blocks_of(n, levi.composition());
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (lblk[i] == lblk[j] && ablk[i] != ablk[j])
        throw StructuralError("LieParabolic: Levi composition does not refine the ambient one");
  auto in_nil_pos = [&](int i, int j) { return lower_ ? lblk[i] > lblk[j] : lblk[i] < lblk[j]; };
  for (std::int64_t x = 0; x < ambient.size(); ++x) {
    const Matrix X = ambient.element(x);
    bool nil = true;
    for (int i = 0; i < n && nil; ++i)
      for (int j = 0; j < n; ++j)
        if (!in_nil_pos(i, j) && X[i * n + j] != 0) {
          nil = false;
          break;
        }
    if (nil) nil_.push_back(x);
  }
  for (std::int64_t v = 0; v < levi.size(); ++v) {
    auto a = ambient.find(levi.element(v));
    if (!a) throw StructuralError("LieParabolic: Levi element outside the ambient algebra");
    levi_in_ambient_.push_back(*a);
  }
  if (static_cast<std::int64_t>(nil_.size()) * static_cast<std::int64_t>(nil_.size()) * levi.size() != ambient.size())
    throw StructuralError("LieParabolic: dimension count |l| |n|^2 != |g| fails");
  // Chart map: multiply the block polynomials of each ambient block.
  for (int c = 0; c < levi.chart_size(); ++c) {
    const auto& pt = levi.chart_point(c);
    ChartPoint out;
    std::size_t pos = 0;
    std::size_t lb = 0;
    for (int ak : ambient.composition()) {
      std::vector<std::int64_t> e{1};
      int covered = 0;
      while (covered < ak) {
        const int k = levi.composition()[lb++];
        std::vector<std::int64_t> f{1};
        for (int t = 0; t < k; ++t) f.push_back(pt[pos++]);
        std::vector<std::int64_t> prod(e.size() + f.size() - 1, 0);
        for (std::size_t a = 0; a < e.size(); ++a)
          for (std::size_t b = 0; b < f.size(); ++b) prod[a + b] = mod(prod[a + b] + e[a] * f[b], ambient.p());
        e = prod;
        covered += k;
      }
      out.insert(out.end(), e.begin() + 1, e.end());
    }
    chart_map_.push_back(ambient.chart_index(out));
  }
}

bool LieParabolic::in_parabolic(std::int64_t ambient_idx) const {
  const int n = ambient_->n();
  const auto lblk = blocks_of(n, levi_->composition());
  const Matrix X = ambient_->element(ambient_idx);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const bool outside = lower_ ? lblk[i] < lblk[j] : lblk[i] > lblk[j];
      if (outside && X[i * n + j] != 0) return false;
    }
  return true;
}

std::int64_t LieParabolic::coset_key(std::int64_t ambient_idx) const {
  const int n = ambient_->n();
  const auto lblk = blocks_of(n, levi_->composition());
  Matrix X = ambient_->element(ambient_idx);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (lower_ ? lblk[i] > lblk[j] : lblk[i] < lblk[j]) X[i * n + j] = 0;
  return ambient_->index_of(X);
}

LieClassFunction res_lie(const LieClassFunction& f, const LieParabolic& P) {
  if (&f.algebra() != &P.ambient()) throw StructuralError("res_lie: function not on the ambient algebra");
  const auto& a = P.ambient();
  const auto& l = P.levi();
  LieClassFunction r(l);
  const double norm = 1.0 / static_cast<double>(P.nilradical().size());
  for (std::int64_t v = 0; v < l.size(); ++v) {
    const auto base = P.levi_to_ambient(v);
    Complex s = 0;
    for (auto nn : P.nilradical()) s += f[a.add(base, nn)];
    r[v] = s * norm;
  }
  return r;
}

VanishingReport vanishing_check_lie(const LieClassFunction& f, const LieParabolic& P) {
  if (&f.algebra() != &P.ambient()) throw StructuralError("vanishing_check_lie: function not on the ambient algebra");
  const auto& a = P.ambient();
  std::vector<Complex> bucket(a.size(), 0.0);
  std::vector<std::int64_t> key(a.size());
  for (std::int64_t x = 0; x < a.size(); ++x) {
    key[x] = P.coset_key(x);
    bucket[key[x]] += f[x];
  }
  VanishingReport rep;
  for (std::int64_t x = 0; x < a.size(); ++x) {
    if (P.in_parabolic(x)) continue;
    ++rep.sites_checked;
    const double v = std::abs(bucket[key[x]]);
    if (v > rep.max_abs) {
      rep.max_abs = v;
      rep.witness = x;
    }
  }
  return rep;
}

void write_csv(std::ostream& os, const LieClassFunction& f) {
  os << "index,re,im\n";
  char buf[96];
  for (std::int64_t x = 0; x < f.algebra().size(); ++x) {
    std::snprintf(buf, sizeof buf, "%lld,%.17g,%.17g\n", static_cast<long long>(x), f[x].real(), f[x].imag());
    os << buf;
  }
}

LieClassFunction read_csv(std::istream& is, const FinLieAlgebra& g) {
  std::string line;
  if (!std::getline(is, line) || line != "index,re,im") throw ArgumentError("read_csv: missing header");
  LieClassFunction f(g);
  std::vector<bool> seen(g.size(), false);
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string a, b, c;
    if (!std::getline(ls, a, ',') || !std::getline(ls, b, ',') || !std::getline(ls, c))
      throw ArgumentError("read_csv: malformed line '" + line + "'");
    const auto idx = std::stoll(a);
    if (idx < 0 || idx >= g.size()) throw ArgumentError("read_csv: index out of range");
    f[idx] = Complex(std::stod(b), std::stod(c));
    seen[idx] = true;
  }
  if (std::find(seen.begin(), seen.end(), false) != seen.end()) throw ArgumentError("read_csv: missing indices");
  return f;
}

}  // namespace stabkit::liestable
