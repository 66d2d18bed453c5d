#include "stabkit/hecke.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <deque>
#include <set>
#include <unordered_map>
#include <unordered_set>

namespace stabkit::hecke {

namespace {

constexpr double kValueTolerance = 1e-12;

double to_double(const Rational& q) { return static_cast<double>(q.numerator()) / static_cast<double>(q.denominator()); }

}  // namespace

std::string json_name(Parahoric P) {
  switch (P) {
    case Parahoric::I: return "I";
    case Parahoric::K: return "hs0";
    case Parahoric::Kp: return "hs1";
  }
  return "?";
}

rootsys::SimpleSet simple_set(Parahoric P) {
  switch (P) {
    case Parahoric::I: return 0;
    case Parahoric::K: return 2;
    case Parahoric::Kp: return 1;
  }
  return 0;
}

Parahoric parahoric_of(rootsys::SimpleSet J) {
  switch (J) {
    case 0: return Parahoric::I;
    case 2: return Parahoric::K;
    case 1: return Parahoric::Kp;
    default: throw ArgumentError("no proper parahoric for simple set " + std::to_string(J));
  }
}

int parahoric_sign(Parahoric P) { return P == Parahoric::I ? -1 : 1; }

Descriptor parahoric_r(Parahoric P, int r) {
  switch (P) {
    case Parahoric::I: return iwahori_r(r);
    case Parahoric::K: return hyperspecial_r(r);
    case Parahoric::Kp: return second_hyperspecial_r(r);
  }
  return {};
}

Descriptor parahoric_plus(Parahoric P, int r) {
  switch (P) {
    case Parahoric::I: return iwahori_plus(r);
    case Parahoric::K: return hyperspecial_plus(r);
    case Parahoric::Kp: return second_hyperspecial_plus(r);
  }
  return {};
}

PAdicMatrix parahoric_conjugator(Parahoric P, std::int64_t p) {
  return P == Parahoric::Kp ? PAdicMatrix::eta(p) : PAdicMatrix::identity(p);
}

Parahoric base_of(Parahoric P) { return P == Parahoric::I ? Parahoric::I : Parahoric::K; }

std::string to_string(CheckStatus s) {
  switch (s) {
    case CheckStatus::pass: return "pass";
    case CheckStatus::fail: return "fail";
    case CheckStatus::inconclusive: return "inconclusive";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// CosetFunction

void CosetFunction::add(const PAdicMatrix& x, Complex v) { add_keyed(coset_key(x, level_), x, v); }

void CosetFunction::add_keyed(const CosetKey& k, const PAdicMatrix& x, Complex v) {
  auto it = entries_.find(k);
  if (it == entries_.end()) {
    entries_.emplace(k, Entry{x, v});
  } else {
    it->second.value += v;
  }
}

Complex CosetFunction::at(const PAdicMatrix& x) const {
  auto it = entries_.find(coset_key(x, level_));
  return it == entries_.end() ? Complex(0) : it->second.value;
}

CosetFunction CosetFunction::operator+(const CosetFunction& o) const {
  if (o.level_ != level_ || o.p_ != p_) throw ArgumentError("coset functions of different levels");
  CosetFunction out = *this;
  for (const auto& [k, e] : o.entries_) out.add_keyed(k, e.rep, e.value);
  return out;
}

CosetFunction CosetFunction::operator-(const CosetFunction& o) const { return *this + o * Complex(-1); }

CosetFunction CosetFunction::operator*(Complex s) const {
  CosetFunction out = *this;
  for (auto& [k, e] : out.entries_) e.value *= s;
  return out;
}

void CosetFunction::prune(double tol) {
  std::erase_if(entries_, [&](const auto& kv) { return std::abs(kv.second.value) <= tol; });
}

CosetFunction CosetFunction::coarsen(const Descriptor& D) const {
  if (!level_.subset_of(D)) throw ArgumentError("coarsen: level " + level_.to_string() + " not inside " + D.to_string());
  const double ratio = to_double(haar_measure(level_, p_) / haar_measure(D, p_));
  CosetFunction out(p_, D);
  for (const auto& [k, e] : entries_) out.add(e.rep, e.value * ratio);
  return out;
}

CosetFunction CosetFunction::conjugate(const PAdicMatrix& g) const {
  const PAdicMatrix ginv = g.inverse();
  CosetFunction out(p_, level_.conjugated_by(ginv));
  for (const auto& [k, e] : entries_) out.add(g * e.rep * ginv, e.value);
  return out;
}

double CosetFunction::distance(const CosetFunction& o) const {
  if (o.level_ != level_ || o.p_ != p_) {
    throw ArgumentError("distance between levels " + level_.to_string() + " and " + o.level_.to_string());
  }
  double d = 0;
  for (const auto& [k, e] : entries_) {
    auto it = o.entries_.find(k);
    d = std::max(d, std::abs(e.value - (it == o.entries_.end() ? Complex(0) : it->second.value)));
  }
  for (const auto& [k, e] : o.entries_) {
    if (!entries_.count(k)) d = std::max(d, std::abs(e.value));
  }
  return d;
}

double CosetFunction::left_defect(std::span<const PAdicMatrix> hs) const {
  double d = 0;
  for (const auto& h : hs) {
    const PAdicMatrix hinv = h.inverse();
    for (const auto& [k, e] : entries_) {
      d = std::max(d, std::abs(at(h * e.rep) - e.value));
      d = std::max(d, std::abs(at(hinv * e.rep) - e.value));
    }
  }
  return d;
}

double CosetFunction::conjugation_defect(std::span<const PAdicMatrix> gs) const {
  double d = 0;
  for (const auto& g : gs) {
    const PAdicMatrix ginv = g.inverse();
    for (const auto& [k, e] : entries_) {
      d = std::max(d, std::abs(at(g * e.rep * ginv) - e.value));
      d = std::max(d, std::abs(at(ginv * e.rep * g) - e.value));
    }
  }
  return d;
}

std::string CosetFunction::to_json() const {
  nlohmann::json j;
  j["p"] = p_;
  j["level"] = {level_.la, level_.lb, level_.lc, level_.ld};
  auto arr = nlohmann::json::array();
  for (const auto& [k, e] : entries_) {
    arr.push_back({{"rep", {e.rep.entry_string(0), e.rep.entry_string(1), e.rep.entry_string(2), e.rep.entry_string(3)}},
                   {"re", e.value.real()},
                   {"im", e.value.imag()}});
  }
  j["entries"] = std::move(arr);
  return j.dump();
}

CosetFunction delta(const Descriptor& D, std::int64_t p) {
  CosetFunction f(p, D);
  f.add(PAdicMatrix::identity(p), Complex(1.0 / to_double(haar_measure(D, p))));
  return f;
}

CosetFunction delta_product(const Descriptor& A, const Descriptor& B, std::int64_t p) {
  const Rational value = haar_measure(A.intersect(B), p) / (haar_measure(A, p) * haar_measure(B, p));
  CosetFunction f(p, B);
  for (const auto& q : coset_representatives(A, B, p)) f.add(q, Complex(to_double(value)));
  return f;
}

CosetFunction convolve_window(const CosetFunction& f, const CosetFunction& g, const WindowQuotient& w) {
  const std::int64_t p = w.p();
  if (f.p() != p || g.p() != p) throw ArgumentError("convolve_window: prime mismatch");
  for (const auto* h : {&f, &g}) {
    for (const auto& [k, e] : h->entries()) {
      if (!e.rep.is_integral()) throw CapacityError("convolve_window: support escapes the window");
    }
  }
  const std::int64_t M = w.modulus();
  auto inverse = [&](const grpfin::Matrix& x) {
    return grpfin::Matrix{x[3], stabkit::mod(-x[1], M), stabkit::mod(-x[2], M), x[0]};
  };
  // f on elements, g on elements (for lookup) and on coset representatives.
  const auto f_level = w.enumerate(f.level());
  const auto g_level = w.enumerate(g.level());
  std::vector<std::pair<grpfin::Matrix, Complex>> fe;
  for (const auto& [k, e] : f.entries()) {
    const auto x = w.reduce(e.rep);
    for (const auto& d : f_level) fe.emplace_back(w.multiply(x, d), e.value);
  }
  std::unordered_map<std::int64_t, Complex> ge;
  std::vector<grpfin::Matrix> g_reps;
  for (const auto& [k, e] : g.entries()) {
    const auto x = w.reduce(e.rep);
    g_reps.push_back(x);
    for (const auto& d : g_level) ge[w.encode(w.multiply(x, d))] += e.value;
  }
  // (f * g)(z) = sum_u f(u) g(u^-1 z) mu(cell), evaluated once per right coset z g.level.
  const double cell = to_double(haar_measure(hyperspecial_r(w.N()), p));
  std::unordered_set<std::int64_t> covered;
  CosetFunction out(p, g.level());
  for (const auto& [u, fu] : fe) {
    for (const auto& v : g_reps) {
      const auto z = w.multiply(u, v);
      if (covered.count(w.encode(z))) continue;
      for (const auto& d : g_level) covered.insert(w.encode(w.multiply(z, d)));
      Complex value = 0;
      for (const auto& [u2, fu2] : fe) {
        auto it = ge.find(w.encode(w.multiply(inverse(u2), z)));
        if (it != ge.end()) value += fu2 * it->second;
      }
      value *= cell;
      if (std::abs(value) > kValueTolerance) out.add(PAdicMatrix::lift(p, z, w.N()), value);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// HeckeModel

struct HeckeModel::CellData {
  std::vector<PAdicMatrix> reps;
  std::vector<int> proj;
  std::vector<int> subgroup;
  double factor = 0;
};

struct HeckeModel::Accumulator {
  std::size_t width = 0;
  std::unordered_map<CosetKey, std::pair<PAdicMatrix, std::vector<Complex>>, CosetKeyHash> map;
  std::vector<CosetKey> order;
};

HeckeModel::HeckeModel(std::int64_t p, int r, std::uint64_t seed) : p_(p), r_(r) {
  if (r < 0) throw ArgumentError("depth must be nonnegative");
  if (p < 3 || !is_prime(p)) throw ArgumentError("p must be an odd prime");
  if (r == 0) {
    series_ = std::make_unique<dlstable::SL2Series>(p, seed);
    lower_borel_ = std::make_unique<grpfin::Parabolic>(series_->group(), series_->torus(), std::vector<int>{1, 1}, true);
  } else {
    sl2_ = std::make_unique<liestable::FinLieAlgebra>(liestable::FinLieAlgebra::sl(2, p));
    torus_alg_ = std::make_unique<liestable::FinLieAlgebra>(2, p, std::vector<int>{1, 1});
    upper_ = std::make_unique<liestable::LieParabolic>(*sl2_, *torus_alg_, false);
    lower_ = std::make_unique<liestable::LieParabolic>(*sl2_, *torus_alg_, true);
  }
}

HeckeModel::~HeckeModel() = default;

const rootsys::FiniteRootDatum& HeckeModel::datum() const { return rootsys::FiniteRootDatum::from_label("A1"); }

rootsys::ParahoricLabel HeckeModel::label(Parahoric P) const {
  return rootsys::ParahoricLabel::make(datum(), simple_set(P));
}

int HeckeModel::quotient_size(Parahoric base) const {
  if (r_ == 0) return base == Parahoric::I ? series_->torus().order() : series_->group().order();
  return static_cast<int>(base == Parahoric::I ? torus_alg_->size() : sl2_->size());
}

int HeckeModel::project(Parahoric base, const PAdicMatrix& q) const {
  if (r_ == 0) {
    const auto m = q.reduce(p_);
    if (base == Parahoric::I) return series_->torus().index_of({m[0], 0, 0, m[3]});
    return series_->group().index_of(m);
  }
  const std::int64_t pr = ipow(p_, r_);
  const auto m = q.reduce(pr * p_);
  grpfin::Matrix X(4);
  for (int i = 0; i < 4; ++i) {
    const std::int64_t e = stabkit::mod(m[i] - ((i == 0 || i == 3) ? 1 : 0), pr * p_);
    if (e % pr != 0) throw ArgumentError("project: element outside the depth-r group");
    X[i] = e / pr;
  }
  if (base == Parahoric::I) return static_cast<int>(torus_alg_->index_of({X[0], 0, 0, X[3]}));
  return static_cast<int>(sl2_->index_of(X));
}

int HeckeModel::combine(Parahoric base, int x, int y) const {
  if (r_ == 0) return base == Parahoric::I ? series_->torus().multiply(x, y) : series_->group().multiply(x, y);
  return static_cast<int>(base == Parahoric::I ? torus_alg_->add(x, y) : sl2_->add(x, y));
}

int HeckeModel::quotient_identity(Parahoric base) const {
  if (r_ == 0) return base == Parahoric::I ? series_->torus().identity() : series_->group().identity();
  return 0;
}

int HeckeModel::chart_size() const { return r_ == 0 ? series_->chart().size() : sl2_->chart_size(); }

std::vector<Complex> HeckeModel::stable_function(Parahoric base, int chart_point) const {
  if (chart_point < 0 || chart_point >= chart_size()) throw ArgumentError("chart point out of range");
  const int n = quotient_size(base);
  std::vector<Complex> out(n);
  if (r_ == 0) {
    if (base == Parahoric::K) {
      const auto f = series_->f_theta(chart_point);
      for (int i = 0; i < n; ++i) out[i] = f.at_element(i);
    } else {
      for (int k = 0; k < series_->torus_chart_size(); ++k) {
        if (series_->torus_to_chart(k) != chart_point) continue;
        const auto f = series_->torus_f(k);
        for (int i = 0; i < n; ++i) out[i] += f.at_element(i);
      }
    }
    return out;
  }
  std::vector<Complex> z(sl2_->chart_size(), Complex(0));
  z[chart_point] = 1;
  if (base == Parahoric::K) return liestable::stable_from_param(*sl2_, z).values();
  std::vector<Complex> zt(torus_alg_->chart_size());
  for (int i = 0; i < torus_alg_->chart_size(); ++i) zt[i] = z[upper_->chart_map()[i]];
  return liestable::stable_from_param(*torus_alg_, zt).values();
}

std::vector<Complex> HeckeModel::restrict(std::span<const Complex> f, bool lower) const {
  if (r_ == 0) {
    const auto cf = grpfin::ClassFunction::from_elements(series_->group(), f);
    const auto res = grpfin::parabolic_res_group(cf, lower ? *lower_borel_ : series_->borel());
    std::vector<Complex> out(series_->torus().order());
    for (int i = 0; i < series_->torus().order(); ++i) out[i] = res.at_element(i);
    return out;
  }
  liestable::LieClassFunction F(*sl2_, std::vector<Complex>(f.begin(), f.end()));
  return liestable::res_lie(F, lower ? *lower_ : *upper_).values();
}

double HeckeModel::j_constant(Parahoric P) const {
  const double mu = to_double(haar_measure(parahoric_plus(P, r_), p_));
  if (r_ == 0) return mu;
  return mu * std::sqrt(static_cast<double>(quotient_size(base_of(P))));
}

Rational HeckeModel::c_mu_squared(Parahoric P) const {
  const Rational mu = haar_measure(parahoric_plus(P, r_), p_);
  return mu * mu * Rational(quotient_size(base_of(P)));
}

LimitElement HeckeModel::delta_family() const {
  LimitElement h;
  h.label = "delta";
  h.r = r_;
  for (auto P : kParahorics) {
    auto& v = h[P];
    v.assign(quotient_size(base_of(P)), Complex(0));
    v[quotient_identity(base_of(P))] = 1.0 / to_double(haar_measure(parahoric_plus(P, r_), p_));
  }
  return h;
}

LimitElement HeckeModel::xi_image(int chart_point) const {
  LimitElement h;
  h.label = "xi(" + std::to_string(chart_point) + ")";
  h.r = r_;
  for (auto P : kParahorics) {
    auto v = stable_function(base_of(P), chart_point);
    const double c = j_constant(P);
    for (auto& x : v) x /= c;
    h[P] = std::move(v);
  }
  return h;
}

std::vector<LimitElement> HeckeModel::stable_basis() const {
  std::vector<LimitElement> out{delta_family()};
  for (int t = 0; t < chart_size(); ++t) out.push_back(xi_image(t));
  return out;
}

CosetFunction HeckeModel::iota(Parahoric P, std::span<const Complex> values) const {
  const Parahoric B = base_of(P);
  if (static_cast<int>(values.size()) != quotient_size(B)) throw ArgumentError("iota: wrong number of values");
  CosetFunction f(p_, parahoric_plus(B, r_));
  for (const auto& q : coset_representatives(parahoric_r(B, r_), parahoric_plus(B, r_), p_)) {
    f.add(q, values[project(B, q)]);
  }
  if (P == Parahoric::Kp) f = f.conjugate(parahoric_conjugator(P, p_));
  f.prune(kValueTolerance);
  return f;
}

CosetFunction HeckeModel::component(const LimitElement& h, Parahoric P) const { return iota(P, h[P]); }

const HeckeModel::CellData& HeckeModel::cell_data(Parahoric base, const Descriptor& Rt) const {
  std::lock_guard lock(cache_mutex_);
  auto key = std::make_pair(static_cast<int>(base), Rt);
  auto it = cells_.find(key);
  if (it != cells_.end()) return *it->second;
  auto cd = std::make_unique<CellData>();
  const Descriptor Br = parahoric_r(base, r_);
  const Descriptor C = Br.intersect(Rt);
  cd->reps = coset_representatives(Br, Rt, p_);
  for (const auto& q : cd->reps) cd->proj.push_back(project(base, q));
  std::vector<int> gens;
  for (const auto& g : descriptor_generators(C, p_)) gens.push_back(project(base, g));
  std::set<int> seen{quotient_identity(base)};
  std::deque<int> queue{quotient_identity(base)};
  while (!queue.empty()) {
    int x = queue.front();
    queue.pop_front();
    for (int g : gens) {
      int y = combine(base, x, g);
      if (seen.insert(y).second) queue.push_back(y);
    }
  }
  cd->subgroup.assign(seen.begin(), seen.end());
  cd->factor = to_double(haar_measure(C, p_) / haar_measure(Rt, p_));
  return *cells_.emplace(key, std::move(cd)).first->second;
}

void HeckeModel::accumulate(Parahoric base, const PAdicMatrix& yt, const PAdicMatrix& m, const Descriptor& R,
                            double weight, std::span<const std::vector<Complex>* const> vals, Accumulator& acc) const {
  const Descriptor Rt = R.conjugated_by(m);
  const CellData& cd = cell_data(base, Rt);
  const PAdicMatrix ytinv = yt.inverse();
  const std::size_t nh = vals.size();
  std::unordered_map<int, std::vector<Complex>> cache;
  const double scale = cd.factor / static_cast<double>(cd.subgroup.size());
  for (std::size_t i = 0; i < cd.reps.size(); ++i) {
    auto [it, inserted] = cache.try_emplace(cd.proj[i]);
    if (inserted) {
      it->second.assign(nh, Complex(0));
      for (std::size_t h = 0; h < nh; ++h) {
        Complex s = 0;
        for (int g : cd.subgroup) s += (*vals[h])[combine(base, cd.proj[i], g)];
        it->second[h] = s * scale;
      }
    }
    const auto& v = it->second;
    if (std::all_of(v.begin(), v.end(), [](Complex c) { return std::abs(c) <= kValueTolerance; })) continue;
    const PAdicMatrix x = yt * cd.reps[i] * ytinv;
    const CosetKey key = coset_key(x, R);
    auto [slot, fresh] = acc.map.try_emplace(key, x, std::vector<Complex>(nh, Complex(0)));
    if (fresh) acc.order.push_back(key);
    for (std::size_t h = 0; h < nh; ++h) slot->second.second[h] += weight * v[h];
  }
}

namespace {

std::vector<CosetFunction> drain(std::int64_t p, const Descriptor& R, std::size_t nh,
                                 const std::unordered_map<CosetKey, std::pair<PAdicMatrix, std::vector<Complex>>, CosetKeyHash>& map) {
  std::vector<CosetFunction> out(nh, CosetFunction(p, R));
  for (const auto& [k, rv] : map) {
    for (std::size_t h = 0; h < nh; ++h) {
      if (std::abs(rv.second[h]) > kValueTolerance) out[h].add_keyed(k, rv.first, rv.second[h]);
    }
  }
  return out;
}

}  // namespace

CosetFunction HeckeModel::convolve_component(Parahoric Q, std::span<const Complex> F, const Descriptor& R) const {
  const std::vector<Complex> values(F.begin(), F.end());
  const std::vector<Complex>* ptr = &values;
  Accumulator acc;
  acc.width = 1;
  const PAdicMatrix c = parahoric_conjugator(Q, p_);
  accumulate(base_of(Q), c, c, R, 1.0, std::span<const std::vector<Complex>* const>(&ptr, 1), acc);
  return drain(p_, R, 1, acc.map).front();
}

PAdicMatrix HeckeModel::weyl_lift(const std::vector<int>& word) const {
  PAdicMatrix w = PAdicMatrix::identity(p_);
  for (int j : word) w = w * (j == 0 ? PAdicMatrix::weyl_affine(p_) : PAdicMatrix::weyl_finite(p_));
  return w;
}

const std::vector<PAdicMatrix>& HeckeModel::cell_representatives(const std::vector<int>& word) const {
  std::lock_guard lock(cache_mutex_);
  auto it = digit_reps_.find(word);
  if (it != digit_reps_.end()) return it->second;
  const int len = static_cast<int>(word.size());
  const std::int64_t count = ipow(p_, len);
  const PAdicMatrix wdot = weyl_lift(word);
  const PAdicMatrix wdot_inv = wdot.inverse();
  const auto w = rootsys::AffineWeylElement::from_word(datum(), word);
  const rootsys::SimpleSet Jw = rootsys::jw(w);
  std::vector<PAdicMatrix> reps;
  reps.reserve(count);
  for (std::int64_t code = 0; code < count; ++code) {
    std::int64_t rest = code;
    PAdicMatrix y = PAdicMatrix::identity(p_);
    for (int j : word) {
      const std::int64_t d = rest % p_;
      rest /= p_;
      y = y * (j == 0 ? PAdicMatrix::lower(p_, d, 1) : PAdicMatrix::upper(p_, d)) *
          (j == 0 ? PAdicMatrix::weyl_affine(p_) : PAdicMatrix::weyl_finite(p_));
    }
    if (!iwahori().contains(y * wdot_inv)) throw StructuralError("cell representative not in I w");
    reps.push_back(y);
  }
  for (auto P : kParahorics) {
    if ((simple_set(P) & ~Jw) != 0) continue;
    std::set<CosetKey> keys;
    for (const auto& y : reps) keys.insert(coset_key(y, parahoric_r(P, 0)));
    if (static_cast<std::int64_t>(keys.size()) != count) {
      throw StructuralError("cell of length " + std::to_string(len) + " has " + std::to_string(keys.size()) +
                            " cosets modulo " + json_name(P) + ", expected " + std::to_string(count));
    }
  }
  return digit_reps_.emplace(word, std::move(reps)).first->second;
}

const rootsys::WeylEnumeration& HeckeModel::enumeration(int length) const {
  std::lock_guard lock(cache_mutex_);
  if (!enumeration_ || enumeration_->max_length() < length) {
    enumeration_ = std::make_unique<rootsys::WeylEnumeration>(datum(), length);
  }
  return *enumeration_;
}

void HeckeModel::check_normal_in_iwahori(const Descriptor& R) const {
  const auto rg = descriptor_generators(R, p_);
  for (const auto& g : descriptor_generators(iwahori(), p_)) {
    const PAdicMatrix ginv = g.inverse();
    for (const auto& h : rg) {
      if (!R.contains(g * h * ginv) || !R.contains(ginv * h * g)) {
        throw ArgumentError("averaging level " + R.to_string() + " is not normal in I");
      }
    }
  }
}

std::vector<CosetFunction> HeckeModel::average(std::span<const LimitElement> hs,
                                               std::span<const rootsys::AffineWeylElement> Y, const Descriptor& R) const {
  check_normal_in_iwahori(R);
  for (const auto& h : hs) {
    if (h.r != r_) throw ArgumentError("limit element of depth " + std::to_string(h.r) + " in a depth " + std::to_string(r_) + " model");
  }
  int max_len = 0;
  for (const auto& w : Y) max_len = std::max(max_len, w.length());
  const auto& en = enumeration(max_len);
  Accumulator acc;
  acc.width = hs.size();
  for (const auto& w : Y) {
    const auto& word = en.reduced_word(w);
    const rootsys::SimpleSet Jw = rootsys::jw(w);
    const PAdicMatrix wdot = weyl_lift(word);
    const auto& ys = cell_representatives(word);
    for (auto P : kParahorics) {
      if ((simple_set(P) & ~Jw) != 0) continue;
      std::vector<const std::vector<Complex>*> vals;
      for (const auto& h : hs) vals.push_back(&h[P]);
      const PAdicMatrix c = parahoric_conjugator(P, p_);
      const PAdicMatrix m = wdot * c;
      for (const auto& y : ys) accumulate(base_of(P), y * c, m, R, parahoric_sign(P), vals, acc);
    }
  }
  return drain(p_, R, hs.size(), acc.map);
}

std::vector<std::array<CosetFunction, 3>> HeckeModel::section(std::span<const LimitElement> hs, int length_bound) const {
  if (r_ != 0) throw ArgumentError("the section is built from depth 0");
  const auto& en = enumeration(length_bound);
  std::vector<std::array<CosetFunction, 3>> out(hs.size(), {CosetFunction(p_, {}), CosetFunction(p_, {}),
                                                            CosetFunction(p_, {})});
  for (auto P : kParahorics) {
    const auto Y = rootsys::y_of(label(P), 1, length_bound, en);
    const auto parts = average(hs, Y.elements(), parahoric_plus(P, 1));
    for (std::size_t h = 0; h < hs.size(); ++h) out[h][static_cast<int>(P)] = parts[h];
  }
  return out;
}

StabilizationReport HeckeModel::verify_stabilization(std::span<const LimitElement> hs, int n, int length_max) const {
  StabilizationReport rep;
  rep.n = n;
  rep.level = iwahori_plus(n + r_);
  rep.length_max = length_max;
  const auto& en = enumeration(length_max);
  std::vector<std::vector<CosetFunction>> cumulative;
  for (int k = 0; k <= length_max; ++k) {
    auto shell = average(hs, en.shell(k), rep.level);
    double norm = 0;
    for (const auto& f : shell) {
      for (const auto& [key, e] : f.entries()) norm = std::max(norm, std::abs(e.value));
    }
    rep.shell_norms.push_back(norm);
    if (k == 0) {
      cumulative.push_back(std::move(shell));
    } else {
      std::vector<CosetFunction> next;
      for (std::size_t h = 0; h < hs.size(); ++h) next.push_back(cumulative.back()[h] + shell[h]);
      cumulative.push_back(std::move(next));
    }
  }
  rep.stabilization_index = 0;
  for (int k = length_max; k >= 1; --k) {
    if (rep.shell_norms[k] > 1e-9) {
      rep.stabilization_index = k;
      break;
    }
  }
  rootsys::LowerSetY Yn;
  try {
    Yn = rootsys::y_of(label(Parahoric::I), n, length_max, en);
  } catch (const rootsys::UnsaturatedError&) {
    rep.containing_index = length_max;
    rep.status = CheckStatus::inconclusive;
    return rep;
  }
  rep.containing_index = 0;
  for (const auto& w : Yn.elements()) rep.containing_index = std::max(rep.containing_index, w.length());
  if (rep.containing_index >= length_max) {
    rep.status = CheckStatus::inconclusive;
    return rep;
  }
  const auto at_Yn = average(hs, Yn.elements(), rep.level);
  for (int k = rep.containing_index; k <= length_max; ++k) {
    for (std::size_t h = 0; h < hs.size(); ++h) rep.residual = std::max(rep.residual, cumulative[k][h].distance(at_Yn[h]));
  }
  rep.status = (rep.stabilization_index <= rep.containing_index && rep.residual < 1e-9) ? CheckStatus::pass
                                                                                         : CheckStatus::fail;
  return rep;
}

EvaluationReport HeckeModel::verify_evaluation(std::span<const LimitElement> hs, int length_max) const {
  EvaluationReport rep;
  rep.length_max = length_max;
  const auto& en = enumeration(length_max);
  for (auto P : kParahorics) {
    const Descriptor R = parahoric_plus(P, r_);
    std::vector<CosetFunction> expected;
    for (const auto& h : hs) expected.push_back(component(h, P));
    std::vector<CosetFunction> running(hs.size(), CosetFunction(p_, R));
    for (int k = 0; k <= length_max; ++k) {
      auto shell = average(hs, en.shell(k), R);
      for (std::size_t h = 0; h < hs.size(); ++h) {
        running[h] = running[h] + shell[h];
        rep.residual = std::max(rep.residual, running[h].distance(expected[h]));
        rep.cosets_compared += static_cast<std::int64_t>(std::max(running[h].size(), expected[h].size()));
      }
    }
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Minimal K-types

std::vector<MinimalKType> HeckeModel::ktypes(Parahoric P) const {
  std::vector<MinimalKType> out;
  const Parahoric B = base_of(P);
  if (r_ > 0) {
    for (int y = 0; y < quotient_size(B); ++y) {
      MinimalKType kt{P, r_, y, false};
      const auto& pt = sl2_->chart_point(theta_of_ktype(kt));
      kt.nondegenerate = std::any_of(pt.begin(), pt.end(), [](std::int64_t c) { return c != 0; });
      out.push_back(kt);
    }
    return out;
  }
  if (B == Parahoric::K) {
    const auto& chars = series_->characters();
    const auto& unip = series_->borel().unipotent();
    for (std::size_t s = 0; s < chars.size(); ++s) {
      Complex fixed = 0;
      for (int u : unip) fixed += chars[s].values.at_element(u);
      out.push_back({P, 0, static_cast<std::int64_t>(s), std::abs(fixed) < 1e-9});
    }
  } else {
    for (int k = 0; k < series_->torus_chart_size(); ++k) out.push_back({P, 0, k, true});
  }
  return out;
}

int HeckeModel::theta_of_ktype(const MinimalKType& kt) const {
  if (kt.r != r_) throw ArgumentError("K-type depth does not match the model");
  const Parahoric B = base_of(kt.parahoric);
  if (r_ > 0) {
    if (B == Parahoric::K) return sl2_->chart_index_of(sl2_->negate(kt.chi));
    return upper_->chart_map()[torus_alg_->chart_index_of(torus_alg_->negate(kt.chi))];
  }
  if (B == Parahoric::K) return series_->L_map(static_cast<int>(kt.chi));
  return series_->torus_to_chart(static_cast<int>(kt.chi));
}

std::vector<Complex> HeckeModel::character_values(const MinimalKType& kt) const {
  const Parahoric B = base_of(kt.parahoric);
  const int n = quotient_size(B);
  std::vector<Complex> out(n);
  if (r_ > 0) {
    const auto& alg = B == Parahoric::K ? *sl2_ : *torus_alg_;
    for (int x = 0; x < n; ++x) out[x] = psi(alg.pairing(x, kt.chi), p_);
    return out;
  }
  if (B == Parahoric::K) {
    const auto& chi = series_->characters().at(kt.chi);
    for (int x = 0; x < n; ++x) out[x] = chi.values.at_element(x) / static_cast<double>(chi.degree);
    return out;
  }
  const auto f = series_->torus_f(static_cast<int>(kt.chi));
  for (int x = 0; x < n; ++x) out[x] = std::conj(f.at_element(x)) * static_cast<double>(p_ - 1);
  return out;
}

Complex HeckeModel::xi_scalar(std::span<const Complex> z, const MinimalKType& kt) const {
  if (static_cast<int>(z.size()) != chart_size()) throw ArgumentError("xi_scalar: parameter has the wrong size");
  const Parahoric B = base_of(kt.parahoric);
  std::vector<Complex> f(quotient_size(B), Complex(0));
  if (r_ > 0) {
    const std::vector<Complex> zv(z.begin(), z.end());
    if (B == Parahoric::K) {
      f = liestable::stable_from_param(*sl2_, zv).values();
    } else {
      std::vector<Complex> zt(torus_alg_->chart_size());
      for (int i = 0; i < torus_alg_->chart_size(); ++i) zt[i] = zv[upper_->chart_map()[i]];
      f = liestable::stable_from_param(*torus_alg_, zt).values();
    }
  } else {
    for (int t = 0; t < chart_size(); ++t) {
      if (z[t] == Complex(0)) continue;
      const auto ft = stable_function(B, t);
      for (std::size_t i = 0; i < f.size(); ++i) f[i] += z[t] * ft[i];
    }
  }
  const double jc = j_constant(kt.parahoric);
  const double mu = to_double(haar_measure(parahoric_plus(kt.parahoric, r_), p_));
  const auto chi = character_values(kt);
  Complex s = 0;
  for (std::size_t x = 0; x < f.size(); ++x) s += (f[x] / jc) * chi[x];
  return mu * s;
}

// ---------------------------------------------------------------------------
// Perp of parahoric Lie lattices

bool verify_perp(Parahoric P, std::int64_t p, std::int64_t scale) {
  if (p < 3 || !is_prime(p)) throw ArgumentError("verify_perp: p must be an odd prime");
  if (stabkit::mod(scale, p) == 0) throw ArgumentError("verify_perp: the scale must be a unit");
  const Descriptor L = parahoric_r(P, 0), Lp = parahoric_plus(P, 0);
  const std::array<int, 3> lie{L.la, L.lb, L.lc};
  const std::array<int, 3> plus{Lp.la, Lp.lb, Lp.lc};
  // s tr(XY) = s (2 a a' + b c' + c b') with s and 2 units.
  const std::array<int, 3> perp{1 - lie[0], 1 - lie[2], 1 - lie[1]};
  const bool formula = perp == plus;

  // Brute force over coordinates a, b, c in p^-1 Z / p^2 Z; every threshold involved is at most 2.
  const int low = -1, high = 2;
  const std::int64_t span = ipow(p, high - low);
  auto val = [&](std::int64_t k) { return k == 0 ? kInfiniteValuation : valuation(k, p) + low; };
  auto at_least = [](int v, int bound) { return v == kInfiniteValuation || v >= bound; };
  auto shifted = [](int v, int t) { return v == kInfiniteValuation ? v : v + t; };
  for (std::int64_t a = 0; a < span; ++a) {
    const int va = val(a);
    for (std::int64_t b = 0; b < span; ++b) {
      const int vb = val(b);
      for (std::int64_t c = 0; c < span; ++c) {
        const int vc = val(c);
        const bool in_perp =
            at_least(shifted(va, lie[0]), 1) && at_least(shifted(vb, lie[2]), 1) && at_least(shifted(vc, lie[1]), 1);
        const bool in_plus = at_least(va, plus[0]) && at_least(vb, plus[1]) && at_least(vc, plus[2]);
        if (in_perp != in_plus) return false;
      }
    }
  }
  return formula;
}

}  // namespace stabkit::hecke
