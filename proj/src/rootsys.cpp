#include "stabkit/rootsys.hpp"

#include <algorithm>
#include <bit>
#include <numeric>
#include <set>
#include <sstream>

namespace stabkit::rootsys {

namespace {

FiniteRootDatum make_type_a(int rank) {
  FiniteRootDatum d;
  d.label = "A" + std::to_string(rank);
  d.rank = rank;
  d.cartan_matrix.assign(rank, std::vector<int>(rank, 0));
  for (int i = 0; i < rank; ++i) {
    d.cartan_matrix[i][i] = 2;
    if (i + 1 < rank) d.cartan_matrix[i][i + 1] = d.cartan_matrix[i + 1][i] = -1;
  }
  for (int i = 0; i <= rank; ++i)
    for (int j = i + 1; j <= rank; ++j) d.positive_roots.push_back(simple_coefficients({i, j}, rank));
  d.marks.assign(rank + 1, 1);
  return d;
}

}  // namespace

const FiniteRootDatum& FiniteRootDatum::from_label(std::string_view label) {
  static const FiniteRootDatum a1 = make_type_a(1);
  static const FiniteRootDatum a2 = make_type_a(2);
  if (label == "A1") return a1;
  if (label == "A2") return a2;
  throw ArgumentError("root datum: unsupported type '" + std::string(label) + "' (A1, A2)");
}

std::vector<int> simple_coefficients(const FiniteRoot& r, int rank) {
  std::vector<int> c(rank, 0);
  const int lo = std::min(r.i, r.j), hi = std::max(r.i, r.j);
  const int sign = r.i < r.j ? 1 : -1;
  for (int k = lo + 1; k <= hi; ++k) c[k - 1] = sign;
  return c;
}

AffineRoot affine_simple_root(const FiniteRootDatum& d, int k) {
  if (k < 0 || k > d.rank) throw ArgumentError("affine simple root index out of range");
  if (k == 0) return {{d.rank, 0}, 1};
  return {{k - 1, k}, 0};
}

std::vector<AffineRoot> all_finite_roots_at_level(const FiniteRootDatum& d, int level) {
  std::vector<AffineRoot> out;
  for (int i = 0; i <= d.rank; ++i)
    for (int j = 0; j <= d.rank; ++j)
      if (i != j) out.push_back({{i, j}, level});
  return out;
}

AffineWeylElement::AffineWeylElement(const FiniteRootDatum& d)
    : datum_(&d), perm_(d.rank + 1), translation_(d.rank + 1, 0) {
  std::iota(perm_.begin(), perm_.end(), 0);
}

AffineWeylElement::AffineWeylElement(const FiniteRootDatum& d, std::vector<int> perm, std::vector<int> translation)
    : datum_(&d), perm_(std::move(perm)), translation_(std::move(translation)) {
  const auto n = static_cast<std::size_t>(d.rank + 1);
  if (perm_.size() != n || translation_.size() != n) throw StructuralError("AffineWeylElement: size mismatch");
  if (std::accumulate(translation_.begin(), translation_.end(), 0) != 0)
    throw StructuralError("AffineWeylElement: translation not in the coroot lattice");
}

AffineWeylElement AffineWeylElement::simple_reflection(const FiniteRootDatum& d, int k) {
  AffineWeylElement s(d);
  if (k < 0 || k > d.rank) throw ArgumentError("simple reflection index out of range");
  if (k == 0) {
    std::swap(s.perm_[0], s.perm_[d.rank]);
    s.translation_[0] = 1;
    s.translation_[d.rank] = -1;
  } else {
    std::swap(s.perm_[k - 1], s.perm_[k]);
  }
  return s;
}

AffineWeylElement AffineWeylElement::from_word(const FiniteRootDatum& d, const std::vector<int>& word) {
  AffineWeylElement w(d);
  for (int k : word) w = w * simple_reflection(d, k);
  return w;
}

bool AffineWeylElement::is_identity() const {
  for (std::size_t i = 0; i < perm_.size(); ++i)
    if (perm_[i] != static_cast<int>(i) || translation_[i] != 0) return false;
  return true;
}

AffineWeylElement AffineWeylElement::operator*(const AffineWeylElement& o) const {
  if (!(*datum_ == *o.datum_)) throw StructuralError("AffineWeylElement: root datum mismatch");
  const std::size_t n = perm_.size();
  std::vector<int> perm(n), trans(translation_);
  for (std::size_t i = 0; i < n; ++i) {
    perm[i] = perm_[o.perm_[i]];
    trans[perm_[i]] += o.translation_[i];
  }
  return {*datum_, std::move(perm), std::move(trans)};
}

AffineWeylElement AffineWeylElement::inverse() const {
  const std::size_t n = perm_.size();
  std::vector<int> perm(n), trans(n);
  for (std::size_t i = 0; i < n; ++i) {
    perm[perm_[i]] = static_cast<int>(i);
    trans[i] = -translation_[perm_[i]];
  }
  return {*datum_, std::move(perm), std::move(trans)};
}

AffineRoot AffineWeylElement::act(const AffineRoot& beta) const {
  const int si = perm_.at(beta.finite.i), sj = perm_.at(beta.finite.j);
  return {{si, sj}, beta.level - (translation_[si] - translation_[sj])};
}

AffineRoot act(const AffineWeylElement& w, const AffineRoot& beta) { return w.act(beta); }

std::vector<AffineRoot> AffineWeylElement::inversion_set() const {
  std::vector<AffineRoot> out;
  const int n = datum_->rank + 1;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      const int shift = translation_[perm_[i]] - translation_[perm_[j]];
      for (int k = 0; k <= std::max(shift, 0); ++k) {
        const AffineRoot beta{{i, j}, k};
        if (beta.positive() && !act(beta).positive()) out.push_back(beta);
      }
    }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<int> AffineWeylElement::key() const {
  std::vector<int> k(perm_);
  k.insert(k.end(), translation_.begin(), translation_.end());
  return k;
}

std::string AffineWeylElement::to_string() const {
  std::ostringstream os;
  os << "(perm=[";
  for (std::size_t i = 0; i < perm_.size(); ++i) os << (i ? "," : "") << perm_[i];
  os << "],t=[";
  for (std::size_t i = 0; i < translation_.size(); ++i) os << (i ? "," : "") << translation_[i];
  os << "])";
  return os.str();
}

ParahoricLabel ParahoricLabel::make(const FiniteRootDatum& d, SimpleSet J) {
  const SimpleSet full = (1u << (d.rank + 1)) - 1;
  if ((J & ~full) != 0 || J == full) throw ArgumentError("ParahoricLabel: J must be a proper subset of the affine simple roots");
  ParahoricLabel P;
  P.J = J;
  std::int64_t outside = 0;
  for (int k = 0; k <= d.rank; ++k)
    if (!(J & (1u << k))) outside += d.marks[k];
  for (int k = 0; k <= d.rank; ++k)
    P.facet_values.push_back((J & (1u << k)) ? Rational(0) : Rational(1, outside));
  return P;
}

int ParahoricLabel::semisimple_rank() const { return std::popcount(J); }

std::string set_to_string(SimpleSet J, int rank) {
  std::string s = "{";
  bool first = true;
  for (int k = 0; k <= rank; ++k)
    if (J & (1u << k)) {
      s += (first ? "" : ",") + std::string("a") + std::to_string(k);
      first = false;
    }
  return s + "}";
}

std::string ParahoricLabel::to_string() const {
  std::string s = "J=" + set_to_string(J, static_cast<int>(facet_values.size()) - 1) + " x=(";
  for (std::size_t k = 0; k < facet_values.size(); ++k) {
    s += (k ? "," : "") + std::to_string(facet_values[k].numerator());
    if (facet_values[k].denominator() != 1) s += "/" + std::to_string(facet_values[k].denominator());
  }
  return s + ")";
}

std::vector<ParahoricLabel> standard_parahorics(const FiniteRootDatum& d) {
  std::vector<ParahoricLabel> out;
  const SimpleSet full = (1u << (d.rank + 1)) - 1;
  for (SimpleSet J = 0; J < full; ++J) out.push_back(ParahoricLabel::make(d, J));
  return out;
}

Rational evaluate(const AffineRoot& beta, const ParahoricLabel& P, int rank) {
  const auto c = simple_coefficients(beta.finite, rank);
  Rational v(beta.level);
  for (int k = 1; k <= rank; ++k) v += c[k - 1] * P.facet_values.at(k);
  return v;
}

bool filtration_member(const AffineRoot& beta, const ParahoricLabel& P, int m, bool strict, int rank) {
  if (m < 0) throw ArgumentError("filtration_member: m must be nonnegative");
  const Rational v = evaluate(beta, P, rank);
  return strict ? v > m : v >= m;
}

SimpleSet jw(const AffineWeylElement& w) {
  SimpleSet J = 0;
  for (int k = 0; k <= w.datum().rank; ++k)
    if (w.act(affine_simple_root(w.datum(), k)).positive()) J |= 1u << k;
  return J;
}

WeylEnumeration::WeylEnumeration(const FiniteRootDatum& d, int max_length) : datum_(&d), max_length_(max_length) {
  if (max_length < 0) throw ArgumentError("WeylEnumeration: negative length");
  AffineWeylElement e(d);
  shells_.push_back({e});
  info_[e.key()] = {0, {}};
  for (int len = 1; len <= max_length; ++len) {
    std::vector<AffineWeylElement> next;
    for (const auto& w : shells_[len - 1]) {
      const auto& word = info_.at(w.key()).second;
      for (int k = 0; k <= d.rank; ++k) {
        auto ws = w * AffineWeylElement::simple_reflection(d, k);
        if (info_.count(ws.key())) continue;
        auto wd = word;
        wd.push_back(k);
        info_[ws.key()] = {len, wd};
        next.push_back(ws);
      }
    }
    std::sort(next.begin(), next.end());
    shells_.push_back(std::move(next));
  }
}

const std::vector<int>& WeylEnumeration::reduced_word(const AffineWeylElement& w) const {
  auto it = info_.find(w.key());
  if (it == info_.end()) throw CapacityError("WeylEnumeration: element beyond enumerated length " + std::to_string(max_length_));
  return it->second.second;
}

int WeylEnumeration::length_of(const AffineWeylElement& w) const {
  auto it = info_.find(w.key());
  if (it == info_.end()) throw CapacityError("WeylEnumeration: element beyond enumerated length " + std::to_string(max_length_));
  return it->second.first;
}

bool WeylEnumeration::contains(const AffineWeylElement& w) const { return info_.count(w.key()) != 0; }

std::vector<AffineWeylElement> bruhat_interval_below(const AffineWeylElement& w, const std::vector<int>& reduced_word) {
  const auto& d = w.datum();
  std::map<std::vector<int>, AffineWeylElement> acc;
  AffineWeylElement e(d);
  acc.emplace(e.key(), e);
  for (int k : reduced_word) {
    const auto s = AffineWeylElement::simple_reflection(d, k);
    std::vector<AffineWeylElement> add;
    for (const auto& [key, x] : acc) add.push_back(x * s);
    for (auto& x : add) acc.emplace(x.key(), x);
  }
  if (AffineWeylElement::from_word(d, reduced_word) != w) throw ArgumentError("bruhat_interval_below: word does not spell w");
  std::vector<AffineWeylElement> out;
  for (auto& [key, x] : acc) out.push_back(x);
  return out;
}

bool bruhat_leq(const AffineWeylElement& u, const AffineWeylElement& w, const std::vector<int>& reduced_word_of_w) {
  const auto below = bruhat_interval_below(w, reduced_word_of_w);
  return std::binary_search(below.begin(), below.end(), u);
}

namespace {

Rational max_simple_eval(const AffineWeylElement& w, const ParahoricLabel& Q) {
  const int rank = w.datum().rank;
  Rational m = evaluate(w.act(affine_simple_root(w.datum(), 0)), Q, rank);
  for (int k = 1; k <= rank; ++k) m = std::max(m, evaluate(w.act(affine_simple_root(w.datum(), k)), Q, rank));
  return m;
}

}  // namespace

SSetResult s_set(const ParahoricLabel& Q, int n, int length_bound, const WeylEnumeration& en) {
  if (n < 0) throw ArgumentError("s_set: n must be nonnegative");
  if (length_bound < 1) throw ArgumentError("s_set: length bound must be at least 1");
  if (length_bound > en.max_length()) throw CapacityError("s_set: length bound exceeds enumeration");
  SSetResult res;
  std::vector<bool> shell_has_member(length_bound + 1, false);
  const auto& d = en.shell(0).front().datum();
  res.elements.push_back(AffineWeylElement(d));
  for (int len = 0; len <= length_bound; ++len) {
    std::optional<Rational> shell_min;
    for (const auto& w : en.shell(len)) {
      const Rational m = max_simple_eval(w, Q);
      shell_min = shell_min ? std::min(*shell_min, m) : m;
      if (m <= Rational(n)) {
        shell_has_member[len] = true;
        res.max_member_length = std::max(res.max_member_length, len);
        if (!w.is_identity()) res.elements.push_back(w);
      }
    }
    res.shell_min_eval.push_back(shell_min);
  }
  std::sort(res.elements.begin(), res.elements.end());
  // Saturation: the last kSaturationMargin shells contain no member, and the
  // minimum evaluation over a sliding window of that many shells exceeds n and
  // does not decrease as the window moves to the bound.
  auto window_min = [&](int end) {
    std::optional<Rational> m;
    for (int len = end - kSaturationMargin + 1; len <= end; ++len)
      if (const auto& v = res.shell_min_eval[len]; v) m = m ? std::min(*m, *v) : *v;
    return m;
  };
  bool ok = length_bound >= kSaturationMargin;
  for (int len = length_bound - kSaturationMargin + 1; ok && len <= length_bound; ++len)
    if (shell_has_member[len]) ok = false;
  if (ok) {
    const auto last = window_min(length_bound);
    if (!last || *last <= Rational(n)) ok = false;
    if (ok && length_bound > kSaturationMargin) {
      const auto prev = window_min(length_bound - 1);
      if (prev && *last < *prev) ok = false;
    }
  }
  res.saturated = ok;
  if (!ok)
    res.diagnostic = "unsaturated: members or non-growing evaluations within the last " +
                     std::to_string(kSaturationMargin) + " shells up to length " + std::to_string(length_bound);
  return res;
}

LowerSetY::LowerSetY(std::vector<AffineWeylElement> elements) : elements_(std::move(elements)) {
  std::sort(elements_.begin(), elements_.end());
  elements_.erase(std::unique(elements_.begin(), elements_.end()), elements_.end());
}

bool LowerSetY::contains(const AffineWeylElement& w) const {
  return std::binary_search(elements_.begin(), elements_.end(), w);
}

bool LowerSetY::is_lower_set(const WeylEnumeration& en) const {
  for (const auto& w : elements_)
    for (const auto& u : bruhat_interval_below(w, en.reduced_word(w)))
      if (!contains(u)) return false;
  return true;
}

LowerSetY lower_closure(const std::vector<AffineWeylElement>& gens, const WeylEnumeration& en) {
  std::vector<AffineWeylElement> all;
  for (const auto& w : gens) {
    auto below = bruhat_interval_below(w, en.reduced_word(w));
    all.insert(all.end(), below.begin(), below.end());
  }
  return LowerSetY(std::move(all));
}

LowerSetY y_of(const ParahoricLabel& Q, int n, int length_bound, const WeylEnumeration& en) {
  auto s = s_set(Q, n, length_bound, en);
  if (!s.saturated) throw UnsaturatedError("y_of: " + s.diagnostic);
  return lower_closure(s.elements, en);
}

std::string decomposition_precondition_failure(const AffineWeylElement& w, int alpha, SimpleSet J,
                                               const ParahoricLabel& Q, int n) {
  const auto& d = w.datum();
  if (alpha < 0 || alpha > d.rank) return "alpha out of range";
  const SimpleSet a = 1u << alpha;
  const SimpleSet Jw = jw(w);
  const SimpleSet full = (1u << (d.rank + 1)) - 1;
  if (!(Jw & a) || (J & a)) return "alpha in J_w \\ J";
  if ((J & ~(Jw & ~a)) != 0) return "J subset of J_w \\ {alpha}";
  if (!(evaluate(w.act(affine_simple_root(d, alpha)), Q, d.rank) > n)) return "U_{w(alpha)} not inside Q_n^+";
  if (J == (full & ~a)) return "J != affine simple roots minus alpha";
  return {};
}

DecompositionResult verify_decomposition_roots(const AffineWeylElement& w, int alpha, SimpleSet J,
                                               const ParahoricLabel& Q, int n, int r) {
  if (r < 0 || n < 0) throw ArgumentError("verify_decomposition_roots: n, r must be nonnegative");
  if (auto f = decomposition_precondition_failure(w, alpha, J, Q, n); !f.empty())
    throw ArgumentError("verify_decomposition_roots: precondition failed: " + f);
  const auto& d = w.datum();
  const auto PJ = ParahoricLabel::make(d, J);
  const auto PJp = ParahoricLabel::make(d, J | (1u << alpha));
  DecompositionResult res;
  // beta(x) ranges over (r - 1, r + 1] for roots in the difference set.
  for (int level = r - 3; level <= r + 3; ++level)
    for (const auto& beta : all_finite_roots_at_level(d, level)) {
      if (!(evaluate(beta, PJ, d.rank) > r) || evaluate(beta, PJp, d.rank) > r) continue;
      ++res.roots_checked;
      if (!(evaluate(w.act(beta), Q, d.rank) > n + r)) {
        res.holds = false;
        if (!res.witness) res.witness = beta;
      }
    }
  return res;
}

}  // namespace stabkit::rootsys
