#include "stabkit/dlstable.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <numeric>
#include <ostream>

namespace stabkit::dlstable {

using grpfin::Matrix;

namespace {

Complex root_of_unity(std::int64_t num, std::int64_t den) {
  const double a = 2.0 * std::numbers::pi * static_cast<double>(mod(num, den)) / static_cast<double>(den);
  return {std::cos(a), std::sin(a)};
}

void check_q(std::int64_t q) {
  if (q < 3 || q % 2 == 0 || !is_prime(q)) throw ArgumentError("q must be an odd prime, got " + std::to_string(q));
}

}  // namespace

std::string to_string(TorusType t) { return t == TorusType::split ? "split" : "nonsplit"; }

QuadraticField::QuadraticField(std::int64_t q) : q_(q) {
  check_q(q);
  d_ = smallest_nonresidue(q);
  for (std::int64_t a = 0; a < q && log_.empty(); ++a)
    for (std::int64_t b = 1; b < q; ++b) {
      if (mod(a * a - d_ * b * b, q) != 1) continue;
      const QuadraticElement x{a, b};
      std::map<std::pair<std::int64_t, std::int64_t>, std::int64_t> seen;
      QuadraticElement y{1, 0};
      for (std::int64_t k = 0; k <= q; ++k) {
        if (!seen.emplace(std::pair{y.a, y.b}, k).second) break;
        y = mul(y, x);
      }
      if (static_cast<std::int64_t>(seen.size()) == q + 1) {
        zeta_ = x;
        log_ = std::move(seen);
        break;
      }
    }
  if (log_.empty()) throw StructuralError("QuadraticField: no generator of the norm-one subgroup");
}

QuadraticElement QuadraticField::mul(QuadraticElement x, QuadraticElement y) const {
  return {mod(x.a * y.a + d_ * x.b * y.b, q_), mod(x.a * y.b + x.b * y.a, q_)};
}

QuadraticElement QuadraticField::pow(QuadraticElement x, std::int64_t e) const {
  QuadraticElement r{1, 0};
  for (e = mod(e, q_ * q_ - 1); e > 0; e >>= 1) {
    if (e & 1) r = mul(r, x);
    x = mul(x, x);
  }
  return r;
}

std::int64_t QuadraticField::log_zeta(QuadraticElement x) const {
  auto it = log_.find({mod(x.a, q_), mod(x.b, q_)});
  if (it == log_.end()) throw ArgumentError("log_zeta: element does not have norm one");
  return it->second;
}

QuadraticElement QuadraticField::elliptic_eigenvalue(std::int64_t t) const {
  const std::int64_t disc = mod(t * t - 4, q_);
  if (disc == 0 || is_square_mod(disc, q_)) throw ArgumentError("elliptic_eigenvalue: trace is not elliptic");
  const std::int64_t target = mod_mul(disc, mod_inv(d_, q_), q_);
  std::int64_t c = 0;
  while (mod(c * c, q_) != target) ++c;
  const std::int64_t half = mod_inv(2, q_);
  return {mod_mul(mod(t, q_), half, q_), mod_mul(c, half, q_)};
}

std::string DualChartPoint::label() const {
  const std::string base = torus == TorusType::split ? "g" : "zeta";
  return "x=" + std::to_string(coordinate) + " [" + to_string(torus) + ", lambda=" + base + "^" + std::to_string(exponent) +
         ", order " + std::to_string(order) + "]";
}

DualChart::DualChart(std::int64_t q) : q_(q), field_(q) {
  const std::int64_t g = unit_group_generator(q).value();
  gpow_.resize(q - 1);
  gpow_[0] = 1;
  for (std::int64_t k = 1; k < q - 1; ++k) gpow_[k] = mod_mul(gpow_[k - 1], g, q);
  points_.push_back({2 % q, TorusType::split, 1, 0});
  points_.push_back({q - 2, TorusType::split, 2, (q - 1) / 2});
  std::vector<DualChartPoint> split, nonsplit;
  for (std::int64_t k = 1; k < (q - 1) / 2; ++k)
    split.push_back({mod(gpow_[k] + gpow_[q - 1 - k], q), TorusType::split, (q - 1) / std::gcd(k, q - 1), k});
  for (std::int64_t k = 1; k <= (q - 1) / 2; ++k)
    nonsplit.push_back({mod(2 * field_.pow(field_.zeta(), k).a, q), TorusType::nonsplit, (q + 1) / std::gcd(k, q + 1), k});
  auto by_order = [](const DualChartPoint& a, const DualChartPoint& b) {
    return std::pair{a.order, a.exponent} < std::pair{b.order, b.exponent};
  };
  std::sort(split.begin(), split.end(), by_order);
  std::sort(nonsplit.begin(), nonsplit.end(), by_order);
  points_.insert(points_.end(), split.begin(), split.end());
  points_.insert(points_.end(), nonsplit.begin(), nonsplit.end());
  for (std::size_t i = 0; i < points_.size(); ++i)
    if (!by_coordinate_.emplace(points_[i].coordinate, static_cast<int>(i)).second)
      throw StructuralError("DualChart: coordinate collision at " + std::to_string(points_[i].coordinate));
  if (static_cast<std::int64_t>(points_.size()) != q) throw StructuralError("DualChart: expected q points");
}

int DualChart::index_of_coordinate(std::int64_t c) const {
  auto it = by_coordinate_.find(mod(c, q_));
  if (it == by_coordinate_.end()) throw ArgumentError("DualChart: no point with coordinate " + std::to_string(c));
  return it->second;
}

int DualChart::point_of(TorusType t, std::int64_t k) const {
  if (t == TorusType::split) {
    k = mod(k, q_ - 1);
    return index_of_coordinate(gpow_[k] + gpow_[mod(-k, q_ - 1)]);
  }
  return index_of_coordinate(2 * field_.pow(field_.zeta(), k).a);
}

DualChart dual_chart(std::int64_t q) { return DualChart(q); }

SL2Series::SL2Series(std::int64_t q, std::uint64_t seed) : q_(q), chart_(q) {
  group_ = std::make_unique<GroupTable>(GroupTable::special_linear({2, q, 1}));
  torus_ = std::make_unique<GroupTable>(
      GroupTable::subgroup(*group_, [](const Matrix& m) { return grpfin::is_block_diagonal(m, 2, {1, 1}); }, "T"));
  borel_ = std::make_unique<grpfin::Parabolic>(*group_, *torus_, std::vector<int>{1, 1});
  chars_ = grpfin::character_table(*group_, seed);
  const std::int64_t g = unit_group_generator(q).value();
  dlog_.assign(q, -1);
  std::int64_t x = 1;
  for (std::int64_t k = 0; k < q - 1; ++k, x = mod_mul(x, g, q)) dlog_[x] = k;
  build_dl();
  build_partition();
}

ClassFunction SL2Series::split_character(std::int64_t k) const {
  // Induced from the Borel: (1/|B|) sum_x [x y x^-1 in B] theta(x y x^-1).
  const auto& G = *group_;
  ClassFunction r(G);
  const double inv_b = 1.0 / borel_->parabolic_order();
  for (int c = 0; c < G.num_classes(); ++c) {
    const int y = G.class_rep(c);
    Complex s = 0;
    for (int xi = 0; xi < G.order(); ++xi) {
      const int z = G.multiply(G.multiply(xi, y), G.inverse(xi));
      if (!borel_->contains(z)) continue;
      s += root_of_unity(k * dlog_[G.element(z)[0]], q_ - 1);
    }
    r[c] = s * inv_b;
  }
  return r;
}

DLVirtualCharacter SL2Series::nonsplit_character(std::int64_t k) const {
  // Character formula on every class: central and unipotent parts through
  // the rank-one Green function, split regular classes give 0, elliptic
  // classes give theta(s) + theta(s^-1).
  const auto& G = *group_;
  const auto& F = chart_.field();
  const int m = G.num_classes();
  const int n = static_cast<int>(chars_.size());
  const Complex theta_minus_one = (k % 2 == 0) ? 1.0 : -1.0;
  Eigen::MatrixXcd A(m, n);
  Eigen::VectorXcd target(m);
  for (int c = 0; c < m; ++c) {
    const Matrix& s = G.element(G.class_rep(c));
    for (int j = 0; j < n; ++j) A(c, j) = chars_[j].values[c];
    const std::int64_t t = mod(s[0] + s[3], q_);
    const bool central = s[1] == 0 && s[2] == 0 && s[0] == s[3];
    if (central) {
      target(c) = (s[0] == 1 ? Complex(1) : theta_minus_one) * static_cast<double>(-(q_ - 1));
    } else if (t == 2 % q_ || t == q_ - 2) {
      target(c) = t == 2 % q_ ? Complex(1) : theta_minus_one;
    } else if (is_square_mod(mod(t * t - 4, q_), q_)) {
      target(c) = 0;
    } else {
      const auto j = F.log_zeta(F.elliptic_eigenvalue(t));
      target(c) = root_of_unity(j * k, q_ + 1) + root_of_unity(-j * k, q_ + 1);
    }
  }
  Eigen::FullPivLU<Eigen::MatrixXcd> lu(A);
  lu.setThreshold(1e-9);
  if (lu.rank() < n)
    throw StructuralError("nonsplit R_T^theta (k=" + std::to_string(k) + "): constraint system has a " +
                          std::to_string(n - lu.rank()) + "-dimensional solution space");
  const Eigen::VectorXcd sol = lu.solve(target);
  const double residual = (A * sol - target).cwiseAbs().maxCoeff();
  if (residual > 1e-8)
    throw StructuralError("nonsplit R_T^theta (k=" + std::to_string(k) + "): constraints inconsistent, residual " +
                          std::to_string(residual));
  std::vector<int> coeffs(n);
  for (int j = 0; j < n; ++j) {
    const double re = sol(j).real();
    if (std::abs(sol(j) - std::round(re)) > 1e-6)
      throw StructuralError("nonsplit R_T^theta (k=" + std::to_string(k) + "): solution is not an integer vector");
    coeffs[j] = static_cast<int>(std::lround(re));
  }
  ClassFunction values(G);
  for (int j = 0; j < n; ++j) values = values + chars_[j].values * static_cast<double>(coeffs[j]);
  return {TorusType::nonsplit, k, values, coeffs, chart_.point_of(TorusType::nonsplit, k)};
}

std::vector<Complex> character_coordinates(const ClassFunction& f, const std::vector<IrreducibleCharacter>& chars) {
  std::vector<Complex> out;
  for (const auto& c : chars) out.push_back(grpfin::inner_product(f, c.values));
  return out;
}

void SL2Series::build_dl() {
  const int n = static_cast<int>(chars_.size());
  for (std::int64_t k = 0; k < q_ - 1; ++k) {
    auto values = split_character(k);
    const auto co = character_coordinates(values, chars_);
    std::vector<int> coeffs(n);
    for (int j = 0; j < n; ++j) {
      if (std::abs(co[j] - std::round(co[j].real())) > 1e-6)
        throw StructuralError("split R_T^theta: non-integral multiplicity");
      coeffs[j] = static_cast<int>(std::lround(co[j].real()));
    }
    dl_.push_back({TorusType::split, k, values, coeffs, chart_.point_of(TorusType::split, k)});
  }
  for (std::int64_t k = 0; k <= q_; ++k) dl_.push_back(nonsplit_character(k));

  // Orthogonality against Weyl counts and the degree formula for every pair.
  auto order_of = [](const DLVirtualCharacter& r, std::int64_t q) { return r.torus == TorusType::split ? q - 1 : q + 1; };
  for (const auto& a : dl_) {
    const std::int64_t ta = order_of(a, q_);
    const double degree = a.torus == TorusType::split ? static_cast<double>(q_ + 1) : -static_cast<double>(q_ - 1);
    if (std::abs(a.values[0] - degree) > 1e-6) throw StructuralError("R_T^theta: degree formula fails");
    for (const auto& b : dl_) {
      double expect = 0;
      if (a.torus == b.torus) {
        expect += (mod(a.theta - b.theta, ta) == 0) ? 1 : 0;
        expect += (mod(a.theta + b.theta, ta) == 0) ? 1 : 0;
      }
      if (std::abs(grpfin::inner_product(a.values, b.values) - expect) > 1e-6)
        throw StructuralError("R_T^theta: inner product differs from the Weyl count");
    }
  }
}

void SL2Series::build_partition() {
  const int n = static_cast<int>(chars_.size());
  partition_.point_of.assign(n, -1);
  partition_.blocks.assign(chart_.size(), {});
  for (const auto& r : dl_)
    for (int j = 0; j < n; ++j) {
      if (r.coefficients[j] == 0) continue;
      int& slot = partition_.point_of[j];
      if (slot >= 0 && slot != r.chart_point)
        throw StructuralError("series partition: character " + std::to_string(j) + " lies over two chart points");
      slot = r.chart_point;
    }
  for (int j = 0; j < n; ++j) {
    if (partition_.point_of[j] < 0)
      throw StructuralError("series partition: character " + std::to_string(j) + " occurs in no R_T^theta");
    partition_.blocks[partition_.point_of[j]].push_back(j);
  }
}

ClassFunction SL2Series::f_s(int point) const {
  ClassFunction f(*group_);
  for (int j : partition_.blocks.at(point)) f = f + chars_[j].values * static_cast<double>(chars_[j].degree);
  return f;
}

ClassFunction SL2Series::f_theta(int point) const {
  ClassFunction f(*group_);
  const double inv = 1.0 / group_->order();
  for (int j : partition_.blocks.at(point))
    f = f + chars_[j].values.conj() * (static_cast<double>(chars_[j].degree) * inv);
  return f;
}

ClassFunction SL2Series::torus_f(int k) const {
  const auto& T = *torus_;
  std::vector<Complex> per(T.order());
  for (int t = 0; t < T.order(); ++t)
    per[t] = std::conj(root_of_unity(k * dlog_[T.element(t)[0]], q_ - 1)) / static_cast<double>(q_ - 1);
  return ClassFunction::from_elements(T, per);
}

double SL2Series::res_diagram_residual() const {
  double worst = 0;
  for (int p = 0; p < chart_.size(); ++p) {
    const auto lhs = grpfin::parabolic_res_group_unnormalized(f_theta(p), *borel_);
    ClassFunction rhs(*torus_);
    for (int k = 0; k < torus_chart_size(); ++k)
      if (torus_to_chart(k) == p) rhs = rhs + torus_f(k);
    worst = std::max(worst, lhs.distance(rhs));
  }
  return worst;
}

GroupVanishingReport vanishing_check_group(const ClassFunction& f, const grpfin::Parabolic& P) {
  if (&f.group() != &P.ambient()) throw StructuralError("vanishing_check_group: function not on the ambient group");
  const auto& G = P.ambient();
  GroupVanishingReport rep;
  for (int x = 0; x < G.order(); ++x) {
    if (P.contains(x)) continue;
    ++rep.sites_checked;
    Complex s = 0;
    for (int u : P.unipotent()) s += f.at_element(G.multiply(x, u));
    if (std::abs(s) > rep.max_abs) {
      rep.max_abs = std::abs(s);
      rep.witness = x;
    }
  }
  return rep;
}

void write_series_csv(std::ostream& os, const SL2Series& s) {
  os << "coordinate,torus,exponent,order,characters,degrees\n";
  for (int p = 0; p < s.chart().size(); ++p) {
    const auto& pt = s.chart()[p];
    os << pt.coordinate << ',' << to_string(pt.torus) << ',' << pt.exponent << ',' << pt.order << ',';
    std::string chars, degs;
    for (int j : s.partition().blocks[p]) {
      chars += (chars.empty() ? "" : ";") + std::to_string(j);
      degs += (degs.empty() ? "" : ";") + std::to_string(s.characters()[j].degree);
    }
    os << chars << ',' << degs << '\n';
  }
}

void write_f_theta_csv(std::ostream& os, const SL2Series& s) {
  os << "coordinate,class,rep,value\n";
  char buf[64];
  const auto& G = s.group();
  for (int p = 0; p < s.chart().size(); ++p) {
    const auto f = s.f_theta(p);
    for (int c = 0; c < G.num_classes(); ++c) {
      std::snprintf(buf, sizeof buf, "%.10f%+.10fi", f[c].real(), f[c].imag());
      os << s.chart()[p].coordinate << ',' << c << ",\"" << grpfin::matrix_to_string(G.element(G.class_rep(c)), 2) << "\","
         << buf << '\n';
    }
  }
}

}  // namespace stabkit::dlstable
