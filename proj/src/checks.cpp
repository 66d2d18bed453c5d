#include "stabkit/checks.hpp"

#include "stabkit/dlstable.hpp"
#include "stabkit/grpfin.hpp"
#include "stabkit/hecke.hpp"
#include "stabkit/liestable.hpp"
#include "stabkit/padic.hpp"
#include "stabkit/rootsys.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <memory>
#include <random>
#include <set>
#include <sstream>

namespace stabkit::checks {

namespace {

constexpr double kResidualTolerance = 1e-8;
constexpr double kExactTolerance = 1e-9;
constexpr std::size_t kMaxWitnesses = 20;
constexpr std::int64_t kNaiveLimit = 2500;

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

// Collects residuals and failures into a report.
class Recorder {
 public:
  explicit Recorder(Report& r) : r_(r) {}
  void residual(double v, double tol, const std::string& what) {
    r_.residual = std::max(r_.residual, v);
    if (!(v < tol)) fail(what + ": residual " + sci(v));
  }
  void require(bool ok, const std::string& what) {
    if (!ok) fail(what);
  }
  void fail(const std::string& what) {
    r_.status = Status::fail;
    if (r_.witnesses.size() < kMaxWitnesses) r_.witnesses.push_back(what);
  }
  void inconclusive(const std::string& what) {
    if (r_.status == Status::pass) r_.status = Status::inconclusive;
    if (r_.witnesses.size() < kMaxWitnesses) r_.witnesses.push_back(what);
  }

 private:
  Report& r_;
};

Json field_environment(std::int64_t p, std::uint64_t seed) {
  Json e = Json::object();
  e["p"] = p;
  e["psi"] = "exp(2 pi i t / p)";
  e["generator"] = unit_group_generator(p).value();
  e["mu_normalization"] = "mu(I^+) = 1";
  e["seed"] = seed;
  return e;
}

// Runs body, turning structural failures of the construction into a failed report.
template <class Body>
Report guarded(std::string id, Json params, std::int64_t p, std::uint64_t seed, Body body) {
  Report r;
  r.id = std::move(id);
  r.params = std::move(params);
  r.environment = field_environment(p, seed);
  const auto t0 = std::chrono::steady_clock::now();
  try {
    Recorder rec(r);
    body(r, rec);
  } catch (const StructuralError& e) {
    r.status = Status::fail;
    r.witnesses.push_back(std::string("structural: ") + e.what());
  } catch (const rootsys::UnsaturatedError& e) {
    Recorder(r).inconclusive(std::string("unsaturated: ") + e.what());
  }
  r.elapsed_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

int rank_of(const std::string& algebra) {
  if (algebra == "sl2") return 2;
  if (algebra == "sl3") return 3;
  throw ArgumentError("unknown algebra '" + algebra + "' (expected sl2 or sl3)");
}

void require_field(std::int64_t q) {
  if (q < 3 || !is_prime(q)) throw ArgumentError("q must be an odd prime");
}

std::vector<std::vector<int>> levi_compositions(int n) {
  if (n == 2) return {{1, 1}};
  return {{2, 1}, {1, 2}, {1, 1, 1}};
}

using liestable::FinLieAlgebra;
using liestable::LieClassFunction;
using liestable::LieParabolic;

LieClassFunction random_function(const FinLieAlgebra& g, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> d(-1, 1);
  LieClassFunction f(g);
  for (auto& v : f.values()) v = Complex(d(rng), d(rng));
  return f;
}

LieClassFunction random_invariant(const FinLieAlgebra& g, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> d(-1, 1);
  LieClassFunction f(g);
  for (int o = 0; o < g.num_orbits(); ++o) {
    const Complex c(d(rng), d(rng));
    for (auto x : g.orbit_members(o)) f[x] = c;
  }
  return f;
}

// f * f' computed through the transform: FT^-1(FT f . FT f').
LieClassFunction convolve_via_transforms(const LieClassFunction& Ff, const LieClassFunction& Fg) {
  return liestable::ft(Ff.pointwise(Fg)).negated_argument();
}

// Largest deviation between a convolution and its direct evaluation at sampled points.
double sampled_convolution_residual(const LieClassFunction& conv, const LieClassFunction& a, const LieClassFunction& b,
                                    std::mt19937_64& rng, int samples) {
  const auto& g = a.algebra();
  std::uniform_int_distribution<std::int64_t> pick(0, g.size() - 1);
  double worst = 0;
  for (int i = 0; i < samples; ++i) {
    const auto x = i == 0 ? 0 : pick(rng);
    worst = std::max(worst, std::abs(conv[x] - liestable::convolve_lie_at(a, b, x)));
  }
  return worst;
}

const dlstable::SL2Series& series_for(std::int64_t q, std::uint64_t seed) {
  static std::map<std::pair<std::int64_t, std::uint64_t>, std::unique_ptr<dlstable::SL2Series>> cache;
  auto& slot = cache[{q, seed}];
  if (!slot) slot = std::make_unique<dlstable::SL2Series>(q, seed);
  return *slot;
}

}  // namespace

std::string to_string(Status s) {
  switch (s) {
    case Status::pass: return "pass";
    case Status::fail: return "fail";
    case Status::inconclusive: return "inconclusive";
  }
  return "?";
}

Json to_json(const Report& r, bool timing) {
  Json j = Json::object();
  j["id"] = r.id;
  j["params"] = r.params;
  j["status"] = to_string(r.status);
  j["residual"] = r.residual;
  j["witnesses"] = r.witnesses;
  j["elapsed_ms"] = timing ? std::round(r.elapsed_ms) : 0.0;
  j["environment"] = r.environment;
  return j;
}

std::string to_csv(const std::vector<Report>& rs, bool timing) {
  std::ostringstream os;
  os << "id,params,status,residual,elapsed_ms,witnesses\n";
  auto quote = [](const std::string& s) {
    std::string out = "\"";
    for (char c : s) out += c == '"' ? std::string("\"\"") : std::string(1, c);
    return out + "\"";
  };
  for (const auto& r : rs) {
    std::string w;
    for (std::size_t i = 0; i < r.witnesses.size(); ++i) w += (i ? "; " : "") + r.witnesses[i];
    os << r.id << ',' << quote(r.params.dump()) << ',' << to_string(r.status) << ',' << sci(r.residual) << ','
       << (timing ? std::llround(r.elapsed_ms) : 0) << ',' << quote(w) << '\n';
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// Lie algebra side

Report verify_ft(const std::string& algebra, std::int64_t q, const Options& o) {
  const int n = rank_of(algebra);
  require_field(q);
  return guarded("ft", {{"algebra", algebra}, {"q", q}}, q, o.seed, [&](Report&, Recorder& rec) {
    const auto g = FinLieAlgebra::sl(n, q);
    std::mt19937_64 rng(o.seed);
    const auto a = random_function(g, rng), b = random_function(g, rng);
    const auto Fa = liestable::ft(a), Fb = liestable::ft(b);
    const bool small = g.size() <= kNaiveLimit;
    if (small) rec.residual(Fa.distance(liestable::ft_naive(a)), 1e-10, "fast transform against direct sum");

    // Convolution goes to products.
    const auto conv = small ? liestable::convolve_lie_direct(a, b) : convolve_via_transforms(Fa, Fb);
    if (!small) rec.residual(sampled_convolution_residual(conv, a, b, rng, 8), kResidualTolerance, "sampled convolution");
    rec.residual(liestable::ft(conv).distance(Fa.pointwise(Fb)), kResidualTolerance, "FT(f * g) = FT f . FT g");

    // Products go to convolutions.
    const auto Fab = liestable::ft(a.pointwise(b));
    const auto conv_hat = small ? liestable::convolve_lie_direct(Fa, Fb)
                                : convolve_via_transforms(liestable::ft(Fa), liestable::ft(Fb));
    if (!small) {
      rec.residual(sampled_convolution_residual(conv_hat, Fa, Fb, rng, 8), kResidualTolerance, "sampled convolution");
    }
    rec.residual(Fab.distance(conv_hat), kResidualTolerance, "FT(f g) = FT f * FT g");

    // The square is the negated argument.
    rec.residual(liestable::ft(Fa).distance(a.negated_argument()), kResidualTolerance, "FT^2 f = f^-");

    // Commutes with parabolic restriction.
    const auto fi = random_invariant(g, rng);
    const auto Ffi = liestable::ft(fi);
    for (const auto& comp : levi_compositions(n)) {
      const FinLieAlgebra l(n, q, comp);
      const LieParabolic P(g, l);
      for (const auto* f : {&a, &fi}) {
        const auto lhs = liestable::ft(liestable::res_lie(*f, P));
        const auto rhs = liestable::res_lie(f == &a ? Fa : Ffi, P);
        rec.residual(lhs.distance(rhs), kResidualTolerance, "FT o Res = Res o FT at " + l.name());
      }
    }
  });
}

Report verify_stable_algebra(const std::string& algebra, std::int64_t q, const Options& o) {
  const int n = rank_of(algebra);
  require_field(q);
  return guarded("stable-algebra", {{"algebra", algebra}, {"q", q}}, q, o.seed, [&](Report& r, Recorder& rec) {
    const auto g = FinLieAlgebra::sl(n, q);
    const int k = g.chart_size();
    std::vector<LieClassFunction> fs, Fs;
    for (int c = 0; c < k; ++c) {
      fs.push_back(liestable::chart_indicator_function(g, c));
      Fs.push_back(liestable::ft(fs.back()));
      rec.residual(liestable::stability_defect(fs.back()), kResidualTolerance, "stability of chart point " + std::to_string(c));
    }
    const LieClassFunction zero(g);
    for (int a = 0; a < k; ++a) {
      for (int b = 0; b < k; ++b) {
        const auto prod = Fs[a].pointwise(Fs[b]);
        if (a != b) {
          // sup |FT h| <= |g|^(-1/2) sum |h| bounds the convolution without transforming.
          double l1 = 0;
          for (auto v : prod.values()) l1 += std::abs(v);
          const double bound = l1 / std::sqrt(static_cast<double>(g.size()));
          if (bound < kResidualTolerance * 1e-2) {
            rec.residual(bound, kResidualTolerance, "f_" + std::to_string(a) + " * f_" + std::to_string(b));
            continue;
          }
        }
        const auto conv = convolve_via_transforms(Fs[a], Fs[b]);
        rec.residual(conv.distance(a == b ? fs[a] : zero), kResidualTolerance,
                     "f_" + std::to_string(a) + " * f_" + std::to_string(b));
      }
    }
    // Direct double sums on a few pairs.
    if (g.size() <= kNaiveLimit) {
      for (int a = 0; a < std::min(k, 2); ++a) {
        for (int b = 0; b < std::min(k, 2); ++b) {
          rec.residual(liestable::convolve_lie_direct(fs[a], fs[b]).distance(a == b ? fs[a] : zero), kResidualTolerance,
                       "direct f_" + std::to_string(a) + " * f_" + std::to_string(b));
        }
      }
    }
    const int dim = liestable::span_rank(fs);
    r.params["dimension"] = dim;
    rec.require(dim == k, "span rank " + std::to_string(dim) + " differs from chart size " + std::to_string(k));
    rec.require(k == ipow(q, n - 1), "chart size " + std::to_string(k) + " differs from q^(n-1)");
  });
}

Report verify_vanishing_lie(const std::string& algebra, std::int64_t q, const Options& o) {
  const int n = rank_of(algebra);
  require_field(q);
  return guarded("vanishing-lie", {{"algebra", algebra}, {"q", q}}, q, o.seed, [&](Report& r, Recorder& rec) {
    const auto g = FinLieAlgebra::sl(n, q);
    std::int64_t sites = 0;
    for (const auto& comp : levi_compositions(n)) {
      const FinLieAlgebra l(n, q, comp);
      const LieParabolic P(g, l);
      for (int c = 0; c < g.chart_size(); ++c) {
        const auto rep = liestable::vanishing_check_lie(liestable::chart_indicator_function(g, c), P);
        sites += rep.sites_checked;
        rec.residual(rep.max_abs, kResidualTolerance,
                     "chart point " + g.chart_point_to_string(c) + " at " + l.name() + ", element " + std::to_string(rep.witness));
      }
    }
    // The regular nilpotent orbit indicator is not stable and must not vanish.
    grpfin::Matrix e(static_cast<std::size_t>(n * n), 0);
    for (int i = 0; i + 1 < n; ++i) e[i * n + i + 1] = 1;
    const FinLieAlgebra t(n, q, std::vector<int>(n, 1));
    const LieParabolic B(g, t);
    const auto rep = liestable::vanishing_check_lie(LieClassFunction::orbit_indicator(g, g.orbit_of(g.index_of(e))), B);
    r.params["sites_checked"] = sites;
    r.params["counterexample_witness"] = rep.witness;
    r.params["counterexample_value"] = rep.max_abs;
    rec.require(rep.max_abs > 1e-6 && rep.witness >= 0, "no nonzero witness for the regular nilpotent indicator");
  });
}

Report verify_res_diagram_lie(const std::string& algebra, std::int64_t q, const Options& o) {
  const int n = rank_of(algebra);
  require_field(q);
  return guarded("res-diagram", {{"side", "lie"}, {"algebra", algebra}, {"q", q}}, q, o.seed, [&](Report&, Recorder& rec) {
    const auto g = FinLieAlgebra::sl(n, q);
    std::mt19937_64 rng(o.seed);
    std::uniform_real_distribution<double> d(-1, 1);
    std::vector<std::vector<Complex>> zs;
    for (int c = 0; c < g.chart_size(); ++c) {
      std::vector<Complex> z(g.chart_size(), Complex(0));
      z[c] = 1;
      zs.push_back(std::move(z));
    }
    std::vector<Complex> zr(g.chart_size());
    for (auto& v : zr) v = Complex(d(rng), d(rng));
    zs.push_back(std::move(zr));
    for (const auto& comp : levi_compositions(n)) {
      const FinLieAlgebra l(n, q, comp);
      const LieParabolic P(g, l);
      for (const auto& z : zs) {
        std::vector<Complex> pulled(l.chart_size());
        for (int c = 0; c < l.chart_size(); ++c) pulled[c] = z[P.chart_map()[c]];
        const auto lhs = liestable::res_lie(liestable::stable_from_param(g, z), P);
        rec.residual(lhs.distance(liestable::stable_from_param(l, pulled)), kResidualTolerance, "chart diagram at " + l.name());
      }
    }
    if (n == 3) {
      const FinLieAlgebra t(3, q, {1, 1, 1});
      const LieParabolic gt(g, t);
      const auto f = random_invariant(g, rng);
      const auto direct = liestable::res_lie(f, gt);
      for (const auto& comp : std::vector<std::vector<int>>{{2, 1}, {1, 2}}) {
        const FinLieAlgebra l(3, q, comp);
        const LieParabolic gl(g, l), lt(l, t);
        rec.residual(liestable::res_lie(liestable::res_lie(f, gl), lt).distance(direct), kResidualTolerance,
                     "transitivity through " + l.name());
      }
    }
  });
}

// ---------------------------------------------------------------------------
// Group side

Report verify_res_diagram_group(const std::string& group, std::int64_t q, const Options& o) {
  const int n = rank_of(group);
  require_field(q);
  return guarded("res-diagram", {{"side", "group"}, {"group", group}, {"q", q}}, q, o.seed, [&](Report&, Recorder& rec) {
    if (n == 2) {
      rec.residual(series_for(q, o.seed).res_diagram_residual(), kResidualTolerance, "chart diagram at the Borel");
      return;
    }
    using grpfin::GroupTable;
    using grpfin::Parabolic;
    const auto G = GroupTable::special_linear({3, q, 1});
    auto diag = [&](std::vector<int> comp) {
      return GroupTable::subgroup(G, [=](const grpfin::Matrix& m) { return grpfin::is_block_diagonal(m, 3, comp); }, "L");
    };
    const auto T = diag({1, 1, 1});
    const Parabolic B(G, T, {1, 1, 1});
    std::mt19937_64 rng(o.seed);
    std::uniform_real_distribution<double> d(-1, 1);
    std::vector<Complex> vals(G.num_classes());
    for (auto& v : vals) v = Complex(d(rng), d(rng));
    const grpfin::ClassFunction f(G, vals);
    const auto direct = grpfin::parabolic_res_group(f, B);
    for (const auto& comp : std::vector<std::vector<int>>{{2, 1}, {1, 2}}) {
      const auto L = diag(comp);
      const Parabolic P(G, L, comp), BL(L, T, {1, 1, 1});
      rec.residual(grpfin::parabolic_res_group(grpfin::parabolic_res_group(f, P), BL).distance(direct),
                   kResidualTolerance, "transitivity through composition " + std::to_string(comp[0]) + "," + std::to_string(comp[1]));
    }
  });
}

Report verify_series(std::int64_t q, const Options& o) {
  require_field(q);
  return guarded("series", {{"q", q}}, q, o.seed, [&](Report& r, Recorder& rec) {
    const auto& s = series_for(q, o.seed);
    rec.require(s.chart().size() == q, "dual chart size " + std::to_string(s.chart().size()));
    std::vector<int> sizes;
    for (const auto& b : s.partition().blocks) sizes.push_back(static_cast<int>(b.size()));
    r.params["block_sizes"] = sizes;
    std::multiset<int> got(sizes.begin(), sizes.end());
    // Principal series block {1, St}, the split point of order two with its four
    // constituents, the nonsplit point of order two with one, and one per
    // remaining regular point.
    std::multiset<int> expected{2, 4, 1};
    for (std::int64_t i = 3; i < q; i += 2) expected.insert(1);
    for (std::int64_t i = 3; i < q; i += 2) expected.insert(1);
    rec.require(got == expected, "block size multiset differs from the expected one");
    for (int t = 0; t < s.chart().size(); ++t) {
      const auto f = s.f_theta(t);
      for (std::size_t j = 0; j < s.characters().size(); ++j) {
        const Complex gam = grpfin::gamma_scalar(f, s.characters()[j]);
        const double want = s.L_map(static_cast<int>(j)) == t ? 1.0 : 0.0;
        rec.residual(std::abs(gam - want), 1e-6, "gamma of f_theta(" + std::to_string(t) + ") at irreducible " + std::to_string(j));
      }
    }
  });
}

Report verify_vanishing_group(std::int64_t q, const Options& o) {
  require_field(q);
  return guarded("vanishing-group", {{"q", q}}, q, o.seed, [&](Report& r, Recorder& rec) {
    const auto& s = series_for(q, o.seed);
    std::int64_t sites = 0;
    for (int t = 0; t < s.chart().size(); ++t) {
      for (const auto& f : {s.f_theta(t), s.f_s(t)}) {
        const auto rep = dlstable::vanishing_check_group(f, s.borel());
        sites += rep.sites_checked;
        rec.residual(rep.max_abs, kResidualTolerance, "chart point " + std::to_string(t) + " at element " + std::to_string(rep.witness));
      }
    }
    double best = 0;
    for (const auto& c : s.characters()) best = std::max(best, dlstable::vanishing_check_group(c.values, s.borel()).max_abs);
    r.params["sites_checked"] = sites;
    r.params["counterexample_value"] = best;
    rec.require(best > 0.5, "no irreducible character with a nonzero unipotent sum");
  });
}

Report verify_dl_characters(std::int64_t q, const Options& o) {
  require_field(q);
  return guarded("dl-characters", {{"q", q}}, q, o.seed, [&](Report& r, Recorder& rec) {
    const auto& s = series_for(q, o.seed);
    const auto& dl = s.dl_characters();
    int nonsplit = 0;
    for (const auto& a : dl) {
      const Complex deg = a.values.at_element(s.group().identity());
      if (a.torus == dlstable::TorusType::nonsplit) {
        ++nonsplit;
        rec.residual(std::abs(std::abs(deg) - static_cast<double>(q - 1)), kExactTolerance,
                     "degree of nonsplit R(" + std::to_string(a.theta) + ")");
      }
      for (const auto& b : dl) {
        const Complex ip = grpfin::inner_product(a.values, b.values);
        int count = 0;
        if (a.torus == b.torus) {
          const std::int64_t ord = a.torus == dlstable::TorusType::split ? q - 1 : q + 1;
          count = (stabkit::mod(a.theta - b.theta, ord) == 0) + (stabkit::mod(a.theta + b.theta, ord) == 0);
        }
        rec.residual(std::abs(ip - Complex(count)), kExactTolerance,
                     "inner product of " + dlstable::to_string(a.torus) + " " + std::to_string(a.theta) + " and " +
                         dlstable::to_string(b.torus) + " " + std::to_string(b.theta));
      }
    }
    r.params["nonsplit_characters"] = nonsplit;
    rec.require(nonsplit == q + 1, "expected q + 1 nonsplit characters");
  });
}

// ---------------------------------------------------------------------------
// Root combinatorics

Report verify_root_claims(const std::string& label, const Options& o) {
  const auto& d = rootsys::FiniteRootDatum::from_label(label);
  return guarded("root-claims", {{"type", label}, {"n_max", o.n_max}}, 3, o.seed, [&](Report& r, Recorder& rec) {
    const int bound = 12;
    const rootsys::WeylEnumeration en(d, bound);
    const auto pars = rootsys::standard_parahorics(d);
    for (const auto& Q : pars) {
      const auto s0 = rootsys::s_set(Q, 0, bound, en);
      rec.require(s0.elements.size() == 1 && s0.elements.front().is_identity(), "S(P^+) is not trivial at " + Q.to_string());
      for (int n = 0; n <= o.n_max; ++n) {
        const auto s = rootsys::s_set(Q, n, bound, en);
        rec.require(s.saturated, "no saturation certificate at " + Q.to_string() + " n=" + std::to_string(n) + ": " + s.diagnostic);
      }
    }
    const rootsys::SimpleSet full = (1u << (d.rank + 1)) - 1;
    for (int len = 0; len <= 8; ++len) {
      for (const auto& w : en.shell(len)) {
        rec.require((rootsys::jw(w) == full) == w.is_identity(), "J_w = full set fails at " + w.to_string());
      }
    }
    std::int64_t valid = 0;
    for (int len = 0; len <= 6; ++len) {
      for (const auto& w : en.shell(len)) {
        for (int a = 0; a <= d.rank; ++a) {
          for (rootsys::SimpleSet J = 0; J < full; ++J) {
            for (const auto& Q : pars) {
              for (int n = 0; n <= o.n_max; ++n) {
                if (!rootsys::decomposition_precondition_failure(w, a, J, Q, n).empty()) continue;
                for (int rr = 0; rr <= 1; ++rr) {
                  ++valid;
                  const auto res = rootsys::verify_decomposition_roots(w, a, J, Q, n, rr);
                  rec.require(res.holds, "decomposition fails at " + w.to_string() + " alpha_" + std::to_string(a) +
                                             " J=" + rootsys::set_to_string(J, d.rank) + " Q=" + Q.to_string() +
                                             " n=" + std::to_string(n) + " r=" + std::to_string(rr));
                }
              }
            }
          }
        }
      }
    }
    r.params["decomposition_tuples"] = valid;
    rec.require(valid > 0, "no precondition-valid tuples");
  });
}

// ---------------------------------------------------------------------------
// SL2(Q_p)

namespace {

using hecke::CosetFunction;
using hecke::Descriptor;
using hecke::HeckeModel;
using hecke::Parahoric;

// Cosets carrying a nonzero value.
std::set<hecke::CosetKey> support(const CosetFunction& f) {
  std::set<hecke::CosetKey> s;
  for (const auto& [k, e] : f.entries()) {
    if (std::abs(e.value) > kExactTolerance) s.insert(k);
  }
  return s;
}

// Equal supports and values within tolerance.
void compare_exact(Recorder& rec, const CosetFunction& a, const CosetFunction& b, const std::string& what) {
  rec.require(support(a) == support(b), what + ": coset sets differ");
  rec.residual(a.distance(b), kExactTolerance, what);
}

std::vector<hecke::PAdicMatrix> parahoric_generators(Parahoric P, int depth, std::int64_t p) {
  const auto c = hecke::parahoric_conjugator(P, p);
  std::vector<hecke::PAdicMatrix> out;
  for (const auto& g : hecke::descriptor_generators(hecke::parahoric_r(hecke::base_of(P), depth), p)) {
    out.push_back(c * g * c.inverse());
  }
  return out;
}

}  // namespace

Report verify_hecke(std::int64_t p, int r, const Options& o) {
  require_field(p);
  if (r < 0 || r > 1) throw ArgumentError("depth r must be 0 or 1");
  const int N = o.window > 0 ? o.window : r + 3;
  Json params = {{"p", p}, {"r", r}, {"window", N}, {"length_max", o.length_max}};
  return guarded("hecke", params, p, o.seed, [&](Report& rep, Recorder& rec) {
    using namespace hecke;
    const HeckeModel m(p, r, o.seed);
    const WindowQuotient w(p, N);
    auto fits = [&](const Descriptor& D) {
      if (!D.inside_integral_matrices()) return false;
      if (D.max_threshold() > N - 1) {
        throw CapacityError("window level " + std::to_string(N) + " cannot resolve " + D.to_string());
      }
      return true;
    };

    // Measures from the window agree with the formula.
    for (auto P : kParahorics) {
      for (const auto& D : {parahoric_r(P, r), parahoric_plus(P, r)}) {
        if (!fits(D)) continue;
        rec.require(measure(D, w) == haar_measure(D, p), "window measure of " + D.to_string());
      }
    }

    // Simple-root absorption of delta products, exact and against the window.
    struct Pair {
      int alpha;
      Descriptor B;
    };
    for (const auto& c : {Pair{1, second_hyperspecial_plus(r)}, Pair{0, hyperspecial_plus(r)}}) {
      const Descriptor A1 = parahoric_plus(parahoric_of(1u << c.alpha), r), A0 = parahoric_plus(Parahoric::I, r);
      const auto small = delta_product(A1, c.B, p);
      const auto large = delta_product(A0, c.B, p);
      const std::string tag = "delta products through alpha_" + std::to_string(c.alpha);
      compare_exact(rec, small, large, tag);
      if (fits(c.B)) {
        compare_exact(rec, convolve_window(delta(A1, p), delta(c.B, p), w), small, tag + " (window)");
        compare_exact(rec, convolve_window(delta(A0, p), delta(c.B, p), w), large, tag + " (window)");
      }
    }

    // The same through conjugated levels on every precondition-valid tuple.
    const auto& en = m.enumeration(o.length_max);
    std::int64_t tuples = 0;
    for (int len = 0; len <= o.length_max; ++len) {
      for (const auto& wv : en.shell(len)) {
        const auto wdot = m.weyl_lift(en.reduced_word(wv));
        for (int alpha : {0, 1}) {
          for (auto Q : kParahorics) {
            for (int n = 0; n <= 1; ++n) {
              if (!rootsys::decomposition_precondition_failure(wv, alpha, 0, m.label(Q), n).empty()) continue;
              const Descriptor B = parahoric_plus(Q, n + r).conjugated_by(wdot);
              compare_exact(rec, delta_product(parahoric_plus(parahoric_of(1u << alpha), r), B, p),
                            delta_product(parahoric_plus(Parahoric::I, r), B, p),
                            "conjugated level at " + wv.to_string() + " alpha_" + std::to_string(alpha) + " Q=" +
                                json_name(Q) + " n=" + std::to_string(n));
              ++tuples;
            }
          }
        }
      }
    }
    rep.params["conjugated_tuples"] = tuples;

    // Restriction squares for every stable basis function.
    for (int t = 0; t < m.chart_size(); ++t) {
      const auto F = m.stable_function(Parahoric::K, t);
      for (auto Q : {Parahoric::K, Parahoric::Kp}) {
        compare_exact(rec, m.convolve_component(Q, F, iwahori_plus(r)),
                      m.iota(Parahoric::I, m.restrict(F, Q == Parahoric::Kp)),
                      "restriction square at chart point " + std::to_string(t) + " via " + json_name(Q));
      }
    }

    // Images of the stable basis are compatible, invariant families.
    const auto basis = m.stable_basis();
    for (const auto& h : basis) {
      const auto hI = m.component(h, Parahoric::I);
      for (auto Q : {Parahoric::K, Parahoric::Kp}) {
        const auto hQ = m.component(h, Q);
        compare_exact(rec, hQ.coarsen(parahoric_plus(Parahoric::I, r)), hI, "compatibility of " + h.label + " at " + json_name(Q));
        rec.residual(hQ.conjugation_defect(parahoric_generators(Q, 0, p)), kExactTolerance, "invariance of " + h.label);
        rec.residual(hQ.left_defect(parahoric_generators(Q, r + 1, p)), kExactTolerance, "bi-invariance of " + h.label);
      }
      rec.residual(hI.conjugation_defect(parahoric_generators(Parahoric::I, 0, p)), kExactTolerance, "invariance of " + h.label);
    }

    // Averaging evaluates to the components.
    const auto ev = m.verify_evaluation(basis, o.length_max);
    rec.residual(ev.residual, kExactTolerance, "averaging evaluated at P_r^+");
    rep.params["evaluation_cosets"] = ev.cosets_compared;

    // Stabilization at the first Iwahori filtration.
    const auto st = m.verify_stabilization(basis, 1, o.length_max);
    rep.params["stabilization_index"] = st.stabilization_index;
    rep.params["containing_index"] = st.containing_index;
    rec.residual(st.residual, kExactTolerance, "stabilized averages");
    if (st.status == CheckStatus::inconclusive) {
      rec.inconclusive("length bound too small to reach Y(I_1^+)");
    } else if (st.status == CheckStatus::fail) {
      rec.fail("stabilization index " + std::to_string(st.stabilization_index) + " beyond Y(I_1^+)");
    }

    if (r == 0) {
      // Truncating the depth-one section returns the original family.
      const auto lifted = m.section(basis, o.length_max);
      for (std::size_t i = 0; i < basis.size(); ++i) {
        for (auto P : kParahorics) {
          const auto& hP1 = lifted[i][static_cast<int>(P)];
          compare_exact(rec, hP1.coarsen(parahoric_plus(P, 0)), m.component(basis[i], P),
                        "truncated section of " + basis[i].label + " at " + json_name(P));
          rec.residual(hP1.conjugation_defect(parahoric_generators(P, 0, p)), kExactTolerance, "invariance of the section");
        }
        for (auto Q : {Parahoric::K, Parahoric::Kp}) {
          compare_exact(rec, lifted[i][static_cast<int>(Q)].coarsen(iwahori_plus(1)), lifted[i][0],
                        "compatibility of the section of " + basis[i].label);
        }
      }
    } else {
      // The normalizing constant does not depend on the parahoric.
      const auto cI = m.c_mu_squared(Parahoric::I), cK = m.c_mu_squared(Parahoric::K), cKp = m.c_mu_squared(Parahoric::Kp);
      rec.require(cI == cK && cK == cKp, "normalizing constants differ between parahorics");
      rep.params["c_mu_squared"] = std::to_string(cI.numerator()) + "/" + std::to_string(cI.denominator());
    }
  });
}

Report verify_ktype_params(std::int64_t p, int r, const Options& o) {
  require_field(p);
  if (r < 0 || r > 1) throw ArgumentError("depth r must be 0 or 1");
  return guarded("ktype-params", {{"p", p}, {"r", r}}, p, o.seed, [&](Report& rep, Recorder& rec) {
    using namespace hecke;
    const HeckeModel m(p, r, o.seed);
    const int k = m.chart_size();
    std::int64_t count = 0;
    for (auto P : {Parahoric::K, Parahoric::I}) {
      for (const auto& kt : m.ktypes(P)) {
        ++count;
        const int theta = m.theta_of_ktype(kt);
        const std::string tag = json_name(P) + " chi " + std::to_string(kt.chi);
        rec.residual(std::abs(m.xi_scalar(std::vector<Complex>(k, Complex(1)), kt) - Complex(1)), 1e-6, tag + " on the unit");
        for (int t = 0; t < k; ++t) {
          std::vector<Complex> z(k, Complex(0));
          z[t] = 1;
          rec.residual(std::abs(m.xi_scalar(z, kt) - Complex(t == theta ? 1 : 0)), 1e-6,
                       tag + " on chart point " + std::to_string(t));
        }
      }
    }
    rep.params["ktypes"] = count;
    if (r > 0) {
      const auto g = FinLieAlgebra::sl(2, p);
      const int zero = g.chart_index_of(0);
      int nondegenerate = 0;
      for (const auto& kt : m.ktypes(Parahoric::K)) {
        const auto X = g.element(kt.chi);
        const bool nilpotent = stabkit::mod(X[0] * X[3] - X[1] * X[2], p) == 0;
        rec.require(kt.nondegenerate == !nilpotent, "nondegeneracy flag of chi " + std::to_string(kt.chi));
        rec.require((m.theta_of_ktype(kt) != zero) == kt.nondegenerate,
                    "parameter of chi " + std::to_string(kt.chi) + " against nondegeneracy");
        nondegenerate += kt.nondegenerate;
      }
      rep.params["nondegenerate"] = nondegenerate;
      const MinimalKType split{Parahoric::K, r, g.index_of({1, 0, 0, p - 1}), true};
      rec.require(g.chart_point(m.theta_of_ktype(split)) == liestable::ChartPoint{0, p - 1},
                  "parameter of diag(1, -1) is not det = -1");
    } else {
      int cuspidal = 0;
      for (const auto& kt : m.ktypes(Parahoric::K)) cuspidal += kt.nondegenerate;
      rep.params["cuspidal"] = cuspidal;
      rec.require(cuspidal > 0, "no cuspidal representation found");
    }
    for (auto P : kParahorics) {
      for (std::int64_t s : {1, 2}) rec.require(verify_perp(P, p, s), "annihilator of Lie(" + json_name(P) + ")");
    }
  });
}

// ---------------------------------------------------------------------------
// Exports

Json compute_dl_param(std::int64_t q, std::uint64_t seed) {
  require_field(q);
  const auto& s = series_for(q, seed);
  Json j = Json::object();
  j["q"] = q;
  auto pts = Json::array();
  for (int t = 0; t < s.chart().size(); ++t) {
    const auto& pt = s.chart()[t];
    pts.push_back({{"index", t}, {"label", pt.label()}, {"coordinate", pt.coordinate}, {"torus", dlstable::to_string(pt.torus)},
                   {"exponent", pt.exponent}, {"order", pt.order}, {"irreducibles", s.partition().blocks[t]}});
  }
  j["chart"] = std::move(pts);
  auto irr = Json::array();
  for (std::size_t i = 0; i < s.characters().size(); ++i) {
    irr.push_back({{"index", i}, {"degree", s.characters()[i].degree}, {"chart_point", s.L_map(static_cast<int>(i))}});
  }
  j["irreducibles"] = std::move(irr);
  return j;
}

std::string compute_dl_param_csv(std::int64_t q, std::uint64_t seed) {
  require_field(q);
  std::ostringstream os;
  dlstable::write_series_csv(os, series_for(q, seed));
  return os.str();
}

Json compute_chart(const std::string& algebra, std::int64_t q) {
  const int n = rank_of(algebra);
  require_field(q);
  const auto g = FinLieAlgebra::sl(n, q);
  Json j = Json::object();
  j["algebra"] = algebra;
  j["q"] = q;
  auto pts = Json::array();
  for (int c = 0; c < g.chart_size(); ++c) {
    pts.push_back({{"index", c}, {"point", g.chart_point_to_string(c)}, {"fiber_size", g.fiber_size(c)}});
  }
  j["points"] = std::move(pts);
  return j;
}

std::string compute_chart_csv(const std::string& algebra, std::int64_t q) {
  const auto j = compute_chart(algebra, q);
  std::ostringstream os;
  os << "index,point,fiber_size\n";
  for (const auto& p : j["points"]) {
    os << p["index"].get<int>() << ",\"" << p["point"].get<std::string>() << "\"," << p["fiber_size"].get<std::int64_t>() << '\n';
  }
  return os.str();
}

namespace {

const grpfin::GroupTable& group_for(const std::string& group, std::int64_t q) {
  static std::map<std::pair<int, std::int64_t>, std::unique_ptr<grpfin::GroupTable>> cache;
  const int n = rank_of(group);
  require_field(q);
  auto& slot = cache[{n, q}];
  if (!slot) slot = std::make_unique<grpfin::GroupTable>(grpfin::GroupTable::special_linear({n, q, 1}));
  return *slot;
}

}  // namespace

Json compute_char_table(const std::string& group, std::int64_t q, std::uint64_t seed) {
  const auto& g = group_for(group, q);
  const auto chars = grpfin::character_table(g, seed);
  Json j = Json::object();
  j["group"] = group;
  j["q"] = q;
  auto classes = Json::array();
  for (int c = 0; c < g.num_classes(); ++c) {
    classes.push_back({{"rep", grpfin::matrix_to_string(g.element(g.class_rep(c)), g.n())}, {"size", g.class_size(c)}});
  }
  j["classes"] = std::move(classes);
  auto cs = Json::array();
  for (const auto& ch : chars) {
    auto vals = Json::array();
    for (auto v : ch.values.values()) {
      vals.push_back({std::round(v.real() * 1e10) / 1e10, std::round(v.imag() * 1e10) / 1e10});
    }
    cs.push_back({{"degree", ch.degree}, {"values", std::move(vals)}});
  }
  j["characters"] = std::move(cs);
  return j;
}

std::string compute_char_table_csv(const std::string& group, std::int64_t q, std::uint64_t seed) {
  const auto& g = group_for(group, q);
  std::ostringstream os;
  grpfin::write_character_table_csv(os, g, grpfin::character_table(g, seed));
  return os.str();
}

// ---------------------------------------------------------------------------
// Suite

const std::vector<SuiteEntry>& default_suite() {
  static const std::vector<SuiteEntry> suite = [] {
    std::vector<SuiteEntry> s;
    auto add = [&](int c, std::string name, std::function<Report(const Options&)> f) {
      s.push_back({c, std::move(name), std::move(f)});
    };
    const std::vector<std::pair<std::string, std::int64_t>> lie1{{"sl2", 3}, {"sl2", 5}, {"sl2", 7}, {"sl3", 3}};
    for (const auto& [a, q] : lie1) {
      add(1, "ft " + a + " q=" + std::to_string(q), [a, q](const Options& o) { return verify_ft(a, q, o); });
    }
    const std::vector<std::pair<std::string, std::int64_t>> lie2{{"sl2", 3}, {"sl3", 3}, {"sl2", 5}, {"sl2", 7}, {"sl3", 5}};
    for (const auto& [a, q] : lie2) {
      add(2, "stable-algebra " + a + " q=" + std::to_string(q), [a, q](const Options& o) { return verify_stable_algebra(a, q, o); });
    }
    const std::vector<std::pair<std::string, std::int64_t>> lie3{{"sl2", 3}, {"sl2", 5}, {"sl3", 3}};
    for (const auto& [a, q] : lie3) {
      add(3, "vanishing-lie " + a + " q=" + std::to_string(q), [a, q](const Options& o) { return verify_vanishing_lie(a, q, o); });
    }
    for (const auto& [a, q] : lie2) {
      add(4, "res-diagram lie " + a + " q=" + std::to_string(q), [a, q](const Options& o) { return verify_res_diagram_lie(a, q, o); });
    }
    for (std::int64_t q : {3, 5, 7}) {
      add(4, "res-diagram group sl2 q=" + std::to_string(q), [q](const Options& o) { return verify_res_diagram_group("sl2", q, o); });
    }
    add(4, "res-diagram group sl3 q=3", [](const Options& o) { return verify_res_diagram_group("sl3", 3, o); });
    for (std::int64_t q : {3, 5}) {
      add(5, "series q=" + std::to_string(q), [q](const Options& o) { return verify_series(q, o); });
      add(5, "vanishing-group q=" + std::to_string(q), [q](const Options& o) { return verify_vanishing_group(q, o); });
    }
    for (std::int64_t q : {3, 5}) {
      add(6, "dl-characters q=" + std::to_string(q), [q](const Options& o) { return verify_dl_characters(q, o); });
    }
    for (const char* t : {"A1", "A2"}) {
      add(7, std::string("root-claims ") + t, [t](const Options& o) { return verify_root_claims(t, o); });
    }
    for (int r : {0, 1}) {
      add(8, "hecke p=3 r=" + std::to_string(r), [r](const Options& o) { return verify_hecke(3, r, o); });
    }
    add(9, "ktype-params p=3 r=1", [](const Options& o) { return verify_ktype_params(3, 1, o); });
    add(9, "ktype-params p=3 r=0", [](const Options& o) { return verify_ktype_params(3, 0, o); });
    return s;
  }();
  return suite;
}

std::vector<SuiteResult> run_suite(const Options& o, const std::function<void(const SuiteResult&)>& on_done) {
  std::vector<SuiteResult> out;
  for (const auto& e : default_suite()) {
    out.push_back({e.criterion, e.run(o)});
    if (on_done) on_done(out.back());
  }
  return out;
}

Json environment_json(const Options& o) {
  Json e = Json::object();
  e["psi"] = "exp(2 pi i t / p)";
  e["generator"] = "smallest primitive root mod p";
  e["mu_normalization"] = "mu(I^+) = 1";
  e["seed"] = o.seed;
  e["length_max"] = o.length_max;
  e["n_max"] = o.n_max;
  return e;
}

Json document(const std::vector<Report>& rs, const Options& o, bool timing) {
  Json j = Json::object();
  j["version"] = kVersion;
  j["environment"] = environment_json(o);
  auto arr = Json::array();
  for (const auto& r : rs) arr.push_back(to_json(r, timing));
  j["checks"] = std::move(arr);
  return j;
}

}  // namespace stabkit::checks
