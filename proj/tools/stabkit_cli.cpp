// Command line front end: verification suites, data exports and the full report.

#include "stabkit/algcore.hpp"
#include "stabkit/checks.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace {

namespace ck = stabkit::checks;

enum ExitCode { kPass = 0, kFail = 1, kUsage = 2, kCapacity = 3 };

struct Config {
  std::int64_t q = 3;
  std::string algebra = "sl2";
  std::string group = "sl2";
  std::string type = "A1";
  int r = 0;
  std::string out;
  std::string format = "json";
  bool timing = false;
  ck::Options opts;
};

void emit(const std::string& text, const std::string& out) {
  if (out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(out, std::ios::binary);
  if (!f) throw stabkit::ArgumentError("cannot open output file '" + out + "'");
  f << text;
}

int emit_reports(const std::vector<ck::Report>& rs, const Config& c) {
  if (c.format == "csv") {
    emit(ck::to_csv(rs, c.timing), c.out);
  } else {
    emit(ck::document(rs, c.opts, c.timing).dump(2) + "\n", c.out);
  }
  for (const auto& r : rs) {
    if (r.status != ck::Status::pass) return kFail;
  }
  return kPass;
}

int emit_export(const ck::Json& j, const std::string& csv, const Config& c) {
  emit(c.format == "csv" ? csv : j.dump(2) + "\n", c.out);
  return kPass;
}

}  // namespace

int main(int argc, char** argv) {
  Config c;
  CLI::App app{"Stable functions and Bernstein center verification for SL2 and SL3"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(ck::kVersion));

  auto common = [&](CLI::App* s) {
    s->add_option("--seed", c.opts.seed, "Random seed")->capture_default_str();
    s->add_option("--out", c.out, "Output file (stdout if omitted)");
    s->add_option("--format", c.format, "Output format")->check(CLI::IsMember({"json", "csv"}))->capture_default_str();
    s->add_flag("--timing", c.timing, "Record elapsed_ms (reports are then not byte-stable)");
  };
  auto field = [&](CLI::App* s) {
    s->add_option("--q,--p", c.q, "Field size (odd prime)")->capture_default_str();
  };
  auto algebra = [&](CLI::App* s) {
    s->add_option("--algebra", c.algebra)->check(CLI::IsMember({"sl2", "sl3"}))->capture_default_str();
  };
  auto group = [&](CLI::App* s) {
    s->add_option("--group", c.group)->check(CLI::IsMember({"sl2", "sl3"}))->capture_default_str();
  };
  auto bounds = [&](CLI::App* s) {
    s->add_option("--r", c.r, "Depth")->check(CLI::Range(0, 1))->capture_default_str();
    s->add_option("--length-max", c.opts.length_max, "Weyl length bound")->check(CLI::Range(0, 12))->capture_default_str();
    s->add_option("--n-max", c.opts.n_max, "Filtration depth bound")->check(CLI::Range(0, 3))->capture_default_str();
    s->add_option("--window", c.opts.window, "Window level (0 selects r + 3)")->check(CLI::Range(0, 6))->capture_default_str();
  };

  std::function<int()> action;
  std::string check_name;

  auto* verify = app.add_subcommand("verify", "Run one verification suite");
  verify->require_subcommand(1);
  auto add_verify = [&](const std::string& name, const std::string& help, std::vector<std::function<void(CLI::App*)>> opts,
                        std::function<std::vector<ck::Report>()> run) {
    auto* s = verify->add_subcommand(name, help);
    common(s);
    for (auto& o : opts) o(s);
    s->callback([&, name, run] {
      check_name = name;
      action = [&, run] { return emit_reports(run(), c); };
    });
  };
  add_verify("ft", "Fourier transform properties", {field, algebra},
             [&] { return std::vector{ck::verify_ft(c.algebra, c.q, c.opts)}; });
  add_verify("stable-algebra", "Chart basis idempotents and dimension", {field, algebra},
             [&] { return std::vector{ck::verify_stable_algebra(c.algebra, c.q, c.opts)}; });
  add_verify("vanishing-lie", "Nilradical sums of stable functions", {field, algebra},
             [&] { return std::vector{ck::verify_vanishing_lie(c.algebra, c.q, c.opts)}; });
  add_verify("vanishing-group", "Unipotent radical sums of stable functions", {field},
             [&] { return std::vector{ck::verify_vanishing_group(c.q, c.opts)}; });
  add_verify("res-diagram", "Restriction diagrams (Lie side with --algebra, group side with --group)", {field, algebra, group},
             [&] {
               std::vector<ck::Report> rs;
               rs.push_back(ck::verify_res_diagram_lie(c.algebra, c.q, c.opts));
               if (c.group != "sl3" || c.q == 3) rs.push_back(ck::verify_res_diagram_group(c.group, c.q, c.opts));
               return rs;
             });
  add_verify("root-claims", "Affine root combinatorics",
             {bounds, [&](CLI::App* s) { s->add_option("--type", c.type)->check(CLI::IsMember({"A1", "A2"}))->capture_default_str(); }},
             [&] { return std::vector{ck::verify_root_claims(c.type, c.opts)}; });
  add_verify("series", "Lusztig series partition and gamma scalars", {field},
             [&] { return std::vector{ck::verify_series(c.q, c.opts), ck::verify_dl_characters(c.q, c.opts)}; });
  add_verify("hecke", "Window Hecke algebra suite for SL2(Q_p)", {field, bounds},
             [&] { return std::vector{ck::verify_hecke(c.q, c.r, c.opts)}; });
  add_verify("ktype-params", "Minimal K-type parameters", {field, bounds},
             [&] { return std::vector{ck::verify_ktype_params(c.q, c.r, c.opts)}; });

  auto* compute = app.add_subcommand("compute", "Export computed data");
  compute->require_subcommand(1);
  {
    auto* s = compute->add_subcommand("dl-param", "Dual chart and Lusztig map for SL2(F_q)");
    common(s);
    field(s);
    s->callback([&] {
      check_name = "dl-param";
      action = [&] { return emit_export(ck::compute_dl_param(c.q, c.opts.seed), ck::compute_dl_param_csv(c.q, c.opts.seed), c); };
    });
  }
  {
    auto* s = compute->add_subcommand("chart", "Chevalley chart points and fiber sizes");
    common(s);
    field(s);
    algebra(s);
    s->callback([&] {
      check_name = "chart";
      action = [&] { return emit_export(ck::compute_chart(c.algebra, c.q), ck::compute_chart_csv(c.algebra, c.q), c); };
    });
  }
  {
    auto* s = compute->add_subcommand("char-table", "Character table of SL_n(F_q)");
    common(s);
    field(s);
    group(s);
    s->callback([&] {
      check_name = "char-table";
      action = [&] {
        return emit_export(ck::compute_char_table(c.group, c.q, c.opts.seed),
                           ck::compute_char_table_csv(c.group, c.q, c.opts.seed), c);
      };
    });
  }
  {
    auto* s = app.add_subcommand("report", "Run the default suite and write the full report");
    common(s);
    s->add_option("--length-max", c.opts.length_max)->check(CLI::Range(0, 12))->capture_default_str();
    s->callback([&] {
      check_name = "report";
      action = [&] {
        std::vector<ck::Report> rs;
        for (const auto& e : ck::default_suite()) {
          check_name = e.name;
          rs.push_back(e.run(c.opts));
          std::cerr << "criterion " << e.criterion << ' ' << e.name << ": " << ck::to_string(rs.back().status) << '\n';
        }
        return emit_reports(rs, c);
      };
    });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kPass : kUsage;
  }
  try {
    return action();
  } catch (const stabkit::ArgumentError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const stabkit::CapacityError& e) {
    std::cerr << "capacity exceeded in " << check_name << ": " << e.what() << '\n';
    return kCapacity;
  }
}
