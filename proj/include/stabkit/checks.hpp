#pragma once
// Verification suites shared by the command line tool and the acceptance
// runner. Each check returns a report with a status, the largest deviation
// observed and the offending inputs.

#include <nlohmann/json.hpp>

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace stabkit::checks {

using Json = nlohmann::ordered_json;

enum class Status { pass, fail, inconclusive };
std::string to_string(Status s);

struct Report {
  std::string id;
  Json params = Json::object();
  Status status = Status::pass;
  double residual = 0;
  std::vector<std::string> witnesses;
  double elapsed_ms = 0;
  Json environment = Json::object();
};

// elapsed_ms is written as 0 unless timing is requested, so that reports
// are byte-identical across runs.
Json to_json(const Report& r, bool timing);
// One header line and one row per report.
std::string to_csv(const std::vector<Report>& rs, bool timing);

struct Options {
  std::uint64_t seed = 1;
  int length_max = 4;  // Weyl length bound for averaging sums
  int n_max = 2;       // filtration depth bound for root claims
  int window = 0;      // window level; 0 selects r + 3
};

// Lie algebra side; algebra is "sl2" or "sl3".
Report verify_ft(const std::string& algebra, std::int64_t q, const Options& o);
Report verify_stable_algebra(const std::string& algebra, std::int64_t q, const Options& o);
Report verify_vanishing_lie(const std::string& algebra, std::int64_t q, const Options& o);
Report verify_res_diagram_lie(const std::string& algebra, std::int64_t q, const Options& o);

// Group side; group is "sl2" (chart diagram) or "sl3" (transitivity, q = 3).
Report verify_res_diagram_group(const std::string& group, std::int64_t q, const Options& o);
Report verify_series(std::int64_t q, const Options& o);
Report verify_vanishing_group(std::int64_t q, const Options& o);
Report verify_dl_characters(std::int64_t q, const Options& o);

// Affine root combinatorics for "A1" or "A2".
Report verify_root_claims(const std::string& label, const Options& o);

// SL2(Q_p) window model.
Report verify_hecke(std::int64_t p, int r, const Options& o);
Report verify_ktype_params(std::int64_t p, int r, const Options& o);

// Data exports.
Json compute_dl_param(std::int64_t q, std::uint64_t seed);
std::string compute_dl_param_csv(std::int64_t q, std::uint64_t seed);
Json compute_chart(const std::string& algebra, std::int64_t q);
std::string compute_chart_csv(const std::string& algebra, std::int64_t q);
Json compute_char_table(const std::string& group, std::int64_t q, std::uint64_t seed);
std::string compute_char_table_csv(const std::string& group, std::int64_t q, std::uint64_t seed);

// The default suite: every configured instance of criteria 1 to 9.
struct SuiteEntry {
  int criterion;
  std::string name;
  std::function<Report(const Options&)> run;
};
const std::vector<SuiteEntry>& default_suite();

struct SuiteResult {
  int criterion;
  Report report;
};
std::vector<SuiteResult> run_suite(const Options& o, const std::function<void(const SuiteResult&)>& on_done = {});

Json environment_json(const Options& o);
// {version, environment, checks}.
Json document(const std::vector<Report>& rs, const Options& o, bool timing);

inline constexpr const char* kVersion = "1.0.0";

}  // namespace stabkit::checks
