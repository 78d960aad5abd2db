#pragma once

#include <json.hpp>
#include <optional>
#include <string>

#include "barankin/bound.hpp"
#include "barankin/mc.hpp"
#include "barankin/model.hpp"

namespace barankin::cli {

using Json = nlohmann::ordered_json;

// Parsed run configuration. `raw` is the config document as parsed, echoed
// verbatim into reports.
struct RunConfig {
  Json raw;
  std::shared_ptr<const Model> model;
  MomentMethod method = MomentMethod::kClosedForm;
  std::optional<TestPointSet> tau;
  std::optional<Eigen::MatrixXd> a_matrix;
  std::vector<ParameterPoint> probes;
  std::string estimator = "constructed";
  std::optional<SearchConfig> search;
  mc::McConfig mc;
  Tolerance tol;
  double certify_tol = 1e-9;
  double crb_eps = 1e-3;
  std::optional<std::string> input_report;
  std::optional<std::string> out_path;
  std::optional<std::string> trajectory_csv;
};

RunConfig parse_config_text(const std::string& text);
RunConfig parse_config_file(const std::string& path);

// 17 significant digits; round-trips any finite double exactly.
std::string format_double(double v);

Json matrix_json(const Eigen::MatrixXd& m);
Eigen::MatrixXd matrix_from_json(const Json& j);
Json vector_json(const Eigen::VectorXd& v);
Json point_json(const ParameterPoint& p);

// Commands. Each returns the full report document (without the elapsed-time
// stamp, which run_cli adds just before writing).
Json cmd_bound(const RunConfig& cfg);
Json cmd_search(const RunConfig& cfg);
Json cmd_certify(const RunConfig& cfg);
Json cmd_crb(const RunConfig& cfg);
Json cmd_verify(const RunConfig& cfg);

std::string trajectory_csv_text(const SearchReport& report);

// Full command-line entry point; maps errors to the exit-code contract
// (2 config/validation, 3 postulate violation, 4 rank deficiency,
// 5 MC diagnostics). Negative mathematical findings exit 0.
int run_cli(int argc, const char* const* argv);

}  // namespace barankin::cli
