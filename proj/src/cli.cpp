#include "barankin/cli.hpp"

#include <CLI11.hpp>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "barankin/kernels.hpp"
#include "barankin/version.hpp"

namespace barankin::cli {

namespace {

double entry_as_double(const Json& j);

ParameterPoint point_from_json(const Json& j) {
  if (!j.is_array() || j.empty())
    throw ConfigError("parameter point must be a non-empty array");
  Eigen::VectorXd c(j.size());
  for (std::size_t i = 0; i < j.size(); ++i)
    c[static_cast<Eigen::Index>(i)] = entry_as_double(j[i]);
  return ParameterPoint(c);
}

TestPointSet tau_from_json(const Json& j) {
  if (!j.is_array() || j.empty())
    throw ConfigError("tau must be a non-empty array of parameter points");
  TestPointSet tau;
  for (const Json& p : j) tau.points.push_back(point_from_json(p));
  return tau;
}

Eigen::MatrixXd dense_from_json(const Json& j) {
  if (!j.is_array() || j.empty() || !j[0].is_array())
    throw ConfigError("matrix must be a nested row-major array");
  const std::size_t rows = j.size();
  const std::size_t cols = j[0].size();
  Eigen::MatrixXd m(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    if (j[r].size() != cols) throw ConfigError("ragged matrix rows");
    for (std::size_t c = 0; c < cols; ++c)
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          j[r][c].get<double>();
  }
  return m;
}

double entry_as_double(const Json& j) {
  if (j.is_string()) return std::strtod(j.get<std::string>().c_str(), nullptr);
  return j.get<double>();
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

Json matrix_json(const Eigen::MatrixXd& m) {
  Json out;
  out["rows"] = m.rows();
  out["cols"] = m.cols();
  Json data = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c)
      row.push_back(format_double(m(r, c)));
    data.push_back(std::move(row));
  }
  out["data"] = std::move(data);
  return out;
}

Eigen::MatrixXd matrix_from_json(const Json& j) {
  const Eigen::Index rows = j.at("rows").get<Eigen::Index>();
  const Eigen::Index cols = j.at("cols").get<Eigen::Index>();
  Eigen::MatrixXd m(rows, cols);
  const Json& data = j.at("data");
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c)
      m(r, c) = entry_as_double(data.at(r).at(c));
  return m;
}

Json vector_json(const Eigen::VectorXd& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i)
    out.push_back(format_double(v[i]));
  return out;
}

Json point_json(const ParameterPoint& p) { return vector_json(p.coords); }

RunConfig parse_config_text(const std::string& text) {
  Json raw;
  try {
    raw = Json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  RunConfig cfg;
  cfg.raw = raw;
  try {
    const Json& jm = raw.at("model");
    ModelParams params;
    if (jm.contains("params")) {
      for (auto it = jm["params"].begin(); it != jm["params"].end(); ++it) {
        if (it.value().is_array())
          params.vectors[it.key()] = it.value().get<std::vector<double>>();
        else
          params.scalars[it.key()] = it.value().get<double>();
      }
    }
    cfg.model = make_model(jm.at("name").get<std::string>(), params,
                           jm.value("target", std::string("identity")));

    cfg.method = moment_method_from_name(
        raw.value("moment_method", std::string(moment_method_name(
                                       cfg.model->moment_mode()))));

    if (raw.contains("tau")) cfg.tau = tau_from_json(raw["tau"]);
    if (raw.contains("a_matrix")) cfg.a_matrix = dense_from_json(raw["a_matrix"]);
    if (raw.contains("probes"))
      for (const Json& p : raw["probes"]) cfg.probes.push_back(point_from_json(p));
    cfg.estimator = raw.value("estimator", std::string("constructed"));
    if (cfg.estimator != "constructed" && cfg.estimator != "sample_mean")
      throw ConfigError("estimator must be 'constructed' or 'sample_mean'");

    if (raw.contains("mc")) {
      const Json& j = raw["mc"];
      cfg.mc.samples = j.value("samples", cfg.mc.samples);
      cfg.mc.seed = j.value("seed", cfg.mc.seed);
      cfg.mc.batches = j.value("batches", cfg.mc.batches);
      cfg.mc.threads = j.value("threads", cfg.mc.threads);
    }
    if (raw.contains("tolerance")) {
      const Json& j = raw["tolerance"];
      cfg.tol.psd_eps = j.value("psd_eps", cfg.tol.psd_eps);
      cfg.tol.rank_eps = j.value("rank_eps", cfg.tol.rank_eps);
      cfg.certify_tol = j.value("certify", cfg.certify_tol);
    }
    cfg.crb_eps = raw.value("crb_eps", cfg.crb_eps);

    if (raw.contains("search")) {
      const Json& j = raw["search"];
      SearchConfig s;
      if (j.contains("grid_lo")) {
        const auto v = j["grid_lo"].get<std::vector<double>>();
        s.grid_lo = Eigen::Map<const Eigen::VectorXd>(v.data(), v.size());
      }
      if (j.contains("grid_hi")) {
        const auto v = j["grid_hi"].get<std::vector<double>>();
        s.grid_hi = Eigen::Map<const Eigen::VectorXd>(v.data(), v.size());
      }
      s.grid_points = j.value("grid_points", s.grid_points);
      s.budget = j.value("budget", s.budget);
      s.stall_tol = j.value("stall_tol", s.stall_tol);
      s.patience = j.value("patience", s.patience);
      if (j.contains("divergence_threshold") &&
          !j["divergence_threshold"].is_null())
        s.divergence_threshold = j["divergence_threshold"].get<double>();
      s.proposals_per_round = j.value("proposals_per_round", s.proposals_per_round);
      s.proposal_scale = j.value("proposal_scale", s.proposal_scale);
      s.method = cfg.method;
      s.mc_samples = cfg.mc.samples;
      s.mc_batches = cfg.mc.batches;
      s.seed = cfg.mc.seed;
      s.threads = j.value("threads", cfg.mc.threads);
      s.tol = cfg.tol;
      cfg.search = s;
    }
    if (cfg.tau && cfg.search)
      throw ConfigError(
          "exactly one of an explicit tau and search settings may be present");

    if (raw.contains("verify") && raw["verify"].contains("input_report"))
      cfg.input_report = raw["verify"]["input_report"].get<std::string>();
    if (raw.contains("output")) {
      const Json& j = raw["output"];
      if (j.contains("path")) cfg.out_path = j["path"].get<std::string>();
      if (j.contains("trajectory_csv"))
        cfg.trajectory_csv = j["trajectory_csv"].get<std::string>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config error: ") + e.what());
  }
  return cfg;
}

RunConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

namespace {

Json report_shell(const char* command, const RunConfig& cfg) {
  Json r;
  r["tool"] = Json{{"name", "barankin"}, {"version", kVersion}};
  r["command"] = command;
  r["kernel_lane"] = kernels::lane_name(kernels::active_lane());
  r["config"] = cfg.raw;
  Json m;
  m["name"] = cfg.model->name();
  m["theta_true"] = point_json(cfg.model->theta_true());
  m["sample_dim"] = cfg.model->sample_dim();
  m["target_dim"] = cfg.model->target_dim();
  m["moment_mode"] = moment_method_name(cfg.model->moment_mode());
  r["model"] = std::move(m);
  r["results"] = Json::object();
  return r;
}

Json tau_json(const TestPointSet& tau) {
  Json out = Json::array();
  for (const ParameterPoint& p : tau.points) out.push_back(point_json(p));
  return out;
}

Json bound_json(const BoundMatrix& b) {
  Json out;
  out["matrix"] = matrix_json(b.W.mat());
  out["condition_number"] = format_double(b.condition_number);
  out["in_C_A"] = b.in_C_A;
  return out;
}

Json compat_json(const CompatibilityResult& c) {
  Json out;
  out["compatible"] = c.compatible;
  if (c.witness) out["witness"] = vector_json(*c.witness);
  if (!c.compatible)
    out["note"] =
        "a vanishing combination of likelihood ratios has a non-vanishing "
        "target increment: no unbiased estimator exists for this target";
  return out;
}

Json moments_json(const MomentMatrices& mm) {
  Json out;
  out["G"] = matrix_json(mm.G);
  out["B"] = matrix_json(mm.B.mat());
  out["method"] = moment_method_name(mm.method);
  if (mm.mc_std_err) out["B_std_err"] = matrix_json(*mm.mc_std_err);
  return out;
}

Json certificate_json(const EfficiencyCertificate& cert) {
  Json out;
  out["lambda0"] = matrix_json(cert.lambda0);
  out["residual_trace"] = format_double(cert.residual_trace);
  if (cert.residual_std_err)
    out["residual_std_err"] = format_double(*cert.residual_std_err);
  Json probes = Json::array();
  for (const ProbeResult& p : cert.probes) {
    Json pj;
    pj["theta"] = point_json(p.theta);
    pj["bias"] = vector_json(p.bias);
    if (p.std_err) pj["std_err"] = vector_json(*p.std_err);
    pj["decisive_fail"] = p.decisive_fail;
    pj["inconclusive"] = p.inconclusive;
    probes.push_back(std::move(pj));
  }
  out["probes"] = std::move(probes);
  out["verdict"] = cert_verdict_name(cert.verdict);
  if (!cert.notes.empty()) out["notes"] = cert.notes;
  return out;
}

void add_degenerate_warning(Json& results, const BoundMatrix& v) {
  if (v.W.trace() <= 1e-15 * (1.0 + v.W.frobenius())) {
    if (!results.contains("warnings")) results["warnings"] = Json::array();
    results["warnings"].push_back("degenerate test set: the bound is zero");
  }
}

const TestPointSet& require_tau(const RunConfig& cfg, const char* command) {
  if (!cfg.tau)
    throw ConfigError(std::string(command) + " requires an explicit tau");
  return *cfg.tau;
}

}  // namespace

Json cmd_bound(const RunConfig& cfg) {
  const TestPointSet& tau = require_tau(cfg, "bound");
  Json report = report_shell("bound", cfg);
  Json& res = report["results"];

  const MomentMatrices raw = compute_B(*cfg.model, tau, cfg.method,
                                       cfg.mc.samples, cfg.mc.seed,
                                       cfg.mc.batches, cfg.mc.threads);
  res["tau"] = tau_json(tau);
  res["moments"] = moments_json(raw);
  res["compatibility"] = compat_json(b0_compatibility_check(raw, cfg.tol));

  const auto [kept, reduced] = deflate_dependent(raw, cfg.tol);
  res["kept_indices"] = kept;
  res["deflated_tau"] = tau_json(reduced.tau);

  const BoundMatrix v = bound_V(reduced, cfg.tol);
  res["V"] = bound_json(v);
  add_degenerate_warning(res, v);

  if (cfg.a_matrix) {
    const BoundMatrix w = bound_W(raw, *cfg.a_matrix, cfg.tol);
    res["W"] = bound_json(w);
    res["lambda0"] = matrix_json(lambda0(raw, *cfg.a_matrix, cfg.tol));
  }
  return report;
}

std::string trajectory_csv_text(const SearchReport& report) {
  std::ostringstream os;
  const Eigen::Index k =
      report.iterations.empty() ? 0 : report.iterations.front().added.dim();
  os << "iteration,trace,lambda_max";
  for (Eigen::Index j = 0; j < k; ++j) os << ",new_point_" << j;
  os << "\n";
  for (const SearchIteration& it : report.iterations) {
    os << it.index << "," << format_double(it.trace) << ","
       << format_double(it.lambda_max);
    for (Eigen::Index j = 0; j < k; ++j)
      os << "," << format_double(it.added[j]);
    os << "\n";
  }
  return os.str();
}

namespace {

Json search_report_json(const RunConfig& cfg, const SearchReport& sr) {
  Json report = report_shell("search", cfg);
  Json& res = report["results"];

  res["tau"] = tau_json(sr.tau);
  res["deflated_tau"] = tau_json(sr.best_mm.tau);
  res["moments"] = moments_json(sr.best_mm);
  res["best"] = bound_json(sr.best);
  add_degenerate_warning(res, sr.best);

  Json search;
  Json iters = Json::array();
  for (const SearchIteration& it : sr.iterations) {
    Json ij;
    ij["index"] = it.index;
    ij["added"] = point_json(it.added);
    ij["trace"] = format_double(it.trace);
    ij["lambda_max"] = format_double(it.lambda_max);
    ij["tau_size"] = it.tau.size();
    iters.push_back(std::move(ij));
  }
  search["iterations"] = std::move(iters);
  search["boundedness"] = boundedness_name(sr.boundedness);
  search["stop_reason"] = sr.stop_reason;
  search["k_witness"] = format_double(sr.k_witness);
  search["divergence_threshold"] = format_double(sr.divergence_threshold);
  search["incompatible_target"] = sr.incompatible_target;
  if (sr.incompatibility_witness)
    search["incompatibility_witness"] = vector_json(*sr.incompatibility_witness);
  if (sr.incompatible_target)
    search["note"] =
        "target is not compatible with the likelihood-ratio span: no "
        "unbiased estimator exists for it";
  if (!sr.pruned.empty()) {
    Json pruned = Json::array();
    for (const PrunedCandidate& p : sr.pruned) {
      Json pj;
      pj["point"] = point_json(p.point);
      pj["reason"] = p.reason;
      pruned.push_back(std::move(pj));
    }
    search["pruned"] = std::move(pruned);
  }
  if (cfg.search->budget == 0)
    search["note"] = "budget is zero: only the anchor point was evaluated";
  res["search"] = std::move(search);
  return report;
}

}  // namespace

Json cmd_search(const RunConfig& cfg) {
  if (!cfg.search) throw ConfigError("search requires search settings");
  return search_report_json(cfg, search_msup(*cfg.model, *cfg.search));
}

Json cmd_certify(const RunConfig& cfg) {
  const TestPointSet& tau = require_tau(cfg, "certify");
  Json report = report_shell("certify", cfg);
  Json& res = report["results"];

  const MomentMatrices raw = compute_B(*cfg.model, tau, cfg.method,
                                       cfg.mc.samples, cfg.mc.seed,
                                       cfg.mc.batches, cfg.mc.threads);
  res["tau"] = tau_json(tau);
  res["moments"] = moments_json(raw);
  res["compatibility"] = compat_json(b0_compatibility_check(raw, cfg.tol));

  const auto [kept, reduced] = deflate_dependent(raw, cfg.tol);
  res["kept_indices"] = kept;
  res["deflated_tau"] = tau_json(reduced.tau);

  const MomentMatrices& mm = cfg.a_matrix ? raw : reduced;
  const Eigen::MatrixXd a =
      cfg.a_matrix ? *cfg.a_matrix
                   : Eigen::MatrixXd(Eigen::MatrixXd::Identity(
                         reduced.B.dim(), reduced.B.dim()));

  const BoundMatrix w = bound_W(mm, a, cfg.tol);
  res["W"] = bound_json(w);

  CertifyConfig ccfg;
  ccfg.mc_samples = cfg.mc.samples;
  ccfg.mc_batches = cfg.mc.batches;
  ccfg.seed = cfg.mc.seed;
  ccfg.threads = cfg.mc.threads;
  ccfg.certify_tol = cfg.certify_tol;
  ccfg.probe_method = cfg.method == MomentMethod::kMonteCarlo
                          ? ProbeMethod::kMonteCarlo
                          : ProbeMethod::kAuto;
  res["certificate"] = certificate_json(
      certify_efficiency(cfg.model, mm, a, cfg.probes, ccfg, cfg.tol));
  return report;
}

Json cmd_crb(const RunConfig& cfg) {
  if (!(cfg.crb_eps > 0.0)) throw ConfigError("crb requires crb_eps > 0");
  Json report = report_shell("crb", cfg);
  Json& res = report["results"];

  // domain validation up front so a too-large eps is a config error
  for (Eigen::Index j = 0; j < cfg.model->param_dim(); ++j) {
    Eigen::VectorXd c = cfg.model->theta_true().coords;
    c[j] += cfg.crb_eps;
    if (!cfg.model->in_domain(ParameterPoint(c)))
      throw ConfigError("crb_eps steps outside the model domain");
  }

  const SymMatrix crb =
      crb_limit(*cfg.model, cfg.crb_eps, cfg.method, cfg.tol);
  res["eps"] = format_double(cfg.crb_eps);
  res["crb"] = matrix_json(crb.mat());

  if (cfg.tau) {
    const MomentMatrices raw = compute_B(*cfg.model, *cfg.tau, cfg.method,
                                         cfg.mc.samples, cfg.mc.seed,
                                         cfg.mc.batches, cfg.mc.threads);
    const auto [kept, reduced] = deflate_dependent(raw, cfg.tol);
    const BoundMatrix v = bound_V(reduced, cfg.tol);
    res["tau"] = tau_json(*cfg.tau);
    res["V"] = bound_json(v);
    const LoewnerVerdict verdict = loewner_compare(v.W, crb, cfg.tol);
    Json cj;
    cj["order"] = loewner_order_name(verdict.order);
    cj["lambda_min"] = format_double(verdict.lambda_min);
    cj["lambda_max"] = format_double(verdict.lambda_max);
    res["comparison"] = std::move(cj);
  }
  return report;
}

Json cmd_verify(const RunConfig& cfg) {
  Json report = report_shell("verify", cfg);
  Json& res = report["results"];

  TestPointSet tau;
  if (cfg.tau) {
    tau = *cfg.tau;
  } else if (cfg.input_report) {
    std::ifstream in(*cfg.input_report);
    if (!in) throw ConfigError("cannot open input report: " + *cfg.input_report);
    Json prev;
    try {
      prev = Json::parse(in);
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(std::string("input report parse error: ") + e.what());
    }
    if (!prev.contains("results") || !prev["results"].contains("tau"))
      throw ConfigError("input report carries no tau");
    tau = tau_from_json(prev["results"]["tau"]);
  } else {
    throw ConfigError("verify requires tau or verify.input_report");
  }
  for (const ParameterPoint& p : tau.points)
    if (p.dim() != cfg.model->param_dim())
      throw ConfigError("tau dimension does not match the model");

  const MomentMatrices raw = compute_B(*cfg.model, tau, cfg.method,
                                       cfg.mc.samples, cfg.mc.seed,
                                       cfg.mc.batches, cfg.mc.threads);
  const auto [kept, reduced] = deflate_dependent(raw, cfg.tol);
  const BoundMatrix v = bound_V(reduced, cfg.tol);
  res["tau"] = tau_json(tau);
  res["deflated_tau"] = tau_json(reduced.tau);
  res["W"] = bound_json(v);

  std::unique_ptr<Estimator> est;
  if (cfg.estimator == "sample_mean")
    est = std::make_unique<SampleMeanEstimator>(cfg.model);
  else
    est = std::make_unique<SpanEstimator>(
        construct_estimator(cfg.model, reduced,
                            Eigen::MatrixXd::Identity(reduced.B.dim(),
                                                      reduced.B.dim()),
                            cfg.tol));
  res["estimator"] = cfg.estimator;

  Json dom;
  if (cfg.model->moment_mode() == MomentMethod::kEnumeration) {
    // exact covariance and biases over the finite support
    const std::vector<SupportAtom> support = cfg.model->enumerate_support();
    Eigen::MatrixXd values(cfg.model->target_dim(),
                           static_cast<Eigen::Index>(support.size()));
    for (std::size_t i = 0; i < support.size(); ++i)
      values.col(static_cast<Eigen::Index>(i)) = est->evaluate(support[i].x);
    const SymMatrix cov = mc::exact_covariance(*cfg.model, values);
    res["covariance"] = matrix_json(cov.mat());
    res["covariance_exact"] = true;
    Json biases = Json::array();
    for (const ParameterPoint& p : cfg.probes) {
      Json bj;
      bj["theta"] = point_json(p);
      bj["bias"] = vector_json(mc::exact_expectation(*cfg.model, values, p) -
                               cfg.model->target(p));
      biases.push_back(std::move(bj));
    }
    res["biases"] = std::move(biases);
    const LoewnerVerdict verdict = loewner_compare(cov, v.W, cfg.tol);
    dom["order"] = loewner_order_name(verdict.order);
    dom["lambda_min"] = format_double(verdict.lambda_min);
    dom["holds"] = verdict.order == LoewnerOrder::kGreaterEqual ||
                   verdict.order == LoewnerOrder::kEqual;
  } else {
    const mc::McEstimate cov = mc::empirical_cov(*est, *cfg.model, cfg.mc);
    res["covariance"] = matrix_json(cov.value);
    res["covariance_std_err"] = matrix_json(cov.std_err);
    res["covariance_exact"] = false;
    Json biases = Json::array();
    for (const ParameterPoint& p : cfg.probes) {
      const mc::McEstimate b = mc::empirical_bias(*est, *cfg.model, p, cfg.mc);
      Json bj;
      bj["theta"] = point_json(p);
      bj["bias"] = vector_json(b.value.col(0));
      bj["std_err"] = vector_json(b.std_err.col(0));
      biases.push_back(std::move(bj));
    }
    res["biases"] = std::move(biases);
    const double d = static_cast<double>(cfg.model->target_dim());
    const double slack = 3.0 * cov.std_err.maxCoeff() * d;
    const double min_eig =
        lambda_min(SymMatrix(cov.value - v.W.mat()));
    dom["min_eig"] = format_double(min_eig);
    dom["slack"] = format_double(slack);
    dom["holds"] = min_eig >= -slack;
  }
  res["dominance"] = std::move(dom);
  return report;
}

namespace {

std::string resolve_out_path(const std::string& path) {
  std::filesystem::path p(path);
  if (p.is_absolute()) return path;
  if (const char* dir = std::getenv("BARANKIN_OUT_DIR"))
    return (std::filesystem::path(dir) / p).string();
  return path;
}

int exit_code_for(const Error& e) {
  if (dynamic_cast<const PostulateViolationError*>(&e)) return 3;
  if (dynamic_cast<const RankDeficiencyError*>(&e)) return 4;
  if (dynamic_cast<const DiagnosticsError*>(&e)) return 5;
  return 2;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"vector Barankin covariance lower bounds"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_path;
  std::string traj_path;
  std::int64_t seed_override = -1;
  std::int64_t samples_override = -1;
  double tol_override = -1.0;
  int threads_override = -1;
  bool quiet = false;

  const char* names[] = {"bound", "search", "certify", "crb", "verify"};
  const char* descs[] = {
      "evaluate the bound on an explicit test-point set",
      "greedy search for the tightest bound",
      "construct the candidate optimal estimator and certify attainment",
      "small-step bound recovering the Cramer-Rao matrix",
      "Monte Carlo / exact check of an estimator against the bound"};
  for (int i = 0; i < 5; ++i) {
    CLI::App* sub = app.add_subcommand(names[i], descs[i]);
    sub->add_option("--config", config_path, "run configuration file (JSON)")
        ->required();
    sub->add_option("--out", out_path, "report output path");
    sub->add_option("--seed", seed_override, "override the config seed");
    sub->add_option("--samples", samples_override, "override MC sample count");
    sub->add_option("--tol", tol_override, "override psd_eps");
    sub->add_option("--threads", threads_override,
                    "worker threads (results are thread-count invariant)");
    sub->add_option("--trajectory-csv", traj_path,
                    "search trajectory CSV path");
    sub->add_flag("--quiet", quiet, "suppress the stdout summary");
  }

  try {
    app.parse(argc, const_cast<char**>(argv));
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }
  const std::string command = app.get_subcommands().front()->get_name();

  const auto t0 = std::chrono::steady_clock::now();
  try {
    RunConfig cfg = parse_config_file(config_path);
    if (seed_override >= 0) {
      cfg.mc.seed = static_cast<std::uint64_t>(seed_override);
      if (cfg.search) cfg.search->seed = cfg.mc.seed;
    }
    if (samples_override > 0) {
      cfg.mc.samples = samples_override;
      if (cfg.search) cfg.search->mc_samples = samples_override;
    }
    if (tol_override > 0.0) {
      cfg.tol.psd_eps = tol_override;
      if (cfg.search) cfg.search->tol.psd_eps = tol_override;
    }
    if (threads_override > 0) {
      cfg.mc.threads = threads_override;
      if (cfg.search) cfg.search->threads = threads_override;
    }
    if (!out_path.empty()) cfg.out_path = out_path;
    if (!traj_path.empty()) cfg.trajectory_csv = traj_path;

    Json report;
    std::optional<SearchReport> search_report;
    if (command == "bound") {
      report = cmd_bound(cfg);
    } else if (command == "search") {
      if (!cfg.search) throw ConfigError("search requires search settings");
      search_report = search_msup(*cfg.model, *cfg.search);
      report = search_report_json(cfg, *search_report);
    } else if (command == "certify") {
      report = cmd_certify(cfg);
    } else if (command == "crb") {
      report = cmd_crb(cfg);
    } else {
      report = cmd_verify(cfg);
    }

    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    report["elapsed_seconds"] = format_double(elapsed);

    const std::string text = report.dump(2) + "\n";
    if (cfg.out_path) {
      const std::string resolved = resolve_out_path(*cfg.out_path);
      std::ofstream out(resolved, std::ios::binary);
      if (!out) throw ConfigError("cannot write report: " + resolved);
      out << text;
      if (!quiet)
        std::cout << command << ": report written to " << resolved << "\n";
    } else {
      std::cout << text;
    }
    if (search_report && cfg.trajectory_csv) {
      const std::string resolved = resolve_out_path(*cfg.trajectory_csv);
      std::ofstream out(resolved, std::ios::binary);
      if (!out) throw ConfigError("cannot write trajectory: " + resolved);
      out << trajectory_csv_text(*search_report);
    }
    return 0;
  } catch (const PostulateViolationError& e) {
    std::cerr << "error (postulate violation): " << e.what() << "\n";
    return 3;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace barankin::cli
