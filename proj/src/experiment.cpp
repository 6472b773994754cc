#include <orpca/experiment.hpp>
#include <orpca/stream.hpp>

#include <json.hpp>

#include <chrono>
#include <filesystem>
#include <fstream>

namespace orpca {

using json = nlohmann::ordered_json;

Scale parse_scale(const std::string& name) {
  if (name == "desk") return Scale::desk;
  if (name == "paper") return Scale::paper;
  fail(Errc::contract_violation, "unknown scale '" + name + "' (expected desk or paper)");
}

const char* to_string(Scale scale) { return scale == Scale::desk ? "desk" : "paper"; }

StudySetup study_setup(int study, Scale scale, std::uint64_t seed) {
  require(study >= 1 && study <= 3, "experiment: study must be 1, 2 or 3");
  StudySetup s;
  s.study = study;
  s.scale = scale;
  s.sim.seed = seed;
  s.sim.rho = 0.01;
  s.sim.sparse_magnitude = 1000.0;

  const bool desk = scale == Scale::desk;
  const Index m = desk ? 100 : 400;
  const Index n = desk ? 100 : 200;  // n_win = n_burnin = n_cp_burnin
  const Index tp = desk ? 125 : 250;
  const Index r0 = desk ? 3 : 5;
  s.sim.m = m;
  s.sim.n_burnin = n;

  // lambda1 = 1/sqrt(400), lambda2 = 100/sqrt(400) at both scales; see README
  TrackerConfig& tc = s.cp.tracker;
  tc.lambda1 = desk ? 0.05 : 1.0 / std::sqrt(400.0);
  tc.lambda2 = desk ? 5.0 : 100.0 / std::sqrt(400.0);
  tc.n_win = n;
  tc.n_burnin = n;
  s.cp.n_cp_burnin = n;
  s.cp.n_test = 100;
  s.cp.n_check = 20;
  s.cp.alpha = 0.01;
  s.cp.alpha_prop = 0.5;
  s.cp.n_positive = 3;
  s.cp.n_tol = 0;

  switch (study) {
    case 1:
      s.sim.T = desk ? 1000 : 5000;
      s.sim.variant = StableVariant{desk ? 5 : 10};
      s.with_batch = true;
      break;
    case 2:
      s.sim.T = desk ? 1000 : 5000;
      s.sim.variant = DriftVariant{10, r0, tp};
      break;
    default: {
      ChangePointVariant v;
      if (desk) {
        s.sim.T = 1500;
        v.ranks = {5, 25, 12};
        v.change_points = {500, 1000};
      } else {
        s.sim.T = 3000;
        v.ranks = {10, 50, 25};
        v.change_points = {1000, 2000};
      }
      v.drift_rank = r0;
      v.piece_length = tp;
      s.sim.variant = v;
    }
  }
  return s;
}

const MethodRun& ExperimentResult::run(const std::string& method) const {
  for (const auto& r : runs)
    if (r.method == method) return r;
  fail(Errc::contract_violation, "experiment: no run for method '" + method + "'");
}

EvalReport evaluate(const DecompositionResult& result, const GroundTruth& truth, double zero_eps, Index cp_window,
                    double runtime_seconds) {
  EvalReport rep;
  rep.err_l = err_rel(result.low_rank, truth.L);
  rep.err_s = err_rel(result.sparse, truth.S);
  rep.f_s = support_mismatch(result.sparse, truth.S, zero_eps);
  const CpMatching match = cp_deviation(result.change_points, truth.change_points, cp_window);
  rep.cp_deviations = match.deviations;
  rep.cp_missed = static_cast<Index>(match.missed.size());
  rep.cp_false_alarms = static_cast<Index>(match.false_alarms.size());
  rep.runtime_seconds = runtime_seconds;
  return rep;
}

ExperimentResult run_experiment(const StudySetup& setup) {
  setup.cp.validate();
  ExperimentResult out;
  out.setup = setup;
  if (setup.scale == Scale::paper)
    out.warnings.push_back("paper scale: m = 400 and T up to 5000; expect minutes per method");
  out.truth = generate(setup.sim);
  const GroundTruth& gt = out.truth;
  const TrackerConfig& tc = setup.cp.tracker;
  const Index window = tc.n_win;

  using clock = std::chrono::steady_clock;
  auto seconds = [](clock::time_point a, clock::time_point b) { return std::chrono::duration<double>(b - a).count(); };

  if (setup.with_batch) {
    const auto t0 = clock::now();
    PcpResult dec = pcp_alm(gt.M, tc.pcp);
    const auto t1 = clock::now();
    MethodRun run;
    run.method = "pcp";
    run.result.low_rank = std::move(dec.low_rank);
    run.result.sparse = std::move(dec.sparse);
    if (!dec.converged) run.result.warnings.push_back("batch PCP hit max_iter before converging");
    run.report = evaluate(run.result, gt, setup.cp.zero_eps, window, seconds(t0, t1));
    out.runs.push_back(std::move(run));
  }

  for (TrackerMode mode : {TrackerMode::stoc, TrackerMode::omw}) {
    MatrixStream stream(gt.M);
    const auto t0 = clock::now();
    MethodRun run;
    run.method = mode == TrackerMode::stoc ? "stoc" : "omw";
    run.result = run_tracker(stream, mode, tc, gt.burnin);
    const auto t1 = clock::now();
    run.report = evaluate(run.result, gt, setup.cp.zero_eps, window, seconds(t0, t1));
    out.runs.push_back(std::move(run));
  }

  {
    MatrixStream stream(gt.M);
    const auto t0 = clock::now();
    auto [res, report] = omwrpca_cp_run(stream, setup.cp, gt.burnin, true);
    const auto t1 = clock::now();
    MethodRun run;
    run.method = "omw-cp";
    run.result = std::move(res);
    run.diagnostics = std::move(report.diagnostics);
    for (auto& w : report.warnings) run.result.warnings.push_back(std::move(w));
    run.report = evaluate(run.result, gt, setup.cp.zero_eps, window, seconds(t0, t1));
    out.runs.push_back(std::move(run));
  }
  return out;
}

namespace {

json spec_record(const ExperimentResult& r) {
  const StudySetup& s = r.setup;
  json j;
  j["record"] = "spec";
  j["study"] = s.study;
  j["scale"] = to_string(s.scale);
  j["seed"] = s.sim.seed;
  j["m"] = s.sim.m;
  j["T"] = s.sim.T;
  j["n_burnin"] = s.sim.n_burnin;
  j["rho"] = s.sim.rho;
  j["true_change_points"] = r.truth.change_points;
  j["lambda1"] = s.cp.tracker.lambda1;
  j["lambda2"] = s.cp.tracker.lambda2;
  j["n_win"] = s.cp.tracker.n_win;
  j["n_cp_burnin"] = s.cp.n_cp_burnin;
  j["n_test"] = s.cp.n_test;
  j["n_check"] = s.cp.n_check;
  j["alpha"] = s.cp.alpha;
  j["alpha_prop"] = s.cp.alpha_prop;
  j["n_positive"] = s.cp.n_positive;
  j["n_tol"] = s.cp.n_tol;
  return j;
}

}  // namespace

std::string experiment_reports_jsonl(const ExperimentResult& r) {
  std::string out = spec_record(r).dump() + "\n";
  for (const MethodRun& run : r.runs) {
    json j;
    j["record"] = "report";
    j["study"] = r.setup.study;
    j["seed"] = r.setup.sim.seed;
    j["method"] = run.method;
    j["err_L"] = run.report.err_l;
    j["err_S"] = run.report.err_s;
    j["f_S"] = run.report.f_s;
    j["change_points"] = run.result.change_points;
    j["cp_deviations"] = run.report.cp_deviations;
    j["cp_missed"] = run.report.cp_missed;
    j["cp_false_alarms"] = run.report.cp_false_alarms;
    json segs = json::array();
    for (const auto& g : run.result.segments) segs.push_back({{"start", g.start}, {"rank", g.rank}});
    j["segments"] = segs;
    j["batch_tail"] = run.result.batch_tail;
    j["warnings"] = run.result.warnings;
    out += j.dump() + "\n";
  }
  return out;
}

std::string experiment_diagnostics_jsonl(const ExperimentResult& r) {
  std::string out;
  for (const MethodRun& run : r.runs) {
    for (const CpDiagnostic& d : run.diagnostics) {
      json j;
      j["method"] = run.method;
      j["t"] = d.t;
      j["support"] = d.support;
      j["p"] = d.p ? json(*d.p) : json(nullptr);
      j["flag"] = d.flag ? json(*d.flag) : json(nullptr);
      j["phase"] = to_string(d.phase);
      out += j.dump() + "\n";
    }
  }
  return out;
}

void write_experiment(const ExperimentResult& r, const std::string& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) fail(Errc::io, "cannot create output directory " + out_dir + ": " + ec.message());
  auto write = [&](const std::string& name, const std::string& text) {
    const std::string path = (std::filesystem::path(out_dir) / name).string();
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) fail(Errc::io, "cannot open " + path + " for writing");
    f << text;
    if (!f) fail(Errc::io, "write failed: " + path);
  };
  write("reports.jsonl", experiment_reports_jsonl(r));
  write("diagnostics.jsonl", experiment_diagnostics_jsonl(r));
  std::string timing;
  for (const MethodRun& run : r.runs) {
    json j;
    j["method"] = run.method;
    j["runtime_seconds"] = run.report.runtime_seconds;
    timing += j.dump() + "\n";
  }
  write("timing.jsonl", timing);
}

}  // namespace orpca
