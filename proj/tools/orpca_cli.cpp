// Command-line front end. Talks to the library only through the C API.

#include <orpca/orpca.h>

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

constexpr const char* kOutDirEnv = "ORPCA_OUT_DIR";

// exit codes
constexpr int kOk = 0;
constexpr int kContract = 1;
constexpr int kIo = 2;

struct Failure {
  orpca_status status;
  std::string message;
};

void check(orpca_status s, const std::string& context = {}) {
  if (s == ORPCA_OK) return;
  std::string msg = orpca_last_error();
  if (!context.empty()) msg = context + ": " + msg;
  throw Failure{s, msg};
}

[[noreturn]] void usage_error(const std::string& msg) { throw Failure{ORPCA_ERR_CONTRACT, msg}; }

int exit_code(orpca_status s) {
  switch (s) {
    case ORPCA_OK: return kOk;
    case ORPCA_ERR_IO:
    case ORPCA_ERR_PARSE:
    case ORPCA_ERR_VERSION:
    case ORPCA_ERR_CORRUPT: return kIo;
    default: return kContract;
  }
}

template <typename T, void (*Free)(T*)>
struct Deleter {
  void operator()(T* p) const { Free(p); }
};
using MatrixPtr = std::unique_ptr<orpca_matrix, Deleter<orpca_matrix, orpca_matrix_free>>;
using StreamPtr = std::unique_ptr<orpca_stream, Deleter<orpca_stream, orpca_stream_free>>;
using WriterPtr = std::unique_ptr<orpca_writer, Deleter<orpca_writer, orpca_writer_free>>;
using TrackerPtr = std::unique_ptr<orpca_tracker, Deleter<orpca_tracker, orpca_tracker_free>>;
using SimPtr = std::unique_ptr<orpca_sim, Deleter<orpca_sim, orpca_sim_free>>;
using ExperimentPtr = std::unique_ptr<orpca_experiment, Deleter<orpca_experiment, orpca_experiment_free>>;

std::string resolve_out_dir(const std::string& flag) {
  std::string dir = flag;
  if (dir.empty()) {
    const char* env = std::getenv(kOutDirEnv);
    dir = env && *env ? env : ".";
  }
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Failure{ORPCA_ERR_IO, "cannot create output directory " + dir + ": " + ec.message()};
  return dir;
}

std::string join(const std::string& dir, const std::string& name) { return (fs::path(dir) / name).string(); }

const char* ext_for(const std::string& format) { return format == "csv" ? ".csv" : ".f64"; }

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Failure{ORPCA_ERR_IO, "cannot write " + path};
  out << text;
  if (!out) throw Failure{ORPCA_ERR_IO, "write failed: " + path};
}

MatrixPtr read_matrix(const std::string& path, const std::string& format) {
  orpca_matrix* m = nullptr;
  check(orpca_matrix_read(path.c_str(), format.empty() ? nullptr : format.c_str(), &m));
  return MatrixPtr(m);
}

void write_matrix(const orpca_matrix* m, const std::string& path, const std::string& format) {
  check(orpca_matrix_write(m, path.c_str(), format.c_str()));
}

std::vector<int64_t> parse_list(const std::string& text, const char* flag) {
  std::vector<int64_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stoll(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      usage_error(std::string(flag) + ": '" + item + "' is not an integer");
    }
  }
  return out;
}

json nullable(double x) { return std::isnan(x) ? json(nullptr) : json(x); }

// ---------------------------------------------------------------- options

struct TrackOptions {
  orpca_cp_config cp{};
  std::string mode = "omw";
  std::string input;
  std::string format;
  std::string burnin;
  std::string out_dir;
  std::string out_format = "raw-f64";
  std::string save_state;
  std::string load_state;
  int64_t stop_after = -1;
  int64_t stoc_zero_rank = 0;
  bool no_detect = false;
  bool rule_of_thumb = false;
};

void add_cp_flags(CLI::App* cmd, orpca_cp_config& cp, bool* rule_of_thumb) {
  auto& tc = cp.tracker;
  cmd->add_option("--lambda1", tc.lambda1, "ridge penalty on the coefficients")->capture_default_str();
  cmd->add_option("--lambda2", tc.lambda2, "l1 penalty on the sparse part")->capture_default_str();
  if (rule_of_thumb)
    cmd->add_flag("--rule-of-thumb", *rule_of_thumb,
                  "lambda1 = 1/sqrt(max(m, n_win)), lambda2 = 100/sqrt(max(m, n_win)); overrides --lambda1/--lambda2");
  cmd->add_option("--n-win", tc.n_win, "moving-window length")->capture_default_str();
  cmd->add_option("--n-burnin", tc.n_burnin, "burn-in block length")->capture_default_str();
  cmd->add_option("--n-cp-burnin", cp.n_cp_burnin, "samples after a burn-in before the test period")
      ->capture_default_str();
  cmd->add_option("--n-test", cp.n_test, "samples whose support sizes seed the histogram")->capture_default_str();
  cmd->add_option("--n-check", cp.n_check, "length of the flag buffer")->capture_default_str();
  cmd->add_option("--alpha", cp.alpha, "p-value threshold for an abnormal support size")->capture_default_str();
  cmd->add_option("--alpha-prop", cp.alpha_prop, "fraction of flags in the buffer that triggers a scan")
      ->capture_default_str();
  cmd->add_option("--n-positive", cp.n_positive, "consecutive flags that locate a change point")
      ->capture_default_str();
  cmd->add_option("--n-tol", cp.n_tol, "support-size tolerance of the p-value test")->capture_default_str();
  cmd->add_option("--zero-eps", cp.zero_eps, "|s_i| above this counts as nonzero")->capture_default_str();
  cmd->add_option("--projection-tol", tc.projection_tol)->capture_default_str();
  cmd->add_option("--projection-max-iter", tc.projection_max_iter)->capture_default_str();
  cmd->add_option("--rank-tol", tc.rank_tol, "relative singular-value cutoff for the burn-in rank")
      ->capture_default_str();
  cmd->add_option("--basis-sweeps", tc.basis_sweeps)->capture_default_str();
  cmd->add_option("--drift-period", tc.drift_period,
                  "steps between accumulator rebuilds; 0 = 10 n_win, negative disables")
      ->capture_default_str();
  cmd->add_option("--pcp-tol", tc.pcp.tol, "burn-in PCP tolerance")->capture_default_str();
  cmd->add_option("--pcp-max-iter", tc.pcp.max_iter, "burn-in PCP iteration cap")->capture_default_str();
}

void print_advisories(const orpca_cp_config& cp) {
  const size_t n = orpca_cp_config_advisory_count(&cp);
  for (size_t i = 0; i < n; ++i) std::cerr << "warning: " << orpca_cp_config_advisory(&cp, i) << "\n";
}

// ---------------------------------------------------------------- simulate

struct SimulateOptions {
  orpca_sim_spec spec{};
  std::string variant = "stable";
  std::string ranks;
  std::string cps;
  std::string out_dir;
  std::string format = "raw-f64";
};

int run_simulate(SimulateOptions& o) {
  orpca_sim_spec spec = o.spec;
  std::vector<int64_t> ranks, cps;
  if (o.variant == "stable") {
    spec.variant = ORPCA_SIM_STABLE;
  } else if (o.variant == "drift") {
    spec.variant = ORPCA_SIM_DRIFT;
  } else if (o.variant == "changepoints") {
    spec.variant = ORPCA_SIM_CHANGEPOINTS;
    ranks = parse_list(o.ranks, "--ranks");
    cps = parse_list(o.cps, "--cps");
    if (ranks.size() != cps.size() + 1) usage_error("--ranks needs exactly one more entry than --cps");
    spec.ranks = ranks.data();
    spec.change_points = cps.empty() ? nullptr : cps.data();
    spec.n_change_points = cps.size();
  } else {
    usage_error("--variant must be stable, drift or changepoints");
  }

  orpca_sim* raw = nullptr;
  check(orpca_simulate(&spec, &raw));
  SimPtr sim(raw);

  const std::string dir = resolve_out_dir(o.out_dir);
  const char* ext = ext_for(o.format);
  const std::pair<orpca_sim_part, const char*> parts[] = {
      {ORPCA_SIM_M, "M"},           {ORPCA_SIM_L, "L"},
      {ORPCA_SIM_S, "S"},           {ORPCA_SIM_BURNIN, "burnin"},
      {ORPCA_SIM_BURNIN_L, "burnin_L"}, {ORPCA_SIM_BURNIN_S, "burnin_S"}};
  for (const auto& [part, name] : parts) {
    orpca_matrix* m = nullptr;
    check(orpca_sim_matrix(sim.get(), part, &m));
    MatrixPtr hold(m);
    write_matrix(m, join(dir, std::string(name) + ext), o.format);
  }

  size_t n = 0;
  check(orpca_sim_change_points(sim.get(), nullptr, 0, &n));
  std::vector<int64_t> truth(n);
  check(orpca_sim_change_points(sim.get(), truth.data(), truth.size(), &n));

  json j;
  j["variant"] = o.variant;
  j["m"] = spec.m;
  j["T"] = spec.T;
  j["n_burnin"] = spec.n_burnin;
  j["rho"] = spec.rho;
  j["seed"] = spec.seed;
  j["sparse_magnitude"] = spec.sparse_magnitude;
  if (spec.variant != ORPCA_SIM_CHANGEPOINTS) j["rank"] = spec.rank;
  if (spec.variant != ORPCA_SIM_STABLE) {
    j["r0"] = spec.drift_rank;
    j["T_p"] = spec.piece_length;
  }
  if (spec.variant == ORPCA_SIM_CHANGEPOINTS) j["ranks"] = ranks;
  j["change_points"] = truth;
  j["format"] = o.format;
  write_text(join(dir, "truth.json"), j.dump(2) + "\n");
  std::cerr << "wrote M, L, S and burn-in blocks (" << o.format << ") to " << dir << "\n";
  return kOk;
}

// ---------------------------------------------------------------- pcp

struct PcpOptions {
  orpca_pcp_config pcp{};
  std::string input;
  std::string format;
  std::string out_dir;
  std::string out_format = "raw-f64";
  std::optional<double> lambda;
  std::optional<double> mu;
};

int run_pcp(PcpOptions& o) {
  MatrixPtr m = read_matrix(o.input, o.format);
  orpca_pcp_config cfg = o.pcp;
  if (o.lambda) cfg.lambda = *o.lambda;
  if (o.mu) cfg.mu = *o.mu;
  orpca_matrix *l = nullptr, *s = nullptr;
  orpca_pcp_info info{};
  const auto t0 = std::chrono::steady_clock::now();
  check(orpca_pcp(m.get(), &cfg, &l, &s, &info));
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  MatrixPtr lp(l), sp(s);

  const std::string dir = resolve_out_dir(o.out_dir);
  const char* ext = ext_for(o.out_format);
  write_matrix(l, join(dir, std::string("L") + ext), o.out_format);
  write_matrix(s, join(dir, std::string("S") + ext), o.out_format);
  json j;
  j["m"] = orpca_matrix_rows(m.get());
  j["n"] = orpca_matrix_cols(m.get());
  j["lambda"] = info.lambda;
  j["mu"] = info.mu;
  j["iterations"] = info.iterations;
  j["converged"] = info.converged != 0;
  j["rank"] = info.rank;
  j["runtime_seconds"] = secs;
  write_text(join(dir, "pcp.json"), j.dump(2) + "\n");
  if (!info.converged) std::cerr << "warning: PCP stopped at max_iter before reaching the tolerance\n";
  return kOk;
}

// ---------------------------------------------------------------- track

int run_track(TrackOptions& o) {
  orpca_mode mode{};
  check(orpca_mode_parse(o.mode.c_str(), &mode));

  orpca_stream* rs = nullptr;
  check(orpca_stream_open(o.input.c_str(), o.format.empty() ? nullptr : o.format.c_str(), &rs));
  StreamPtr stream(rs);

  TrackerPtr tracker;
  if (!o.load_state.empty()) {
    orpca_tracker* t = nullptr;
    check(orpca_tracker_load(o.load_state.c_str(), &t));
    tracker.reset(t);
    if (orpca_tracker_mode(t) != mode)
      usage_error("--mode " + o.mode + " does not match the mode stored in " + o.load_state);
    // resume where the snapshot left off
    const auto cursor = static_cast<int64_t>(orpca_tracker_cursor(t));
    check(orpca_stream_rewind(stream.get(), cursor), "resuming at sample " + std::to_string(cursor));
  } else {
    if (o.rule_of_thumb) {
      int64_t m = orpca_stream_dim(stream.get());
      orpca_cp_config_rule_of_thumb(&o.cp, m, o.cp.tracker.n_win);
    }
    check(orpca_cp_config_validate(&o.cp));
    print_advisories(o.cp);
    MatrixPtr burnin;
    if (!o.burnin.empty()) burnin = read_matrix(o.burnin, o.format);
    const int64_t dim = burnin ? orpca_matrix_rows(burnin.get()) : orpca_stream_dim(stream.get());
    if (dim == 0) {
      std::cerr << "warning: empty input stream; nothing to do\n";
      return kOk;
    }
    orpca_tracker* t = nullptr;
    check(orpca_tracker_create(mode, dim, &o.cp, burnin.get(), o.no_detect ? 0 : 1, o.stoc_zero_rank, &t));
    tracker.reset(t);
  }

  const int64_t dim = orpca_tracker_dim(tracker.get());
  const int64_t sdim = orpca_stream_dim(stream.get());
  if (sdim != 0 && sdim != dim)
    usage_error("input has dimension " + std::to_string(sdim) + " but the tracker expects " + std::to_string(dim));

  const std::string dir = resolve_out_dir(o.out_dir);
  const char* ext = ext_for(o.out_format);
  orpca_writer *wl = nullptr, *ws = nullptr;
  check(orpca_writer_open(join(dir, std::string("L") + ext).c_str(), o.out_format.c_str(), dim, &wl));
  WriterPtr low_writer(wl);
  check(orpca_writer_open(join(dir, std::string("S") + ext).c_str(), o.out_format.c_str(), dim, &ws));
  WriterPtr sparse_writer(ws);
  std::ofstream diag_out(join(dir, "diagnostics.jsonl"), std::ios::trunc);
  if (!diag_out) throw Failure{ORPCA_ERR_IO, "cannot write " + join(dir, "diagnostics.jsonl")};

  std::vector<double> sample(static_cast<size_t>(dim)), low(sample.size()), sparse(sample.size());
  auto drain = [&] {
    int available = 1;
    while (true) {
      orpca_diag d{};
      check(orpca_tracker_pop(tracker.get(), low.data(), sparse.data(), &d, &available));
      if (!available) break;
      check(orpca_writer_append(low_writer.get(), low.data()));
      check(orpca_writer_append(sparse_writer.get(), sparse.data()));
      json j;
      j["t"] = d.t;
      j["support"] = d.support;
      j["p"] = nullable(d.p_value);
      j["flag"] = d.flag < 0 ? json(nullptr) : json(d.flag);
      j["phase"] = orpca_phase_name(d.phase);
      diag_out << j.dump() << "\n";
    }
  };

  int64_t consumed = 0;
  bool stopped = false;
  while (true) {
    if (o.stop_after >= 0 && consumed >= o.stop_after) {
      stopped = true;
      break;
    }
    int has = 0;
    check(orpca_stream_next(stream.get(), sample.data(), &has));
    if (!has) break;
    const int64_t pos = orpca_stream_position(stream.get()) - 1;
    check(orpca_tracker_push(tracker.get(), sample.data()), "sample " + std::to_string(pos));
    ++consumed;
    drain();
  }
  if (!stopped) check(orpca_tracker_finish(tracker.get()));
  drain();
  if (!o.save_state.empty()) check(orpca_tracker_save(tracker.get(), o.save_state.c_str()));
  check(orpca_writer_close(low_writer.get()));
  check(orpca_writer_close(sparse_writer.get()));
  diag_out.close();
  if (!diag_out) throw Failure{ORPCA_ERR_IO, "write failed: diagnostics.jsonl"};

  size_t n = 0;
  check(orpca_tracker_change_points(tracker.get(), nullptr, 0, &n));
  std::vector<int64_t> cps(n), detected(n);
  check(orpca_tracker_change_points(tracker.get(), cps.data(), n, &n));
  check(orpca_tracker_detection_times(tracker.get(), detected.data(), detected.size(), &n));
  check(orpca_tracker_segments(tracker.get(), nullptr, nullptr, 0, &n));
  std::vector<int64_t> starts(n), ranks(n);
  check(orpca_tracker_segments(tracker.get(), starts.data(), ranks.data(), n, &n));

  json j;
  j["mode"] = o.mode;
  j["samples_consumed"] = consumed;
  j["cursor"] = orpca_tracker_cursor(tracker.get());
  j["finished"] = !stopped;
  j["rank"] = orpca_tracker_rank(tracker.get());
  j["change_points"] = cps;
  j["detected_at"] = detected;
  json segs = json::array();
  for (size_t i = 0; i < starts.size(); ++i) segs.push_back({{"start", starts[i]}, {"rank", ranks[i]}});
  j["segments"] = segs;
  j["batch_tail"] = orpca_tracker_batch_tail(tracker.get());
  write_text(join(dir, "summary.json"), j.dump(2) + "\n");
  if (orpca_tracker_batch_tail(tracker.get()) > 0)
    std::cerr << "warning: the last " << orpca_tracker_batch_tail(tracker.get())
              << " samples did not fill a burn-in block and were decomposed by batch PCP\n";
  for (size_t i = 0; i < cps.size(); ++i)
    std::cerr << "change point at " << cps[i] << " (detected at " << detected[i] << ")\n";
  return kOk;
}

// ---------------------------------------------------------------- bench

struct BenchOptions {
  int64_t m = 100;
  int64_t rank = 5;
  int64_t T = 1000;
  int64_t n_win = 100;
  double rho = 0.01;
  uint64_t seed = 0;
  std::string mode = "omw";
  std::string out_dir;
};

int run_bench(BenchOptions& o) {
  orpca_mode mode{};
  check(orpca_mode_parse(o.mode.c_str(), &mode));
  orpca_sim_spec spec;
  orpca_sim_spec_default(&spec);
  spec.m = o.m;
  spec.T = o.T;
  spec.n_burnin = o.n_win;
  spec.rho = o.rho;
  spec.seed = o.seed;
  spec.rank = o.rank;
  orpca_sim* raw = nullptr;
  check(orpca_simulate(&spec, &raw));
  SimPtr sim(raw);
  orpca_matrix *mp = nullptr, *bp = nullptr;
  check(orpca_sim_matrix(sim.get(), ORPCA_SIM_M, &mp));
  MatrixPtr data(mp);
  check(orpca_sim_matrix(sim.get(), ORPCA_SIM_BURNIN, &bp));
  MatrixPtr burnin(bp);

  orpca_cp_config cp;
  orpca_cp_config_default(&cp);
  orpca_cp_config_rule_of_thumb(&cp, o.m, o.n_win);
  orpca_tracker* t = nullptr;
  check(orpca_tracker_create(mode, o.m, &cp, burnin.get(), 1, 0, &t));
  TrackerPtr tracker(t);

  const double* cols = orpca_matrix_data(data.get());
  std::vector<double> step_seconds;
  std::vector<uint64_t> elements;
  int available = 1;
  for (int64_t k = 0; k < o.T; ++k) {
    const auto a = std::chrono::steady_clock::now();
    check(orpca_tracker_push(tracker.get(), cols + k * o.m));
    const auto b = std::chrono::steady_clock::now();
    step_seconds.push_back(std::chrono::duration<double>(b - a).count());
    elements.push_back(orpca_tracker_state_elements(tracker.get()));
    do check(orpca_tracker_pop(tracker.get(), nullptr, nullptr, nullptr, &available));
    while (available);
  }

  json j;
  j["mode"] = o.mode;
  j["m"] = o.m;
  j["rank"] = orpca_tracker_rank(tracker.get());
  j["T"] = o.T;
  j["n_win"] = o.n_win;
  double total = 0.0;
  for (double s : step_seconds) total += s;
  j["mean_step_seconds"] = o.T ? total / static_cast<double>(o.T) : 0.0;
  json windows = json::array();
  for (int64_t lo = 0; lo < o.T; lo += 100) {
    const int64_t hi = std::min(o.T, lo + 100);
    double s = 0.0;
    for (int64_t k = lo; k < hi; ++k) s += step_seconds[static_cast<size_t>(k)];
    windows.push_back({{"from", lo}, {"to", hi}, {"mean_step_seconds", s / static_cast<double>(hi - lo)},
                       {"state_elements", elements[static_cast<size_t>(hi - 1)]}});
  }
  j["windows"] = windows;
  const std::string text = j.dump(2) + "\n";
  std::cout << text;
  if (!o.out_dir.empty() || std::getenv(kOutDirEnv)) write_text(join(resolve_out_dir(o.out_dir), "bench.json"), text);
  return kOk;
}

// ---------------------------------------------------------------- experiment

struct ExperimentOptions {
  int study = 1;
  std::string scale = "desk";
  uint64_t seed = 0;
  std::string out_dir;
};

int run_experiment_cmd(ExperimentOptions& o) {
  if (o.scale == "paper") std::cerr << "warning: paper scale (m = 400, T up to 5000) takes minutes per method\n";
  orpca_experiment* raw = nullptr;
  check(orpca_experiment_run(o.study, o.scale.c_str(), o.seed, &raw));
  ExperimentPtr e(raw);
  const std::string dir = resolve_out_dir(o.out_dir);
  check(orpca_experiment_write(e.get(), dir.c_str()));
  std::cout << orpca_experiment_reports(e.get());
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Online moving-window robust PCA with change-point detection"};
  app.require_subcommand(1);
  app.footer(std::string("Output directory: --out-dir, else $") + kOutDirEnv +
             ", else the working directory.\nExit codes: 0 success, 1 invalid arguments or contract violation, "
             "2 I/O, parse or snapshot error.");

  SimulateOptions sim;
  orpca_sim_spec_default(&sim.spec);
  auto* simulate = app.add_subcommand("simulate", "generate a synthetic stream with ground truth");
  simulate->add_option("--variant", sim.variant, "stable | drift | changepoints")->capture_default_str();
  simulate->add_option("--m", sim.spec.m, "sample dimension")->capture_default_str();
  simulate->add_option("--T", sim.spec.T, "stream length")->capture_default_str();
  simulate->add_option("--n-burnin", sim.spec.n_burnin, "burn-in block length")->capture_default_str();
  simulate->add_option("--rho", sim.spec.rho, "probability that a sparse entry is nonzero")->capture_default_str();
  simulate->add_option("--seed", sim.spec.seed)->capture_default_str();
  simulate->add_option("--magnitude", sim.spec.sparse_magnitude, "sparse values are uniform on [-mag, mag]")
      ->capture_default_str();
  simulate->add_option("--rank", sim.spec.rank, "subspace rank (stable, drift)")->capture_default_str();
  simulate->add_option("--r0", sim.spec.drift_rank, "number of drifting basis columns")->capture_default_str();
  simulate->add_option("--t-p", sim.spec.piece_length, "drift interpolation period")->capture_default_str();
  simulate->add_option("--ranks", sim.ranks, "comma-separated rank per piece (changepoints)");
  simulate->add_option("--cps", sim.cps, "comma-separated change points (changepoints)");
  simulate->add_option("--format", sim.format, "csv | raw-f64")->capture_default_str();
  simulate->add_option("--out-dir", sim.out_dir);

  PcpOptions pcp;
  orpca_pcp_config_default(&pcp.pcp);
  auto* pcp_cmd = app.add_subcommand("pcp", "batch principal component pursuit of a whole file");
  pcp_cmd->add_option("input", pcp.input, "samples, one per row (csv) or record (raw-f64)")->required();
  pcp_cmd->add_option("--format", pcp.format, "input format: csv | raw-f64 (default: by extension)");
  pcp_cmd->add_option("--lambda", pcp.lambda, "default 1/sqrt(max(m, n))");
  pcp_cmd->add_option("--mu", pcp.mu, "default m n / (4 ||M||_1)");
  pcp_cmd->add_option("--tol", pcp.pcp.tol)->capture_default_str();
  pcp_cmd->add_option("--max-iter", pcp.pcp.max_iter)->capture_default_str();
  pcp_cmd->add_option("--out-format", pcp.out_format, "csv | raw-f64")->capture_default_str();
  pcp_cmd->add_option("--out-dir", pcp.out_dir);

  TrackOptions track;
  orpca_cp_config_default(&track.cp);
  auto* track_cmd = app.add_subcommand("track", "online decomposition of a stream");
  track_cmd->add_option("input", track.input, "samples, one per row (csv) or record (raw-f64)")->required();
  track_cmd->add_option("--mode", track.mode, "stoc | omw | omw-cp")->capture_default_str();
  track_cmd->add_option("--format", track.format, "input format: csv | raw-f64 (default: by extension)");
  track_cmd->add_option("--burnin", track.burnin, "separate burn-in block (default: the first n_burnin samples)");
  add_cp_flags(track_cmd, track.cp, &track.rule_of_thumb);
  track_cmd->add_flag("--no-detect", track.no_detect, "omw-cp: monitor support sizes without restarting");
  track_cmd->add_option("--stoc-zero-rank", track.stoc_zero_rank, "stoc: start from U = 0 with this rank");
  track_cmd->add_option("--save-state", track.save_state, "write a snapshot when input ends or --stop-after hits");
  track_cmd->add_option("--load-state", track.load_state, "resume from a snapshot at its sample cursor");
  track_cmd->add_option("--stop-after", track.stop_after, "consume at most this many samples");
  track_cmd->add_option("--out-format", track.out_format, "csv | raw-f64")->capture_default_str();
  track_cmd->add_option("--out-dir", track.out_dir);

  BenchOptions bench;
  auto* bench_cmd = app.add_subcommand("bench", "per-step cost and state size of an online tracker");
  bench_cmd->add_option("--m", bench.m)->capture_default_str();
  bench_cmd->add_option("--rank", bench.rank)->capture_default_str();
  bench_cmd->add_option("--T", bench.T)->capture_default_str();
  bench_cmd->add_option("--n-win", bench.n_win)->capture_default_str();
  bench_cmd->add_option("--rho", bench.rho)->capture_default_str();
  bench_cmd->add_option("--seed", bench.seed)->capture_default_str();
  bench_cmd->add_option("--mode", bench.mode, "stoc | omw | omw-cp")->capture_default_str();
  bench_cmd->add_option("--out-dir", bench.out_dir);

  ExperimentOptions exp;
  auto* exp_cmd = app.add_subcommand("experiment", "run a simulation study: stoc, omw and omw-cp on one dataset");
  exp_cmd->add_option("--study", exp.study, "1 stable, 2 drift, 3 change points")
      ->check(CLI::Range(1, 3))
      ->capture_default_str();
  exp_cmd->add_option("--scale", exp.scale, "desk | paper")->capture_default_str();
  exp_cmd->add_option("--seed", exp.seed)->capture_default_str();
  exp_cmd->add_option("--out-dir", exp.out_dir);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kContract;
  }

  try {
    if (*simulate) return run_simulate(sim);
    if (*pcp_cmd) return run_pcp(pcp);
    if (*track_cmd) return run_track(track);
    if (*bench_cmd) return run_bench(bench);
    if (*exp_cmd) return run_experiment_cmd(exp);
  } catch (const Failure& f) {
    std::cerr << "error: " << f.message << "\n";
    return exit_code(f.status);
  }
  return kOk;
}
