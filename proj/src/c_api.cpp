#include <orpca/orpca.h>

#include <orpca/experiment.hpp>
#include <orpca/metrics.hpp>
#include <orpca/pcp.hpp>
#include <orpca/session.hpp>
#include <orpca/simgen.hpp>
#include <orpca/stream.hpp>

#include <cmath>
#include <cstring>
#include <deque>
#include <fstream>
#include <iterator>
#include <limits>
#include <memory>
#include <new>
#include <string>
#include <vector>

using namespace orpca;

struct orpca_matrix {
  Matrix value;
};

struct orpca_stream {
  std::unique_ptr<ObservationStream> stream;
};

struct orpca_writer {
  std::unique_ptr<SampleWriter> writer;
};

struct orpca_tracker {
  OnlineSession session;
  std::deque<CpOutput> queue;
};

struct orpca_sim {
  GroundTruth truth;
};

struct orpca_experiment {
  ExperimentResult result;
  std::string reports;
};

namespace {

thread_local std::string last_error;
thread_local std::vector<std::string> advisory_cache;

orpca_status status_of(Errc code) {
  switch (code) {
    case Errc::contract_violation: return ORPCA_ERR_CONTRACT;
    case Errc::io: return ORPCA_ERR_IO;
    case Errc::parse: return ORPCA_ERR_PARSE;
    case Errc::numerical: return ORPCA_ERR_NUMERICAL;
    case Errc::version: return ORPCA_ERR_VERSION;
    case Errc::corrupt: return ORPCA_ERR_CORRUPT;
    case Errc::initialization: return ORPCA_ERR_INIT;
  }
  return ORPCA_ERR_INTERNAL;
}

template <typename F>
orpca_status guarded(F&& body) {
  try {
    body();
    last_error.clear();
    return ORPCA_OK;
  } catch (const Error& e) {
    last_error = e.what();
    return status_of(e.code());
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
    return ORPCA_ERR_INTERNAL;
  } catch (const std::exception& e) {
    last_error = e.what();
    return ORPCA_ERR_INTERNAL;
  }
}

void need(const void* p, const char* name) {
  if (!p) fail(Errc::contract_violation, std::string(name) + " must not be NULL");
}

StreamFormat format_of(const char* format, const char* path) {
  return format ? parse_stream_format(format) : guess_stream_format(path);
}

std::optional<double> nan_is_default(double x) {
  if (std::isnan(x)) return std::nullopt;
  return x;
}

PcpConfig from_c(const orpca_pcp_config& c) {
  PcpConfig p;
  p.lambda = nan_is_default(c.lambda);
  p.mu = nan_is_default(c.mu);
  p.tol = c.tol;
  p.max_iter = c.max_iter;
  return p;
}

orpca_pcp_config to_c(const PcpConfig& p) {
  orpca_pcp_config c;
  c.lambda = p.lambda.value_or(std::numeric_limits<double>::quiet_NaN());
  c.mu = p.mu.value_or(std::numeric_limits<double>::quiet_NaN());
  c.tol = p.tol;
  c.max_iter = p.max_iter;
  return c;
}

TrackerConfig from_c(const orpca_tracker_config& c) {
  TrackerConfig t;
  t.lambda1 = c.lambda1;
  t.lambda2 = c.lambda2;
  t.n_win = c.n_win;
  t.n_burnin = c.n_burnin;
  t.projection.tol = c.projection_tol;
  t.projection.max_iter = c.projection_max_iter;
  t.pcp = from_c(c.pcp);
  t.rank_tol = c.rank_tol;
  t.basis_sweeps = c.basis_sweeps;
  t.drift_period = c.drift_period;
  return t;
}

orpca_tracker_config to_c(const TrackerConfig& t) {
  orpca_tracker_config c;
  c.lambda1 = t.lambda1;
  c.lambda2 = t.lambda2;
  c.n_win = t.n_win;
  c.n_burnin = t.n_burnin;
  c.projection_tol = t.projection.tol;
  c.projection_max_iter = t.projection.max_iter;
  c.pcp = to_c(t.pcp);
  c.rank_tol = t.rank_tol;
  c.basis_sweeps = t.basis_sweeps;
  c.drift_period = t.drift_period;
  return c;
}

CpConfig from_c(const orpca_cp_config& c) {
  require(c.n_check >= 0 && c.n_positive >= 0, "n_check and n_positive must be nonnegative");
  CpConfig p;
  p.tracker = from_c(c.tracker);
  p.n_cp_burnin = c.n_cp_burnin;
  p.n_test = c.n_test;
  p.n_check = static_cast<std::size_t>(c.n_check);
  p.alpha = c.alpha;
  p.alpha_prop = c.alpha_prop;
  p.n_positive = static_cast<std::size_t>(c.n_positive);
  p.n_tol = c.n_tol;
  p.zero_eps = c.zero_eps;
  return p;
}

orpca_cp_config to_c(const CpConfig& p) {
  orpca_cp_config c;
  c.tracker = to_c(p.tracker);
  c.n_cp_burnin = p.n_cp_burnin;
  c.n_test = p.n_test;
  c.n_check = static_cast<int64_t>(p.n_check);
  c.alpha = p.alpha;
  c.alpha_prop = p.alpha_prop;
  c.n_positive = static_cast<int64_t>(p.n_positive);
  c.n_tol = p.n_tol;
  c.zero_eps = p.zero_eps;
  return c;
}

template <typename T>
void copy_out(const std::vector<T>& src, int64_t* buf, size_t cap, size_t* count) {
  need(count, "count");
  *count = src.size();
  if (cap > 0) need(buf, "buf");
  for (size_t i = 0; i < src.size() && i < cap; ++i) buf[i] = static_cast<int64_t>(src[i]);
}

void fill_queue(orpca_tracker* t) {
  for (CpOutput& o : t->session.take_outputs()) t->queue.push_back(std::move(o));
}

}  // namespace

extern "C" {

const char* orpca_last_error(void) { return last_error.c_str(); }

const char* orpca_version(void) { return "1.0.0"; }

// ---------------------------------------------------------------- matrices

orpca_status orpca_matrix_create(int64_t rows, int64_t cols, const double* data, orpca_matrix** out) {
  return guarded([&] {
    need(out, "out");
    require(rows >= 0 && cols >= 0, "matrix dimensions must be nonnegative");
    auto m = std::make_unique<orpca_matrix>();
    if (data)
      m->value = Eigen::Map<const Matrix>(data, rows, cols);
    else
      m->value = Matrix::Zero(rows, cols);
    *out = m.release();
  });
}

void orpca_matrix_free(orpca_matrix* m) { delete m; }
int64_t orpca_matrix_rows(const orpca_matrix* m) { return m ? m->value.rows() : 0; }
int64_t orpca_matrix_cols(const orpca_matrix* m) { return m ? m->value.cols() : 0; }
const double* orpca_matrix_data(const orpca_matrix* m) { return m ? m->value.data() : nullptr; }

orpca_status orpca_matrix_read(const char* path, const char* format, orpca_matrix** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    auto m = std::make_unique<orpca_matrix>();
    m->value = read_samples(path, format_of(format, path));
    *out = m.release();
  });
}

orpca_status orpca_matrix_write(const orpca_matrix* m, const char* path, const char* format) {
  return guarded([&] {
    need(m, "matrix");
    need(path, "path");
    write_samples(path, m->value, format_of(format, path));
  });
}

// ---------------------------------------------------------------- streams

orpca_status orpca_stream_open(const char* path, const char* format, orpca_stream** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    auto s = std::make_unique<orpca_stream>();
    s->stream = ingest_stream(path, format_of(format, path));
    *out = s.release();
  });
}

void orpca_stream_free(orpca_stream* s) { delete s; }
int64_t orpca_stream_dim(const orpca_stream* s) { return s ? s->stream->dim() : 0; }
int64_t orpca_stream_position(const orpca_stream* s) { return s ? s->stream->position() : 0; }

orpca_status orpca_stream_next(orpca_stream* s, double* buf, int* has_sample) {
  return guarded([&] {
    need(s, "stream");
    need(has_sample, "has_sample");
    *has_sample = 0;
    auto v = s->stream->next();
    if (!v) return;
    need(buf, "buf");
    std::memcpy(buf, v->data(), sizeof(double) * static_cast<size_t>(v->size()));
    *has_sample = 1;
  });
}

orpca_status orpca_stream_rewind(orpca_stream* s, int64_t position) {
  return guarded([&] {
    need(s, "stream");
    s->stream->rewind(position);
  });
}

orpca_status orpca_writer_open(const char* path, const char* format, int64_t dim, orpca_writer** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    auto w = std::make_unique<orpca_writer>();
    w->writer = std::make_unique<SampleWriter>(path, format_of(format, path), dim);
    *out = w.release();
  });
}

orpca_status orpca_writer_append(orpca_writer* w, const double* sample) {
  return guarded([&] {
    need(w, "writer");
    need(sample, "sample");
    w->writer->append(sample);
  });
}

orpca_status orpca_writer_close(orpca_writer* w) {
  return guarded([&] {
    need(w, "writer");
    w->writer->close();
  });
}

void orpca_writer_free(orpca_writer* w) { delete w; }

// ---------------------------------------------------------------- config

void orpca_pcp_config_default(orpca_pcp_config* c) {
  if (c) *c = to_c(PcpConfig{});
}

void orpca_tracker_config_default(orpca_tracker_config* c) {
  if (c) *c = to_c(TrackerConfig{});
}

void orpca_cp_config_default(orpca_cp_config* c) {
  if (c) *c = to_c(CpConfig{});
}

void orpca_cp_config_rule_of_thumb(orpca_cp_config* c, int64_t m, int64_t n_win) {
  if (!c) return;
  const TrackerConfig t = TrackerConfig::rule_of_thumb(m, n_win);
  c->tracker.lambda1 = t.lambda1;
  c->tracker.lambda2 = t.lambda2;
  c->tracker.n_win = t.n_win;
  c->tracker.n_burnin = t.n_burnin;
}

orpca_status orpca_cp_config_validate(const orpca_cp_config* c) {
  return guarded([&] {
    need(c, "config");
    from_c(*c).validate();
  });
}

size_t orpca_cp_config_advisory_count(const orpca_cp_config* c) {
  if (!c) return 0;
  try {
    advisory_cache = from_c(*c).advisories();
  } catch (...) {
    advisory_cache.clear();
  }
  return advisory_cache.size();
}

const char* orpca_cp_config_advisory(const orpca_cp_config* c, size_t i) {
  if (!c) return nullptr;
  orpca_cp_config_advisory_count(c);
  return i < advisory_cache.size() ? advisory_cache[i].c_str() : nullptr;
}

// ---------------------------------------------------------------- pcp

orpca_status orpca_pcp(const orpca_matrix* m, const orpca_pcp_config* config, orpca_matrix** low_rank,
                       orpca_matrix** sparse, orpca_pcp_info* info) {
  return guarded([&] {
    need(m, "matrix");
    need(low_rank, "low_rank");
    need(sparse, "sparse");
    const PcpConfig cfg = config ? from_c(*config) : PcpConfig{};
    PcpResult res = pcp_alm(m->value, cfg);
    auto l = std::make_unique<orpca_matrix>();
    auto s = std::make_unique<orpca_matrix>();
    if (info) {
      info->iterations = res.iterations;
      info->converged = res.converged ? 1 : 0;
      info->lambda = res.lambda;
      info->mu = res.mu;
      info->rank = res.low_rank.size() ? estimate_rank(res.low_rank) : 0;
    }
    l->value = std::move(res.low_rank);
    s->value = std::move(res.sparse);
    *low_rank = l.release();
    *sparse = s.release();
  });
}

// ---------------------------------------------------------------- trackers

const char* orpca_phase_name(orpca_phase phase) {
  if (phase < ORPCA_PHASE_BURNIN || phase > ORPCA_PHASE_TRACKING) return "unknown";
  return to_string(static_cast<CpPhase>(phase));
}

orpca_status orpca_mode_parse(const char* name, orpca_mode* out) {
  return guarded([&] {
    need(name, "name");
    need(out, "out");
    *out = static_cast<orpca_mode>(parse_session_mode(name));
  });
}

orpca_status orpca_tracker_create(orpca_mode mode, int64_t dim, const orpca_cp_config* config,
                                  const orpca_matrix* burnin, int detection_enabled, int64_t stoc_zero_rank,
                                  orpca_tracker** out) {
  return guarded([&] {
    need(out, "out");
    require(mode >= ORPCA_MODE_STOC && mode <= ORPCA_MODE_OMW_CP, "unknown tracker mode");
    const CpConfig cfg = config ? from_c(*config) : CpConfig{};
    std::optional<Matrix> block;
    if (burnin) block = burnin->value;
    *out = new orpca_tracker{OnlineSession(static_cast<SessionMode>(mode), dim, cfg, block, detection_enabled != 0,
                                           stoc_zero_rank),
                             {}};
  });
}

void orpca_tracker_free(orpca_tracker* t) { delete t; }

orpca_status orpca_tracker_push(orpca_tracker* t, const double* sample) {
  return guarded([&] {
    need(t, "tracker");
    need(sample, "sample");
    t->session.push(Eigen::Map<const Vector>(sample, t->session.dim()));
    fill_queue(t);
  });
}

orpca_status orpca_tracker_finish(orpca_tracker* t) {
  return guarded([&] {
    need(t, "tracker");
    t->session.finish();
    fill_queue(t);
  });
}

orpca_status orpca_tracker_pop(orpca_tracker* t, double* low_rank, double* sparse, orpca_diag* diag,
                               int* available) {
  return guarded([&] {
    need(t, "tracker");
    need(available, "available");
    *available = 0;
    if (t->queue.empty()) return;
    const CpOutput& o = t->queue.front();
    const size_t bytes = sizeof(double) * static_cast<size_t>(o.low_rank.size());
    if (low_rank) std::memcpy(low_rank, o.low_rank.data(), bytes);
    if (sparse) std::memcpy(sparse, o.sparse.data(), bytes);
    if (diag) {
      diag->t = o.diag.t;
      diag->support = o.diag.support;
      diag->p_value = o.diag.p.value_or(std::numeric_limits<double>::quiet_NaN());
      diag->flag = o.diag.flag.value_or(-1);
      diag->phase = static_cast<orpca_phase>(o.diag.phase);
    }
    t->queue.pop_front();
    *available = 1;
  });
}

int64_t orpca_tracker_dim(const orpca_tracker* t) { return t ? t->session.dim() : 0; }
orpca_mode orpca_tracker_mode(const orpca_tracker* t) {
  return t ? static_cast<orpca_mode>(t->session.mode()) : ORPCA_MODE_OMW;
}
int64_t orpca_tracker_rank(const orpca_tracker* t) { return t ? t->session.rank() : 0; }
uint64_t orpca_tracker_cursor(const orpca_tracker* t) { return t ? t->session.cursor() : 0; }
int64_t orpca_tracker_batch_tail(const orpca_tracker* t) { return t ? t->session.batch_tail() : 0; }
uint64_t orpca_tracker_state_elements(const orpca_tracker* t) { return t ? t->session.state_element_count() : 0; }

orpca_status orpca_tracker_change_points(const orpca_tracker* t, int64_t* buf, size_t cap, size_t* count) {
  return guarded([&] {
    need(t, "tracker");
    copy_out(t->session.change_points(), buf, cap, count);
  });
}

orpca_status orpca_tracker_detection_times(const orpca_tracker* t, int64_t* buf, size_t cap, size_t* count) {
  return guarded([&] {
    need(t, "tracker");
    std::vector<Index> at;
    for (const Detection& d : t->session.detections()) at.push_back(d.detected_at);
    copy_out(at, buf, cap, count);
  });
}

orpca_status orpca_tracker_segments(const orpca_tracker* t, int64_t* starts, int64_t* ranks, size_t cap,
                                    size_t* count) {
  return guarded([&] {
    need(t, "tracker");
    need(count, "count");
    const auto segs = t->session.segments();
    *count = segs.size();
    if (cap > 0) {
      need(starts, "starts");
      need(ranks, "ranks");
    }
    for (size_t i = 0; i < segs.size() && i < cap; ++i) {
      starts[i] = segs[i].start;
      ranks[i] = segs[i].rank;
    }
  });
}

orpca_status orpca_tracker_save(const orpca_tracker* t, const char* path) {
  return guarded([&] {
    need(t, "tracker");
    need(path, "path");
    require(t->queue.empty(), "tracker: pop all outputs before saving");
    save_snapshot(path, t->session.snapshot());
  });
}

orpca_status orpca_tracker_load(const char* path, orpca_tracker** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(Errc::io, std::string("cannot open ") + path);
    const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    try {
      *out = new orpca_tracker{OnlineSession::restore(bytes), {}};
    } catch (const Error& e) {
      throw Error(e.code(), std::string(path) + ": " + e.what());
    }
    fill_queue(*out);
  });
}

// ---------------------------------------------------------------- simulation

void orpca_sim_spec_default(orpca_sim_spec* s) {
  if (!s) return;
  const SimSpec d;
  *s = orpca_sim_spec{};
  s->m = d.m;
  s->T = d.T;
  s->n_burnin = d.n_burnin;
  s->rho = d.rho;
  s->seed = d.seed;
  s->sparse_magnitude = d.sparse_magnitude;
  s->variant = ORPCA_SIM_STABLE;
  s->rank = 5;
  s->drift_rank = 5;
  s->piece_length = 250;
}

orpca_status orpca_simulate(const orpca_sim_spec* spec, orpca_sim** out) {
  return guarded([&] {
    need(spec, "spec");
    need(out, "out");
    SimSpec s;
    s.m = spec->m;
    s.T = spec->T;
    s.n_burnin = spec->n_burnin;
    s.rho = spec->rho;
    s.seed = spec->seed;
    s.sparse_magnitude = spec->sparse_magnitude;
    switch (spec->variant) {
      case ORPCA_SIM_STABLE: s.variant = StableVariant{spec->rank}; break;
      case ORPCA_SIM_DRIFT: s.variant = DriftVariant{spec->rank, spec->drift_rank, spec->piece_length}; break;
      case ORPCA_SIM_CHANGEPOINTS: {
        ChangePointVariant v;
        if (spec->n_change_points > 0) need(spec->change_points, "change_points");
        need(spec->ranks, "ranks");
        v.ranks.assign(spec->ranks, spec->ranks + spec->n_change_points + 1);
        if (spec->n_change_points > 0)
          v.change_points.assign(spec->change_points, spec->change_points + spec->n_change_points);
        v.drift_rank = spec->drift_rank;
        v.piece_length = spec->piece_length;
        s.variant = v;
        break;
      }
      default: fail(Errc::contract_violation, "unknown simulation variant");
    }
    auto sim = std::make_unique<orpca_sim>();
    sim->truth = generate(s);
    *out = sim.release();
  });
}

void orpca_sim_free(orpca_sim* s) { delete s; }

orpca_status orpca_sim_matrix(const orpca_sim* s, orpca_sim_part part, orpca_matrix** out) {
  return guarded([&] {
    need(s, "sim");
    need(out, "out");
    const GroundTruth& g = s->truth;
    const Matrix* src = nullptr;
    switch (part) {
      case ORPCA_SIM_M: src = &g.M; break;
      case ORPCA_SIM_L: src = &g.L; break;
      case ORPCA_SIM_S: src = &g.S; break;
      case ORPCA_SIM_BURNIN: src = &g.burnin; break;
      case ORPCA_SIM_BURNIN_L: src = &g.burnin_low_rank; break;
      case ORPCA_SIM_BURNIN_S: src = &g.burnin_sparse; break;
      default: fail(Errc::contract_violation, "unknown simulation part");
    }
    *out = new orpca_matrix{*src};
  });
}

orpca_status orpca_sim_change_points(const orpca_sim* s, int64_t* buf, size_t cap, size_t* count) {
  return guarded([&] {
    need(s, "sim");
    copy_out(s->truth.change_points, buf, cap, count);
  });
}

// ---------------------------------------------------------------- metrics

orpca_status orpca_err_rel(const orpca_matrix* est, const orpca_matrix* truth, double* out) {
  return guarded([&] {
    need(est, "est");
    need(truth, "truth");
    need(out, "out");
    *out = err_rel(est->value, truth->value);
  });
}

orpca_status orpca_support_mismatch(const orpca_matrix* est, const orpca_matrix* truth, double zero_eps,
                                    double* out) {
  return guarded([&] {
    need(est, "est");
    need(truth, "truth");
    need(out, "out");
    *out = support_mismatch(est->value, truth->value, zero_eps);
  });
}

// ---------------------------------------------------------------- experiments

orpca_status orpca_experiment_run(int study, const char* scale, uint64_t seed, orpca_experiment** out) {
  return guarded([&] {
    need(out, "out");
    auto e = std::make_unique<orpca_experiment>();
    e->result = run_experiment(study_setup(study, parse_scale(scale ? scale : "desk"), seed));
    e->reports = experiment_reports_jsonl(e->result);
    *out = e.release();
  });
}

void orpca_experiment_free(orpca_experiment* e) { delete e; }

orpca_status orpca_experiment_write(const orpca_experiment* e, const char* dir) {
  return guarded([&] {
    need(e, "experiment");
    need(dir, "dir");
    write_experiment(e->result, dir);
  });
}

const char* orpca_experiment_reports(const orpca_experiment* e) { return e ? e->reports.c_str() : nullptr; }

size_t orpca_experiment_warning_count(const orpca_experiment* e) { return e ? e->result.warnings.size() : 0; }

const char* orpca_experiment_warning(const orpca_experiment* e, size_t i) {
  if (!e || i >= e->result.warnings.size()) return nullptr;
  return e->result.warnings[i].c_str();
}

}  // extern "C"
