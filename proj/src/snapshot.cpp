#include <orpca/snapshot.hpp>

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

namespace orpca {

static_assert(std::endian::native == std::endian::little, "snapshot encoding assumes a little-endian host");

namespace {

constexpr char kMagic[8] = {'O', 'R', 'P', 'C', 'A', 'S', 'N', 'P'};

std::uint64_t fnv1a(const char* data, std::size_t n) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (std::size_t i = 0; i < n; ++i) {
    h ^= static_cast<unsigned char>(data[i]);
    h *= 0x100000001b3ULL;
  }
  return h;
}

class Writer {
 public:
  template <typename T>
  void pod(T x) {
    static_assert(std::is_trivially_copyable_v<T>);
    buf_.append(reinterpret_cast<const char*>(&x), sizeof(T));
  }
  void u64(std::uint64_t x) { pod(x); }
  void i64(std::int64_t x) { pod(x); }
  void f64(double x) { pod(x); }
  void boolean(bool b) { pod(static_cast<std::uint8_t>(b)); }
  void opt_f64(const std::optional<double>& x) {
    boolean(x.has_value());
    if (x) f64(*x);
  }
  void matrix(const Matrix& a) {
    i64(a.rows());
    i64(a.cols());
    buf_.append(reinterpret_cast<const char*>(a.data()), sizeof(double) * static_cast<std::size_t>(a.size()));
  }
  void vector(const Vector& v) {
    i64(v.size());
    buf_.append(reinterpret_cast<const char*>(v.data()), sizeof(double) * static_cast<std::size_t>(v.size()));
  }
  std::string take() { return std::move(buf_); }

 private:
  std::string buf_;
};

class Reader {
 public:
  Reader(const char* data, std::size_t n) : p_(data), end_(data + n) {}

  template <typename T>
  T pod() {
    need(sizeof(T));
    T x;
    std::memcpy(&x, p_, sizeof(T));
    p_ += sizeof(T);
    return x;
  }
  std::uint64_t u64() { return pod<std::uint64_t>(); }
  std::int64_t i64() { return pod<std::int64_t>(); }
  double f64() { return pod<double>(); }
  bool boolean() {
    const auto b = pod<std::uint8_t>();
    if (b > 1) corrupt("bad boolean");
    return b == 1;
  }
  std::optional<double> opt_f64() {
    if (!boolean()) return std::nullopt;
    return f64();
  }
  Index count() {
    const std::int64_t n = i64();
    if (n < 0 || static_cast<std::uint64_t>(n) > remaining()) corrupt("bad length " + std::to_string(n));
    return n;
  }
  Matrix matrix() {
    const std::int64_t r = i64(), c = i64();
    if (r < 0 || c < 0 || (r > 0 && static_cast<std::uint64_t>(c) > remaining() / 8 / static_cast<std::uint64_t>(r)))
      corrupt("bad matrix shape");
    Matrix a(r, c);
    raw(a.data(), static_cast<std::size_t>(a.size()));
    return a;
  }
  Vector vector() {
    const std::int64_t n = i64();
    if (n < 0 || static_cast<std::uint64_t>(n) > remaining() / 8) corrupt("bad vector length");
    Vector v(n);
    raw(v.data(), static_cast<std::size_t>(n));
    return v;
  }
  bool done() const { return p_ == end_; }

  [[noreturn]] static void corrupt(const std::string& what) { fail(Errc::corrupt, "corrupt snapshot: " + what); }

 private:
  std::size_t remaining() const { return static_cast<std::size_t>(end_ - p_); }
  void need(std::size_t n) {
    if (remaining() < n) corrupt("unexpected end of data");
  }
  void raw(double* dst, std::size_t n) {
    need(n * sizeof(double));
    std::memcpy(dst, p_, n * sizeof(double));
    p_ += n * sizeof(double);
  }

  const char* p_;
  const char* end_;
};

// ---- component encoders ----

void put(Writer& w, const ProjectionConfig& c) {
  w.f64(c.tol);
  w.i64(c.max_iter);
}
ProjectionConfig get_projection(Reader& r) {
  ProjectionConfig c;
  c.tol = r.f64();
  c.max_iter = static_cast<int>(r.i64());
  return c;
}

void put(Writer& w, const PcpConfig& c) {
  w.opt_f64(c.lambda);
  w.opt_f64(c.mu);
  w.f64(c.tol);
  w.i64(c.max_iter);
}
PcpConfig get_pcp(Reader& r) {
  PcpConfig c;
  c.lambda = r.opt_f64();
  c.mu = r.opt_f64();
  c.tol = r.f64();
  c.max_iter = static_cast<int>(r.i64());
  return c;
}

void put(Writer& w, const TrackerConfig& c) {
  w.f64(c.lambda1);
  w.f64(c.lambda2);
  w.i64(c.n_win);
  w.i64(c.n_burnin);
  put(w, c.projection);
  put(w, c.pcp);
  w.f64(c.rank_tol);
  w.i64(c.basis_sweeps);
  w.i64(c.drift_period);
}
TrackerConfig get_tracker_config(Reader& r) {
  TrackerConfig c;
  c.lambda1 = r.f64();
  c.lambda2 = r.f64();
  c.n_win = r.i64();
  c.n_burnin = r.i64();
  c.projection = get_projection(r);
  c.pcp = get_pcp(r);
  c.rank_tol = r.f64();
  c.basis_sweeps = static_cast<int>(r.i64());
  c.drift_period = r.i64();
  return c;
}

void put(Writer& w, const CpConfig& c) {
  put(w, c.tracker);
  w.i64(c.n_cp_burnin);
  w.i64(c.n_test);
  w.u64(c.n_check);
  w.f64(c.alpha);
  w.f64(c.alpha_prop);
  w.u64(c.n_positive);
  w.i64(c.n_tol);
  w.f64(c.zero_eps);
}
CpConfig get_cp_config(Reader& r) {
  CpConfig c;
  c.tracker = get_tracker_config(r);
  c.n_cp_burnin = r.i64();
  c.n_test = r.i64();
  c.n_check = r.u64();
  c.alpha = r.f64();
  c.alpha_prop = r.f64();
  c.n_positive = r.u64();
  c.n_tol = r.i64();
  c.zero_eps = r.f64();
  return c;
}

void put(Writer& w, const SubspaceModel& m) {
  w.matrix(m.basis);
  w.matrix(m.accum_a);
  w.matrix(m.accum_b);
  w.f64(m.lambda1);
  w.f64(m.lambda2);
  w.u64(m.t);
}
SubspaceModel get_model(Reader& r) {
  SubspaceModel m;
  m.basis = r.matrix();
  m.accum_a = r.matrix();
  m.accum_b = r.matrix();
  m.lambda1 = r.f64();
  m.lambda2 = r.f64();
  m.t = r.u64();
  const Index k = m.basis.cols();
  if (m.accum_a.rows() != k || m.accum_a.cols() != k || m.accum_b.rows() != m.basis.rows() || m.accum_b.cols() != k)
    Reader::corrupt("inconsistent model shapes");
  return m;
}

void put(Writer& w, const WindowBuffer& b) {
  w.u64(b.capacity());
  w.u64(b.size());
  for (std::size_t i = 0; i < b.size(); ++i) {
    const WindowEntry& e = b.at(i);
    w.vector(e.sample);
    w.vector(e.coeffs);
    w.vector(e.sparse);
  }
}
WindowBuffer get_window(Reader& r) {
  const std::uint64_t cap = r.u64();
  const std::uint64_t n = r.u64();
  if (cap == 0 || n > cap || cap > (1ULL << 32)) Reader::corrupt("bad window size");
  WindowBuffer b(cap);
  for (std::uint64_t i = 0; i < n; ++i) {
    WindowEntry e;
    e.sample = r.vector();
    e.coeffs = r.vector();
    e.sparse = r.vector();
    b.push(std::move(e));
  }
  return b;
}

void put(Writer& w, const OmwTracker::State& s) {
  put(w, s.model);
  put(w, s.window);
  w.matrix(s.shadow_a);
  w.matrix(s.shadow_b);
  w.i64(s.drift_period);
  put(w, s.projection);
  w.i64(s.basis_sweeps);
}
OmwTracker::State get_omw_state(Reader& r) {
  OmwTracker::State s;
  s.model = get_model(r);
  s.window = get_window(r);
  s.shadow_a = r.matrix();
  s.shadow_b = r.matrix();
  s.drift_period = r.i64();
  s.projection = get_projection(r);
  s.basis_sweeps = static_cast<int>(r.i64());
  return s;
}

void put(Writer& w, const CpDiagnostic& d) {
  w.i64(d.t);
  w.i64(d.support);
  w.opt_f64(d.p);
  w.boolean(d.flag.has_value());
  if (d.flag) w.i64(*d.flag);
  w.i64(static_cast<std::int64_t>(d.phase));
}
CpPhase get_phase(Reader& r) {
  const std::int64_t p = r.i64();
  if (p < 0 || p > static_cast<std::int64_t>(CpPhase::tracking)) Reader::corrupt("bad phase");
  return static_cast<CpPhase>(p);
}
CpDiagnostic get_diag(Reader& r) {
  CpDiagnostic d;
  d.t = r.i64();
  d.support = r.i64();
  d.p = r.opt_f64();
  if (r.boolean()) d.flag = static_cast<int>(r.i64());
  d.phase = get_phase(r);
  return d;
}

void put(Writer& w, const CpOutput& o) {
  w.i64(o.t);
  w.vector(o.low_rank);
  w.vector(o.sparse);
  put(w, o.diag);
}
CpOutput get_output(Reader& r) {
  CpOutput o;
  o.t = r.i64();
  o.low_rank = r.vector();
  o.sparse = r.vector();
  o.diag = get_diag(r);
  return o;
}

template <typename T, typename F>
void put_seq(Writer& w, const T& seq, F&& each) {
  w.u64(seq.size());
  for (const auto& x : seq) each(x);
}

void put(Writer& w, const ChangePointDetector::State& s) {
  put(w, s.config);
  w.boolean(s.detection_enabled);
  w.i64(s.dim);
  w.i64(static_cast<std::int64_t>(s.phase));
  w.i64(s.next_t);
  w.i64(s.phase_start);
  w.i64(s.pending_start);
  put_seq(w, s.pending, [&](const Vector& v) { w.vector(v); });
  w.boolean(s.tracker.has_value());
  if (s.tracker) put(w, s.tracker->state());
  put_seq(w, s.hist.counts(), [&](std::uint64_t c) { w.u64(c); });
  w.u64(s.buffers.capacity);
  put_seq(w, s.buffers.counts, [&](Index c) { w.i64(c); });
  put_seq(w, s.buffers.flags, [&](int f) { w.i64(f); });
  put_seq(w, s.buffers.times, [&](Index t) { w.i64(t); });
  put_seq(w, s.provisional, [&](const ChangePointDetector::Provisional& p) {
    w.vector(p.sample);
    put(w, p.output);
  });
  put_seq(w, s.ready, [&](const CpOutput& o) { put(w, o); });
  put_seq(w, s.change_points, [&](Index t) { w.i64(t); });
  put_seq(w, s.detections, [&](const Detection& d) {
    w.i64(d.change_point);
    w.i64(d.detected_at);
  });
  put_seq(w, s.segments, [&](const DecompositionResult::Segment& g) {
    w.i64(g.start);
    w.i64(g.rank);
  });
  w.i64(s.batch_tail);
  w.boolean(s.finished);
}

ChangePointDetector::State get_cp_state(Reader& r) {
  ChangePointDetector::State s;
  s.config = get_cp_config(r);
  s.detection_enabled = r.boolean();
  s.dim = r.i64();
  s.phase = get_phase(r);
  s.next_t = r.i64();
  s.phase_start = r.i64();
  s.pending_start = r.i64();
  for (Index n = r.count(), i = 0; i < n; ++i) s.pending.push_back(r.vector());
  if (r.boolean()) s.tracker.emplace(get_omw_state(r));
  {
    std::vector<std::uint64_t> counts;
    for (Index n = r.count(), i = 0; i < n; ++i) counts.push_back(r.u64());
    s.hist = SupportHistogram::from_counts(std::move(counts));
  }
  s.buffers.capacity = r.u64();
  for (Index n = r.count(), i = 0; i < n; ++i) s.buffers.counts.push_back(r.i64());
  for (Index n = r.count(), i = 0; i < n; ++i) s.buffers.flags.push_back(static_cast<int>(r.i64()));
  for (Index n = r.count(), i = 0; i < n; ++i) s.buffers.times.push_back(r.i64());
  if (s.buffers.counts.size() != s.buffers.flags.size() || s.buffers.flags.size() != s.buffers.times.size())
    Reader::corrupt("flag buffers disagree in length");
  for (Index n = r.count(), i = 0; i < n; ++i) {
    ChangePointDetector::Provisional p;
    p.sample = r.vector();
    p.output = get_output(r);
    s.provisional.push_back(std::move(p));
  }
  for (Index n = r.count(), i = 0; i < n; ++i) s.ready.push_back(get_output(r));
  for (Index n = r.count(), i = 0; i < n; ++i) s.change_points.push_back(r.i64());
  for (Index n = r.count(), i = 0; i < n; ++i) {
    Detection d;
    d.change_point = r.i64();
    d.detected_at = r.i64();
    s.detections.push_back(d);
  }
  for (Index n = r.count(), i = 0; i < n; ++i) {
    DecompositionResult::Segment g;
    g.start = r.i64();
    g.rank = r.i64();
    s.segments.push_back(g);
  }
  s.batch_tail = r.i64();
  s.finished = r.boolean();
  return s;
}

std::string frame(SnapshotKind kind, std::uint64_t cursor, const std::string& body) {
  Writer payload;
  payload.u64(cursor);
  std::string p = payload.take() + body;
  Writer w;
  std::string out(kMagic, sizeof kMagic);
  w.pod(kSnapshotVersion);
  w.pod(static_cast<std::uint32_t>(kind));
  w.u64(p.size());
  out += w.take();
  out += p;
  Writer tail;
  tail.u64(fnv1a(p.data(), p.size()));
  out += tail.take();
  return out;
}

}  // namespace

const char* to_string(SnapshotKind kind) {
  switch (kind) {
    case SnapshotKind::stoc: return "stoc";
    case SnapshotKind::omw: return "omw";
    case SnapshotKind::changepoint: return "omw-cp";
  }
  return "unknown";
}

std::string serialize_snapshot(const StocTracker& tracker, std::uint64_t cursor, double zero_eps) {
  Writer w;
  put(w, tracker.model());
  put(w, tracker.projection());
  w.i64(tracker.basis_sweeps());
  w.f64(zero_eps);
  return frame(SnapshotKind::stoc, cursor, w.take());
}

std::string serialize_snapshot(const OmwTracker& tracker, std::uint64_t cursor, double zero_eps) {
  Writer w;
  put(w, tracker.state());
  w.f64(zero_eps);
  return frame(SnapshotKind::omw, cursor, w.take());
}

std::string serialize_snapshot(const ChangePointDetector& detector, std::uint64_t cursor) {
  Writer w;
  put(w, detector.state());
  return frame(SnapshotKind::changepoint, cursor, w.take());
}

Snapshot deserialize_snapshot(const std::string& bytes) {
  constexpr std::size_t header = 8 + 4 + 4 + 8;
  if (bytes.size() < 8 || std::memcmp(bytes.data(), kMagic, 8) != 0) Reader::corrupt("bad magic");
  if (bytes.size() < header) Reader::corrupt("truncated header");
  Reader h(bytes.data() + 8, header - 8);
  const auto version = h.pod<std::uint32_t>();
  if (version != kSnapshotVersion)
    fail(Errc::version, "snapshot format version " + std::to_string(version) + " is not supported (this build reads version " +
                            std::to_string(kSnapshotVersion) + ")");
  const auto kind = h.pod<std::uint32_t>();
  const std::uint64_t len = h.u64();
  if (bytes.size() - header < 8 || len != bytes.size() - header - 8)
    Reader::corrupt("payload length " + std::to_string(len) + " does not match file size " + std::to_string(bytes.size()));
  const char* payload = bytes.data() + header;
  Reader tail(payload + len, 8);
  if (tail.u64() != fnv1a(payload, len)) Reader::corrupt("checksum mismatch");

  Reader r(payload, len);
  Snapshot snap;
  snap.cursor = r.u64();
  try {
  switch (kind) {
    case static_cast<std::uint32_t>(SnapshotKind::stoc): {
      snap.kind = SnapshotKind::stoc;
      SubspaceModel model = get_model(r);
      ProjectionConfig proj = get_projection(r);
      const int sweeps = static_cast<int>(r.i64());
      snap.zero_eps = r.f64();
      snap.stoc.emplace(std::move(model), proj, sweeps);
      break;
    }
    case static_cast<std::uint32_t>(SnapshotKind::omw):
      snap.kind = SnapshotKind::omw;
      snap.omw.emplace(get_omw_state(r));
      snap.zero_eps = r.f64();
      break;
    case static_cast<std::uint32_t>(SnapshotKind::changepoint):
      snap.kind = SnapshotKind::changepoint;
      snap.changepoint.emplace(get_cp_state(r));
      break;
    default:
      Reader::corrupt("unknown snapshot kind " + std::to_string(kind));
  }
  } catch (const Error& e) {
    // restored state that violates a tracker invariant means a damaged file
    if (e.code() == Errc::contract_violation) Reader::corrupt(e.what());
    throw;
  }
  if (!r.done()) Reader::corrupt("trailing bytes in payload");
  return snap;
}

void save_snapshot(const std::string& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(Errc::io, "cannot open " + path + " for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) fail(Errc::io, "write failed: " + path);
}

Snapshot load_snapshot(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(Errc::io, "cannot open " + path);
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  try {
    return deserialize_snapshot(bytes);
  } catch (const Error& e) {
    throw Error(e.code(), path + ": " + e.what());
  }
}

}  // namespace orpca
