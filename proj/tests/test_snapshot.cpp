#include <orpca/experiment.hpp>
#include <orpca/session.hpp>
#include <orpca/snapshot.hpp>

#include <gtest/gtest.h>

#include <cstring>
#include <filesystem>

using namespace orpca;

namespace {

struct Fixture {
  StudySetup setup;
  GroundTruth truth;
};

const Fixture& study3() {
  static const Fixture f = [] {
    Fixture x;
    x.setup = study_setup(3, Scale::desk, 21);
    x.truth = generate(x.setup.sim);
    return x;
  }();
  return f;
}

std::vector<CpOutput> drain(OnlineSession& s, const Matrix& m, Index from, Index to) {
  std::vector<CpOutput> out;
  for (Index t = from; t < to; ++t) {
    s.push(m.col(t));
    for (auto& o : s.take_outputs()) out.push_back(std::move(o));
  }
  return out;
}

void expect_identical(const std::vector<CpOutput>& a, const std::vector<CpOutput>& b) {
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    ASSERT_EQ(a[i].t, b[i].t);
    ASSERT_TRUE(a[i].low_rank == b[i].low_rank) << "t = " << a[i].t;
    ASSERT_TRUE(a[i].sparse == b[i].sparse) << "t = " << a[i].t;
    ASSERT_EQ(a[i].diag.support, b[i].diag.support);
    ASSERT_EQ(a[i].diag.p, b[i].diag.p);
    ASSERT_EQ(a[i].diag.flag, b[i].diag.flag);
  }
}

Errc code_of(const std::string& bytes) {
  try {
    deserialize_snapshot(bytes);
  } catch (const Error& e) {
    return e.code();
  }
  return Errc{};
}

}  // namespace

namespace orpca {
inline void PrintTo(SessionMode mode, std::ostream* os) { *os << to_string(mode); }
}  // namespace orpca

class SnapshotContinuation : public ::testing::TestWithParam<SessionMode> {};

TEST_P(SnapshotContinuation, RestoredSessionContinuesBitIdentically) {
  const Fixture& f = study3();
  const Matrix& m = f.truth.M;
  // cut inside the monitoring phase of the first segment and shortly before
  // the first change point, so the CP restart happens after the cut
  for (Index cut : {Index(350), Index(480)}) {
    OnlineSession a(GetParam(), m.rows(), f.setup.cp, f.truth.burnin);
    drain(a, m, 0, cut);
    const std::string bytes = a.snapshot();
    OnlineSession b = OnlineSession::restore(bytes);
    EXPECT_EQ(b.cursor(), static_cast<std::uint64_t>(cut));
    EXPECT_EQ(b.snapshot(), bytes);
    const auto ra = drain(a, m, cut, cut + 100);
    const auto rb = drain(b, m, cut, cut + 100);
    expect_identical(ra, rb);
    EXPECT_EQ(a.change_points(), b.change_points());
  }
}

INSTANTIATE_TEST_SUITE_P(Modes, SnapshotContinuation,
                         ::testing::Values(SessionMode::stoc, SessionMode::omw, SessionMode::omw_cp),
                         [](const auto& info) { return std::string(info.param == SessionMode::stoc  ? "stoc"
                                                                   : info.param == SessionMode::omw ? "omw"
                                                                                                    : "omw_cp"); });

TEST(Snapshot, FileRoundTrip) {
  const Fixture& f = study3();
  OnlineSession a(SessionMode::omw, f.truth.M.rows(), f.setup.cp, f.truth.burnin);
  drain(a, f.truth.M, 0, 50);
  const auto path = (std::filesystem::temp_directory_path() / "orpca_snapshot_roundtrip.bin").string();
  save_snapshot(path, a.snapshot());
  const Snapshot s = load_snapshot(path);
  EXPECT_EQ(s.kind, SnapshotKind::omw);
  EXPECT_EQ(s.cursor, 50u);
  ASSERT_TRUE(s.omw.has_value());
  EXPECT_EQ(s.omw->model().t, 50u);
  std::filesystem::remove(path);
}

TEST(Snapshot, TrackerSerializationPreservesState) {
  const Fixture& f = study3();
  const BurninInit init = burnin_initialize(f.truth.burnin, f.setup.cp.tracker.n_win);
  StocTracker t(init, 0.05, 5.0);
  for (Index j = 0; j < 20; ++j) t.step(f.truth.M.col(j));
  const Snapshot s = deserialize_snapshot(serialize_snapshot(t, 20, 0.25));
  ASSERT_TRUE(s.stoc.has_value());
  EXPECT_EQ(s.zero_eps, 0.25);
  EXPECT_TRUE(s.stoc->model().basis == t.model().basis);
  EXPECT_TRUE(s.stoc->model().accum_a == t.model().accum_a);
  EXPECT_EQ(s.stoc->model().lambda2, 5.0);
  EXPECT_EQ(s.stoc->projection().max_iter, t.projection().max_iter);
}

TEST(Snapshot, TruncationAndCorruptionAreRejected) {
  const Fixture& f = study3();
  OnlineSession a(SessionMode::omw_cp, f.truth.M.rows(), f.setup.cp, f.truth.burnin);
  drain(a, f.truth.M, 0, 300);
  const std::string bytes = a.snapshot();
  for (std::size_t len : {std::size_t(0), std::size_t(7), std::size_t(20), bytes.size() / 2, bytes.size() - 1})
    EXPECT_EQ(code_of(bytes.substr(0, len)), Errc::corrupt) << "length " << len;
  std::string flipped = bytes;
  flipped[bytes.size() / 2] ^= 0x10;
  EXPECT_EQ(code_of(flipped), Errc::corrupt);
  std::string magic = bytes;
  magic[0] = 'X';
  EXPECT_EQ(code_of(magic), Errc::corrupt);
  EXPECT_EQ(code_of(bytes + "x"), Errc::corrupt);
}

TEST(Snapshot, VersionMismatchNamesBothVersions) {
  const Fixture& f = study3();
  OnlineSession a(SessionMode::stoc, f.truth.M.rows(), f.setup.cp, f.truth.burnin);
  std::string bytes = a.snapshot();
  const std::uint32_t future = 7;
  std::memcpy(bytes.data() + 8, &future, 4);
  try {
    deserialize_snapshot(bytes);
    FAIL() << "accepted a foreign version";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::version);
    const std::string msg = e.what();
    EXPECT_NE(msg.find('7'), std::string::npos) << msg;
    EXPECT_NE(msg.find('1'), std::string::npos) << msg;
  }
}

TEST(Snapshot, MissingFileIsIoError) {
  try {
    load_snapshot("/nonexistent/dir/state.bin");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::io);
  }
}
