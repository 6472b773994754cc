#pragma once

#include <orpca/changepoint.hpp>
#include <orpca/tracker.hpp>

#include <cstdint>
#include <optional>
#include <string>

namespace orpca {

/// Binary tracker snapshots.
///
/// Layout: 8-byte magic "ORPCASNP", u32 format version, u32 kind, u64
/// payload length, payload, u64 FNV-1a hash of the payload. All integers
/// and doubles little-endian. A snapshot that fails any check is rejected
/// as a whole.
inline constexpr std::uint32_t kSnapshotVersion = 1;

enum class SnapshotKind : std::uint32_t { stoc = 1, omw = 2, changepoint = 3 };
const char* to_string(SnapshotKind kind);

struct Snapshot {
  SnapshotKind kind = SnapshotKind::stoc;
  std::uint64_t cursor = 0;  // absolute index of the next sample to feed
  double zero_eps = 0.0;     // support threshold of the plain trackers
  std::optional<StocTracker> stoc;
  std::optional<OmwTracker> omw;
  std::optional<ChangePointDetector> changepoint;
};

std::string serialize_snapshot(const StocTracker& tracker, std::uint64_t cursor, double zero_eps = 0.0);
std::string serialize_snapshot(const OmwTracker& tracker, std::uint64_t cursor, double zero_eps = 0.0);
std::string serialize_snapshot(const ChangePointDetector& detector, std::uint64_t cursor);
/// Errc::version on a version mismatch, Errc::corrupt on anything else.
Snapshot deserialize_snapshot(const std::string& bytes);

void save_snapshot(const std::string& path, const std::string& bytes);
Snapshot load_snapshot(const std::string& path);

}  // namespace orpca
