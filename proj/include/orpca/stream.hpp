#pragma once

#include <orpca/types.hpp>

#include <cstdint>
#include <deque>
#include <fstream>
#include <memory>
#include <optional>
#include <string>

namespace orpca {

/// Ordered sequence of m-dimensional observations revealed one at a time.
/// Streams can be rewound to an earlier absolute index.
class ObservationStream {
 public:
  virtual ~ObservationStream() = default;

  /// Next sample, or nullopt once the stream is exhausted.
  virtual std::optional<Vector> next() = 0;
  /// Absolute index of the sample the next call to next() returns.
  virtual Index position() const = 0;
  virtual void rewind(Index pos) = 0;
  /// Sample dimension; 0 for an empty stream.
  virtual Index dim() const = 0;
};

/// Columns of an in-memory matrix.
class MatrixStream final : public ObservationStream {
 public:
  explicit MatrixStream(Matrix samples) : samples_(std::move(samples)) {}

  std::optional<Vector> next() override;
  Index position() const override { return pos_; }
  void rewind(Index pos) override;
  Index dim() const override { return samples_.cols() ? samples_.rows() : 0; }

 private:
  Matrix samples_;
  Index pos_ = 0;
};

enum class StreamFormat { csv, raw_f64 };

StreamFormat parse_stream_format(const std::string& name);
/// raw-f64 for *.f64 / *.bin, csv otherwise.
StreamFormat guess_stream_format(const std::string& path);

/// Magic of the raw-f64 header: the ASCII bytes "ORPCAF64" read as a
/// little-endian 64-bit unsigned integer.
inline constexpr std::uint64_t kRawMagic = 0x343646414350524FULL;

/// One sample per line, comma separated. Reads lazily; keeps the last
/// `horizon` samples for cheap rewinds and re-reads the file otherwise.
class CsvStream final : public ObservationStream {
 public:
  explicit CsvStream(std::string path, std::size_t horizon = 4096);

  std::optional<Vector> next() override;
  Index position() const override { return pos_; }
  void rewind(Index pos) override;
  Index dim() const override { return dim_; }

 private:
  std::optional<Vector> read_line();
  void reopen();

  std::string path_;
  std::ifstream in_;
  std::size_t horizon_;
  std::deque<Vector> retained_;  // samples [read_ - retained_.size(), read_)
  Index read_ = 0;               // samples parsed from the file so far
  Index pos_ = 0;
  Index dim_ = 0;
  std::size_t line_no_ = 0;
};

/// Header (magic, m, T as little-endian u64) followed by T*m little-endian
/// doubles, sample-major. Seekable, so rewinds are free.
class RawStream final : public ObservationStream {
 public:
  explicit RawStream(std::string path);

  std::optional<Vector> next() override;
  Index position() const override { return pos_; }
  void rewind(Index pos) override;
  Index dim() const override { return count_ ? dim_ : 0; }
  Index size() const { return count_; }

 private:
  std::string path_;
  std::ifstream in_;
  Index dim_ = 0;
  Index count_ = 0;
  Index pos_ = 0;
};

std::unique_ptr<ObservationStream> ingest_stream(const std::string& path, StreamFormat format);

/// Reads a whole file into an m x T matrix (samples as columns).
Matrix read_samples(const std::string& path, StreamFormat format);

/// Appends samples to a csv or raw-f64 file one at a time. CSV values use
/// the shortest round-trip decimal form.
class SampleWriter {
 public:
  SampleWriter(const std::string& path, StreamFormat format, Index dim);
  ~SampleWriter();
  SampleWriter(const SampleWriter&) = delete;
  SampleWriter& operator=(const SampleWriter&) = delete;

  void append(const double* sample);
  /// Completes the raw-f64 header. Called by the destructor if needed, but
  /// only an explicit close reports errors.
  void close();
  Index count() const { return count_; }

 private:
  std::string path_;
  StreamFormat format_;
  Index dim_;
  Index count_ = 0;
  std::ofstream out_;
};

void write_raw(const std::string& path, const Matrix& samples);
void write_csv(const std::string& path, const Matrix& samples);
void write_samples(const std::string& path, const Matrix& samples, StreamFormat format);

}  // namespace orpca
