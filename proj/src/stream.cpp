#include <orpca/stream.hpp>

#include <algorithm>
#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <vector>

namespace orpca {

namespace {

std::uint64_t to_le(std::uint64_t x) {
  if constexpr (std::endian::native == std::endian::big) {
    std::uint64_t y = 0;
    for (int i = 0; i < 8; ++i) y |= ((x >> (8 * i)) & 0xFFu) << (8 * (7 - i));
    return y;
  }
  return x;
}

void put_u64(std::ostream& out, std::uint64_t x) {
  const std::uint64_t le = to_le(x);
  out.write(reinterpret_cast<const char*>(&le), 8);
}

bool get_u64(std::istream& in, std::uint64_t& x) {
  std::uint64_t le = 0;
  if (!in.read(reinterpret_cast<char*>(&le), 8)) return false;
  x = to_le(le);
  return true;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

constexpr std::size_t kHeaderBytes = 24;

}  // namespace

std::optional<Vector> MatrixStream::next() {
  if (pos_ >= samples_.cols()) return std::nullopt;
  return Vector(samples_.col(pos_++));
}

void MatrixStream::rewind(Index pos) {
  require(pos >= 0 && pos <= samples_.cols(), "stream: rewind target out of range");
  pos_ = pos;
}

StreamFormat parse_stream_format(const std::string& name) {
  if (name == "csv") return StreamFormat::csv;
  if (name == "raw-f64" || name == "raw") return StreamFormat::raw_f64;
  fail(Errc::contract_violation, "unknown stream format '" + name + "' (expected csv or raw-f64)");
}

StreamFormat guess_stream_format(const std::string& path) {
  const auto ext = std::filesystem::path(path).extension().string();
  return (ext == ".f64" || ext == ".bin") ? StreamFormat::raw_f64 : StreamFormat::csv;
}

CsvStream::CsvStream(std::string path, std::size_t horizon) : path_(std::move(path)), horizon_(horizon) {
  reopen();
  // peek at the first sample to learn the dimension
  if (auto first = read_line()) {
    retained_.push_back(std::move(*first));
    read_ = 1;
  }
}

void CsvStream::reopen() {
  in_ = std::ifstream(path_);
  if (!in_) fail(Errc::io, "cannot open '" + path_ + "'");
  line_no_ = 0;
}

std::optional<Vector> CsvStream::read_line() {
  std::string line;
  while (std::getline(in_, line)) {
    ++line_no_;
    const std::string_view body = trim(line);
    if (body.empty()) continue;

    std::vector<double> values;
    std::size_t start = 0;
    while (true) {
      const std::size_t comma = body.find(',', start);
      const std::string_view tok =
          trim(body.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
      double v = 0.0;
      const char* first = tok.data();
      const char* last = tok.data() + tok.size();
      if (!tok.empty() && *first == '+') ++first;
      const auto [ptr, ec] = std::from_chars(first, last, v);
      if (tok.empty() || ec != std::errc() || ptr != last)
        fail(Errc::parse, path_ + ":" + std::to_string(line_no_) + ": non-numeric token '" + std::string(tok) + "'");
      if (!std::isfinite(v))
        fail(Errc::parse, path_ + ":" + std::to_string(line_no_) + ": non-finite value");
      values.push_back(v);
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }

    const auto n = static_cast<Index>(values.size());
    if (dim_ == 0) dim_ = n;
    if (n != dim_)
      fail(Errc::parse, path_ + ":" + std::to_string(line_no_) + ": expected " + std::to_string(dim_) +
                            " values, found " + std::to_string(n));
    return Eigen::Map<Vector>(values.data(), n);
  }
  if (in_.bad()) fail(Errc::io, "read error on '" + path_ + "'");
  return std::nullopt;
}

std::optional<Vector> CsvStream::next() {
  const Index oldest = read_ - static_cast<Index>(retained_.size());
  if (pos_ < read_) {
    if (pos_ >= oldest) return retained_[static_cast<std::size_t>(pos_++ - oldest)];
    // rewound past the horizon: re-read from the top
    reopen();
    retained_.clear();
    read_ = 0;
    while (read_ < pos_) {
      if (!read_line()) fail(Errc::io, "'" + path_ + "' shrank while being replayed");
      ++read_;
    }
  }
  auto sample = read_line();
  if (!sample) return std::nullopt;
  retained_.push_back(*sample);
  if (retained_.size() > std::max<std::size_t>(horizon_, 1)) retained_.pop_front();
  ++read_;
  ++pos_;
  return sample;
}

void CsvStream::rewind(Index pos) {
  require(pos >= 0 && pos <= read_, "stream: rewind target beyond samples read so far");
  pos_ = pos;
}

RawStream::RawStream(std::string path) : path_(std::move(path)) {
  in_ = std::ifstream(path_, std::ios::binary);
  if (!in_) fail(Errc::io, "cannot open '" + path_ + "'");
  const auto bytes = std::filesystem::file_size(path_);
  if (bytes == 0) return;  // empty stream

  std::uint64_t magic = 0, m = 0, t = 0;
  if (!get_u64(in_, magic) || !get_u64(in_, m) || !get_u64(in_, t))
    fail(Errc::parse, "'" + path_ + "': truncated header (" + std::to_string(bytes) + " bytes)");
  if (magic != kRawMagic) fail(Errc::parse, "'" + path_ + "': bad magic, not a raw-f64 file");
  const std::uint64_t expected = kHeaderBytes + m * t * 8;
  if (expected > bytes)
    fail(Errc::parse, "'" + path_ + "': truncated, expected " + std::to_string(expected) + " bytes but found " +
                          std::to_string(bytes));
  if (t > 0 && m == 0) fail(Errc::parse, "'" + path_ + "': zero sample dimension");
  dim_ = static_cast<Index>(m);
  count_ = static_cast<Index>(t);
}

std::optional<Vector> RawStream::next() {
  if (pos_ >= count_) return std::nullopt;
  const auto offset = static_cast<std::streamoff>(kHeaderBytes + static_cast<std::uint64_t>(pos_ * dim_) * 8);
  in_.clear();
  in_.seekg(offset);
  Vector v(dim_);
  for (Index i = 0; i < dim_; ++i) {
    std::uint64_t bits = 0;
    if (!get_u64(in_, bits)) fail(Errc::io, "'" + path_ + "': read failed at byte " + std::to_string(offset));
    v(i) = std::bit_cast<double>(bits);
  }
  ++pos_;
  return v;
}

void RawStream::rewind(Index pos) {
  require(pos >= 0 && pos <= count_, "stream: rewind target out of range");
  pos_ = pos;
}

std::unique_ptr<ObservationStream> ingest_stream(const std::string& path, StreamFormat format) {
  if (!std::filesystem::exists(path)) fail(Errc::io, "no such file '" + path + "'");
  if (format == StreamFormat::csv) return std::make_unique<CsvStream>(path);
  return std::make_unique<RawStream>(path);
}

Matrix read_samples(const std::string& path, StreamFormat format) {
  auto stream = ingest_stream(path, format);
  std::vector<Vector> cols;
  while (auto v = stream->next()) cols.push_back(std::move(*v));
  Matrix out(stream->dim(), static_cast<Index>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j) out.col(static_cast<Index>(j)) = cols[j];
  return out;
}

SampleWriter::SampleWriter(const std::string& path, StreamFormat format, Index dim)
    : path_(path), format_(format), dim_(dim) {
  require(dim >= 0, "writer: dimension must be nonnegative");
  out_.open(path, format == StreamFormat::raw_f64 ? std::ios::binary | std::ios::trunc : std::ios::trunc);
  if (!out_) fail(Errc::io, "cannot write '" + path + "'");
  if (format_ == StreamFormat::raw_f64) {
    // sample count is patched in close()
    put_u64(out_, kRawMagic);
    put_u64(out_, static_cast<std::uint64_t>(dim));
    put_u64(out_, 0);
  }
}

SampleWriter::~SampleWriter() {
  try {
    close();
  } catch (...) {
  }
}

void SampleWriter::append(const double* sample) {
  require(out_.is_open(), "writer: already closed");
  if (format_ == StreamFormat::raw_f64) {
    for (Index i = 0; i < dim_; ++i) put_u64(out_, std::bit_cast<std::uint64_t>(sample[i]));
  } else {
    std::array<char, 32> buf{};
    for (Index i = 0; i < dim_; ++i) {
      if (i) out_ << ',';
      const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), sample[i]);
      out_.write(buf.data(), res.ptr - buf.data());
    }
    out_ << '\n';
  }
  ++count_;
  if (!out_) fail(Errc::io, "write failed on '" + path_ + "'");
}

void SampleWriter::close() {
  if (!out_.is_open()) return;
  if (format_ == StreamFormat::raw_f64) {
    out_.seekp(16);
    put_u64(out_, static_cast<std::uint64_t>(count_));
  }
  out_.close();
  if (out_.fail()) fail(Errc::io, "write failed on '" + path_ + "'");
}

void write_samples(const std::string& path, const Matrix& samples, StreamFormat format) {
  SampleWriter w(path, format, samples.rows());
  for (Index j = 0; j < samples.cols(); ++j) w.append(samples.col(j).data());
  w.close();
}

void write_raw(const std::string& path, const Matrix& samples) { write_samples(path, samples, StreamFormat::raw_f64); }

void write_csv(const std::string& path, const Matrix& samples) { write_samples(path, samples, StreamFormat::csv); }

}  // namespace orpca
