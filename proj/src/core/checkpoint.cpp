#include "itas/core/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "itas/core/errors.hpp"

namespace itas {

static_assert(std::endian::native == std::endian::little, "binary formats assume a little-endian host");

void ByteWriter::u32(std::uint32_t v) { raw(&v, sizeof v); }
void ByteWriter::f32(float v) { raw(&v, sizeof v); }
void ByteWriter::f64(double v) { raw(&v, sizeof v); }

void ByteWriter::str(const std::string& s) {
  u32(static_cast<std::uint32_t>(s.size()));
  raw(s.data(), s.size());
}

void ByteWriter::raw(const void* data, std::size_t n) { bytes_.append(static_cast<const char*>(data), n); }

void ByteReader::need(std::size_t n) {
  if (bytes_.size() - offset_ < n) {
    fail(ErrorKind::kFormat, source_ + ": truncated payload at byte offset " + std::to_string(offset_) +
                                 " (need " + std::to_string(n) + " more bytes)");
  }
}

std::uint32_t ByteReader::u32() {
  need(4);
  std::uint32_t v;
  std::memcpy(&v, bytes_.data() + offset_, 4);
  offset_ += 4;
  return v;
}

float ByteReader::f32() {
  need(4);
  float v;
  std::memcpy(&v, bytes_.data() + offset_, 4);
  offset_ += 4;
  return v;
}

double ByteReader::f64() {
  need(8);
  double v;
  std::memcpy(&v, bytes_.data() + offset_, 8);
  offset_ += 8;
  return v;
}

std::string ByteReader::str() {
  const std::uint32_t n = u32();
  need(n);
  std::string s = bytes_.substr(offset_, n);
  offset_ += n;
  return s;
}

void ByteReader::expect_magic(const char (&magic)[5]) {
  need(4);
  if (std::memcmp(bytes_.data() + offset_, magic, 4) != 0) {
    fail(ErrorKind::kFormat, source_ + ": bad magic at byte offset " + std::to_string(offset_) +
                                 " (expected \"" + std::string(magic, 4) + "\")");
  }
  offset_ += 4;
}

std::string read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::kIo, "cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_file_bytes(const std::filesystem::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorKind::kIo, "cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) fail(ErrorKind::kIo, "short write to " + path.string());
}

void Checkpoint::add_vector(const std::string& name, const std::vector<double>& v) {
  tensors.emplace_back(name, Matrix(1, v.size(), v));
}

const Matrix& Checkpoint::tensor(const std::string& name) const {
  for (const auto& [key, m] : tensors) {
    if (key == name) return m;
  }
  fail(ErrorKind::kFormat, "checkpoint of kind '" + kind + "' has no tensor '" + name + "'");
}

std::vector<double> Checkpoint::vector(const std::string& name) const { return tensor(name).storage(); }

const std::string& Checkpoint::hyper(const std::string& key) const {
  auto it = hyperparameters.find(key);
  if (it == hyperparameters.end()) {
    fail(ErrorKind::kFormat, "checkpoint of kind '" + kind + "' has no hyperparameter '" + key + "'");
  }
  return it->second;
}

std::string Checkpoint::serialize() const {
  ByteWriter w;
  w.raw("ITCK", 4);
  w.u32(kVersion);
  w.str(kind);
  w.u32(static_cast<std::uint32_t>(hyperparameters.size()));
  for (const auto& [key, value] : hyperparameters) {
    w.str(key);
    w.str(value);
  }
  w.u32(static_cast<std::uint32_t>(tensors.size()));
  for (const auto& [name, m] : tensors) {
    w.str(name);
    w.u32(static_cast<std::uint32_t>(m.rows()));
    w.u32(static_cast<std::uint32_t>(m.cols()));
    for (double v : m.values()) w.f64(v);
  }
  return w.bytes();
}

Checkpoint Checkpoint::deserialize(const std::string& bytes, const std::string& source) {
  ByteReader r(bytes, source);
  r.expect_magic("ITCK");
  const std::uint32_t version = r.u32();
  if (version != kVersion) {
    fail(ErrorKind::kFormat, source + ": unsupported checkpoint version " + std::to_string(version));
  }
  Checkpoint ck;
  ck.kind = r.str();
  const std::uint32_t n_hyper = r.u32();
  for (std::uint32_t i = 0; i < n_hyper; ++i) {
    std::string key = r.str();
    ck.hyperparameters[key] = r.str();
  }
  const std::uint32_t n_tensors = r.u32();
  for (std::uint32_t i = 0; i < n_tensors; ++i) {
    std::string name = r.str();
    const std::uint32_t rows = r.u32();
    const std::uint32_t cols = r.u32();
    std::vector<double> data(static_cast<std::size_t>(rows) * cols);
    for (double& v : data) v = r.f64();
    ck.tensors.emplace_back(std::move(name), Matrix(rows, cols, std::move(data)));
  }
  if (!r.at_end()) {
    fail(ErrorKind::kFormat, source + ": trailing bytes at offset " + std::to_string(r.offset()));
  }
  return ck;
}

void Checkpoint::save(const std::filesystem::path& path) const { write_file_bytes(path, serialize()); }

Checkpoint Checkpoint::load(const std::filesystem::path& path) {
  return deserialize(read_file_bytes(path), path.string());
}

}  // namespace itas
