#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "itas/core/matrix.hpp"

namespace itas {

// Little-endian byte encoding helpers shared by the binary file formats.
class ByteWriter {
 public:
  void u32(std::uint32_t v);
  void f32(float v);
  void f64(double v);
  void str(const std::string& s);
  void raw(const void* data, std::size_t n);
  const std::string& bytes() const noexcept { return bytes_; }

 private:
  std::string bytes_;
};

class ByteReader {
 public:
  ByteReader(const std::string& bytes, std::string source) : bytes_(bytes), source_(std::move(source)) {}

  std::uint32_t u32();
  float f32();
  double f64();
  std::string str();
  void expect_magic(const char (&magic)[5]);
  std::size_t offset() const noexcept { return offset_; }
  bool at_end() const noexcept { return offset_ == bytes_.size(); }

 private:
  void need(std::size_t n);

  const std::string& bytes_;
  std::string source_;
  std::size_t offset_ = 0;
};

std::string read_file_bytes(const std::filesystem::path& path);
void write_file_bytes(const std::filesystem::path& path, const std::string& bytes);

// Versioned container for model parameters: a kind tag, string
// hyperparameters, and named double-precision tensors in insertion order.
//
// Layout: "ITCK" | u32 version | str kind | u32 n | n x (str key, str value)
//         | u32 m | m x (str name, u32 rows, u32 cols, rows*cols f64)
// where str is u32 length + bytes and all integers are little-endian.
struct Checkpoint {
  static constexpr std::uint32_t kVersion = 1;

  std::string kind;
  std::map<std::string, std::string> hyperparameters;
  std::vector<std::pair<std::string, Matrix>> tensors;

  void add_tensor(const std::string& name, const Matrix& m) { tensors.emplace_back(name, m); }
  void add_vector(const std::string& name, const std::vector<double>& v);
  const Matrix& tensor(const std::string& name) const;
  std::vector<double> vector(const std::string& name) const;
  const std::string& hyper(const std::string& key) const;

  std::string serialize() const;
  static Checkpoint deserialize(const std::string& bytes, const std::string& source);

  void save(const std::filesystem::path& path) const;
  static Checkpoint load(const std::filesystem::path& path);
};

}  // namespace itas
