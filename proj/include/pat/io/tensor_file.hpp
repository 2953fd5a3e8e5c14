#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <vector>

namespace pat::io {

enum class Dtype : std::uint8_t { f32 = 1, f64 = 2, u8 = 3 };

// On-disk n-dimensional array: magic "PATN", version byte 1, dtype code
// byte, ndim byte, ndim little-endian u64 dimensions, then the row-major
// little-endian payload. Round-trips are bit-exact.
struct TensorFile {
  Dtype dtype = Dtype::f32;
  std::vector<std::uint64_t> dims;
  std::vector<std::uint8_t> payload;  // raw little-endian bytes

  std::uint64_t element_count() const;
  static std::size_t dtype_size(Dtype d);

  static TensorFile from_f32(const std::vector<float>& data,
                             std::vector<std::uint64_t> dims);
  static TensorFile from_f64(const std::vector<double>& data,
                             std::vector<std::uint64_t> dims);
  static TensorFile from_u8(const std::vector<std::uint8_t>& data,
                            std::vector<std::uint64_t> dims);

  std::vector<float> as_f32() const;    // converts f64 if needed
  std::vector<double> as_f64() const;   // converts f32 if needed
  std::vector<std::uint8_t> as_u8() const;
};

void write_tensor_file(const std::filesystem::path& path, const TensorFile& t);
TensorFile read_tensor_file(const std::filesystem::path& path);

// Stream variants used by container formats (checkpoints).
void write_tensor_stream(std::ostream& out, const TensorFile& t);
TensorFile read_tensor_stream(std::istream& in);

}  // namespace pat::io
