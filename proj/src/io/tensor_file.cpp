#include "pat/io/tensor_file.hpp"

#include <cstring>
#include <fstream>
#include <stdexcept>

namespace pat::io {

namespace {

constexpr char kMagic[4] = {'P', 'A', 'T', 'N'};
constexpr std::uint8_t kVersion = 1;

static_assert(sizeof(float) == 4 && sizeof(double) == 8, "IEEE-754 layout expected");

void put_u64_le(std::ostream& out, std::uint64_t v) {
  std::uint8_t bytes[8];
  for (int i = 0; i < 8; ++i) bytes[i] = static_cast<std::uint8_t>(v >> (8 * i));
  out.write(reinterpret_cast<const char*>(bytes), 8);
}

std::uint64_t get_u64_le(std::istream& in) {
  std::uint8_t bytes[8];
  in.read(reinterpret_cast<char*>(bytes), 8);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(bytes[i]) << (8 * i);
  return v;
}

// Payloads are little-endian on disk; this toolkit targets little-endian
// hosts and copies raw element bytes.
template <typename T>
std::vector<std::uint8_t> to_bytes(const std::vector<T>& data) {
  std::vector<std::uint8_t> out(data.size() * sizeof(T));
  if (!data.empty()) std::memcpy(out.data(), data.data(), out.size());
  return out;
}

template <typename T>
std::vector<T> from_bytes(const std::vector<std::uint8_t>& bytes) {
  std::vector<T> out(bytes.size() / sizeof(T));
  if (!out.empty()) std::memcpy(out.data(), bytes.data(), bytes.size());
  return out;
}

}  // namespace

std::size_t TensorFile::dtype_size(Dtype d) {
  switch (d) {
    case Dtype::f32: return 4;
    case Dtype::f64: return 8;
    case Dtype::u8: return 1;
  }
  throw std::invalid_argument("tensor file: unknown dtype code");
}

std::uint64_t TensorFile::element_count() const {
  std::uint64_t n = 1;
  for (auto d : dims) n *= d;
  return n;
}

TensorFile TensorFile::from_f32(const std::vector<float>& data,
                                std::vector<std::uint64_t> dims) {
  TensorFile t;
  t.dtype = Dtype::f32;
  t.dims = std::move(dims);
  t.payload = to_bytes(data);
  return t;
}

TensorFile TensorFile::from_f64(const std::vector<double>& data,
                                std::vector<std::uint64_t> dims) {
  TensorFile t;
  t.dtype = Dtype::f64;
  t.dims = std::move(dims);
  t.payload = to_bytes(data);
  return t;
}

TensorFile TensorFile::from_u8(const std::vector<std::uint8_t>& data,
                               std::vector<std::uint64_t> dims) {
  TensorFile t;
  t.dtype = Dtype::u8;
  t.dims = std::move(dims);
  t.payload = data;
  return t;
}

std::vector<float> TensorFile::as_f32() const {
  if (dtype == Dtype::f32) return from_bytes<float>(payload);
  if (dtype == Dtype::f64) {
    auto d = from_bytes<double>(payload);
    return std::vector<float>(d.begin(), d.end());
  }
  throw std::invalid_argument("tensor file: cannot read u8 payload as f32");
}

std::vector<double> TensorFile::as_f64() const {
  if (dtype == Dtype::f64) return from_bytes<double>(payload);
  if (dtype == Dtype::f32) {
    auto f = from_bytes<float>(payload);
    return std::vector<double>(f.begin(), f.end());
  }
  throw std::invalid_argument("tensor file: cannot read u8 payload as f64");
}

std::vector<std::uint8_t> TensorFile::as_u8() const {
  if (dtype != Dtype::u8)
    throw std::invalid_argument("tensor file: payload is not u8");
  return payload;
}

void write_tensor_stream(std::ostream& out, const TensorFile& t) {
  if (t.dims.size() > 255)
    throw std::invalid_argument("tensor file: too many dimensions");
  if (t.payload.size() != t.element_count() * TensorFile::dtype_size(t.dtype))
    throw std::invalid_argument("tensor file: payload length does not match dims");
  out.write(kMagic, 4);
  out.put(static_cast<char>(kVersion));
  out.put(static_cast<char>(t.dtype));
  out.put(static_cast<char>(t.dims.size()));
  for (auto d : t.dims) put_u64_le(out, d);
  out.write(reinterpret_cast<const char*>(t.payload.data()),
            static_cast<std::streamsize>(t.payload.size()));
  if (!out) throw std::runtime_error("tensor file: write failed");
}

TensorFile read_tensor_stream(std::istream& in) {
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0)
    throw std::runtime_error("tensor file: bad magic");
  const int version = in.get();
  if (version != kVersion)
    throw std::runtime_error("tensor file: unsupported version " + std::to_string(version));
  const int dtype_code = in.get();
  if (dtype_code != 1 && dtype_code != 2 && dtype_code != 3)
    throw std::runtime_error("tensor file: unknown dtype code " + std::to_string(dtype_code));
  const int ndim = in.get();
  if (ndim < 0) throw std::runtime_error("tensor file: truncated header");

  TensorFile t;
  t.dtype = static_cast<Dtype>(dtype_code);
  t.dims.resize(static_cast<size_t>(ndim));
  for (auto& d : t.dims) d = get_u64_le(in);
  if (!in) throw std::runtime_error("tensor file: truncated dimension list");

  const std::uint64_t bytes = t.element_count() * TensorFile::dtype_size(t.dtype);
  t.payload.resize(bytes);
  in.read(reinterpret_cast<char*>(t.payload.data()), static_cast<std::streamsize>(bytes));
  if (!in) throw std::runtime_error("tensor file: truncated payload");
  return t;
}

void write_tensor_file(const std::filesystem::path& path, const TensorFile& t) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("tensor file: cannot open " + path.string() + " for writing");
  write_tensor_stream(out, t);
}

TensorFile read_tensor_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("tensor file: cannot open " + path.string());
  return read_tensor_stream(in);
}

}  // namespace pat::io
