#pragma once

// NFTENSR container: the on-disk exchange format for volumes, measurements and training pairs.
//
//   bytes 0..7   magic "NFTENSR\0"
//   bytes 8..11  header length L, uint32 little-endian
//   bytes 12..   L bytes of UTF-8 JSON:
//                {"byte_order":"LE","dtype":"f32|f64|c64|c128","meta":{...},"order":"C","shape":[...]}
//   then         raw little-endian payload, last dimension contiguous, complex as (re, im) pairs
//
// Payload bytes are kept in their little-endian file form inside `Tensor`, so a read/write cycle
// is byte-identical regardless of content (NaN payloads included).

#include <algorithm>
#include <array>
#include <bit>
#include <cstddef>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

#include <nlohmann/json.hpp>

#include "nfmimo/error.hpp"
#include "nfmimo/vector_ops.hpp"

namespace nfmimo {

using json = nlohmann::json;

enum class DType { f32, f64, c64, c128 };

inline std::size_t element_size(DType t) {
  switch (t) {
    case DType::f32: return 4;
    case DType::f64: return 8;
    case DType::c64: return 8;
    case DType::c128: return 16;
  }
  return 0;
}

inline bool is_complex(DType t) { return t == DType::c64 || t == DType::c128; }

inline std::string_view dtype_name(DType t) {
  switch (t) {
    case DType::f32: return "f32";
    case DType::f64: return "f64";
    case DType::c64: return "c64";
    case DType::c128: return "c128";
  }
  return "?";
}

inline std::optional<DType> parse_dtype(std::string_view s) {
  if (s == "f32") return DType::f32;
  if (s == "f64") return DType::f64;
  if (s == "c64") return DType::c64;
  if (s == "c128") return DType::c128;
  return std::nullopt;
}

inline constexpr std::array<char, 8> tensor_magic = {'N', 'F', 'T', 'E', 'N', 'S', 'R', '\0'};

namespace detail {

template <class T>
void store_le(std::byte* dst, T value) {
  static_assert(std::is_trivially_copyable_v<T>);
  std::array<std::byte, sizeof(T)> raw;
  std::memcpy(raw.data(), &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(raw.begin(), raw.end());
  std::memcpy(dst, raw.data(), sizeof(T));
}

template <class T>
T load_le(const std::byte* src) {
  std::array<std::byte, sizeof(T)> raw;
  std::memcpy(raw.data(), src, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(raw.begin(), raw.end());
  T value;
  std::memcpy(&value, raw.data(), sizeof(T));
  return value;
}

}  // namespace detail

struct Tensor {
  DType dtype = DType::f64;
  std::vector<std::uint64_t> shape;
  std::vector<std::byte> data;  // little-endian payload
  json meta = json::object();

  std::size_t element_count() const {
    std::size_t n = 1;
    for (std::uint64_t d : shape) n *= static_cast<std::size_t>(d);
    return n;
  }

  std::size_t payload_bytes() const { return element_count() * element_size(dtype); }

  friend bool operator==(const Tensor& a, const Tensor& b) {
    return a.dtype == b.dtype && a.shape == b.shape && a.data == b.data && a.meta == b.meta;
  }

  static Tensor from_real(std::vector<std::uint64_t> shape, std::span<const double> values, DType dtype = DType::f64,
                          json meta = json::object()) {
    if (is_complex(dtype)) throw InvalidArgument("from_real: dtype must be f32 or f64");
    Tensor t{dtype, std::move(shape), {}, std::move(meta)};
    if (t.element_count() != values.size()) throw InvalidArgument("from_real: shape does not match value count");
    t.data.resize(t.payload_bytes());
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (dtype == DType::f32)
        detail::store_le(t.data.data() + 4 * i, static_cast<float>(values[i]));
      else
        detail::store_le(t.data.data() + 8 * i, values[i]);
    }
    return t;
  }

  static Tensor from_complex(std::vector<std::uint64_t> shape, std::span<const cplx> values,
                             DType dtype = DType::c128, json meta = json::object()) {
    if (!is_complex(dtype)) throw InvalidArgument("from_complex: dtype must be c64 or c128");
    Tensor t{dtype, std::move(shape), {}, std::move(meta)};
    if (t.element_count() != values.size()) throw InvalidArgument("from_complex: shape does not match value count");
    t.data.resize(t.payload_bytes());
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (dtype == DType::c64) {
        detail::store_le(t.data.data() + 8 * i, static_cast<float>(values[i].real()));
        detail::store_le(t.data.data() + 8 * i + 4, static_cast<float>(values[i].imag()));
      } else {
        detail::store_le(t.data.data() + 16 * i, values[i].real());
        detail::store_le(t.data.data() + 16 * i + 8, values[i].imag());
      }
    }
    return t;
  }

  /// Real values; complex tensors are rejected.
  std::vector<double> to_real() const {
    if (is_complex(dtype)) throw InvalidArgument("to_real: tensor is complex");
    std::vector<double> out(element_count());
    for (std::size_t i = 0; i < out.size(); ++i)
      out[i] = dtype == DType::f32 ? static_cast<double>(detail::load_le<float>(data.data() + 4 * i))
                                   : detail::load_le<double>(data.data() + 8 * i);
    return out;
  }

  /// Complex values; real tensors are widened with zero imaginary part.
  std::vector<cplx> to_complex() const {
    std::vector<cplx> out(element_count());
    const std::byte* p = data.data();
    for (std::size_t i = 0; i < out.size(); ++i) {
      switch (dtype) {
        case DType::f32: out[i] = {detail::load_le<float>(p + 4 * i), 0.0}; break;
        case DType::f64: out[i] = {detail::load_le<double>(p + 8 * i), 0.0}; break;
        case DType::c64:
          out[i] = {detail::load_le<float>(p + 8 * i), detail::load_le<float>(p + 8 * i + 4)};
          break;
        case DType::c128:
          out[i] = {detail::load_le<double>(p + 16 * i), detail::load_le<double>(p + 16 * i + 8)};
          break;
      }
    }
    return out;
  }
};

inline std::string tensor_header(const Tensor& t) {
  json h;
  h["byte_order"] = "LE";
  h["dtype"] = std::string(dtype_name(t.dtype));
  h["meta"] = t.meta.is_null() ? json::object() : t.meta;
  h["order"] = "C";
  h["shape"] = t.shape;
  return h.dump();
}

inline std::vector<std::byte> encode_tensor(const Tensor& t) {
  if (t.data.size() != t.payload_bytes()) throw InvalidArgument("tensor payload size does not match dtype and shape");
  if (!t.meta.is_object() && !t.meta.is_null()) throw InvalidArgument("tensor meta must be a JSON object");
  const std::string header = tensor_header(t);
  if (header.size() > 0xFFFFFFFFu) throw InvalidArgument("tensor header too large");
  std::vector<std::byte> out(12 + header.size() + t.data.size());
  std::memcpy(out.data(), tensor_magic.data(), 8);
  detail::store_le(out.data() + 8, static_cast<std::uint32_t>(header.size()));
  std::memcpy(out.data() + 12, header.data(), header.size());
  if (!t.data.empty()) std::memcpy(out.data() + 12 + header.size(), t.data.data(), t.data.size());
  return out;
}

inline Tensor decode_tensor(std::span<const std::byte> bytes) {
  if (bytes.size() < 8 || std::memcmp(bytes.data(), tensor_magic.data(), 8) != 0)
    throw FormatError("bad magic: not an NFTENSR container", 0);
  if (bytes.size() < 12) throw FormatError("truncated header length field", 8);
  const auto header_len = detail::load_le<std::uint32_t>(bytes.data() + 8);
  if (bytes.size() - 12 < header_len)
    throw FormatError("truncated header: declared " + std::to_string(header_len) + " bytes", 12);
  const std::string_view header_text(reinterpret_cast<const char*>(bytes.data() + 12), header_len);

  json h;
  try {
    h = json::parse(header_text);
  } catch (const json::parse_error& e) {
    throw FormatError(std::string("header is not valid JSON: ") + e.what(), 12 + e.byte);
  }
  if (!h.is_object()) throw FormatError("header is not a JSON object", 12);

  Tensor t;
  const auto require = [&](const char* key) -> const json& {
    if (!h.contains(key)) throw FormatError(std::string("header is missing '") + key + "'", 12);
    return h.at(key);
  };
  const json& dt = require("dtype");
  const auto dtype = dt.is_string() ? parse_dtype(dt.get<std::string>()) : std::nullopt;
  if (!dtype) throw FormatError("unknown dtype " + dt.dump(), 12);
  t.dtype = *dtype;
  const json& shape = require("shape");
  if (!shape.is_array()) throw FormatError("shape must be an array", 12);
  for (const json& d : shape) {
    if (!d.is_number_unsigned() && !(d.is_number_integer() && d.get<std::int64_t>() >= 0))
      throw FormatError("shape entries must be non-negative integers", 12);
    t.shape.push_back(d.get<std::uint64_t>());
  }
  if (require("order") != "C") throw FormatError("unsupported order " + h.at("order").dump(), 12);
  if (require("byte_order") != "LE") throw FormatError("unsupported byte_order " + h.at("byte_order").dump(), 12);
  if (h.contains("meta")) {
    if (!h.at("meta").is_object()) throw FormatError("meta must be a JSON object", 12);
    t.meta = h.at("meta");
  }

  const std::uint64_t payload_offset = 12 + std::uint64_t{header_len};
  const std::size_t expected = t.payload_bytes();
  const std::size_t available = bytes.size() - static_cast<std::size_t>(payload_offset);
  if (available < expected)
    throw FormatError("truncated payload: expected " + std::to_string(expected) + " bytes, found " +
                          std::to_string(available),
                      payload_offset + available);
  if (available > expected) throw FormatError("trailing bytes after payload", payload_offset + expected);
  t.data.assign(bytes.begin() + static_cast<std::ptrdiff_t>(payload_offset), bytes.end());
  return t;
}

/// Writes to a temporary sibling file, then renames it over `path`.
inline void write_tensor(const std::filesystem::path& path, const Tensor& t) {
  const std::vector<std::byte> bytes = encode_tensor(t);
  std::filesystem::path tmp = path;
  tmp += ".tmp." + std::to_string(std::hash<std::string>{}(path.string() + std::to_string(bytes.size())) & 0xFFFFFF);
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("short write to " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw IoError("cannot rename temporary file onto " + path.string());
  }
}

inline std::vector<std::byte> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  in.seekg(0, std::ios::end);
  const std::streamoff size = in.tellg();
  in.seekg(0, std::ios::beg);
  std::vector<std::byte> bytes(static_cast<std::size_t>(size));
  in.read(reinterpret_cast<char*>(bytes.data()), size);
  if (!in) throw IoError("short read from " + path.string());
  return bytes;
}

inline Tensor read_tensor(const std::filesystem::path& path) { return decode_tensor(read_file_bytes(path)); }

}  // namespace nfmimo
