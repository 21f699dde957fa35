// Copyright 2026 The hdrlpa Authors
// SPDX-License-Identifier: Apache-2.0
//
// Binary PGM (P5, 16-bit big-endian samples) for raw CFA frames and PFM
// (PF / Pf, float32) for every real-valued frame.

#pragma once

#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "hdrlpa/errors.hpp"
#include "hdrlpa/image.hpp"

namespace hdrlpa {

namespace detail {

/// Whitespace/comment aware tokenizer over a Netpbm header.
class HeaderScanner {
 public:
  explicit HeaderScanner(std::string_view bytes) : bytes_(bytes) {}

  std::size_t offset() const noexcept { return pos_; }
  const std::vector<std::string>& comments() const noexcept { return comments_; }

  std::string_view token() {
    skip_space_and_comments();
    const auto start = pos_;
    while (pos_ < bytes_.size() && !is_space(bytes_[pos_]) && bytes_[pos_] != '#') ++pos_;
    if (start == pos_) throw ParseError("unexpected end of header", pos_);
    return bytes_.substr(start, pos_ - start);
  }

  template <class Int>
  Int integer(const char* what) {
    skip_space_and_comments();
    const auto start = pos_;
    auto tok = token();
    Int v{};
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc{} || ptr != tok.data() + tok.size())
      throw ParseError(std::string("malformed ") + what + " '" + std::string(tok) + "'", start);
    return v;
  }

  /// Consumes exactly one whitespace byte separating header from payload.
  void end_of_header() {
    if (pos_ >= bytes_.size() || !is_space(bytes_[pos_]))
      throw ParseError("missing whitespace after header", pos_);
    ++pos_;
  }

 private:
  static bool is_space(char c) noexcept {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f';
  }

  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      if (is_space(bytes_[pos_])) {
        ++pos_;
      } else if (bytes_[pos_] == '#') {
        const auto start = ++pos_;
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
        comments_.emplace_back(bytes_.substr(start, pos_ - start));
      } else {
        break;
      }
    }
  }

  std::string_view bytes_;
  std::size_t pos_ = 0;
  std::vector<std::string> comments_;
};

inline std::string read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return std::move(ss).str();
}

inline void write_file_bytes(const std::filesystem::path& path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("cannot write '" + path.string() + "'");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw InputError("write failed for '" + path.string() + "'");
}

inline int bits_for_maxval(std::uint32_t maxval) noexcept {
  int bits = 1;
  while (((1u << bits) - 1u) < maxval) ++bits;
  return bits;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// PGM
// ---------------------------------------------------------------------------

/// Serializes a CFA frame. The Bayer phase and bit depth travel in a header
/// comment so that decode(encode(img)) == img.
inline std::string encode_pgm16(const CFAImage& img) {
  img.validate();
  if (img.bit_depth <= 8) throw InputError("PGM16 writer needs bit depth > 8; use an 8-bit path");
  std::string out = "P5\n# bayer=" + std::string(to_string(img.pattern)) +
                    " bitdepth=" + std::to_string(img.bit_depth) + "\n" + std::to_string(img.width) +
                    " " + std::to_string(img.height) + "\n" + std::to_string(img.max_value()) + "\n";
  const auto header = out.size();
  out.resize(header + img.data.size() * 2);
  for (std::size_t i = 0; i < img.data.size(); ++i) {
    out[header + 2 * i] = static_cast<char>(img.data[i] >> 8);
    out[header + 2 * i + 1] = static_cast<char>(img.data[i] & 0xFF);
  }
  return out;
}

/// Parses a binary 16-bit PGM. `fallback` is the Bayer phase used when the
/// file carries no phase comment.
inline CFAImage decode_pgm16(std::string_view bytes, BayerPattern fallback = BayerPattern::RGGB) {
  detail::HeaderScanner scan(bytes);
  const auto magic = scan.token();
  if (magic != "P5") throw ParseError("unsupported magic '" + std::string(magic) + "'", 0);
  const auto w = scan.integer<int>("width");
  const auto h = scan.integer<int>("height");
  const auto maxval_offset = scan.offset();
  const auto maxval = scan.integer<std::uint32_t>("maxval");
  if (w <= 0 || h <= 0) throw ParseError("non-positive dimensions", maxval_offset);
  if (maxval <= 255) throw ParseError("maxval <= 255 is an 8-bit PGM; use the 8-bit path", maxval_offset);
  if (maxval > 65535) throw ParseError("maxval exceeds 65535", maxval_offset);
  scan.end_of_header();

  BayerPattern pattern = fallback;
  int bit_depth = detail::bits_for_maxval(maxval);
  for (const auto& c : scan.comments()) {
    std::istringstream ss(c);
    std::string kv;
    while (ss >> kv) {
      if (kv.rfind("bayer=", 0) == 0) {
        if (auto p = parse_bayer_pattern(kv.substr(6))) pattern = *p;
      } else if (kv.rfind("bitdepth=", 0) == 0) {
        int b = 0;
        auto sv = std::string_view(kv).substr(9);
        auto [ptr, ec] = std::from_chars(sv.data(), sv.data() + sv.size(), b);
        if (ec == std::errc{} && b >= bit_depth && b <= 16) bit_depth = b;
      }
    }
  }

  const auto payload = scan.offset();
  const auto needed = static_cast<std::size_t>(w) * static_cast<std::size_t>(h) * 2;
  if (bytes.size() - payload < needed)
    throw ParseError("truncated payload: expected " + std::to_string(needed) + " bytes, found " +
                         std::to_string(bytes.size() - payload),
                     bytes.size());

  CFAImage img(w, h, bit_depth, pattern);
  for (std::size_t i = 0; i < img.data.size(); ++i) {
    const auto hi = static_cast<unsigned char>(bytes[payload + 2 * i]);
    const auto lo = static_cast<unsigned char>(bytes[payload + 2 * i + 1]);
    const auto v = static_cast<std::uint16_t>((hi << 8) | lo);
    if (v > maxval) throw ParseError("sample exceeds maxval", payload + 2 * i);
    img.data[i] = v;
  }
  return img;
}

inline CFAImage read_pgm16(const std::filesystem::path& path,
                           BayerPattern fallback = BayerPattern::RGGB) {
  const auto bytes = detail::read_file_bytes(path);
  try {
    return decode_pgm16(bytes, fallback);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what(), e.offset());
  }
}

inline void write_pgm16(const CFAImage& img, const std::filesystem::path& path) {
  detail::write_file_bytes(path, encode_pgm16(img));
}

// ---------------------------------------------------------------------------
// PFM
// ---------------------------------------------------------------------------

/// Decoded PFM: one plane ("Pf") or three ("PF"), top-down in memory.
struct PfmImage {
  int width = 0;
  int height = 0;
  std::vector<Plane<double>> planes;

  int channels() const noexcept { return static_cast<int>(planes.size()); }
};

namespace detail {

inline std::string encode_pfm_planes(int w, int h, const std::vector<const Plane<double>*>& planes) {
  const auto nc = planes.size();
  std::string out = std::string(nc == 3 ? "PF" : "Pf") + "\n" + std::to_string(w) + " " +
                    std::to_string(h) + "\n-1.0\n";
  const auto header = out.size();
  out.resize(header + static_cast<std::size_t>(w) * static_cast<std::size_t>(h) * nc * 4);
  std::size_t o = header;
  for (int row = h - 1; row >= 0; --row) {
    for (int x = 0; x < w; ++x) {
      for (const auto* p : planes) {
        auto u = std::bit_cast<std::uint32_t>(static_cast<float>((*p)(x, row)));
        for (int b = 0; b < 4; ++b) out[o++] = static_cast<char>((u >> (8 * b)) & 0xFF);
      }
    }
  }
  return out;
}

}  // namespace detail

inline std::string encode_pfm(const HDRImage& img) {
  return detail::encode_pfm_planes(img.width, img.height,
                                   {&img.planes[0], &img.planes[1], &img.planes[2]});
}

inline std::string encode_pfm(const FloatFrame& frame) {
  return detail::encode_pfm_planes(frame.width, frame.height, {&frame});
}

inline PfmImage decode_pfm(std::string_view bytes) {
  detail::HeaderScanner scan(bytes);
  const auto magic = scan.token();
  int nc = 0;
  if (magic == "PF") nc = 3;
  else if (magic == "Pf") nc = 1;
  else throw ParseError("unsupported magic '" + std::string(magic) + "'", 0);
  const auto w = scan.integer<int>("width");
  const auto h = scan.integer<int>("height");
  const auto scale_offset = scan.offset();
  const auto scale_tok = scan.token();
  double scale = 0.0;
  {
    auto [ptr, ec] = std::from_chars(scale_tok.data(), scale_tok.data() + scale_tok.size(), scale);
    if (ec != std::errc{} || !std::isfinite(scale) || scale == 0.0)
      throw ParseError("malformed scale '" + std::string(scale_tok) + "'", scale_offset);
  }
  if (w <= 0 || h <= 0) throw ParseError("non-positive dimensions", scale_offset);
  scan.end_of_header();
  const bool little = scale < 0.0;

  const auto payload = scan.offset();
  const auto needed = static_cast<std::size_t>(w) * static_cast<std::size_t>(h) * nc * 4;
  if (bytes.size() - payload < needed)
    throw ParseError("truncated payload: expected " + std::to_string(needed) + " bytes, found " +
                         std::to_string(bytes.size() - payload),
                     bytes.size());

  PfmImage img;
  img.width = w;
  img.height = h;
  img.planes.assign(nc, Plane<double>(w, h));
  std::size_t o = payload;
  for (int row = h - 1; row >= 0; --row) {
    for (int x = 0; x < w; ++x) {
      for (int c = 0; c < nc; ++c) {
        std::uint32_t u = 0;
        for (int b = 0; b < 4; ++b) {
          const auto byte = static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[o + b]));
          u |= little ? byte << (8 * b) : byte << (8 * (3 - b));
        }
        o += 4;
        img.planes[c](x, row) = static_cast<double>(std::bit_cast<float>(u));
      }
    }
  }
  return img;
}

inline PfmImage read_pfm(const std::filesystem::path& path) {
  const auto bytes = detail::read_file_bytes(path);
  try {
    return decode_pfm(bytes);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what(), e.offset());
  }
}

/// Reads a 3-channel PFM. A 1-channel file is rejected.
inline HDRImage read_pfm_rgb(const std::filesystem::path& path) {
  auto pfm = read_pfm(path);
  if (pfm.channels() != 3) throw ShapeError(path.string() + ": expected a 3-channel PFM");
  HDRImage img;
  img.width = pfm.width;
  img.height = pfm.height;
  for (int c = 0; c < 3; ++c) img.planes[c] = std::move(pfm.planes[c]);
  return img;
}

/// Reads a 1-channel PFM. A 3-channel file is rejected.
inline FloatFrame read_pfm_frame(const std::filesystem::path& path) {
  auto pfm = read_pfm(path);
  if (pfm.channels() != 1) throw ShapeError(path.string() + ": expected a 1-channel PFM");
  return std::move(pfm.planes[0]);
}

inline void write_pfm(const HDRImage& img, const std::filesystem::path& path) {
  detail::write_file_bytes(path, encode_pfm(img));
}

inline void write_pfm(const FloatFrame& frame, const std::filesystem::path& path) {
  detail::write_file_bytes(path, encode_pfm(frame));
}

}  // namespace hdrlpa
