// Copyright 2026 The hdrlpa Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cstring>
#include <filesystem>
#include <string>

#include "hdrlpa/hdrlpa.hpp"

namespace fs = std::filesystem;
using namespace hdrlpa;

namespace {

fs::path temp_dir(const std::string& name) {
  auto dir = fs::temp_directory_path() / ("hdrlpa_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string pgm_header(int w, int h, int maxval) {
  return "P5 " + std::to_string(w) + " " + std::to_string(h) + " " + std::to_string(maxval) + "\n";
}

}  // namespace

TEST(ChannelAt, RggbPhases) {
  EXPECT_EQ(channel_at(BayerPattern::RGGB, 0, 0), ColorChannel::R);
  EXPECT_EQ(channel_at(BayerPattern::RGGB, 1, 0), ColorChannel::G);
  EXPECT_EQ(channel_at(BayerPattern::RGGB, 0, 1), ColorChannel::G);
  EXPECT_EQ(channel_at(BayerPattern::RGGB, 1, 1), ColorChannel::B);
}

TEST(ChannelAt, PeriodicAndNegativeCoordinates) {
  for (auto p : {BayerPattern::RGGB, BayerPattern::BGGR, BayerPattern::GRBG, BayerPattern::GBRG}) {
    for (int y = -4; y < 4; ++y)
      for (int x = -4; x < 4; ++x) EXPECT_EQ(channel_at(p, x, y), channel_at(p, x + 2, y + 2));
  }
  EXPECT_EQ(channel_at(BayerPattern::RGGB, -1, -1), ColorChannel::B);
}

TEST(ChannelAt, EveryPatternHasTwoGreens) {
  for (auto p : {BayerPattern::RGGB, BayerPattern::BGGR, BayerPattern::GRBG, BayerPattern::GBRG}) {
    int g = 0, r = 0;
    for (int y = 0; y < 2; ++y)
      for (int x = 0; x < 2; ++x) {
        g += channel_at(p, x, y) == ColorChannel::G;
        r += channel_at(p, x, y) == ColorChannel::R;
      }
    EXPECT_EQ(g, 2);
    EXPECT_EQ(r, 1);
    EXPECT_EQ(parse_bayer_pattern(to_string(p)), p);
  }
  EXPECT_FALSE(parse_bayer_pattern("RGBG").has_value());
}

TEST(Pgm16, RoundTripsBitExactly) {
  CFAImage img(2, 2, 16, BayerPattern::GRBG);
  img.data = {0, 1, 65535, 4095};
  const auto dir = temp_dir("pgm_round_trip");
  write_pgm16(img, dir / "a.pgm");
  const auto back = read_pgm16(dir / "a.pgm");
  EXPECT_EQ(back, img);
}

TEST(Pgm16, HeaderAndBigEndianPayload) {
  std::string bytes = pgm_header(2, 2, 65535);
  const unsigned char payload[8] = {0x00, 0x01, 0x01, 0x00, 0xFF, 0xFF, 0x0F, 0xFF};
  bytes.append(reinterpret_cast<const char*>(payload), 8);
  const auto img = decode_pgm16(bytes);
  ASSERT_EQ(img.width, 2);
  ASSERT_EQ(img.height, 2);
  EXPECT_EQ(img.data[0], 1);
  EXPECT_EQ(img.data[1], 256);
  EXPECT_EQ(img.data[2], 65535);
  EXPECT_EQ(img.data[3], 0x0FFF);
  EXPECT_EQ(img.bit_depth, 16);
}

TEST(Pgm16, MaxvalSetsBitDepth) {
  CFAImage img(3, 1, 12, BayerPattern::RGGB);
  img.data = {0, 2048, 4095};
  const auto back = decode_pgm16(encode_pgm16(img));
  EXPECT_EQ(back.bit_depth, 12);
  EXPECT_EQ(back.data, img.data);
}

TEST(Pgm16, TruncatedPayloadNamesOffset) {
  std::string bytes = pgm_header(2, 2, 65535) + std::string(7, '\0');
  try {
    decode_pgm16(bytes);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("truncated"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("byte offset"), std::string::npos);
  }
}

TEST(Pgm16, RejectsEightBitAndMalformedHeaders) {
  EXPECT_THROW(decode_pgm16(pgm_header(2, 2, 255) + std::string(4, '\0')), ParseError);
  EXPECT_THROW(decode_pgm16("P5 2 x 65535\n"), ParseError);
  EXPECT_THROW(decode_pgm16("P2 2 2 65535\n"), ParseError);
  EXPECT_THROW(decode_pgm16("P5 2 2"), ParseError);
}

TEST(Pgm16, SkipsHeaderComments) {
  std::string bytes = "P5\n# a comment\n1 1\n65535\n";
  bytes += std::string("\x12\x34", 2);
  const auto img = decode_pgm16(bytes);
  EXPECT_EQ(img.data[0], 0x1234);
}

TEST(Pgm16, MissingFileIsInputError) {
  EXPECT_THROW(read_pgm16("/nonexistent/frame.pgm"), InputError);
}

TEST(Pfm, SinglePixelLittleEndianLayout) {
  HDRImage img(1, 1);
  img.at(ColorChannel::R, 0, 0) = 1.0;
  img.at(ColorChannel::G, 0, 0) = 0.5;
  img.at(ColorChannel::B, 0, 0) = 0.25;
  const auto bytes = encode_pfm(img);
  ASSERT_GE(bytes.size(), 12u);
  const std::string header = bytes.substr(0, bytes.size() - 12);
  EXPECT_EQ(header.substr(0, 3), "PF\n");
  EXPECT_NE(header.find("-1"), std::string::npos);
  const float expect[3] = {1.0f, 0.5f, 0.25f};
  float got[3];
  std::memcpy(got, bytes.data() + header.size(), 12);
  // The host is little-endian on every supported platform.
  for (int i = 0; i < 3; ++i) EXPECT_EQ(got[i], expect[i]);
}

TEST(Pfm, RoundTripThreeByTwo) {
  HDRImage img(3, 2);
  int k = 0;
  for (auto c : kAllChannels)
    for (int y = 0; y < 2; ++y)
      for (int x = 0; x < 3; ++x) img.at(c, x, y) = 0.125 * (++k) - 1.0;
  const auto dir = temp_dir("pfm_round_trip");
  write_pfm(img, dir / "a.pfm");
  const auto back = read_pfm_rgb(dir / "a.pfm");
  EXPECT_TRUE(bit_identical(img, back));
}

TEST(Pfm, GrayscaleFrameRoundTrip) {
  FloatFrame f(4, 3, 0.0);
  for (std::size_t i = 0; i < f.data.size(); ++i) f.data[i] = 0.5 * static_cast<double>(i);
  const auto dir = temp_dir("pfm_gray");
  write_pfm(f, dir / "g.pfm");
  EXPECT_EQ(read_pfm_frame(dir / "g.pfm").data, f.data);
  EXPECT_THROW(read_pfm_rgb(dir / "g.pfm"), ShapeError);
}

TEST(Pfm, RejectsUnknownMagicAndBadDimensions) {
  try {
    decode_pfm("P6\n1 1\n-1.0\n");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("unsupported magic"), std::string::npos);
  }
  EXPECT_THROW(decode_pfm("PF\nnan 1\n-1.0\n"), ParseError);
  EXPECT_THROW(decode_pfm("PF\n1 1\n-1.0\n" + std::string(11, '\0')), ParseError);
}

TEST(CfaImage, ValidateChecksRange) {
  CFAImage img(2, 1, 12, BayerPattern::RGGB);
  img.data = {4095, 4096};
  EXPECT_THROW(img.validate(), InputError);
  EXPECT_THROW(CFAImage(2, 2, 7, BayerPattern::RGGB), ConfigError);
}

TEST(HdrImage, BitIdenticalComparesNanPayloads) {
  HDRImage a(2, 2, std::numeric_limits<double>::quiet_NaN());
  HDRImage b = a;
  EXPECT_TRUE(bit_identical(a, b));
  EXPECT_EQ(a.nan_count(), 12u);
  b.at(ColorChannel::G, 1, 1) = 0.0;
  EXPECT_FALSE(bit_identical(a, b));
}
