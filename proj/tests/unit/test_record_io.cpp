#include "optoretro/record_io.hpp"
#include "optoretro/rng.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

using namespace optoretro;

namespace {

RecordSet sample_set() {
  RecordSet set;
  set.fs = 2.5e6;
  Rng rng(1);
  for (std::uint64_t r = 0; r < 3; ++r) {
    HomodyneRecord rec;
    rec.seed = 0xF00DULL + r * 0x1234567890ULL;
    rec.omega_realized = {kTwoPi * 125e3 + static_cast<double>(r), -kTwoPi * 135e3 / 3.0};
    rec.samples = Vec(37);
    for (Eigen::Index i = 0; i < rec.samples.size(); ++i) rec.samples[i] = 1e3 * standard_normal(rng) / 7.0;
    set.records.push_back(rec);
  }
  return set;
}

std::filesystem::path tmp(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("optoretro_test_" + name);
}

void expect_same(const RecordSet& a, const RecordSet& b) {
  EXPECT_EQ(a.fs, b.fs);
  ASSERT_EQ(a.records.size(), b.records.size());
  for (std::size_t r = 0; r < a.records.size(); ++r) {
    EXPECT_EQ(a.records[r].seed, b.records[r].seed);
    ASSERT_EQ(a.records[r].omega_realized.size(), b.records[r].omega_realized.size());
    for (std::size_t i = 0; i < a.records[r].omega_realized.size(); ++i) {
      EXPECT_NEAR(a.records[r].omega_realized[i], b.records[r].omega_realized[i],
                  1e-15 * std::abs(a.records[r].omega_realized[i]));
    }
    EXPECT_EQ(a.records[r].samples, b.records[r].samples);
  }
}

}  // namespace

TEST(RecordIo, BinaryRoundTripIsExact) {
  const auto set = sample_set();
  const auto path = tmp("rt.hrec");
  write_records(set, path);
  expect_same(set, read_records(path));
  std::filesystem::remove(path);
}

TEST(RecordIo, CsvRoundTripIsExact) {
  const auto set = sample_set();
  const auto path = tmp("rt.csv");
  write_records(set, path);
  expect_same(set, read_records(path));
  std::ifstream in(path);
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header.rfind("time_s,seed=", 0), 0u);
  std::filesystem::remove(path);
}

TEST(RecordIo, BadMagicIsAnIoError) {
  const auto path = tmp("bad.hrec");
  std::ofstream(path) << "NOPE and some more bytes to read";
  EXPECT_THROW(read_records(path), IoError);
  std::filesystem::remove(path);
}

TEST(RecordIo, TruncatedFileIsAnIoError) {
  const auto path = tmp("trunc.hrec");
  write_records(sample_set(), path);
  std::filesystem::resize_file(path, std::filesystem::file_size(path) - 9);
  EXPECT_THROW(read_records(path), IoError);
  std::filesystem::remove(path);
}

TEST(RecordIo, MissingFileIsAnIoError) {
  EXPECT_THROW(read_records(tmp("does_not_exist.hrec")), IoError);
  EXPECT_THROW(read_records(tmp("does_not_exist.csv")), IoError);
}

TEST(RecordIo, ShortCsvRowIsAnIoError) {
  const auto path = tmp("short.csv");
  std::ofstream(path) << "time_s,seed=1;omega_hz=1000,seed=2;omega_hz=1000\n0,1,2\n4e-7,1\n";
  EXPECT_THROW(read_records(path), IoError);
  std::filesystem::remove(path);
}
