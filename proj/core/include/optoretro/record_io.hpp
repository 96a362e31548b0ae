#pragma once

#include "optoretro/simulator.hpp"

#include <filesystem>
#include <vector>

namespace optoretro {

struct RecordSet {
  double fs = 0.0;
  std::vector<HomodyneRecord> records;
};

// Binary container (.hrec), all fields little-endian:
//   char[4]  magic "HREC"
//   u32      version (1)
//   f64      fs in Hz
//   u64      record count R
//   u64      samples per record nt
//   u32      oscillator count N
//   then R times: u64 seed, f64[N] realized omega (rad/s), f64[nt] samples
void write_records_binary(const RecordSet& set, const std::filesystem::path& path);
RecordSet read_records_binary(const std::filesystem::path& path);

// CSV: first column time_s, then one column per record. Each record column
// header is "seed=<u64>;omega_hz=<w1>/<w2>/...". Values use %.17g.
void write_records_csv(const RecordSet& set, const std::filesystem::path& path);
RecordSet read_records_csv(const std::filesystem::path& path);

/// Dispatches on extension: .csv is CSV, anything else is binary.
void write_records(const RecordSet& set, const std::filesystem::path& path);
RecordSet read_records(const std::filesystem::path& path);

}  // namespace optoretro
