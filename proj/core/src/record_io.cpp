#include "optoretro/record_io.hpp"

#include <fmt/format.h>

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

namespace optoretro {

namespace {

constexpr char kMagic[4] = {'H', 'R', 'E', 'C'};
constexpr std::uint32_t kVersion = 1;

template <class T>
T to_little(T v) {
  if constexpr (std::endian::native == std::endian::little) {
    return v;
  } else {
    unsigned char b[sizeof(T)];
    std::memcpy(b, &v, sizeof(T));
    for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(b[i], b[sizeof(T) - 1 - i]);
    std::memcpy(&v, b, sizeof(T));
    return v;
  }
}

template <class T>
void put(std::ostream& out, T v) {
  v = to_little(v);
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::istream& in, const std::filesystem::path& path) {
  T v;
  if (!in.read(reinterpret_cast<char*>(&v), sizeof(T))) {
    throw IoError(fmt::format("'{}': truncated record file", path.string()));
  }
  return to_little(v);
}

void check_consistent(const RecordSet& set) {
  if (set.records.empty()) return;
  const auto nt = set.records.front().samples.size();
  const auto n_osc = set.records.front().omega_realized.size();
  for (const auto& r : set.records) {
    if (r.samples.size() != nt || r.omega_realized.size() != n_osc) {
      throw IoError("records differ in length or oscillator count");
    }
  }
}

}  // namespace

void write_records_binary(const RecordSet& set, const std::filesystem::path& path) {
  check_consistent(set);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(fmt::format("cannot open '{}' for writing", path.string()));
  out.write(kMagic, 4);
  put<std::uint32_t>(out, kVersion);
  put<double>(out, set.fs);
  put<std::uint64_t>(out, set.records.size());
  const std::uint64_t nt = set.records.empty() ? 0 : set.records.front().samples.size();
  const std::uint32_t n_osc =
      set.records.empty() ? 0 : static_cast<std::uint32_t>(set.records.front().omega_realized.size());
  put<std::uint64_t>(out, nt);
  put<std::uint32_t>(out, n_osc);
  for (const auto& r : set.records) {
    put<std::uint64_t>(out, r.seed);
    for (double w : r.omega_realized) put<double>(out, w);
    for (Eigen::Index n = 0; n < r.samples.size(); ++n) put<double>(out, r.samples[n]);
  }
  if (!out) throw IoError(fmt::format("write to '{}' failed", path.string()));
}

RecordSet read_records_binary(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(fmt::format("cannot open '{}'", path.string()));
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0) {
    throw IoError(fmt::format("'{}' is not a record container (bad magic)", path.string()));
  }
  const auto version = get<std::uint32_t>(in, path);
  if (version != kVersion) {
    throw IoError(fmt::format("'{}': unsupported container version {}", path.string(), version));
  }
  RecordSet set;
  set.fs = get<double>(in, path);
  const auto count = get<std::uint64_t>(in, path);
  const auto nt = get<std::uint64_t>(in, path);
  const auto n_osc = get<std::uint32_t>(in, path);
  set.records.resize(count);
  for (auto& r : set.records) {
    r.seed = get<std::uint64_t>(in, path);
    r.omega_realized.resize(n_osc);
    for (auto& w : r.omega_realized) w = get<double>(in, path);
    r.samples.resize(static_cast<Eigen::Index>(nt));
    for (Eigen::Index n = 0; n < r.samples.size(); ++n) r.samples[n] = get<double>(in, path);
  }
  return set;
}

void write_records_csv(const RecordSet& set, const std::filesystem::path& path) {
  check_consistent(set);
  std::ofstream out(path);
  if (!out) throw IoError(fmt::format("cannot open '{}' for writing", path.string()));
  out << "time_s";
  for (const auto& r : set.records) {
    out << ",seed=" << r.seed << ";omega_hz=";
    for (std::size_t i = 0; i < r.omega_realized.size(); ++i) {
      out << (i ? "/" : "") << fmt::format("{:.17g}", r.omega_realized[i] / kTwoPi);
    }
  }
  out << '\n';
  const Eigen::Index nt = set.records.empty() ? 0 : set.records.front().samples.size();
  for (Eigen::Index n = 0; n < nt; ++n) {
    out << fmt::format("{:.17g}", static_cast<double>(n) / set.fs);
    for (const auto& r : set.records) out << fmt::format(",{:.17g}", r.samples[n]);
    out << '\n';
  }
  if (!out) throw IoError(fmt::format("write to '{}' failed", path.string()));
}

RecordSet read_records_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError(fmt::format("cannot open '{}'", path.string()));
  std::string line;
  if (!std::getline(in, line)) throw IoError(fmt::format("'{}' is empty", path.string()));
  RecordSet set;
  {
    std::stringstream header(line);
    std::string cell;
    std::getline(header, cell, ',');
    if (cell != "time_s") throw IoError(fmt::format("'{}': first column must be time_s", path.string()));
    while (std::getline(header, cell, ',')) {
      HomodyneRecord r;
      const auto semi = cell.find(';');
      if (cell.rfind("seed=", 0) != 0 || semi == std::string::npos ||
          cell.compare(semi + 1, 9, "omega_hz=") != 0) {
        throw IoError(fmt::format("'{}': malformed record header '{}'", path.string(), cell));
      }
      r.seed = std::stoull(cell.substr(5, semi - 5));
      std::stringstream ws(cell.substr(semi + 10));
      std::string w;
      while (std::getline(ws, w, '/')) {
        if (!w.empty()) r.omega_realized.push_back(std::stod(w) * kTwoPi);
      }
      set.records.push_back(std::move(r));
    }
  }
  std::vector<std::vector<double>> cols(set.records.size());
  std::vector<double> times;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream row(line);
    std::string cell;
    std::getline(row, cell, ',');
    times.push_back(std::stod(cell));
    for (auto& c : cols) {
      if (!std::getline(row, cell, ',')) {
        throw IoError(fmt::format("'{}': short row at t = {}", path.string(), times.back()));
      }
      c.push_back(std::stod(cell));
    }
  }
  if (times.size() >= 2) set.fs = 1.0 / (times[1] - times[0]);
  for (std::size_t i = 0; i < cols.size(); ++i) {
    set.records[i].samples = Eigen::Map<const Vec>(cols[i].data(), static_cast<Eigen::Index>(cols[i].size()));
  }
  return set;
}

void write_records(const RecordSet& set, const std::filesystem::path& path) {
  if (path.extension() == ".csv") {
    write_records_csv(set, path);
  } else {
    write_records_binary(set, path);
  }
}

RecordSet read_records(const std::filesystem::path& path) {
  return path.extension() == ".csv" ? read_records_csv(path) : read_records_binary(path);
}

}  // namespace optoretro
