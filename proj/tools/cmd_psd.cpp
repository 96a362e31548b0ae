#include "commands.hpp"
#include "common.hpp"

#include "optoretro/psd.hpp"
#include "optoretro/record_io.hpp"

#include <fmt/format.h>

#include <fstream>

namespace cli {

void add_psd(CLI::App& app, int& status) {
  struct Opts {
    std::string config;
    std::string records;
    std::size_t segments = 8;
    std::string out = "psd.csv";
  };
  auto o = std::make_shared<Opts>();
  auto* sub = app.add_subcommand("psd", "Welch PSD of records, normalized to the shot-noise level");
  sub->add_option("--config", o->config, "Configuration file (JSON, Hz units)")->required()->check(CLI::ExistingFile);
  sub->add_option("--records", o->records, "Record file written by 'simulate'")->required()->check(CLI::ExistingFile);
  sub->add_option("--segments", o->segments, "Segment length is the record length divided by this")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  sub->add_option("--out", o->out, "Output CSV")->capture_default_str();
  sub->callback([o, &status] {
    const auto cfg = load_validated(o->config);
    const auto set = optoretro::read_records(o->records);
    if (set.records.empty()) throw optoretro::ValidationError("records", "file holds no records");
    const std::size_t nt = static_cast<std::size_t>(set.records.front().samples.size());
    const std::size_t seg = nt / o->segments;
    if (seg < 2) throw optoretro::ValidationError("segments", fmt::format("{} segments leave fewer than 2 samples each", o->segments));
    std::vector<optoretro::Vec> samples;
    samples.reserve(set.records.size());
    for (const auto& r : set.records) samples.push_back(r.samples);
    const auto est = optoretro::estimate_psd(samples, set.fs, seg, cfg.shot_noise_psd());

    ensure_parent(o->out);
    std::ofstream out(o->out);
    if (!out) throw optoretro::IoError(fmt::format("cannot open '{}' for writing", o->out));
    out << "frequency_hz,psd_over_shot_noise\n";
    for (std::size_t k = 0; k < est.psd.size(); ++k) out << num(est.frequency_hz[k]) << ',' << num(est.psd[k]) << '\n';
    if (!out) throw optoretro::IoError(fmt::format("write to '{}' failed", o->out));

    nlohmann::json side;
    side["provenance"] = provenance("psd", &cfg.config(), std::nullopt, command_line());
    side["records"] = set.records.size();
    side["segment_length"] = seg;
    side["segments_averaged"] = est.segments;
    side["columns"] = {"frequency_hz", "psd_over_shot_noise"};
    write_json(side, sidecar_path(o->out));
    status = kOk;
  });
}

}  // namespace cli
