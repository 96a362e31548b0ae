#include "optoretro/psd.hpp"

#include <fmt/format.h>
#include <unsupported/Eigen/FFT>

#include <cmath>
#include <numbers>

namespace optoretro {

PsdEstimate estimate_psd(const std::vector<Vec>& records, double fs, std::size_t segment_length,
                         double shot_noise_psd) {
  if (records.empty()) throw Error("PSD needs at least one record");
  if (segment_length < 2) throw Error("segment length must be >= 2");
  if (!(shot_noise_psd > 0.0) || !std::isfinite(shot_noise_psd)) {
    throw Error("PSD normalization needs a finite positive shot-noise level");
  }
  const std::size_t n = segment_length;
  std::vector<double> window(n);
  double wss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    window[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n));
    wss += window[i] * window[i];
  }
  const std::size_t hop = std::max<std::size_t>(1, n / 2);
  Eigen::FFT<double> fft;
  std::vector<double> acc(n / 2 + 1, 0.0);
  std::vector<double> seg(n);
  std::vector<Complex> bins;
  PsdEstimate out;
  for (const auto& rec : records) {
    const auto len = static_cast<std::size_t>(rec.size());
    if (n > len) {
      throw Error(fmt::format("segment length {} exceeds record length {}", n, len));
    }
    for (std::size_t start = 0; start + n <= len; start += hop) {
      for (std::size_t i = 0; i < n; ++i) seg[i] = window[i] * rec[static_cast<Eigen::Index>(start + i)];
      fft.fwd(bins, seg);
      for (std::size_t f = 0; f <= n / 2; ++f) acc[f] += std::norm(bins[f]);
      ++out.segments;
    }
  }
  // Two-sided density |X|^2 / (fs sum w^2); one-sided doubles interior bins.
  const double scale = 1.0 / (fs * wss * static_cast<double>(out.segments));
  for (std::size_t f = 0; f <= n / 2; ++f) {
    const bool edge = f == 0 || (n % 2 == 0 && f == n / 2);
    const double one_sided = acc[f] * scale * (edge ? 1.0 : 2.0);
    out.frequency_hz.push_back(static_cast<double>(f) * fs / static_cast<double>(n));
    out.psd.push_back(one_sided / ((edge ? 1.0 : 2.0) * shot_noise_psd));
  }
  return out;
}

}  // namespace optoretro
