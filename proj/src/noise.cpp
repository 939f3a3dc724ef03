#include "nrfar/noise.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <limits>
#include <numeric>

#include "nrfar/errors.hpp"
#include "nrfar/rng.hpp"

namespace nrfar {

std::vector<double> white_noise(std::size_t length, std::uint64_t seed) {
  if (length == 0) throw ConfigError("white_noise: length must be positive");
  Rng rng(seed);
  std::vector<double> out(length);
  for (double& v : out) v = rng.gaussian();
  return out;
}

std::vector<double> SnrSpec::grid() {
  std::vector<double> g;
  for (double v = 20.0; v >= -15.0; v -= 5.0) g.push_back(v);
  return g;
}

ClipLibrary::ClipLibrary(const std::string& directory, int expected_rate_hz) {
  namespace fs = std::filesystem;
  std::vector<fs::path> paths;
  std::error_code ec;
  for (const auto& entry : fs::directory_iterator(directory, ec)) {
    if (entry.is_regular_file() && entry.path().extension() == ".wav")
      paths.push_back(entry.path());
  }
  if (ec) throw ConfigError("clip library: cannot read directory " + directory);
  std::sort(paths.begin(), paths.end());
  for (const auto& p : paths) {
    AudioSignal clip = read_wav(p.string());
    if (clip.sample_rate_hz != expected_rate_hz)
      throw DataError("clip " + p.string() + " has wrong sample rate");
    if (!clip.samples.empty()) clips_.push_back(std::move(clip.samples));
  }
  if (clips_.empty())
    throw ConfigError("clip library: no usable clips in " + directory);
}

ClipLibrary::ClipLibrary(std::vector<std::vector<double>> clips) : clips_(std::move(clips)) {
  if (clips_.empty()) throw ConfigError("clip library: empty clip set");
}

std::size_t ClipLibrary::total_samples() const {
  std::size_t n = 0;
  for (const auto& c : clips_) n += c.size();
  return n;
}

std::vector<double> ClipLibrary::concat(std::size_t length, std::uint64_t seed) const {
  std::vector<double> out;
  out.reserve(length);
  Rng rng(seed);
  std::vector<std::size_t> order(clips_.size());
  while (out.size() < length) {
    std::iota(order.begin(), order.end(), 0);
    rng.shuffle(order);
    for (const std::size_t idx : order) {
      const auto& clip = clips_[idx];
      const std::size_t take = std::min(clip.size(), length - out.size());
      out.insert(out.end(), clip.begin(), clip.begin() + static_cast<std::ptrdiff_t>(take));
      if (out.size() == length) return out;
    }
  }
  return out;
}

NoiseSource NoiseSource::white() { return NoiseSource("white", nullptr); }

NoiseSource NoiseSource::clips(std::shared_ptr<const ClipLibrary> library) {
  if (!library) throw ConfigError("noise source: null clip library");
  return NoiseSource("clips", std::move(library));
}

std::vector<double> NoiseSource::generate(std::size_t length, std::uint64_t seed) const {
  if (library_) return library_->concat(length, seed);
  return white_noise(length, seed);
}

double MixResult::achieved_snr_db() const {
  return 10.0 * std::log10(signal_power / noise_power);
}

MixResult mix_at_snr(const AudioSignal& signal, std::span<const double> noise, SnrSpec snr) {
  const std::size_t n = signal.samples.size();
  MixResult result;
  result.mixed.sample_rate_hz = signal.sample_rate_hz;

  double p_sig = 0.0;
  for (const double x : signal.samples) p_sig += x * x;
  if (n > 0) p_sig /= static_cast<double>(n);
  result.signal_power = p_sig;

  std::vector<double> sum(n);
  if (snr.is_clean()) {
    std::copy(signal.samples.begin(), signal.samples.end(), sum.begin());
  } else {
    if (noise.size() < n)
      throw ConfigError("mix_at_snr: noise shorter than signal");
    if (p_sig <= 0.0)
      throw DataError("mix_at_snr: zero-power signal cannot reach a finite SNR");
    double p_noise_raw = 0.0;
    for (std::size_t i = 0; i < n; ++i) p_noise_raw += noise[i] * noise[i];
    p_noise_raw /= static_cast<double>(n);
    if (p_noise_raw <= 0.0)
      throw DataError("mix_at_snr: zero-power noise");

    const double target_ratio = std::pow(10.0, *snr.snr_db / 10.0);
    const double gain = std::sqrt(p_sig / (p_noise_raw * target_ratio));
    result.noise_gain = gain;

    double p_scaled = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double v = gain * noise[i];
      p_scaled += v * v;
      sum[i] = signal.samples[i] + v;
    }
    result.noise_power = p_scaled / static_cast<double>(n);
  }

  double peak = 0.0;
  for (const double v : sum) peak = std::max(peak, std::abs(v));
  if (peak > 0.0) {
    // (v / peak) * target pins the peak sample to the target exactly.
    for (double& v : sum) v = (v / peak) * kPeakTarget;
  }
  result.mixed.samples = std::move(sum);
  return result;
}

}  // namespace nrfar
