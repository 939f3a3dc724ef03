#ifndef NRFAR_NOISE_HPP
#define NRFAR_NOISE_HPP

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nrfar/audio.hpp"

namespace nrfar {

// Mixed files are renormalized to this peak (1 - 2^-15), the largest
// magnitude that survives a 16-bit WAV round trip unchanged.
inline constexpr double kPeakTarget = 1.0 - 1.0 / 32768.0;

// I.i.d. zero-mean unit-variance Gaussian samples; seeded-deterministic.
std::vector<double> white_noise(std::size_t length, std::uint64_t seed);

struct SnrSpec {
  std::optional<double> snr_db;  // empty = clean (no mixing)

  static SnrSpec clean() { return {}; }
  static SnrSpec db(double v) { return {v}; }
  bool is_clean() const { return !snr_db.has_value(); }

  // The evaluation grid: 20 down to -15 dB in 5 dB steps.
  static std::vector<double> grid();
};

// Pool of natural-noise clips concatenated in seeded random order
// without replacement; once a pass is exhausted a fresh shuffle starts.
class ClipLibrary {
 public:
  // Loads every *.wav under `directory` (sorted by filename); all clips
  // must be mono 16-bit at `expected_rate_hz`.
  ClipLibrary(const std::string& directory, int expected_rate_hz);
  explicit ClipLibrary(std::vector<std::vector<double>> clips);

  std::size_t clip_count() const { return clips_.size(); }
  std::size_t total_samples() const;

  std::vector<double> concat(std::size_t length, std::uint64_t seed) const;

 private:
  std::vector<std::vector<double>> clips_;
};

// A reusable noise generator: stationary white noise or a clip pool.
class NoiseSource {
 public:
  static NoiseSource white();
  static NoiseSource clips(std::shared_ptr<const ClipLibrary> library);

  std::vector<double> generate(std::size_t length, std::uint64_t seed) const;
  const std::string& name() const { return name_; }

 private:
  NoiseSource(std::string name, std::shared_ptr<const ClipLibrary> library)
      : name_(std::move(name)), library_(std::move(library)) {}
  std::string name_;
  std::shared_ptr<const ClipLibrary> library_;  // null for white
};

struct MixResult {
  AudioSignal mixed;          // peak-normalized sum
  double noise_gain = 0.0;    // scale applied to the raw noise
  double signal_power = 0.0;  // mean square of the clean input
  double noise_power = 0.0;   // mean square of the scaled noise component
  double achieved_snr_db() const;
};

// Scales the noise so that the clean-signal to scaled-noise power ratio
// equals the requested SNR over the whole file, sums, and renormalizes
// the sum so its peak magnitude is exactly kPeakTarget. A clean spec
// skips the addition and only renormalizes. Requesting a finite SNR for
// a zero-power signal (or zero-power noise) raises DataError; a noise
// buffer shorter than the signal raises ConfigError.
MixResult mix_at_snr(const AudioSignal& signal, std::span<const double> noise, SnrSpec snr);

}  // namespace nrfar

#endif
