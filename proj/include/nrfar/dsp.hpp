#ifndef NRFAR_DSP_HPP
#define NRFAR_DSP_HPP

#include <cstdint>
#include <span>
#include <vector>

#include "nrfar/audio.hpp"

namespace nrfar {

// Second-order Butterworth band-pass passband; -3 dB at both cutoffs.
struct BandPassConfig {
  double low_cut_hz = 100.0;
  double high_cut_hz = 800.0;
};

// Single biquad section in transposed direct form II, states zeroed.
// Designed from the analog prototype H(s) = B*s / (s^2 + B*s + w0^2) via
// the bilinear transform with frequency pre-warping, so the digital
// response is exactly -3 dB at both configured cutoffs.
class BiquadBandPass {
 public:
  BiquadBandPass(const BandPassConfig& cfg, int sample_rate_hz);

  double process(double x) {
    const double y = b0_ * x + s1_;
    s1_ = -a1_ * y + s2_;        // b1 = 0
    s2_ = b2_ * x - a2_ * y;
    return y;
  }

  void reset() { s1_ = s2_ = 0.0; }

 private:
  double b0_ = 0, b2_ = 0, a1_ = 0, a2_ = 0;
  double s1_ = 0, s2_ = 0;
};

struct FrontendConfig {
  int sample_rate_hz = 2000;  // f_i
  int stream_rate_hz = 150;   // f_s of the envelope/energy streams
  BandPassConfig band_pass{};
  double envelope_tau_s = 0.040;  // single-pole smoother time constant
};

// One envelope/energy pair emitted at f_s.
struct StreamTick {
  double envelope = 0.0;
  double energy = 0.0;
};

// Batch view of the conditioned streams.
struct DerivedSignals {
  std::vector<double> power;     // per-sample, at f_i
  std::vector<double> envelope;  // at f_s
  std::vector<double> energy;    // at f_s
};

// Streaming front end: band-pass -> instantaneous power -> {smoothed
// decimated envelope, frame-summed energy}. Both output streams share one
// frame schedule, frame j covering input samples
// [floor(j*f_i/f_s), floor((j+1)*f_i/f_s)), so they stay aligned and come
// out at exactly f_s even when f_i/f_s is not an integer (2000/150 gives
// frame lengths 13,13,14,...). Chunk boundaries in process() never affect
// the output: feeding the same samples in any split yields bit-identical
// streams.
class DspFrontend {
 public:
  explicit DspFrontend(const FrontendConfig& cfg);

  // Consumes samples, appends completed ticks to `out`.
  void process(std::span<const double> samples, std::vector<StreamTick>& out);

  // Single-sample path; returns true when `tick` was produced.
  bool push(double sample, StreamTick& tick);

  std::int64_t samples_consumed() const { return samples_seen_; }
  double last_power() const { return last_power_; }
  const FrontendConfig& config() const { return cfg_; }

  // One-shot convenience; keep_power retains the f_i-rate power stream.
  DerivedSignals run(const AudioSignal& signal, bool keep_power = true);

 private:
  FrontendConfig cfg_;
  BiquadBandPass filter_;
  double ema_alpha_ = 0.0;
  double ema_ = 0.0;
  double frame_sum_ = 0.0;
  double last_power_ = 0.0;
  std::int64_t samples_seen_ = 0;
  std::int64_t frame_index_ = 0;
  std::int64_t next_boundary_ = 0;
};

// Writes "envelope,energy" rows, one per f_s tick, preceded by comment
// header lines. Debug aid referenced by the CLI.
std::string derived_streams_csv(const DerivedSignals& s, const std::string& header_comment);

}  // namespace nrfar

#endif
