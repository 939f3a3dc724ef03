#include "nrfar/dsp.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "nrfar/errors.hpp"
#include "nrfar/textio.hpp"

namespace nrfar {

BiquadBandPass::BiquadBandPass(const BandPassConfig& cfg, int sample_rate_hz) {
  if (sample_rate_hz <= 0)
    throw ConfigError("band-pass: sample rate must be positive");
  const double nyquist = sample_rate_hz / 2.0;
  if (!(cfg.low_cut_hz > 0.0 && cfg.low_cut_hz < cfg.high_cut_hz &&
        cfg.high_cut_hz < nyquist))
    throw ConfigError("band-pass: need 0 < low_cut < high_cut < fs/2");

  // Pre-warped edge frequencies; s = (1 - z^-1) / (1 + z^-1).
  const double w1 = std::tan(std::numbers::pi * cfg.low_cut_hz / sample_rate_hz);
  const double w2 = std::tan(std::numbers::pi * cfg.high_cut_hz / sample_rate_hz);
  const double bw = w2 - w1;
  const double w0sq = w1 * w2;

  const double a0 = 1.0 + bw + w0sq;
  b0_ = bw / a0;
  b2_ = -bw / a0;
  a1_ = 2.0 * (w0sq - 1.0) / a0;
  a2_ = (1.0 - bw + w0sq) / a0;
}

DspFrontend::DspFrontend(const FrontendConfig& cfg)
    : cfg_(cfg), filter_(cfg.band_pass, cfg.sample_rate_hz) {
  if (cfg.stream_rate_hz <= 0 || cfg.stream_rate_hz > cfg.sample_rate_hz)
    throw ConfigError("frontend: need 0 < stream rate <= sample rate");
  if (cfg.envelope_tau_s <= 0.0)
    throw ConfigError("frontend: envelope time constant must be positive");
  ema_alpha_ = 1.0 - std::exp(-1.0 / (cfg.sample_rate_hz * cfg.envelope_tau_s));
  next_boundary_ = static_cast<std::int64_t>(cfg.sample_rate_hz) / cfg.stream_rate_hz;
}

bool DspFrontend::push(double sample, StreamTick& tick) {
  const double filtered = filter_.process(sample);
  const double power = filtered * filtered;
  last_power_ = power;
  ema_ += ema_alpha_ * (power - ema_);
  frame_sum_ += power;
  ++samples_seen_;
  if (samples_seen_ == next_boundary_) {
    tick.envelope = ema_;
    tick.energy = frame_sum_;
    frame_sum_ = 0.0;
    ++frame_index_;
    next_boundary_ = ((frame_index_ + 1) * cfg_.sample_rate_hz) / cfg_.stream_rate_hz;
    return true;
  }
  return false;
}

void DspFrontend::process(std::span<const double> samples, std::vector<StreamTick>& out) {
  StreamTick tick;
  for (const double s : samples) {
    if (push(s, tick)) out.push_back(tick);
  }
}

DerivedSignals DspFrontend::run(const AudioSignal& signal, bool keep_power) {
  DerivedSignals d;
  if (keep_power) d.power.reserve(signal.samples.size());
  StreamTick tick;
  for (const double s : signal.samples) {
    const bool emitted = push(s, tick);
    if (keep_power) d.power.push_back(last_power_);
    if (emitted) {
      d.envelope.push_back(tick.envelope);
      d.energy.push_back(tick.energy);
    }
  }
  return d;
}

std::string derived_streams_csv(const DerivedSignals& s, const std::string& header_comment) {
  std::ostringstream out;
  if (!header_comment.empty()) out << "# " << header_comment << "\n";
  out << "envelope,energy\n";
  for (std::size_t i = 0; i < s.envelope.size(); ++i)
    out << format_double(s.envelope[i]) << ',' << format_double(s.energy[i]) << "\n";
  return out.str();
}

}  // namespace nrfar
