#ifndef NRFAR_AUDIO_HPP
#define NRFAR_AUDIO_HPP

#include <string>
#include <vector>

namespace nrfar {

// Mono PCM signal. Samples are dimensionless amplitudes, nominally in
// [-1, 1); 16-bit WAV files map to sample/32768.
struct AudioSignal {
  std::vector<double> samples;
  int sample_rate_hz = 2000;

  double duration_s() const {
    return sample_rate_hz > 0
               ? static_cast<double>(samples.size()) / sample_rate_hz
               : 0.0;
  }
};

// Reads a RIFF/WAVE file. Only PCM 16-bit mono is accepted; anything else
// raises DataError.
AudioSignal read_wav(const std::string& path);

// Writes PCM 16-bit mono. Sample values are scaled by 32768, rounded to
// nearest and clamped to [-32768, 32767].
void write_wav(const std::string& path, const AudioSignal& signal);

}  // namespace nrfar

#endif
