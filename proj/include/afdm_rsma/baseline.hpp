// baseline.hpp - conventional single-waveform OFDM RSMA reference
//
// Comb pilots sit on the class-0 subcarriers with total power phi (phi / M
// each). The remaining N - M subcarriers carry sqrt(phi1) common plus
// sqrt(phi2) private symbols superposed on the same resource. The receiver
// estimates on the comb, applies a one-tap equalizer and decodes with SIC:
// common first, then private after subtracting the common layer.

#pragma once

#include "afdm_rsma/channel.hpp"
#include "afdm_rsma/framing.hpp"
#include "afdm_rsma/receiver.hpp"

namespace afdm_rsma {

struct BaselineFrame {
    CVec common_symbols;
    CVec private_symbols;
    ComplexFrame freq_plane;
    ComplexFrame time;
};

// Data subcarriers ([m] != 0); each carries one common and one private symbol.
std::vector<std::size_t> baseline_data_subcarriers(const FrameConfig& cfg);

BaselineFrame baseline_compose(std::span<const Complex> common_symbols,
                               std::span<const Complex> private_symbols, const FrameConfig& cfg);

double baseline_sample_energy(const FrameConfig& cfg);

// Comb LS estimate interpolated through max_delay + 1 taps.
ChannelEstimate baseline_estimate(const ComplexFrame& y_freq, const FrameConfig& cfg);

// One-tap response the baseline equalizer uses for a known channel: Doppler
// is not modelled, so every tap is treated as k = 0.
ChannelEstimate baseline_perfect_estimate(const ChannelSpec& spec, const FrameConfig& cfg);

Detection baseline_detect(const ComplexFrame& y_time, const FrameConfig& cfg, const ChannelEstimate& est,
                          double noise_var);

}  // namespace afdm_rsma
