// channel.hpp - integer delay-Doppler tap channel with AWGN
//
// For a transmitted frame x of body length N and prefix P, sample t of the
// received frame is
//
//   y(t) = sum_r h_r exp(j2pi k_r (t - l_r - P) / N) x((t - l_r) mod (N + P)) + w(t)
//
// The Doppler phase is referenced to the first body sample, so once the
// prefix is dropped (l_r <= P) the channel acts on the body as the cyclic
// N x N matrix sum_r h_r Pi^{l_r} Delta^{k_r}.

#pragma once

#include <vector>

#include "afdm_rsma/core.hpp"
#include "afdm_rsma/framing.hpp"

namespace afdm_rsma {

struct ChannelTap {
    Complex gain{1.0, 0.0};
    std::size_t delay = 0;
    int doppler = 0;
};

struct ChannelSpec {
    std::vector<ChannelTap> taps{ChannelTap{}};
    double noise_var = 0.0;
    // Scale taps so that sum |h_r|^2 = 1.
    bool normalize = true;

    // Taps after normalisation. Throws InvalidChannel for an empty tap list,
    // zero total gain or a negative noise variance.
    std::vector<ChannelTap> effective_taps() const;
    bool has_doppler() const;
    std::size_t max_delay() const;
    std::size_t max_doppler() const;
};

// Throws InvalidChannel when a delay reaches the frame length.
ComplexFrame apply_channel(const ComplexFrame& x, const ChannelSpec& spec, Seed seed);

// H(m) = sum_r h_r exp(-j2pi m l_r / N). Throws DopplerPresent for k != 0.
CVec freq_response(const ChannelSpec& spec, std::size_t n);

double snr_to_noise_var(double snr_db, const FrameConfig& cfg);

// Gains {1, 0.6} (normalised) at delays {0, 1}; Doppler {0, 1} when enabled.
ChannelSpec default_two_tap(bool doppler);

}  // namespace afdm_rsma
