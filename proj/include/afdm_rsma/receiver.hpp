// receiver.hpp - channel estimation, equalization and stream detection
//
// In the affine domain a tap (h, l, k) moves index q to
// p = (q + k - c1' l) mod N with coefficient
//
//   h exp(j2pi (c1 l^2 - (q + k) l / N + c2 (q^2 - p^2)))
//
// so the pilot at index 0 lands at (k - c1' l) mod N. Candidate (l, k) pairs
// therefore sit inside the two-sided guard around index 0 as long as
// c1' l_max + k_max <= G and k_max < c1'.

#pragma once

#include <limits>
#include <optional>
#include <vector>

#include "afdm_rsma/channel.hpp"
#include "afdm_rsma/core.hpp"
#include "afdm_rsma/framing.hpp"

namespace afdm_rsma {

enum class ReceiverMode { SicFree, SicCleanPilot, SicFull };
enum class EqualizerMethod { ZF, MMSE };
// Which received plane is equalized first.
enum class EqualizationPath { Frequency, Affine };

const char* to_string(ReceiverMode m);

struct ChannelEstimate {
    std::vector<ChannelTap> taps;
    // Per-subcarrier response; present for delay-only estimates.
    std::optional<CVec> h_freq;
    Domain domain = Domain::Frequency;
    double nmse = std::numeric_limits<double>::quiet_NaN();

    bool delay_only() const;
};

ChannelEstimate perfect_estimate(const ChannelSpec& spec, const FrameConfig& cfg);

/**
 * LS estimate on the class-0 pilot subcarriers, interpolated to all N.
 *
 * The M pilot-subcarrier ratios are taken to M delay taps by an M-point
 * IDFT, truncated to 0..max_delay and re-expanded. Errors: PilotContaminated
 * (approach 2), DegeneratePilot (zero pilot image), AliasedDelay
 * (max_delay >= M).
 */
ChannelEstimate estimate_channel_freq(const ComplexFrame& y_freq, const FrameConfig& cfg);

struct PeakSearchOptions {
    double noise_var = 0.0;
    // Detection threshold: |Y|^2 > (1 + kappa) * floor.
    double kappa = 3.0;
    // Bins below rel_floor * strongest peak are never taps.
    double rel_floor = 1e-9;
};

/**
 * Pilot peak search over the (l, k) grid 0..max_delay x 0..max_doppler.
 *
 * The floor is the noise variance, plus phi2 for bins that can carry spread
 * private data (classes != 0, or any class when Doppler is enabled). The
 * strongest candidate is always kept. Errors: GuardViolation when
 * c1' l_max + k_max > G, UnresolvableDoppler when k_max >= c1',
 * DegeneratePilot when the grid holds no energy.
 */
ChannelEstimate estimate_channel_affine(const ComplexFrame& y_affine, const FrameConfig& cfg,
                                        bool doppler_enabled, const PeakSearchOptions& opt = {});

// Affine-domain image of a tap set applied to x (sparse, R entries per column).
ComplexFrame apply_affine_channel(const std::vector<ChannelTap>& taps, const ComplexFrame& x,
                                  const AffineParams& p);

// Sum |h_est - h|^2 / sum |h|^2 over the union of (delay, doppler) keys.
double tap_nmse(const std::vector<ChannelTap>& est, const std::vector<ChannelTap>& truth);

/**
 * Undo the channel on a received plane.
 *
 * Delay-only estimates on a frequency plane use one tap per subcarrier.
 * Everything else solves the full N x N affine-domain system; the result is
 * returned in the domain of `y`. MMSE regularises with noise_var divided by
 * the average sample energy of cfg. ZF throws SingularChannel on a
 * singular channel; MMSE never throws.
 */
ComplexFrame equalize(const ComplexFrame& y, const ChannelEstimate& est, const FrameConfig& cfg,
                      EqualizerMethod method, double noise_var);

struct DetectOptions {
    EqualizerMethod method = EqualizerMethod::MMSE;
    EqualizationPath path = EqualizationPath::Frequency;
    double noise_var = 0.0;
};

struct Detection {
    // Equalized symbols divided by their transmit amplitude.
    CVec common_soft;
    CVec extra_soft;
    CVec private_soft;
    // Demodulated common (common then extra) and private bits.
    Bits common_bits;
    Bits private_bits;
};

Detection detect_streams(const ComplexFrame& y_time, const FrameConfig& cfg, const ChannelEstimate& est,
                         ReceiverMode mode, const DetectOptions& opt = {});

}  // namespace afdm_rsma
