#include "afdm_rsma/channel.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

namespace afdm_rsma {

namespace {

Complex doppler_phase(long long k, long long t, std::size_t n) {
    // Reduce k t mod N in integers so long frames keep full phase precision.
    const long long nn = static_cast<long long>(n);
    long long r = ((k % nn) * (t % nn)) % nn;
    if (r < 0) r += nn;
    const double angle = 2.0 * kPi * static_cast<double>(r) / static_cast<double>(n);
    return {std::cos(angle), std::sin(angle)};
}

}  // namespace

std::vector<ChannelTap> ChannelSpec::effective_taps() const {
    if (taps.empty()) throw Error(ErrorCode::InvalidChannel, "channel needs at least one tap");
    if (!(noise_var >= 0.0) || !std::isfinite(noise_var)) {
        throw Error(ErrorCode::InvalidChannel, "noise variance must be finite and non-negative");
    }
    double power = 0.0;
    for (const auto& t : taps) power += std::norm(t.gain);
    if (!(power > 0.0) || !std::isfinite(power)) {
        throw Error(ErrorCode::InvalidChannel, "total tap power must be positive");
    }
    std::vector<ChannelTap> out = taps;
    if (normalize) {
        const double s = 1.0 / std::sqrt(power);
        for (auto& t : out) t.gain *= s;
    }
    return out;
}

bool ChannelSpec::has_doppler() const {
    return std::any_of(taps.begin(), taps.end(), [](const ChannelTap& t) { return t.doppler != 0; });
}

std::size_t ChannelSpec::max_delay() const {
    std::size_t l = 0;
    for (const auto& t : taps) l = std::max(l, t.delay);
    return l;
}

std::size_t ChannelSpec::max_doppler() const {
    std::size_t k = 0;
    for (const auto& t : taps) k = std::max<std::size_t>(k, static_cast<std::size_t>(std::abs(t.doppler)));
    return k;
}

ComplexFrame apply_channel(const ComplexFrame& x, const ChannelSpec& spec, Seed seed) {
    if (x.domain() != Domain::Time) {
        throw Error(ErrorCode::InvalidConfig, "apply_channel expects a time-domain frame");
    }
    const auto taps = spec.effective_taps();
    const std::size_t total = x.total_size();
    const std::size_t n = x.size();
    const long long prefix = static_cast<long long>(x.prefix());
    for (const auto& t : taps) {
        if (t.delay >= total) {
            throw Error(ErrorCode::InvalidChannel, "delay " + std::to_string(t.delay) +
                                                       " not shorter than the frame");
        }
    }
    const CVec& in = x.samples();
    CVec out(total);
    for (const auto& tap : taps) {
        const long long l = static_cast<long long>(tap.delay);
        for (std::size_t t = 0; t < total; ++t) {
            const std::size_t src = (t + total - tap.delay) % total;
            Complex v = tap.gain * in[src];
            if (tap.doppler != 0) {
                v *= doppler_phase(tap.doppler, static_cast<long long>(t) - l - prefix, n);
            }
            out[t] += v;
        }
    }
    if (spec.noise_var > 0.0) {
        Rng rng(seed);
        for (auto& v : out) v += rng.complex_gaussian(spec.noise_var);
    }
    return ComplexFrame(Domain::Time, std::move(out), x.prefix());
}

CVec freq_response(const ChannelSpec& spec, std::size_t n) {
    if (spec.has_doppler()) {
        throw Error(ErrorCode::DopplerPresent, "frequency response needs a delay-only channel");
    }
    const auto taps = spec.effective_taps();
    CVec h(n);
    for (std::size_t m = 0; m < n; ++m) {
        for (const auto& t : taps) {
            const std::size_t r = (m * t.delay) % n;
            const double angle = -2.0 * kPi * static_cast<double>(r) / static_cast<double>(n);
            h[m] += t.gain * Complex(std::cos(angle), std::sin(angle));
        }
    }
    return h;
}

double snr_to_noise_var(double snr_db, const FrameConfig& cfg) {
    return average_sample_energy(cfg) / std::pow(10.0, snr_db / 10.0);
}

ChannelSpec default_two_tap(bool doppler) {
    ChannelSpec spec;
    spec.taps = {ChannelTap{{1.0, 0.0}, 0, 0}, ChannelTap{{0.6, 0.0}, 1, doppler ? 1 : 0}};
    spec.normalize = true;
    return spec;
}

}  // namespace afdm_rsma
