#include "afdm_rsma/baseline.hpp"

#include <algorithm>
#include <cmath>

namespace afdm_rsma {

namespace {

double comb_amplitude(const FrameConfig& cfg) {
    return std::sqrt(cfg.phi_pilot / static_cast<double>(cfg.affine.m()));
}

}  // namespace

std::vector<std::size_t> baseline_data_subcarriers(const FrameConfig& cfg) {
    return resource_map(cfg).private_subcarriers;
}

BaselineFrame baseline_compose(std::span<const Complex> common_symbols,
                               std::span<const Complex> private_symbols, const FrameConfig& cfg) {
    const auto data = baseline_data_subcarriers(cfg);
    if (common_symbols.size() != data.size() || private_symbols.size() != data.size()) {
        throw Error(ErrorCode::InvalidLength, "baseline frame carries " + std::to_string(data.size()) +
                                                  " symbols per layer");
    }
    const std::size_t n = cfg.affine.n;
    ComplexFrame freq = ComplexFrame::zeros(Domain::Frequency, n);
    const double comb = comb_amplitude(cfg);
    for (std::size_t m = 0; m < n; m += cfg.affine.c1_prime) freq[m] = comb;
    const double a1 = std::sqrt(cfg.phi1);
    const double a2 = std::sqrt(cfg.phi2);
    for (std::size_t k = 0; k < data.size(); ++k) {
        freq[data[k]] = a1 * common_symbols[k] + a2 * private_symbols[k];
    }
    const AffineTransform t(AffineParams{n, 0, 0.0});
    ComplexFrame time = add_cyclic_prefix(t.idft(freq), cfg.cp_len);
    return BaselineFrame{CVec(common_symbols.begin(), common_symbols.end()),
                         CVec(private_symbols.begin(), private_symbols.end()), std::move(freq),
                         std::move(time)};
}

double baseline_sample_energy(const FrameConfig& cfg) {
    const double data = static_cast<double>(baseline_data_subcarriers(cfg).size());
    return (cfg.phi_pilot + (cfg.phi1 + cfg.phi2) * data) / static_cast<double>(cfg.affine.n);
}

ChannelEstimate baseline_estimate(const ComplexFrame& y_freq, const FrameConfig& cfg) {
    cfg.validate();
    y_freq.expect_size(cfg.affine.n, "baseline_estimate");
    const std::size_t m = cfg.affine.m();
    const std::size_t c1p = cfg.affine.c1_prime;
    if (cfg.max_delay >= m) {
        throw Error(ErrorCode::AliasedDelay, "comb spacing too wide for the channel delay");
    }
    const double comb = comb_amplitude(cfg);
    if (!(comb > 0.0)) throw Error(ErrorCode::DegeneratePilot, "pilot power is zero");
    ChannelEstimate est;
    est.domain = Domain::Frequency;
    for (std::size_t l = 0; l <= cfg.max_delay; ++l) {
        Complex h{0.0, 0.0};
        for (std::size_t j = 0; j < m; ++j) {
            const double angle = 2.0 * kPi * static_cast<double>((j * l) % m) / static_cast<double>(m);
            h += y_freq[j * c1p] / comb * Complex(std::cos(angle), std::sin(angle));
        }
        est.taps.push_back(ChannelTap{h / static_cast<double>(m), l, 0});
    }
    ChannelSpec spec;
    spec.taps = est.taps;
    spec.normalize = false;
    est.h_freq = freq_response(spec, cfg.affine.n);
    return est;
}

ChannelEstimate baseline_perfect_estimate(const ChannelSpec& spec, const FrameConfig& cfg) {
    ChannelSpec flat = spec;
    flat.taps = spec.effective_taps();
    flat.normalize = false;
    for (auto& t : flat.taps) t.doppler = 0;
    ChannelEstimate est;
    est.taps = flat.taps;
    est.domain = Domain::Frequency;
    est.h_freq = freq_response(flat, cfg.affine.n);
    est.nmse = 0.0;
    return est;
}

Detection baseline_detect(const ComplexFrame& y_time, const FrameConfig& cfg, const ChannelEstimate& est,
                          double noise_var) {
    if (!est.h_freq) throw Error(ErrorCode::InvalidConfig, "baseline needs a per-subcarrier response");
    const std::size_t n = cfg.affine.n;
    if (y_time.total_size() != n + cfg.cp_len) {
        throw Error(ErrorCode::InvalidLength, "baseline received frame has the wrong length");
    }
    const auto& all = y_time.samples();
    const ComplexFrame body(Domain::Time, CVec(all.begin() + static_cast<std::ptrdiff_t>(cfg.cp_len), all.end()));
    const ComplexFrame y = dft(body);
    const CVec& h = *est.h_freq;
    const double lambda = std::max(noise_var, 0.0) / baseline_sample_energy(cfg);
    const auto data = baseline_data_subcarriers(cfg);
    const double a1 = std::sqrt(cfg.phi1);
    const double a2 = std::sqrt(cfg.phi2);
    const Constellation& c = cfg.constellation;

    Detection d;
    d.common_soft.resize(data.size());
    d.private_soft.resize(data.size());
    for (std::size_t k = 0; k < data.size(); ++k) {
        const std::size_t m = data[k];
        const double den = std::norm(h[m]) + lambda;
        const Complex x = den > 0.0 ? y[m] * std::conj(h[m]) / den : Complex{0.0, 0.0};
        d.common_soft[k] = x / a1;
        const Complex c_hat = c.points()[c.nearest(d.common_soft[k])];
        d.private_soft[k] = a2 > 0.0 ? (x - a1 * c_hat) / a2 : Complex{0.0, 0.0};
    }
    d.common_bits = demodulate_symbols(d.common_soft, c);
    d.private_bits = demodulate_symbols(d.private_soft, c);
    return d;
}

}  // namespace afdm_rsma
