// Per-frame solves already run inside the Monte Carlo worker threads.
#define EIGEN_DONT_PARALLELIZE

#include "afdm_rsma/receiver.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <map>

namespace afdm_rsma {

const char* to_string(ReceiverMode m) {
    switch (m) {
        case ReceiverMode::SicFree: return "sicfree";
        case ReceiverMode::SicCleanPilot: return "sic-clean";
        case ReceiverMode::SicFull: return "sic-full";
    }
    return "?";
}

bool ChannelEstimate::delay_only() const {
    return std::all_of(taps.begin(), taps.end(), [](const ChannelTap& t) { return t.doppler == 0; });
}

namespace {

long long mod(long long a, long long n) {
    const long long r = a % n;
    return r < 0 ? r + n : r;
}

Complex cis_cycles(long double cycles) {
    const long double frac = cycles - std::floor(cycles);
    const double angle = static_cast<double>(2.0L * 3.141592653589793238462643383279502884L * frac);
    return {std::cos(angle), std::sin(angle)};
}

// Destination index and coefficient of affine index q under one tap.
std::size_t path_coefficient(const ChannelTap& tap, std::size_t q, const AffineParams& p, Complex& coef) {
    const long long n = static_cast<long long>(p.n);
    const long long c1p = static_cast<long long>(p.c1_prime);
    const long long l = static_cast<long long>(tap.delay);
    const long long k = tap.doppler;
    const long long qq = static_cast<long long>(q);
    const long long dst = mod(qq + k - c1p * l, n);
    // c1 l^2 - (q + k) l / N = (c1' l^2 - 2 (q + k) l) / 2N
    const long long num = mod(mod(c1p * l % (2 * n) * l, 2 * n) - mod(2 * mod(qq + k, n) * l, 2 * n), 2 * n);
    const long double c2 = static_cast<long double>(p.c2);
    const long double cycles = static_cast<long double>(num) / static_cast<long double>(2 * n) +
                               c2 * (static_cast<long double>(qq * qq) - static_cast<long double>(dst * dst));
    coef = tap.gain * cis_cycles(cycles);
    return static_cast<std::size_t>(dst);
}

using Matrix = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic>;
using Vector = Eigen::Matrix<Complex, Eigen::Dynamic, 1>;

Matrix affine_matrix(const std::vector<ChannelTap>& taps, const AffineParams& p) {
    const std::size_t n = p.n;
    Matrix h = Matrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (const auto& tap : taps) {
        for (std::size_t q = 0; q < n; ++q) {
            Complex c;
            const std::size_t dst = path_coefficient(tap, q, p, c);
            h(static_cast<Eigen::Index>(dst), static_cast<Eigen::Index>(q)) += c;
        }
    }
    return h;
}

CVec response_from_taps(const std::vector<ChannelTap>& taps, std::size_t n) {
    ChannelSpec spec;
    spec.taps = taps;
    spec.normalize = false;
    return freq_response(spec, n);
}

void check_estimator_geometry(const FrameConfig& cfg, std::size_t k_max) {
    const std::size_t span = cfg.affine.c1_prime * cfg.max_delay + k_max;
    if (span > cfg.guard) {
        throw Error(ErrorCode::GuardViolation, "pilot shifts up to " + std::to_string(span) +
                                                   " exceed the guard " + std::to_string(cfg.guard));
    }
    if (k_max >= cfg.affine.c1_prime) {
        throw Error(ErrorCode::UnresolvableDoppler, "Doppler span must stay below c1'");
    }
}

}  // namespace

ComplexFrame apply_affine_channel(const std::vector<ChannelTap>& taps, const ComplexFrame& x,
                                  const AffineParams& p) {
    if (x.domain() != Domain::Affine) {
        throw Error(ErrorCode::InvalidConfig, "apply_affine_channel expects an affine frame");
    }
    x.expect_size(p.n, "apply_affine_channel");
    ComplexFrame y = ComplexFrame::zeros(Domain::Affine, p.n);
    for (const auto& tap : taps) {
        for (std::size_t q = 0; q < p.n; ++q) {
            Complex c;
            const std::size_t dst = path_coefficient(tap, q, p, c);
            y[dst] += c * x[q];
        }
    }
    return y;
}

double tap_nmse(const std::vector<ChannelTap>& est, const std::vector<ChannelTap>& truth) {
    std::map<std::pair<std::size_t, int>, std::pair<Complex, Complex>> keyed;
    for (const auto& t : est) keyed[{t.delay, t.doppler}].first += t.gain;
    double ref = 0.0;
    for (const auto& t : truth) {
        keyed[{t.delay, t.doppler}].second += t.gain;
        ref += std::norm(t.gain);
    }
    double err = 0.0;
    for (const auto& [key, v] : keyed) err += std::norm(v.first - v.second);
    return ref > 0.0 ? err / ref : std::numeric_limits<double>::quiet_NaN();
}

ChannelEstimate perfect_estimate(const ChannelSpec& spec, const FrameConfig& cfg) {
    ChannelEstimate est;
    est.taps = spec.effective_taps();
    if (spec.has_doppler()) {
        est.domain = Domain::Affine;
    } else {
        est.domain = Domain::Frequency;
        est.h_freq = freq_response(spec, cfg.affine.n);
    }
    est.nmse = 0.0;
    return est;
}

ChannelEstimate estimate_channel_freq(const ComplexFrame& y_freq, const FrameConfig& cfg) {
    cfg.validate();
    if (y_freq.domain() != Domain::Frequency) {
        throw Error(ErrorCode::InvalidConfig, "estimate_channel_freq expects a frequency plane");
    }
    y_freq.expect_size(cfg.affine.n, "estimate_channel_freq");
    if (cfg.approach != Approach::CleanPilot) {
        throw Error(ErrorCode::PilotContaminated, "class-0 subcarriers carry extra data in approach 2");
    }
    const std::size_t n = cfg.affine.n;
    const std::size_t m = cfg.affine.m();
    const std::size_t c1p = cfg.affine.c1_prime;
    if (cfg.max_delay >= m) {
        throw Error(ErrorCode::AliasedDelay, "delays up to " + std::to_string(cfg.max_delay) +
                                                 " alias on " + std::to_string(m) + " pilot subcarriers");
    }
    const ComplexFrame pilot = affine_to_freq(build_affine_pilot(cfg), cfg.affine);
    CVec ratio(m);
    for (std::size_t j = 0; j < m; ++j) {
        const Complex p = pilot[j * c1p];
        if (std::abs(p) < 1e-12) throw Error(ErrorCode::DegeneratePilot, "pilot image vanishes");
        ratio[j] = y_freq[j * c1p] / p;
    }
    // H(j c1') = sum_l h_l exp(-j2pi j l / M), an M-point DFT of the taps.
    ChannelEstimate est;
    est.domain = Domain::Frequency;
    for (std::size_t l = 0; l <= cfg.max_delay; ++l) {
        Complex h{0.0, 0.0};
        for (std::size_t j = 0; j < m; ++j) {
            const double angle = 2.0 * kPi * static_cast<double>((j * l) % m) / static_cast<double>(m);
            h += ratio[j] * Complex(std::cos(angle), std::sin(angle));
        }
        est.taps.push_back(ChannelTap{h / static_cast<double>(m), l, 0});
    }
    est.h_freq = response_from_taps(est.taps, n);
    return est;
}

ChannelEstimate estimate_channel_affine(const ComplexFrame& y_affine, const FrameConfig& cfg,
                                        bool doppler_enabled, const PeakSearchOptions& opt) {
    cfg.validate();
    if (y_affine.domain() != Domain::Affine) {
        throw Error(ErrorCode::InvalidConfig, "estimate_channel_affine expects an affine plane");
    }
    y_affine.expect_size(cfg.affine.n, "estimate_channel_affine");
    const std::size_t k_max = doppler_enabled ? cfg.max_doppler : 0;
    check_estimator_geometry(cfg, k_max);
    if (!(cfg.phi_pilot > 0.0)) throw Error(ErrorCode::DegeneratePilot, "pilot power is zero");

    const AffineParams& p = cfg.affine;
    const long long n = static_cast<long long>(p.n);
    struct Candidate {
        std::size_t l;
        std::size_t k;
        std::size_t bin;
        double power;
        double floor;
    };
    std::vector<Candidate> cands;
    double strongest = 0.0;
    for (std::size_t l = 0; l <= cfg.max_delay; ++l) {
        for (std::size_t k = 0; k <= k_max; ++k) {
            const auto bin = static_cast<std::size_t>(
                mod(static_cast<long long>(k) - static_cast<long long>(p.c1_prime * l), n));
            const bool clean = p.residue(bin) == 0 && !doppler_enabled;
            const double floor = opt.noise_var + (clean ? 0.0 : cfg.phi2);
            const double power = std::norm(y_affine[bin]);
            cands.push_back({l, k, bin, power, floor});
            strongest = std::max(strongest, power);
        }
    }
    if (!(strongest > 0.0)) throw Error(ErrorCode::DegeneratePilot, "no pilot energy in the search grid");
    ChannelEstimate est;
    est.domain = Domain::Affine;
    const double amp = std::sqrt(cfg.phi_pilot);
    for (const auto& c : cands) {
        const bool is_max = c.power == strongest;
        const bool above = c.power > (1.0 + opt.kappa) * c.floor && c.power >= opt.rel_floor * strongest;
        if (!is_max && !above) continue;
        // Pilot phase at the peak: c1 l^2 - k l / N - c2 bin^2.
        const long long num = mod(static_cast<long long>(p.c1_prime * c.l % (2 * p.n) * c.l) -
                                      2 * static_cast<long long>(c.k * c.l),
                                  2 * n);
        const long double cycles =
            static_cast<long double>(num) / static_cast<long double>(2 * n) -
            static_cast<long double>(p.c2) * static_cast<long double>(c.bin) * static_cast<long double>(c.bin);
        const Complex h = y_affine[c.bin] / (amp * cis_cycles(cycles));
        est.taps.push_back(ChannelTap{h, c.l, static_cast<int>(c.k)});
    }
    if (est.delay_only()) est.h_freq = response_from_taps(est.taps, p.n);
    return est;
}

ComplexFrame equalize(const ComplexFrame& y, const ChannelEstimate& est, const FrameConfig& cfg,
                      EqualizerMethod method, double noise_var) {
    const std::size_t n = cfg.affine.n;
    y.expect_size(n, "equalize");
    if (y.domain() == Domain::Time) throw Error(ErrorCode::InvalidConfig, "equalize expects a frequency or affine plane");
    const double es = average_sample_energy(cfg);
    const double lambda = es > 0.0 ? std::max(noise_var, 0.0) / es : 0.0;

    if (y.domain() == Domain::Frequency && est.delay_only()) {
        const CVec h = est.h_freq ? *est.h_freq : response_from_taps(est.taps, n);
        if (h.size() != n) throw Error(ErrorCode::InvalidLength, "frequency response length mismatch");
        ComplexFrame out = ComplexFrame::zeros(Domain::Frequency, n);
        for (std::size_t m = 0; m < n; ++m) {
            if (method == EqualizerMethod::ZF) {
                if (std::abs(h[m]) < 1e-12) {
                    throw Error(ErrorCode::SingularChannel, "zero response at subcarrier " + std::to_string(m));
                }
                out[m] = y[m] / h[m];
            } else {
                const double den = std::norm(h[m]) + lambda;
                out[m] = den > 0.0 ? y[m] * std::conj(h[m]) / den : Complex{0.0, 0.0};
            }
        }
        return out;
    }

    const AffineTransform t(cfg.affine);
    const ComplexFrame ya = y.domain() == Domain::Affine ? y : t.freq_to_affine(y);
    const Matrix h = affine_matrix(est.taps, cfg.affine);
    Vector rhs(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) rhs(static_cast<Eigen::Index>(i)) = ya[i];
    Vector x;
    if (method == EqualizerMethod::ZF) {
        Eigen::PartialPivLU<Matrix> lu(h);
        if (!(lu.rcond() > 1e-12)) throw Error(ErrorCode::SingularChannel, "affine channel matrix is singular");
        x = lu.solve(rhs);
    } else {
        Matrix a = h.adjoint() * h;
        a.diagonal().array() += Complex(lambda, 0.0);
        x = a.ldlt().solve(h.adjoint() * rhs);
    }
    ComplexFrame xa = ComplexFrame::zeros(Domain::Affine, n);
    for (std::size_t i = 0; i < n; ++i) {
        const Complex v = x(static_cast<Eigen::Index>(i));
        xa[i] = std::isfinite(v.real()) && std::isfinite(v.imag()) ? v : Complex{0.0, 0.0};
    }
    return y.domain() == Domain::Affine ? xa : t.affine_to_freq(xa);
}

namespace {

CVec gather(const ComplexFrame& plane, const std::vector<std::size_t>& idx, double amp) {
    CVec out(idx.size());
    const double s = amp > 0.0 ? 1.0 / amp : 1.0;
    for (std::size_t k = 0; k < idx.size(); ++k) out[k] = plane[idx[k]] * s;
    return out;
}

CVec hard(const CVec& soft, const Constellation& c) {
    CVec out(soft.size());
    for (std::size_t k = 0; k < soft.size(); ++k) out[k] = c.points()[c.nearest(soft[k])];
    return out;
}

Bits concat_bits(const CVec& a, const CVec& b, const Constellation& c) {
    Bits out = demodulate_symbols(a, c);
    const Bits tail = demodulate_symbols(b, c);
    out.insert(out.end(), tail.begin(), tail.end());
    return out;
}

}  // namespace

Detection detect_streams(const ComplexFrame& y_time, const FrameConfig& cfg, const ChannelEstimate& est,
                         ReceiverMode mode, const DetectOptions& opt) {
    const ResourceMap map = resource_map(cfg);
    const ReceivedPlanes planes = extract_received_planes(y_time, cfg);
    const AffineTransform t(cfg.affine);

    ComplexFrame xa = ComplexFrame::zeros(Domain::Affine, cfg.affine.n);
    ComplexFrame xf = ComplexFrame::zeros(Domain::Frequency, cfg.affine.n);
    if (opt.path == EqualizationPath::Frequency) {
        xf = equalize(planes.freq, est, cfg, opt.method, opt.noise_var);
        xa = t.freq_to_affine(xf);
    } else {
        xa = equalize(planes.affine, est, cfg, opt.method, opt.noise_var);
        xf = t.affine_to_freq(xa);
    }

    const double a1 = std::sqrt(cfg.phi1);
    const double a2 = std::sqrt(cfg.phi2);
    Detection d;
    d.common_soft = gather(xa, map.common_indices, a1);
    d.extra_soft = gather(xa, map.extra_indices, 1.0);

    if (mode == ReceiverMode::SicFree) {
        d.private_soft = gather(xf, map.private_subcarriers, a2);
    } else {
        const TxFrame rebuilt = compose_frame(hard(d.common_soft, cfg.constellation),
                                              hard(d.extra_soft, cfg.constellation),
                                              CVec(map.private_subcarriers.size()), cfg);
        ComplexFrame residual = xf;
        for (std::size_t m = 0; m < cfg.affine.n; ++m) residual[m] -= rebuilt.freq_plane[m];
        d.private_soft = gather(residual, map.private_subcarriers, a2);

        if (mode == ReceiverMode::SicFull && cfg.private_active()) {
            const ComplexFrame priv = build_freq_private(hard(d.private_soft, cfg.constellation), cfg);
            ComplexFrame cleaned = xf;
            for (std::size_t m = 0; m < cfg.affine.n; ++m) cleaned[m] -= priv[m];
            const ComplexFrame xa2 = t.freq_to_affine(cleaned);
            d.common_soft = gather(xa2, map.common_indices, a1);
            d.extra_soft = gather(xa2, map.extra_indices, 1.0);
        }
    }
    d.common_bits = concat_bits(d.common_soft, d.extra_soft, cfg.constellation);
    d.private_bits = demodulate_symbols(d.private_soft, cfg.constellation);
    return d;
}

}  // namespace afdm_rsma
