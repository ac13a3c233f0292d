#include "afdm_rsma/framing.hpp"

#include <cmath>

namespace afdm_rsma {

const char* to_string(Approach a) {
    return a == Approach::CleanPilot ? "clean-pilot" : "pilot-and-data";
}

FrameConfig FrameConfig::with_channel_extent(const AffineParams& affine, std::size_t max_delay,
                                             std::size_t max_doppler) {
    FrameConfig cfg;
    cfg.affine = affine;
    cfg.max_delay = max_delay;
    cfg.max_doppler = max_doppler;
    cfg.guard = affine.c1_prime * max_delay + max_doppler;
    cfg.cp_len = 2 * max_delay;
    return cfg;
}

void FrameConfig::validate() const {
    affine.validate();
    if (affine.c1_prime == 0) throw Error(ErrorCode::InvalidConfig, "framing needs c1' >= 1");
    for (double p : {phi_pilot, phi1, phi2}) {
        if (!(p >= 0.0) || !std::isfinite(p)) {
            throw Error(ErrorCode::InvalidConfig, "powers must be finite and non-negative");
        }
    }
    if (phi1 > 0.0 && phi2 > 0.0 && !(phi1 > phi2)) {
        throw Error(ErrorCode::InvalidConfig, "phi1 must exceed phi2 when both streams are active");
    }
    if (2 * guard + 1 >= affine.n) {
        throw Error(ErrorCode::InvalidConfig, "guard " + std::to_string(guard) + " too wide for N = " +
                                                  std::to_string(affine.n));
    }
    if (cp_len < max_delay) {
        throw Error(ErrorCode::InvalidConfig, "cyclic prefix shorter than the maximum delay");
    }
}

ResourceMap resource_map(const FrameConfig& cfg) {
    cfg.validate();
    const std::size_t n = cfg.affine.n;
    ResourceMap map;
    for (std::size_t i = 0; i < n; ++i) {
        const bool class0 = cfg.affine.residue(i) == 0;
        const bool inside = i > cfg.guard && i < n - cfg.guard;
        if (class0) {
            map.pilot_subcarriers.push_back(i);
        } else {
            map.private_subcarriers.push_back(i);
        }
        if (!inside) continue;
        if (!class0) {
            map.common_indices.push_back(i);
        } else if (cfg.approach == Approach::PilotAndData) {
            map.extra_indices.push_back(i);
        }
    }
    return map;
}

CapacityCounts capacity_counts(const FrameConfig& cfg) {
    const ResourceMap map = resource_map(cfg);
    return {map.common_indices.size(), map.extra_indices.size(), map.private_subcarriers.size()};
}

namespace {

std::size_t common_bit_count(const FrameConfig& cfg) {
    const CapacityCounts c = capacity_counts(cfg);
    return (c.n_common + c.n_extra) * cfg.constellation.bits_per_symbol();
}

std::size_t common_share(std::size_t total, int user) {
    return user == 1 ? (total + 1) / 2 : total / 2;
}

void check_user(int user) {
    if (user != 1 && user != 2) throw Error(ErrorCode::InvalidConfig, "user must be 1 or 2");
}

void scatter(std::span<const Complex> symbols, const std::vector<std::size_t>& idx, double amp,
             ComplexFrame& out, const char* what) {
    if (symbols.size() != idx.size()) {
        throw Error(ErrorCode::InvalidLength, std::string(what) + ": expected " +
                                                  std::to_string(idx.size()) + " symbols, got " +
                                                  std::to_string(symbols.size()));
    }
    for (std::size_t k = 0; k < idx.size(); ++k) out[idx[k]] = amp * symbols[k];
}

}  // namespace

std::size_t user_bit_demand(const FrameConfig& cfg, int user) {
    check_user(user);
    const CapacityCounts c = capacity_counts(cfg);
    return common_share(common_bit_count(cfg), user) + c.n_private * cfg.constellation.bits_per_symbol();
}

RsmaMessages split_messages(std::span<const std::uint8_t> user1_bits,
                            std::span<const std::uint8_t> user2_bits, const FrameConfig& cfg) {
    const std::size_t c_total = common_bit_count(cfg);
    const std::size_t c1 = common_share(c_total, 1);
    const std::size_t c2 = common_share(c_total, 2);
    const std::size_t need1 = user_bit_demand(cfg, 1);
    const std::size_t need2 = user_bit_demand(cfg, 2);
    if (user1_bits.size() < need1 || user2_bits.size() < need2) {
        throw Error(ErrorCode::InvalidLength, "split_messages needs " + std::to_string(need1) + " + " +
                                                  std::to_string(need2) + " bits");
    }
    RsmaMessages msgs;
    msgs.common_bits.reserve(c_total);
    msgs.common_bits.insert(msgs.common_bits.end(), user1_bits.begin(), user1_bits.begin() + c1);
    msgs.common_bits.insert(msgs.common_bits.end(), user2_bits.begin(), user2_bits.begin() + c2);
    msgs.private_bits_user1.assign(user1_bits.begin() + c1, user1_bits.begin() + need1);
    msgs.private_bits_user2.assign(user2_bits.begin() + c2, user2_bits.begin() + need2);
    return msgs;
}

UserStreams merge_messages(const RsmaMessages& msgs, const FrameConfig& cfg) {
    const std::size_t c_total = common_bit_count(cfg);
    if (msgs.common_bits.size() != c_total) {
        throw Error(ErrorCode::InvalidLength, "common block has the wrong size");
    }
    const std::size_t c1 = common_share(c_total, 1);
    UserStreams out;
    out.user1.assign(msgs.common_bits.begin(), msgs.common_bits.begin() + c1);
    out.user1.insert(out.user1.end(), msgs.private_bits_user1.begin(), msgs.private_bits_user1.end());
    out.user2.assign(msgs.common_bits.begin() + c1, msgs.common_bits.end());
    out.user2.insert(out.user2.end(), msgs.private_bits_user2.begin(), msgs.private_bits_user2.end());
    return out;
}

ComplexFrame build_affine_common(std::span<const Complex> symbols, const FrameConfig& cfg) {
    const ResourceMap map = resource_map(cfg);
    ComplexFrame out = ComplexFrame::zeros(Domain::Affine, cfg.affine.n);
    scatter(symbols, map.common_indices, std::sqrt(cfg.phi1), out, "build_affine_common");
    return out;
}

ComplexFrame build_affine_extra(std::span<const Complex> symbols, const FrameConfig& cfg) {
    const ResourceMap map = resource_map(cfg);
    ComplexFrame out = ComplexFrame::zeros(Domain::Affine, cfg.affine.n);
    scatter(symbols, map.extra_indices, 1.0, out, "build_affine_extra");
    return out;
}

ComplexFrame build_affine_pilot(const FrameConfig& cfg) {
    cfg.validate();
    ComplexFrame out = ComplexFrame::zeros(Domain::Affine, cfg.affine.n);
    out[0] = Complex(std::sqrt(cfg.phi_pilot), 0.0);
    return out;
}

ComplexFrame build_freq_private(std::span<const Complex> symbols, const FrameConfig& cfg) {
    const ResourceMap map = resource_map(cfg);
    ComplexFrame out = ComplexFrame::zeros(Domain::Frequency, cfg.affine.n);
    scatter(symbols, map.private_subcarriers, std::sqrt(cfg.phi2), out, "build_freq_private");
    return out;
}

ComplexFrame add_cyclic_prefix(const ComplexFrame& time, std::size_t cp_len) {
    if (time.domain() != Domain::Time) {
        throw Error(ErrorCode::InvalidConfig, "cyclic prefix applies to time-domain frames");
    }
    const std::size_t n = time.size();
    if (cp_len > n) throw Error(ErrorCode::InvalidLength, "cyclic prefix longer than the frame");
    CVec out(n + cp_len);
    const auto body = time.body();
    for (std::size_t k = 0; k < cp_len; ++k) out[k] = body[n - cp_len + k];
    std::copy(body.begin(), body.end(), out.begin() + static_cast<std::ptrdiff_t>(cp_len));
    return ComplexFrame(Domain::Time, std::move(out), cp_len);
}

TxFrame compose_frame(std::span<const Complex> common_symbols, std::span<const Complex> extra_symbols,
                      std::span<const Complex> private_symbols, const FrameConfig& cfg) {
    const ResourceMap map = resource_map(cfg);
    const std::size_t n = cfg.affine.n;
    ComplexFrame affine = ComplexFrame::zeros(Domain::Affine, n);
    affine[0] = Complex(std::sqrt(cfg.phi_pilot), 0.0);
    scatter(common_symbols, map.common_indices, std::sqrt(cfg.phi1), affine, "common block");
    scatter(extra_symbols, map.extra_indices, 1.0, affine, "extra block");
    ComplexFrame priv = ComplexFrame::zeros(Domain::Frequency, n);
    scatter(private_symbols, map.private_subcarriers, std::sqrt(cfg.phi2), priv, "private block");

    const AffineTransform t(cfg.affine);
    ComplexFrame freq = t.affine_to_freq(affine);
    for (std::size_t m = 0; m < n; ++m) freq[m] += priv[m];
    ComplexFrame time = add_cyclic_prefix(t.idft(freq), cfg.cp_len);
    return TxFrame{CVec(common_symbols.begin(), common_symbols.end()),
                   CVec(extra_symbols.begin(), extra_symbols.end()),
                   CVec(private_symbols.begin(), private_symbols.end()),
                   std::move(affine),
                   std::move(priv),
                   std::move(freq),
                   std::move(time)};
}

CommonSplit split_common_symbols(std::span<const Complex> symbols, const FrameConfig& cfg) {
    const CapacityCounts c = capacity_counts(cfg);
    if (symbols.size() != c.n_common + c.n_extra) {
        throw Error(ErrorCode::InvalidLength, "common symbol count does not match the frame");
    }
    CommonSplit out;
    out.common.assign(symbols.begin(), symbols.begin() + static_cast<std::ptrdiff_t>(c.n_common));
    out.extra.assign(symbols.begin() + static_cast<std::ptrdiff_t>(c.n_common), symbols.end());
    return out;
}

TxFrame compose_frame(const RsmaMessages& msgs, const FrameConfig& cfg, int user) {
    check_user(user);
    const CVec common_all = modulate_bits(msgs.common_bits, cfg.constellation);
    const CommonSplit split = split_common_symbols(common_all, cfg);
    const Bits& priv_bits = user == 1 ? msgs.private_bits_user1 : msgs.private_bits_user2;
    const CVec priv = modulate_bits(priv_bits, cfg.constellation);
    return compose_frame(split.common, split.extra, priv, cfg);
}

ComplexFrame build_frame(const RsmaMessages& msgs, const FrameConfig& cfg, int user) {
    return compose_frame(msgs, cfg, user).time;
}

ReceivedPlanes extract_received_planes(const ComplexFrame& y_time, const FrameConfig& cfg) {
    if (y_time.domain() != Domain::Time) {
        throw Error(ErrorCode::InvalidConfig, "extract_received_planes expects a time-domain frame");
    }
    const std::size_t n = cfg.affine.n;
    if (y_time.total_size() != n + cfg.cp_len) {
        throw Error(ErrorCode::InvalidLength, "received frame has " + std::to_string(y_time.total_size()) +
                                                  " samples, expected " +
                                                  std::to_string(n + cfg.cp_len));
    }
    const auto& all = y_time.samples();
    ComplexFrame body(Domain::Time, CVec(all.begin() + static_cast<std::ptrdiff_t>(cfg.cp_len), all.end()));
    const AffineTransform t(cfg.affine);
    return ReceivedPlanes{t.dft(body), t.daft(body)};
}

double average_sample_energy(const FrameConfig& cfg) {
    const CapacityCounts c = capacity_counts(cfg);
    const double energy = cfg.phi_pilot + cfg.phi1 * static_cast<double>(c.n_common) +
                          static_cast<double>(c.n_extra) +
                          cfg.phi2 * static_cast<double>(c.n_private);
    return energy / static_cast<double>(cfg.affine.n);
}

}  // namespace afdm_rsma
