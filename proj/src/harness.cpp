#include "afdm_rsma/harness.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include "afdm_rsma/baseline.hpp"
#include "json.hpp"

namespace afdm_rsma {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::uint64_t hamming(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b) {
    std::uint64_t e = 0;
    for (std::size_t i = 0; i < a.size(); ++i) e += (a[i] & 1u) != (b[i] & 1u);
    return e;
}

double mean(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return v.empty() ? kNaN : s / static_cast<double>(v.size());
}

double stderr_of(const std::vector<double>& v) {
    if (v.size() < 2) return 0.0;
    const double m = mean(v);
    double ss = 0.0;
    for (double x : v) ss += (x - m) * (x - m);
    return std::sqrt(ss / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
}

}  // namespace

void SimConfig::validate() const {
    frame.validate();
    channel.effective_taps();
    if (frames_per_point < 1) throw Error(ErrorCode::InvalidConfig, "frames_per_point must be >= 1");
    if (snr_grid_db.empty()) throw Error(ErrorCode::InvalidConfig, "SNR grid is empty");
    if (channel.max_delay() > frame.max_delay) {
        throw Error(ErrorCode::InvalidConfig, "channel delay exceeds the frame's max_delay");
    }
    if (channel.max_doppler() > frame.max_doppler) {
        throw Error(ErrorCode::InvalidConfig, "channel Doppler exceeds the frame's max_doppler");
    }
    if (noise_var_override && !(*noise_var_override >= 0.0)) {
        throw Error(ErrorCode::InvalidConfig, "noise variance must be non-negative");
    }
}

double measure_ber(std::span<const std::uint8_t> tx, std::span<const std::uint8_t> rx) {
    if (tx.size() != rx.size()) {
        throw Error(ErrorCode::InvalidLength, "BER needs equal-length streams");
    }
    if (tx.empty()) return 0.0;
    return static_cast<double>(hamming(tx, rx)) / static_cast<double>(tx.size());
}

void EvmTally::add(std::span<const Complex> sent, std::span<const Complex> soft) {
    if (sent.size() != soft.size()) throw Error(ErrorCode::InvalidLength, "EVM needs matched symbols");
    resource_elements = sent.size();
    for (std::size_t k = 0; k < sent.size(); ++k) {
        signal += std::norm(sent[k]);
        error += std::norm(soft[k] - sent[k]);
    }
}

double EvmTally::sinr() const {
    if (!(signal > 0.0)) return 0.0;
    if (!(error > 0.0)) return std::numeric_limits<double>::infinity();
    return signal / error;
}

double measure_se(std::span<const EvmTally> streams, std::size_t n, double sinr_cap_db) {
    const double cap = std::pow(10.0, sinr_cap_db / 10.0);
    double bits = 0.0;
    for (const auto& s : streams) {
        if (s.resource_elements == 0) continue;
        bits += static_cast<double>(s.resource_elements) * std::log2(1.0 + std::min(s.sinr(), cap));
    }
    return n > 0 ? bits / static_cast<double>(n) : 0.0;
}

double point_noise_var(const SimConfig& sim, double snr_db) {
    if (sim.noise_var_override) return *sim.noise_var_override;
    if (sim.scheme == Scheme::ConventionalRsma) {
        return baseline_sample_energy(sim.frame) / std::pow(10.0, snr_db / 10.0);
    }
    return snr_to_noise_var(snr_db, sim.frame);
}

namespace {

FrameOutcome proposed_frame(const SimConfig& sim, const ChannelSpec& spec, Seed fs, int user) {
    const FrameConfig& cfg = sim.frame;
    Rng rng(fs);
    const Bits u1 = rng.bits(user_bit_demand(cfg, 1));
    const Bits u2 = rng.bits(user_bit_demand(cfg, 2));
    const RsmaMessages msgs = split_messages(u1, u2, cfg);
    const TxFrame tx = compose_frame(msgs, cfg, user);
    const ComplexFrame y = apply_channel(tx.time, spec, derive_seed(fs, 1, 0));

    ChannelEstimate est;
    if (sim.csi == CsiMode::Perfect) {
        est = perfect_estimate(spec, cfg);
    } else if (cfg.approach == Approach::CleanPilot && !spec.has_doppler()) {
        est = estimate_channel_freq(extract_received_planes(y, cfg).freq, cfg);
    } else {
        PeakSearchOptions opt;
        opt.noise_var = spec.noise_var;
        est = estimate_channel_affine(extract_received_planes(y, cfg).affine, cfg, spec.has_doppler(), opt);
    }
    DetectOptions dopt;
    dopt.method = sim.method;
    dopt.path = sim.path;
    dopt.noise_var = spec.noise_var;
    const Detection det = detect_streams(y, cfg, est, sim.receiver_mode, dopt);

    FrameOutcome o;
    o.bits_common = msgs.common_bits.size();
    o.errors_common = hamming(msgs.common_bits, det.common_bits);
    o.evm[0].add(tx.common_symbols, det.common_soft);
    o.evm[1].add(tx.extra_symbols, det.extra_soft);
    if (cfg.private_active()) {
        const Bits& sent = user == 1 ? msgs.private_bits_user1 : msgs.private_bits_user2;
        o.bits_private = sent.size();
        o.errors_private = hamming(sent, det.private_bits);
        o.evm[2].add(tx.private_symbols, det.private_soft);
    }
    o.nmse = tap_nmse(est.taps, spec.effective_taps());
    return o;
}

FrameOutcome baseline_frame(const SimConfig& sim, const ChannelSpec& spec, Seed fs) {
    const FrameConfig& cfg = sim.frame;
    Rng rng(fs);
    const std::size_t n_data = baseline_data_subcarriers(cfg).size();
    const unsigned bps = cfg.constellation.bits_per_symbol();
    const Bits cb = rng.bits(n_data * bps);
    const Bits pb = rng.bits(n_data * bps);
    const BaselineFrame tx =
        baseline_compose(modulate_bits(cb, cfg.constellation), modulate_bits(pb, cfg.constellation), cfg);
    const ComplexFrame y = apply_channel(tx.time, spec, derive_seed(fs, 1, 0));

    ChannelEstimate est;
    if (sim.csi == CsiMode::Perfect) {
        est = baseline_perfect_estimate(spec, cfg);
    } else {
        est = baseline_estimate(extract_received_planes(y, cfg).freq, cfg);
    }
    const Detection det = baseline_detect(y, cfg, est, spec.noise_var);

    FrameOutcome o;
    o.bits_common = cb.size();
    o.errors_common = hamming(cb, det.common_bits);
    o.evm[0].add(tx.common_symbols, det.common_soft);
    if (cfg.private_active()) {
        o.bits_private = pb.size();
        o.errors_private = hamming(pb, det.private_bits);
        o.evm[2].add(tx.private_symbols, det.private_soft);
    }
    o.nmse = tap_nmse(est.taps, spec.effective_taps());
    return o;
}

}  // namespace

FrameOutcome simulate_frame(const SimConfig& sim, double noise_var, std::size_t point, std::size_t frame) {
    try {
        ChannelSpec spec = sim.channel;
        spec.noise_var = noise_var;
        const Seed fs = derive_seed(sim.seed, point, frame);
        if (sim.scheme == Scheme::ConventionalRsma) return baseline_frame(sim, spec, fs);
        return proposed_frame(sim, spec, fs, frame % 2 == 0 ? 1 : 2);
    } catch (const std::exception& e) {
        FrameOutcome o;
        o.error = e.what();
        return o;
    }
}

LinkResult run_point(const SimConfig& sim, std::size_t point, Execution exec) {
    const auto start = std::chrono::steady_clock::now();
    const double snr = sim.snr_grid_db.at(point);
    const double noise_var = point_noise_var(sim, snr);
    const std::size_t frames = sim.frames_per_point;
    std::vector<FrameOutcome> outcomes(frames);

    if (exec == Execution::Parallel) {
        const auto count = static_cast<std::int64_t>(frames);
#pragma omp parallel for schedule(dynamic)
        for (std::int64_t f = 0; f < count; ++f) {
            outcomes[static_cast<std::size_t>(f)] = simulate_frame(sim, noise_var, point, static_cast<std::size_t>(f));
        }
    } else {
        for (std::size_t f = 0; f < frames; ++f) outcomes[f] = simulate_frame(sim, noise_var, point, f);
    }

    LinkResult r;
    r.snr_db = snr;
    r.frames = frames;
    EvmTally total[3];
    std::vector<double> ber_c, ber_p, ber_t, se, nmse;
    for (std::size_t f = 0; f < frames; ++f) {
        const FrameOutcome& o = outcomes[f];
        if (!o.error.empty()) {
            r.diagnostic = "frame " + std::to_string(f) + ": " + o.error;
            break;
        }
        r.bits_common += o.bits_common;
        r.errors_common += o.errors_common;
        r.bits_private += o.bits_private;
        r.errors_private += o.errors_private;
        for (int s = 0; s < 3; ++s) {
            total[s].resource_elements = o.evm[s].resource_elements;
            total[s].signal += o.evm[s].signal;
            total[s].error += o.evm[s].error;
        }
        const auto frac = [](std::uint64_t e, std::uint64_t b) {
            return b ? static_cast<double>(e) / static_cast<double>(b) : 0.0;
        };
        ber_c.push_back(frac(o.errors_common, o.bits_common));
        ber_p.push_back(frac(o.errors_private, o.bits_private));
        ber_t.push_back(frac(o.errors_common + o.errors_private, o.bits_common + o.bits_private));
        se.push_back(measure_se(o.evm, sim.frame.affine.n, sim.sinr_cap_db));
        nmse.push_back(o.nmse);
    }

    if (!r.diagnostic.empty()) {
        r.ber_common = r.ber_private = r.ber_total = r.se = r.channel_nmse = kNaN;
        r.ber_common_stderr = r.ber_private_stderr = r.ber_total_stderr = r.se_stderr = kNaN;
    } else {
        const auto ratio = [](std::uint64_t e, std::uint64_t b) {
            return b ? static_cast<double>(e) / static_cast<double>(b) : kNaN;
        };
        r.ber_common = ratio(r.errors_common, r.bits_common);
        r.ber_private = ratio(r.errors_private, r.bits_private);
        r.ber_total = ratio(r.errors_common + r.errors_private, r.bits_common + r.bits_private);
        r.se = measure_se(total, sim.frame.affine.n, sim.sinr_cap_db);
        r.channel_nmse = mean(nmse);
        r.ber_common_stderr = stderr_of(ber_c);
        r.ber_private_stderr = r.bits_private ? stderr_of(ber_p) : kNaN;
        r.ber_total_stderr = stderr_of(ber_t);
        r.se_stderr = stderr_of(se);
    }
    r.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return r;
}

std::vector<LinkResult> run_sweep(const SimConfig& sim, Execution exec) {
    sim.validate();
    std::vector<LinkResult> out;
    out.reserve(sim.snr_grid_db.size());
    for (std::size_t p = 0; p < sim.snr_grid_db.size(); ++p) out.push_back(run_point(sim, p, exec));
    return out;
}

// ---------------------------------------------------------------------------
// Output

namespace {

std::string fmt(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

const char* kCsvHeader = "snr_db,ber_common,ber_private,ber_total,se,channel_nmse,frames";

std::string csv_row(const LinkResult& r) {
    return fmt(r.snr_db) + "," + fmt(r.ber_common) + "," + fmt(r.ber_private) + "," + fmt(r.ber_total) + "," +
           fmt(r.se) + "," + fmt(r.channel_nmse) + "," + std::to_string(r.frames);
}

nlohmann::json num(double v) {
    if (!std::isfinite(v)) return nullptr;
    return v;
}

double from_num(const nlohmann::json& j) {
    return j.is_null() ? kNaN : j.get<double>();
}

}  // namespace

std::string results_to_csv(const std::vector<LinkResult>& results) {
    std::string out = std::string(kCsvHeader) + "\n";
    for (const auto& r : results) out += csv_row(r) + "\n";
    return out;
}

std::string results_to_json(const std::vector<LinkResult>& results) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& r : results) {
        nlohmann::json j;
        j["snr_db"] = num(r.snr_db);
        j["ber_common"] = num(r.ber_common);
        j["ber_private"] = num(r.ber_private);
        j["ber_total"] = num(r.ber_total);
        j["se"] = num(r.se);
        j["channel_nmse"] = num(r.channel_nmse);
        j["frames"] = r.frames;
        j["ber_common_stderr"] = num(r.ber_common_stderr);
        j["ber_private_stderr"] = num(r.ber_private_stderr);
        j["ber_total_stderr"] = num(r.ber_total_stderr);
        j["se_stderr"] = num(r.se_stderr);
        j["bits_common"] = r.bits_common;
        j["errors_common"] = r.errors_common;
        j["bits_private"] = r.bits_private;
        j["errors_private"] = r.errors_private;
        if (!r.diagnostic.empty()) j["diagnostic"] = r.diagnostic;
        arr.push_back(std::move(j));
    }
    return arr.dump(2) + "\n";
}

std::vector<LinkResult> results_from_json(const std::string& text) {
    std::vector<LinkResult> out;
    try {
        const auto arr = nlohmann::json::parse(text);
        for (const auto& j : arr) {
            LinkResult r;
            r.snr_db = from_num(j.at("snr_db"));
            r.ber_common = from_num(j.at("ber_common"));
            r.ber_private = from_num(j.at("ber_private"));
            r.ber_total = from_num(j.at("ber_total"));
            r.se = from_num(j.at("se"));
            r.channel_nmse = from_num(j.at("channel_nmse"));
            r.frames = j.at("frames").get<std::size_t>();
            r.ber_common_stderr = from_num(j.value("ber_common_stderr", nlohmann::json()));
            r.ber_private_stderr = from_num(j.value("ber_private_stderr", nlohmann::json()));
            r.ber_total_stderr = from_num(j.value("ber_total_stderr", nlohmann::json()));
            r.se_stderr = from_num(j.value("se_stderr", nlohmann::json()));
            r.bits_common = j.value("bits_common", std::uint64_t{0});
            r.errors_common = j.value("errors_common", std::uint64_t{0});
            r.bits_private = j.value("bits_private", std::uint64_t{0});
            r.errors_private = j.value("errors_private", std::uint64_t{0});
            r.diagnostic = j.value("diagnostic", std::string());
            out.push_back(std::move(r));
        }
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::InvalidConfig, std::string("malformed results JSON: ") + e.what());
    }
    return out;
}

namespace {

void write_text(const std::string& text, const std::string& path) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw Error(ErrorCode::IoError, "cannot open " + path + " for writing");
    f << text;
    f.flush();
    if (!f) throw Error(ErrorCode::IoError, "failed writing " + path);
}

}  // namespace

void emit_results(const std::vector<LinkResult>& results, OutputFormat format, const std::string& path) {
    write_text(format == OutputFormat::Csv ? results_to_csv(results) : results_to_json(results), path);
}

std::string series_to_csv(const std::vector<std::pair<std::string, std::vector<LinkResult>>>& series) {
    std::string out = std::string("series,") + kCsvHeader + "\n";
    for (const auto& [name, results] : series) {
        for (const auto& r : results) out += name + "," + csv_row(r) + "\n";
    }
    return out;
}

// ---------------------------------------------------------------------------
// Figure sweeps

ChannelSpec with_doppler(ChannelSpec spec, bool on) {
    if (!on) {
        for (auto& t : spec.taps) t.doppler = 0;
    } else if (!spec.has_doppler() && !spec.taps.empty()) {
        spec.taps.back().doppler = 1;
    }
    return spec;
}

void fit_frame_to_channel(SimConfig& sim) {
    FrameConfig f = FrameConfig::with_channel_extent(sim.frame.affine, sim.channel.max_delay(),
                                                     sim.channel.max_doppler());
    f.phi_pilot = sim.frame.phi_pilot;
    f.phi1 = sim.frame.phi1;
    f.phi2 = sim.frame.phi2;
    f.constellation = sim.frame.constellation;
    f.approach = sim.frame.approach;
    sim.frame = f;
}

namespace {

SimConfig variant(const SimConfig& base, Approach a, ReceiverMode mode, bool doppler,
                  Scheme scheme = Scheme::Proposed) {
    SimConfig s = base;
    s.frame.approach = a;
    s.receiver_mode = mode;
    s.scheme = scheme;
    s.channel = with_doppler(base.channel, doppler);
    fit_frame_to_channel(s);
    return s;
}

SimConfig with_pilot_db(SimConfig s, double db) {
    s.frame.phi_pilot = std::pow(10.0, db / 10.0);
    return s;
}

}  // namespace

std::vector<SeriesSpec> figure_series(int figure, const SimConfig& base) {
    using A = Approach;
    using M = ReceiverMode;
    std::vector<SeriesSpec> out;
    switch (figure) {
        case 5:
            out.push_back({"approach1", variant(base, A::CleanPilot, M::SicFree, false)});
            out.push_back({"approach2", variant(base, A::PilotAndData, M::SicFree, false)});
            out.push_back({"conventional", variant(base, A::CleanPilot, M::SicFree, false, Scheme::ConventionalRsma)});
            break;
        case 6:
            out.push_back({"approach2-sicfree", variant(base, A::PilotAndData, M::SicFree, false)});
            out.push_back({"approach2-sic-clean", variant(base, A::PilotAndData, M::SicCleanPilot, false)});
            out.push_back({"approach2-sic-full", variant(base, A::PilotAndData, M::SicFull, false)});
            out.push_back({"approach1-sicfree", variant(base, A::CleanPilot, M::SicFree, false)});
            break;
        case 7:
            for (std::size_t c1p : {8, 32, 64, 128}) {
                SimConfig s = base;
                s.frame.affine.c1_prime = c1p;
                s = variant(s, A::PilotAndData, M::SicFree, false);
                s.snr_grid_db = {16.0};
                out.push_back({"c1prime=" + std::to_string(c1p), s});
            }
            break;
        case 8:
        case 9: {
            const bool dop = figure == 9;
            const A a = base.frame.approach;
            out.push_back({"sic-pilot15", with_pilot_db(variant(base, a, M::SicFull, dop), 15.0)});
            out.push_back({"sic-pilot10", with_pilot_db(variant(base, a, M::SicFull, dop), 10.0)});
            out.push_back({"sicfree-pilot10", with_pilot_db(variant(base, a, M::SicFree, dop), 10.0)});
            out.push_back({"conventional-pilot10",
                           with_pilot_db(variant(base, a, M::SicFree, dop, Scheme::ConventionalRsma), 10.0)});
            break;
        }
        default:
            throw Error(ErrorCode::InvalidConfig, "no sweep defined for figure " + std::to_string(figure));
    }
    return out;
}

}  // namespace afdm_rsma
