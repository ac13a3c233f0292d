// Acceptance suite: one PASS/FAIL line per criterion.
//
// Exits 0 once every criterion has been evaluated; with --strict the exit
// code is the number of failing criteria.

#include <omp.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "afdm_rsma/harness.hpp"
#include "afdm_rsma/transforms.hpp"
#include "oracles.hpp"

using namespace afdm_rsma;

namespace {

struct Verdict {
    bool pass = false;
    std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string f6(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

double rel_err(const CVec& a, const CVec& ref) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        num += std::norm(a[i] - ref[i]);
        den += std::norm(ref[i]);
    }
    return std::sqrt(num / den);
}

// Ordering a >= b that tolerates two combined standard errors.
bool at_least(double a, double sa, double b, double sb) {
    return std::isfinite(a) && std::isfinite(b) && a >= b - 2.0 * std::hypot(sa, sb);
}

SimConfig base_sim(std::size_t frames, std::vector<double> snr) {
    SimConfig sim;
    sim.channel = default_two_tap(false);
    fit_frame_to_channel(sim);
    sim.frames_per_point = frames;
    sim.snr_grid_db = std::move(snr);
    return sim;
}

std::vector<LinkResult> run_series(const SeriesSpec& s) {
    try {
        return run_sweep(s.sim);
    } catch (const Error& e) {
        std::vector<LinkResult> out(s.sim.snr_grid_db.size());
        for (std::size_t p = 0; p < out.size(); ++p) {
            out[p].snr_db = s.sim.snr_grid_db[p];
            out[p].se = out[p].ber_total = out[p].se_stderr = out[p].ber_total_stderr = std::nan("");
            out[p].diagnostic = e.what();
        }
        return out;
    }
}

std::map<std::string, std::vector<LinkResult>> run_figure(int fig, const SimConfig& base) {
    std::map<std::string, std::vector<LinkResult>> out;
    for (const auto& s : figure_series(fig, base)) out[s.name] = run_series(s);
    return out;
}

// ---------------------------------------------------------------------------

Verdict transform_correctness() {
    const auto t0 = Clock::now();
    Rng rng(Seed{101});
    double worst_oracle = 0.0;
    for (std::size_t n : {8, 16}) {
        for (std::size_t c1p : {0, 1, 2, 4, 8}) {
            if (c1p > n) continue;
            for (double c2 : {0.0, 1.0 / (2.0 * n * n), 0.0173}) {
                const AffineParams p{n, c1p, c2};
                const oracle::Dense a = oracle::idaft_matrix(n, p.c1(), c2);
                const oracle::Dense ah = oracle::adjoint(a);
                const oracle::Dense f = oracle::dft_matrix(n);
                const oracle::Dense a2f = oracle::product(f, a);
                const oracle::Dense f2a = oracle::product(ah, oracle::adjoint(f));
                const CVec x = oracle::random_vector(n, rng);
                const auto check = [&](const ComplexFrame& got, const oracle::Dense& m) {
                    worst_oracle = std::max(worst_oracle, oracle::max_abs_diff(got.samples(), oracle::apply(m, x)));
                };
                check(idaft(ComplexFrame(Domain::Affine, x), p), a);
                check(daft(ComplexFrame(Domain::Time, x), p), ah);
                check(affine_to_freq(ComplexFrame(Domain::Affine, x), p), a2f);
                check(freq_to_affine(ComplexFrame(Domain::Frequency, x), p), f2a);
            }
        }
    }
    double worst_unitary = 0.0;
    for (std::size_t n = 8; n <= 4096; n *= 2) {
        const AffineParams p{n, n / 4, 0.37 / double(n)};
        const CVec x = oracle::random_vector(n, rng);
        const ComplexFrame s = idaft(ComplexFrame(Domain::Affine, x), p);
        const double norm_err = std::abs(std::sqrt(s.energy()) - std::sqrt(oracle::energy(x))) /
                                std::sqrt(oracle::energy(x));
        const double inv_err = oracle::max_abs_diff(daft(s, p).samples(), x);
        const ComplexFrame xf = affine_to_freq(ComplexFrame(Domain::Affine, x), p);
        const double a2f_err = oracle::max_abs_diff(freq_to_affine(xf, p).samples(), x);
        worst_unitary = std::max({worst_unitary, norm_err, inv_err, a2f_err});
    }
    const double t = seconds_since(t0);
    return {worst_oracle < 1e-10 && worst_unitary < 1e-9 && t < 10.0,
            "oracle err " + f6(worst_oracle) + " (< 1e-10), unitarity err " + f6(worst_unitary) +
                " up to N=4096 (< 1e-9), " + f6(t) + " s (< 10 s)"};
}

double out_of_class(const CVec& v, std::size_t c1p, std::size_t alpha) {
    double in = 0.0, out = 0.0;
    for (std::size_t m = 0; m < v.size(); ++m) (m % c1p == alpha ? in : out) += std::norm(v[m]);
    return out / (in + out);
}

Verdict spreading_support() {
    const auto t0 = Clock::now();
    Rng rng(Seed{202});
    struct Combo {
        std::size_t n, c1p;
    };
    std::vector<Combo> combos;
    for (std::size_t n : {16, 64, 256})
        for (std::size_t c1p : {2, 4, 8, 64})
            if (c1p <= n) combos.push_back({n, c1p});

    std::map<std::string, double> worst;
    int cases = 0;
    const auto run_case = [&](const Combo& c, std::size_t alpha) {
        const double c2 = std::uniform_real_distribution<double>(0.0, 1.0)(rng.engine()) / double(c.n);
        const AffineTransform t(AffineParams{c.n, c.c1p, c2});
        CVec x(c.n), y(c.n);
        for (std::size_t i = alpha; i < c.n; i += c.c1p) x[i] = rng.complex_gaussian(1.0);
        t.affine_to_freq(x, y);
        double e = out_of_class(y, c.c1p, alpha);
        t.freq_to_affine(x, y);
        e = std::max(e, out_of_class(y, c.c1p, alpha));
        const std::string key = "N=" + std::to_string(c.n) + ",c1'=" + std::to_string(c.c1p);
        worst[key] = std::max(worst[key], e);
        ++cases;
    };
    for (const auto& c : combos)
        for (std::size_t alpha = 0; alpha < c.c1p; ++alpha) run_case(c, alpha);
    while (cases < 1000) {
        const Combo c = combos[rng.engine()() % combos.size()];
        run_case(c, rng.engine()() % c.c1p);
    }
    std::string failing;
    for (const auto& [key, e] : worst)
        if (!(e < 1e-9)) failing += " [" + key + ": " + f6(e) + "]";
    const double t = seconds_since(t0);
    return {failing.empty() && t < 30.0,
            std::to_string(cases) + " cases, " + f6(t) + " s (< 30 s); combinations with out-of-class energy >= 1e-9:" +
                (failing.empty() ? std::string(" none") : failing)};
}

Verdict kernel_consistency() {
    const AffineParams p{32, 8, 0.0137};
    Rng rng(Seed{303});
    double worst = 0.0;
    for (int trial = 0; trial < 8; ++trial) {
        const ComplexFrame x(Domain::Affine, oracle::random_vector(32, rng));
        worst = std::max(worst, rel_err(affine_to_freq_closed_form(x, p).samples(), affine_to_freq(x, p).samples()));
    }
    return {worst < 1e-6, "closed form vs transform relative err " + f6(worst) + " (< 1e-6)"};
}

Verdict channel_oracle() {
    Rng rng(Seed{404});
    double worst = 0.0;
    int cases = 0;
    for (std::size_t len = 3; len <= 32; ++len) {
        for (int code = 0; code < 729; ++code) {
            // Three taps, each (l, k) in {0,1,2}^2.
            std::vector<ChannelTap> taps;
            int c = code;
            for (int r = 0; r < 3; ++r, c /= 9) taps.push_back({rng.complex_gaussian(1.0), std::size_t(c % 3), (c / 3) % 3});
            oracle::Dense h(len, CVec(len));
            for (const auto& tap : taps)
                for (std::size_t col = 0; col < len; ++col)
                    h[(col + tap.delay) % len][col] += tap.gain * oracle::cis(double(tap.doppler) * double(col) / double(len));
            const CVec x = oracle::random_vector(len, rng);
            ChannelSpec spec;
            spec.taps = taps;
            spec.normalize = false;
            const ComplexFrame y = apply_channel(ComplexFrame(Domain::Time, x), spec, Seed{0});
            worst = std::max(worst, oracle::max_abs_diff(y.samples(), oracle::apply(h, x)));
            ++cases;
        }
    }
    return {worst < 1e-10, std::to_string(cases) + " channels, L = 3..32, max err " + f6(worst) + " (< 1e-10)"};
}

Verdict pilot_shift_law() {
    Rng rng(Seed{505});
    struct Geometry {
        std::size_t n, c1p, guard;
    };
    int cases = 0, wrong = 0;
    double worst = 0.0;
    for (const Geometry g : {Geometry{256, 64, 65}, Geometry{256, 16, 40}, Geometry{128, 32, 40}, Geometry{64, 8, 20}}) {
        for (auto approach : {Approach::CleanPilot, Approach::PilotAndData}) {
            for (std::size_t l = 0; g.c1p * l < g.guard; ++l) {
                for (std::size_t k = 0; g.c1p * l + k < g.guard && k < g.c1p; ++k) {
                    FrameConfig cfg;
                    cfg.affine = AffineParams{g.n, g.c1p, 0.0};
                    cfg.guard = g.guard;
                    cfg.max_delay = l;
                    cfg.max_doppler = k;
                    cfg.cp_len = std::max<std::size_t>(2 * l, 1);
                    cfg.approach = approach;
                    // Private stream off: only pilot and guarded affine data reach the estimator.
                    cfg.phi2 = 0.0;
                    const RsmaMessages msgs = split_messages(rng.bits(user_bit_demand(cfg, 1)),
                                                             rng.bits(user_bit_demand(cfg, 2)), cfg);
                    const TxFrame tx = compose_frame(msgs, cfg, 1);
                    ChannelSpec spec;
                    spec.taps = {{rng.complex_gaussian(1.0), l, int(k)}};
                    spec.normalize = false;
                    const ComplexFrame y = apply_channel(tx.time, spec, Seed{0});
                    const ChannelEstimate est =
                        estimate_channel_affine(extract_received_planes(y, cfg).affine, cfg, k > 0);
                    ++cases;
                    if (est.taps.size() != 1 || est.taps[0].delay != l || est.taps[0].doppler != int(k)) {
                        ++wrong;
                        continue;
                    }
                    worst = std::max(worst, std::abs(est.taps[0].gain - spec.taps[0].gain));
                }
            }
        }
    }
    return {wrong == 0 && worst < 1e-6, std::to_string(cases) + " (l,k) cases, " + std::to_string(wrong) +
                                            " wrong (l,k), max |h_est - h| " + f6(worst) + " (< 1e-6)"};
}

Verdict noiseless_end_to_end() {
    SimConfig sim = base_sim(100, {30.0});
    sim.noise_var_override = 0.0;
    sim.csi = CsiMode::Perfect;
    bool pass = true;
    std::string detail;
    for (auto approach : {Approach::CleanPilot, Approach::PilotAndData}) {
        for (auto path : {EqualizationPath::Frequency, EqualizationPath::Affine}) {
            for (auto mode : {ReceiverMode::SicFree, ReceiverMode::SicCleanPilot, ReceiverMode::SicFull}) {
                SimConfig s = sim;
                s.frame.approach = approach;
                s.path = path;
                s.receiver_mode = mode;
                const LinkResult r = run_sweep(s).at(0);
                const bool ok = r.diagnostic.empty() && r.errors_common == 0 && r.errors_private == 0;
                if (!ok) {
                    pass = false;
                    detail += std::string(" [") + (approach == Approach::CleanPilot ? "a1" : "a2") + "/" +
                              (path == EqualizationPath::Frequency ? "freq" : "affine") + "/" + to_string(mode) +
                              ": common " + f6(r.ber_common) + " private " + f6(r.ber_private) + "]";
                }
            }
        }
    }
    return {pass, "100 frames per case, nonzero BER:" + (detail.empty() ? std::string(" none") : detail)};
}

Verdict fig5_reproduction() {
    const auto t0 = Clock::now();
    const auto fig = run_figure(5, base_sim(200, {10.0, 13.0, 16.0, 19.0, 22.0, 25.0}));
    const auto& a1 = fig.at("approach1");
    const auto& a2 = fig.at("approach2");
    const double ratio = a2[2].se / a1[2].se;
    double lo = INFINITY, hi = -INFINITY;
    for (const auto& r : a1) {
        lo = std::min(lo, r.se);
        hi = std::max(hi, r.se);
    }
    const double t = seconds_since(t0);
    const bool pass = ratio > 1.5 && lo >= 2.0 && hi <= 4.0 && t < 300.0;
    return {pass, "SE(a2)/SE(a1) at 16 dB = " + f6(a2[2].se) + "/" + f6(a1[2].se) + " = " + f6(ratio) +
                      " (> 1.5); approach-1 SE over 10-25 dB in [" + f6(lo) + ", " + f6(hi) + "] (within [2, 4]); " +
                      f6(t) + " s (< 300 s)"};
}

Verdict fig6_ordering() {
    const auto fig = run_figure(6, base_sim(200, {10.0, 13.0, 16.0, 19.0, 22.0, 25.0}));
    const auto& full = fig.at("approach2-sic-full");
    const auto& free = fig.at("approach2-sicfree");
    const auto& a1 = fig.at("approach1-sicfree");
    std::string broken;
    for (std::size_t p = 0; p < full.size(); ++p) {
        if (!at_least(full[p].se, full[p].se_stderr, free[p].se, free[p].se_stderr))
            broken += " [sic-full<sicfree @" + f6(full[p].snr_db) + " dB]";
        if (!at_least(free[p].se, free[p].se_stderr, a1[p].se, a1[p].se_stderr))
            broken += " [a2-sicfree<a1-sicfree @" + f6(free[p].snr_db) + " dB: " + f6(free[p].se) + " vs " +
                      f6(a1[p].se) + "]";
    }
    const double ratio = full[2].se / free[2].se;
    return {broken.empty() && ratio > 1.2, "SE(sic-full)/SE(sicfree) at 16 dB = " + f6(full[2].se) + "/" +
                                               f6(free[2].se) + " = " + f6(ratio) + " (> 1.2); ordering violations:" +
                                               (broken.empty() ? std::string(" none") : broken)};
}

Verdict fig7_trend() {
    const auto specs = figure_series(7, base_sim(200, {16.0}));
    std::vector<double> se;
    std::string detail;
    for (const auto& s : specs) {
        const LinkResult r = run_series(s).at(0);
        se.push_back(r.se);
        detail += " " + s.name + ": " + f6(r.se) + (r.diagnostic.empty() ? "" : " (" + r.diagnostic + ")");
    }
    bool increasing = true;
    for (std::size_t k = 1; k < se.size(); ++k) increasing = increasing && se[k] > se[k - 1];
    const double ratio = se.back() / se.front();
    return {increasing && ratio > 2.0,
            "SE at 16 dB:" + detail + "; SE(128)/SE(8) = " + f6(ratio) + " (> 2, strictly increasing)"};
}

Verdict fig89_orderings() {
    const auto t0 = Clock::now();
    const SimConfig base = base_sim(200, {10.0, 15.0, 20.0, 25.0});
    const auto delay_only = run_figure(8, base);
    const auto doppler = run_figure(9, base);
    std::string broken;
    std::uint64_t min_bits = UINT64_MAX;
    for (const auto* fig : {&delay_only, &doppler}) {
        const std::string tag = fig == &delay_only ? "delay" : "doppler";
        for (const auto& [name, rs] : *fig)
            for (const auto& r : rs) min_bits = std::min<std::uint64_t>(min_bits, r.bits_common + r.bits_private);
        const auto& sicfree = fig->at("sicfree-pilot10");
        const auto& conv = fig->at("conventional-pilot10");
        const auto& p15 = fig->at("sic-pilot15");
        const auto& p10 = fig->at("sic-pilot10");
        for (std::size_t p = 0; p < sicfree.size(); ++p) {
            const double snr = sicfree[p].snr_db;
            if (!at_least(conv[p].ber_total, conv[p].ber_total_stderr, sicfree[p].ber_total,
                          sicfree[p].ber_total_stderr) ||
                !(sicfree[p].ber_total < conv[p].ber_total + 2.0 * std::hypot(conv[p].ber_total_stderr,
                                                                               sicfree[p].ber_total_stderr)))
                broken += " [" + tag + " sicfree " + f6(sicfree[p].ber_total) + " !< conventional " +
                          f6(conv[p].ber_total) + " @" + f6(snr) + " dB]";
            if (snr >= 15.0 && !at_least(p10[p].ber_total, p10[p].ber_total_stderr, p15[p].ber_total,
                                         p15[p].ber_total_stderr))
                broken += " [" + tag + " pilot15 " + f6(p15[p].ber_total) + " !< pilot10 " + f6(p10[p].ber_total) +
                          " @" + f6(snr) + " dB]";
        }
    }
    for (const auto& [name, rs] : delay_only) {
        const auto& dop = doppler.at(name);
        for (std::size_t p = 0; p < rs.size(); ++p)
            if (!at_least(dop[p].ber_total, dop[p].ber_total_stderr, rs[p].ber_total, rs[p].ber_total_stderr))
                broken += " [" + name + " doppler " + f6(dop[p].ber_total) + " < delay-only " + f6(rs[p].ber_total) +
                          " @" + f6(rs[p].snr_db) + " dB]";
    }
    const double t = seconds_since(t0);
    return {broken.empty() && min_bits >= 100000 && t < 600.0,
            "min bits/point " + std::to_string(min_bits) + " (>= 1e5), " + f6(t) + " s (< 600 s); violations:" +
                (broken.empty() ? std::string(" none") : broken)};
}

Verdict determinism() {
    SimConfig sim = base_sim(24, {5.0, 15.0, 25.0});
    std::vector<std::string> outputs;
    for (bool dop : {false, true}) {
        SimConfig s = sim;
        s.channel = with_doppler(sim.channel, dop);
        s.frame.approach = Approach::PilotAndData;
        fit_frame_to_channel(s);
        outputs.push_back(results_to_csv(run_sweep(s, Execution::Serial)));
        for (int threads : {1, 3, 8}) {
            omp_set_num_threads(threads);
            outputs.push_back(results_to_csv(run_sweep(s, Execution::Parallel)));
            outputs.push_back(results_to_csv(run_sweep(s, Execution::Parallel)));
        }
    }
    omp_set_num_threads(omp_get_num_procs());
    std::size_t mismatches = 0;
    const std::size_t half = outputs.size() / 2;
    for (std::size_t k = 0; k < outputs.size(); ++k)
        mismatches += outputs[k] != outputs[k < half ? 0 : half];
    return {mismatches == 0, std::to_string(outputs.size()) + " runs (serial, 1/3/8 threads, twice each, two channels), " +
                                 std::to_string(mismatches) + " byte mismatches"};
}

}  // namespace

int main(int argc, char** argv) {
    const bool strict = argc > 1 && std::strcmp(argv[1], "--strict") == 0;
    const std::vector<std::pair<const char*, std::function<Verdict()>>> criteria{
        {"transform correctness", transform_correctness},
        {"spreading support law", spreading_support},
        {"kernel consistency", kernel_consistency},
        {"channel oracle", channel_oracle},
        {"pilot shift law", pilot_shift_law},
        {"noiseless end-to-end", noiseless_end_to_end},
        {"fig5 spectral efficiency", fig5_reproduction},
        {"fig6 receiver ordering", fig6_ordering},
        {"fig7 c1' trend", fig7_trend},
        {"fig8/9 BER orderings", fig89_orderings},
        {"determinism", determinism},
    };
    int failed = 0;
    for (std::size_t k = 0; k < criteria.size(); ++k) {
        Verdict v;
        try {
            v = criteria[k].second();
        } catch (const std::exception& e) {
            v = {false, std::string("exception: ") + e.what()};
        }
        failed += !v.pass;
        std::printf("%s %zu %s: %s\n", v.pass ? "PASS" : "FAIL", k + 1, criteria[k].first, v.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria failed\n", failed, criteria.size());
    return strict ? failed : 0;
}
