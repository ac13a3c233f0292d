// simulate - run an SNR sweep from a JSON config and write CSV or JSON
//
// Exit codes: 0 success, 1 configuration error, 2 runtime error.

#include <omp.h>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "afdm_rsma/config.hpp"
#include "afdm_rsma/harness.hpp"

namespace {

using namespace afdm_rsma;

constexpr int kExitConfig = 1;
constexpr int kExitRuntime = 2;

struct Overrides {
    std::optional<double> snr_min, snr_max, snr_step, pilot_db;
    std::optional<std::size_t> frames, c1prime;
    std::optional<int> approach;
    std::optional<std::string> mode, doppler;
    std::optional<std::uint64_t> seed;
};

void apply(const Overrides& o, ConfigDocument& doc) {
    if (o.snr_min) doc.snr_min = *o.snr_min;
    if (o.snr_max) doc.snr_max = *o.snr_max;
    if (o.snr_step) doc.snr_step = *o.snr_step;
    if (o.pilot_db) doc.pilot_db = *o.pilot_db;
    if (o.frames) doc.frames = *o.frames;
    if (o.c1prime) {
        doc.affine.c1_prime = *o.c1prime;
        // A fixed guard no longer matches the new chirp geometry.
        doc.guard.reset();
    }
    if (o.approach) doc.approach = *o.approach == 1 ? Approach::CleanPilot : Approach::PilotAndData;
    if (o.mode) doc.mode = parse_receiver_mode(*o.mode);
    if (o.doppler) doc.doppler = *o.doppler == "on";
    if (o.seed) doc.seed = *o.seed;
}

void emit_plot_data(const SimConfig& base, const std::filesystem::path& dir) {
    for (int fig = 5; fig <= 9; ++fig) {
        std::vector<std::pair<std::string, std::vector<LinkResult>>> series;
        for (const auto& s : figure_series(fig, base)) {
            std::vector<LinkResult> results;
            try {
                results = run_sweep(s.sim);
            } catch (const Error& e) {
                // Invalid geometry for this series (e.g. guard too wide): one
                // NaN row per SNR point keeps the file rectangular.
                for (double snr : s.sim.snr_grid_db) {
                    LinkResult r;
                    r.snr_db = snr;
                    r.ber_common = r.ber_private = r.ber_total = r.se = r.channel_nmse =
                        std::numeric_limits<double>::quiet_NaN();
                    r.diagnostic = e.what();
                    results.push_back(r);
                }
                std::cerr << "fig" << fig << " " << s.name << ": " << e.what() << "\n";
            }
            series.emplace_back(s.name, std::move(results));
        }
        const auto path = dir / ("fig" + std::to_string(fig) + ".csv");
        std::ofstream f(path, std::ios::binary | std::ios::trunc);
        if (!f) throw Error(ErrorCode::IoError, "cannot write " + path.string());
        f << series_to_csv(series);
        if (!f) throw Error(ErrorCode::IoError, "failed writing " + path.string());
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"AFDM-OFDM rate-splitting link simulator"};
    std::string config_path;
    std::string out_path;
    std::string format = "csv";
    bool plot_data = false;
    int threads = 0;
    Overrides o;

    app.add_option("--config", config_path, "JSON configuration file")->required();
    app.add_option("--snr-min", o.snr_min, "First SNR point (dB)");
    app.add_option("--snr-max", o.snr_max, "Last SNR point (dB)");
    app.add_option("--snr-step", o.snr_step, "SNR step (dB)");
    app.add_option("--frames", o.frames, "Frames per SNR point");
    app.add_option("--approach", o.approach, "1 = clean pilot, 2 = pilot and data")
        ->check(CLI::IsMember({1, 2}));
    app.add_option("--mode", o.mode, "Receiver mode")->check(CLI::IsMember({"sicfree", "sic-clean", "sic-full"}));
    app.add_option("--c1prime", o.c1prime, "Chirp parameter c1' (power of two dividing N)");
    app.add_option("--pilot-db", o.pilot_db, "Pilot power (dB)");
    app.add_option("--doppler", o.doppler, "Doppler on the last channel tap")->check(CLI::IsMember({"on", "off"}));
    app.add_option("--seed", o.seed, "Base seed");
    app.add_option("--out", out_path, "Output file (stdout when omitted)");
    app.add_option("--format", format, "Output format")->check(CLI::IsMember({"csv", "json"}));
    app.add_flag("--emit-plot-data", plot_data, "Also write fig5.csv ... fig9.csv next to --out");
    app.add_option("--threads", threads, "Worker threads (0 = OpenMP default)")->check(CLI::NonNegativeNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kExitConfig;
    }

    SimConfig sim;
    try {
        ConfigDocument doc = load_config_file(config_path);
        apply(o, doc);
        sim = build_sim_config(doc);
    } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    }

    if (threads > 0) omp_set_num_threads(threads);

    try {
        const auto results = run_sweep(sim);
        for (const auto& r : results) {
            if (!r.diagnostic.empty()) std::cerr << "snr " << r.snr_db << " dB: " << r.diagnostic << "\n";
        }
        const OutputFormat fmt = format == "json" ? OutputFormat::Json : OutputFormat::Csv;
        if (out_path.empty()) {
            std::cout << (fmt == OutputFormat::Json ? results_to_json(results) : results_to_csv(results));
        } else {
            emit_results(results, fmt, out_path);
        }
        if (plot_data) {
            const std::filesystem::path dir =
                out_path.empty() ? std::filesystem::path(".") : std::filesystem::path(out_path).parent_path();
            emit_plot_data(sim, dir.empty() ? std::filesystem::path(".") : dir);
        }
    } catch (const std::exception& e) {
        std::cerr << "runtime error: " << e.what() << "\n";
        return kExitRuntime;
    }
    return 0;
}
