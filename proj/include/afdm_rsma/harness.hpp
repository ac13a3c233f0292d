// harness.hpp - Monte Carlo sweeps, link metrics and result output
//
// Frame f of SNR point p draws everything from derive_seed(seed, p, f) and
// its outcome is stored at index f; points are reduced in frame order, so
// the output does not depend on how frames were scheduled.
//
// Frames alternate between the two users: even frames carry user 1's
// private block, odd frames user 2's. The common block is shared.

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "afdm_rsma/channel.hpp"
#include "afdm_rsma/framing.hpp"
#include "afdm_rsma/receiver.hpp"

namespace afdm_rsma {

enum class Scheme { Proposed, ConventionalRsma };
enum class CsiMode { Perfect, Estimated };
enum class Execution { Serial, Parallel };
enum class OutputFormat { Csv, Json };

struct SimConfig {
    FrameConfig frame;
    // Noise variance is set per SNR point.
    ChannelSpec channel;
    std::vector<double> snr_grid_db{0.0, 5.0, 10.0, 15.0, 20.0, 25.0};
    std::size_t frames_per_point = 100;
    ReceiverMode receiver_mode = ReceiverMode::SicFree;
    EqualizerMethod method = EqualizerMethod::MMSE;
    EqualizationPath path = EqualizationPath::Frequency;
    CsiMode csi = CsiMode::Estimated;
    Scheme scheme = Scheme::Proposed;
    Seed seed{1};
    // Fixed noise variance for every point instead of the SNR mapping.
    std::optional<double> noise_var_override;
    double sinr_cap_db = 30.0;

    void validate() const;
};

struct LinkResult {
    double snr_db = 0.0;
    double ber_common = 0.0;
    // NaN when the private stream is switched off.
    double ber_private = 0.0;
    double ber_total = 0.0;
    double se = 0.0;
    double channel_nmse = 0.0;
    std::size_t frames = 0;
    double wall_time = 0.0;

    // Standard errors of the per-frame values.
    double ber_common_stderr = 0.0;
    double ber_private_stderr = 0.0;
    double ber_total_stderr = 0.0;
    double se_stderr = 0.0;

    std::uint64_t bits_common = 0;
    std::uint64_t errors_common = 0;
    std::uint64_t bits_private = 0;
    std::uint64_t errors_private = 0;
    // Set when a frame failed; metrics are then NaN.
    std::string diagnostic;
};

// Hamming distance / length. Throws InvalidLength on a length mismatch.
double measure_ber(std::span<const std::uint8_t> tx, std::span<const std::uint8_t> rx);

// Error-vector energy of one stream accumulated over frames.
struct EvmTally {
    std::size_t resource_elements = 0;
    double signal = 0.0;
    double error = 0.0;

    void add(std::span<const Complex> sent, std::span<const Complex> soft);
    double sinr() const;
};

// (1/N) sum over streams of resource_elements * log2(1 + min(SINR, cap)).
double measure_se(std::span<const EvmTally> streams, std::size_t n, double sinr_cap_db = 30.0);

struct FrameOutcome {
    std::uint64_t bits_common = 0;
    std::uint64_t errors_common = 0;
    std::uint64_t bits_private = 0;
    std::uint64_t errors_private = 0;
    // common, extra, private
    EvmTally evm[3];
    double nmse = 0.0;
    std::string error;
};

// One frame at a given noise variance; never throws (failures go to .error).
FrameOutcome simulate_frame(const SimConfig& sim, double noise_var, std::size_t point, std::size_t frame);

LinkResult run_point(const SimConfig& sim, std::size_t point, Execution exec = Execution::Parallel);

std::vector<LinkResult> run_sweep(const SimConfig& sim, Execution exec = Execution::Parallel);

double point_noise_var(const SimConfig& sim, double snr_db);

std::string results_to_csv(const std::vector<LinkResult>& results);
std::string results_to_json(const std::vector<LinkResult>& results);
std::vector<LinkResult> results_from_json(const std::string& text);

// Throws IoError when the file cannot be written.
void emit_results(const std::vector<LinkResult>& results, OutputFormat format, const std::string& path);

// Switches Doppler on (last tap gets k = 1 unless some tap already moves) or
// off (all k = 0).
ChannelSpec with_doppler(ChannelSpec spec, bool on);

// Sets max_delay / max_doppler from the channel and re-derives the default
// guard (c1' l_max + k_max) and prefix (2 l_max).
void fit_frame_to_channel(SimConfig& sim);

struct SeriesSpec {
    std::string name;
    SimConfig sim;
};

// Series behind the fig5.csv ... fig9.csv plot files, built from a base configuration.
// Figure 7 sweeps c1' at a single SNR; the others sweep base.snr_grid_db.
std::vector<SeriesSpec> figure_series(int figure, const SimConfig& base);

std::string series_to_csv(const std::vector<std::pair<std::string, std::vector<LinkResult>>>& series);

}  // namespace afdm_rsma
