// config.hpp - JSON configuration documents for the simulate CLI
//
// A ConfigDocument holds the values as written (unset optionals mean
// "derive from the channel"); build_sim_config resolves the derived guard,
// prefix and design channel extent and validates the result.
//
// {
//   "frame":    {"n": 256, "c1_prime": 64, "c2": 0, "guard": null, "cp_len": null,
//                "pilot_db": 10, "phi1": 1, "phi2": 0.1, "modulation": 4, "approach": 1},
//   "channel":  {"taps": [[1, 0, 0, 0], [0.6, 0, 1, 1]], "normalize": true, "doppler": true},
//   "sweep":    {"snr_min": 0, "snr_max": 25, "snr_step": 5, "frames": 100, "seed": 1},
//   "receiver": {"mode": "sicfree", "method": "mmse", "path": "frequency", "csi": "estimated"},
//   "scheme":   "proposed",
//   "noise_var": null,
//   "sinr_cap_db": 30
// }
//
// Channel taps are [re(h), im(h), delay, doppler].

#pragma once

#include <optional>
#include <string>

#include "afdm_rsma/harness.hpp"

namespace afdm_rsma {

struct ConfigDocument {
    AffineParams affine;
    std::optional<std::size_t> guard;
    std::optional<std::size_t> cp_len;
    double pilot_db = 10.0;
    double phi1 = 1.0;
    double phi2 = 0.1;
    unsigned modulation = 4;
    Approach approach = Approach::CleanPilot;

    ChannelSpec channel = default_two_tap(false);
    bool doppler = false;

    double snr_min = 0.0;
    double snr_max = 25.0;
    double snr_step = 5.0;
    std::size_t frames = 100;
    std::uint64_t seed = 1;

    ReceiverMode mode = ReceiverMode::SicFree;
    EqualizerMethod method = EqualizerMethod::MMSE;
    EqualizationPath path = EqualizationPath::Frequency;
    CsiMode csi = CsiMode::Estimated;
    Scheme scheme = Scheme::Proposed;
    std::optional<double> noise_var;
    double sinr_cap_db = 30.0;
};

// Throws InvalidConfig on malformed JSON, unknown keys or bad values.
ConfigDocument parse_config_text(const std::string& text);

// Throws IoError when the file cannot be read.
ConfigDocument load_config_file(const std::string& path);

std::vector<double> snr_grid(double min_db, double max_db, double step_db);

SimConfig build_sim_config(const ConfigDocument& doc);

ReceiverMode parse_receiver_mode(const std::string& s);

}  // namespace afdm_rsma
