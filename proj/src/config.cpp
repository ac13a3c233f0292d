#include "afdm_rsma/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace afdm_rsma {

namespace {

using nlohmann::json;

[[noreturn]] void bad(const std::string& what) { throw Error(ErrorCode::InvalidConfig, what); }

void check_keys(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
    if (!obj.is_object()) bad(where + " must be an object");
    for (const auto& [key, value] : obj.items()) {
        if (!allowed.count(key)) bad("unknown key '" + key + "' in " + where);
    }
}

template <typename T>
void read(const json& obj, const char* key, T& out) {
    if (!obj.contains(key) || obj.at(key).is_null()) return;
    try {
        out = obj.at(key).get<T>();
    } catch (const json::exception&) {
        bad(std::string("bad value for '") + key + "'");
    }
}

template <typename T>
void read_opt(const json& obj, const char* key, std::optional<T>& out) {
    if (!obj.contains(key) || obj.at(key).is_null()) return;
    T v{};
    read(obj, key, v);
    out = v;
}

std::size_t read_count(const json& obj, const char* key, std::size_t fallback) {
    if (!obj.contains(key) || obj.at(key).is_null()) return fallback;
    const json& v = obj.at(key);
    if (!v.is_number_integer() || v.get<long long>() < 0) bad(std::string("'") + key + "' must be a non-negative integer");
    return v.get<std::size_t>();
}

Approach parse_approach(const json& v) {
    if (v.is_number_integer()) {
        if (v.get<int>() == 1) return Approach::CleanPilot;
        if (v.get<int>() == 2) return Approach::PilotAndData;
    } else if (v.is_string()) {
        if (v == "clean-pilot") return Approach::CleanPilot;
        if (v == "pilot-and-data") return Approach::PilotAndData;
    }
    bad("approach must be 1 or 2");
}

ChannelSpec parse_channel(const json& ch, bool& doppler) {
    check_keys(ch, {"taps", "normalize", "doppler"}, "channel");
    ChannelSpec spec;
    if (ch.contains("taps")) {
        const json& taps = ch.at("taps");
        if (!taps.is_array() || taps.empty()) bad("channel.taps must be a non-empty array");
        spec.taps.clear();
        for (const auto& t : taps) {
            if (!t.is_array() || t.size() != 4) bad("each tap is [re, im, delay, doppler]");
            if (!t[2].is_number_integer() || t[2].get<long long>() < 0) bad("tap delay must be a non-negative integer");
            if (!t[3].is_number_integer()) bad("tap Doppler must be an integer");
            spec.taps.push_back(ChannelTap{Complex(t[0].get<double>(), t[1].get<double>()),
                                           t[2].get<std::size_t>(), t[3].get<int>()});
        }
    } else {
        spec = default_two_tap(false);
    }
    read(ch, "normalize", spec.normalize);
    doppler = spec.has_doppler();
    read(ch, "doppler", doppler);
    return spec;
}

}  // namespace

ReceiverMode parse_receiver_mode(const std::string& s) {
    if (s == "sicfree") return ReceiverMode::SicFree;
    if (s == "sic-clean") return ReceiverMode::SicCleanPilot;
    if (s == "sic-full") return ReceiverMode::SicFull;
    bad("receiver mode must be sicfree, sic-clean or sic-full");
}

ConfigDocument parse_config_text(const std::string& text) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::exception& e) {
        bad(std::string("config is not valid JSON: ") + e.what());
    }
    check_keys(root, {"frame", "channel", "sweep", "receiver", "scheme", "noise_var", "sinr_cap_db"}, "config");
    ConfigDocument doc;

    if (root.contains("frame")) {
        const json& f = root.at("frame");
        check_keys(f, {"n", "c1_prime", "c2", "guard", "cp_len", "pilot_db", "phi1", "phi2", "modulation", "approach"},
                   "frame");
        doc.affine.n = read_count(f, "n", doc.affine.n);
        doc.affine.c1_prime = read_count(f, "c1_prime", doc.affine.c1_prime);
        read(f, "c2", doc.affine.c2);
        if (f.contains("guard") && !f.at("guard").is_null()) doc.guard = read_count(f, "guard", 0);
        if (f.contains("cp_len") && !f.at("cp_len").is_null()) doc.cp_len = read_count(f, "cp_len", 0);
        read(f, "pilot_db", doc.pilot_db);
        read(f, "phi1", doc.phi1);
        read(f, "phi2", doc.phi2);
        doc.modulation = static_cast<unsigned>(read_count(f, "modulation", doc.modulation));
        if (f.contains("approach")) doc.approach = parse_approach(f.at("approach"));
    }
    if (root.contains("channel")) {
        doc.channel = parse_channel(root.at("channel"), doc.doppler);
    }
    if (root.contains("sweep")) {
        const json& s = root.at("sweep");
        check_keys(s, {"snr_min", "snr_max", "snr_step", "frames", "seed"}, "sweep");
        read(s, "snr_min", doc.snr_min);
        read(s, "snr_max", doc.snr_max);
        read(s, "snr_step", doc.snr_step);
        doc.frames = read_count(s, "frames", doc.frames);
        if (s.contains("seed")) {
            if (!s.at("seed").is_number_unsigned()) bad("seed must be an unsigned integer");
            doc.seed = s.at("seed").get<std::uint64_t>();
        }
    }
    if (root.contains("receiver")) {
        const json& r = root.at("receiver");
        check_keys(r, {"mode", "method", "path", "csi"}, "receiver");
        std::string mode = "sicfree", method = "mmse", path = "frequency", csi = "estimated";
        read(r, "mode", mode);
        read(r, "method", method);
        read(r, "path", path);
        read(r, "csi", csi);
        doc.mode = parse_receiver_mode(mode);
        if (method == "mmse") doc.method = EqualizerMethod::MMSE;
        else if (method == "zf") doc.method = EqualizerMethod::ZF;
        else bad("receiver.method must be mmse or zf");
        if (path == "frequency") doc.path = EqualizationPath::Frequency;
        else if (path == "affine") doc.path = EqualizationPath::Affine;
        else bad("receiver.path must be frequency or affine");
        if (csi == "estimated") doc.csi = CsiMode::Estimated;
        else if (csi == "perfect") doc.csi = CsiMode::Perfect;
        else bad("receiver.csi must be estimated or perfect");
    }
    if (root.contains("scheme")) {
        std::string scheme;
        read(root, "scheme", scheme);
        if (scheme == "proposed") doc.scheme = Scheme::Proposed;
        else if (scheme == "conventional") doc.scheme = Scheme::ConventionalRsma;
        else bad("scheme must be proposed or conventional");
    }
    read_opt(root, "noise_var", doc.noise_var);
    read(root, "sinr_cap_db", doc.sinr_cap_db);
    return doc;
}

ConfigDocument load_config_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw Error(ErrorCode::IoError, "cannot read config " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return parse_config_text(ss.str());
}

std::vector<double> snr_grid(double min_db, double max_db, double step_db) {
    if (!std::isfinite(min_db) || !std::isfinite(max_db)) bad("SNR bounds must be finite");
    if (max_db < min_db) bad("snr_max below snr_min");
    if (max_db == min_db) return {min_db};
    if (!(step_db > 0.0)) bad("snr_step must be positive");
    const auto count = static_cast<std::size_t>(std::floor((max_db - min_db) / step_db + 1e-9)) + 1;
    if (count > 100000) bad("SNR grid too large");
    std::vector<double> grid(count);
    for (std::size_t k = 0; k < count; ++k) grid[k] = min_db + static_cast<double>(k) * step_db;
    return grid;
}

SimConfig build_sim_config(const ConfigDocument& doc) {
    SimConfig sim;
    sim.channel = with_doppler(doc.channel, doc.doppler);
    sim.frame.affine = doc.affine;
    sim.frame.phi_pilot = std::pow(10.0, doc.pilot_db / 10.0);
    sim.frame.phi1 = doc.phi1;
    sim.frame.phi2 = doc.phi2;
    sim.frame.constellation = Constellation::from_order(doc.modulation);
    sim.frame.approach = doc.approach;
    doc.affine.validate();
    fit_frame_to_channel(sim);
    if (doc.guard) sim.frame.guard = *doc.guard;
    if (doc.cp_len) sim.frame.cp_len = *doc.cp_len;
    sim.snr_grid_db = snr_grid(doc.snr_min, doc.snr_max, doc.snr_step);
    sim.frames_per_point = doc.frames;
    sim.seed = Seed{doc.seed};
    sim.receiver_mode = doc.mode;
    sim.method = doc.method;
    sim.path = doc.path;
    sim.csi = doc.csi;
    sim.scheme = doc.scheme;
    sim.noise_var_override = doc.noise_var;
    sim.sinr_cap_db = doc.sinr_cap_db;
    sim.validate();
    return sim;
}

}  // namespace afdm_rsma
