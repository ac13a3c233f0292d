// framing.hpp - RSMA message split, resource map and frame assembly
//
// Affine plane: pilot at index 0, common data on [i] != 0 inside the
// two-sided guard window G < i < N - G, and (approach 2) unit-power extra
// common data on [i] == 0 inside the same window.
// Frequency plane: private data on every subcarrier with [m] != 0.
//
//   S(m) = affine_to_freq(pilot + sqrt(phi1) common + extra)(m) + sqrt(phi2) private(m)
//
// and the transmitted frame is idft(S) with a cyclic prefix.

#pragma once

#include <cstddef>
#include <vector>

#include "afdm_rsma/core.hpp"
#include "afdm_rsma/transforms.hpp"

namespace afdm_rsma {

enum class Approach { CleanPilot, PilotAndData };

const char* to_string(Approach a);

struct FrameConfig {
    AffineParams affine;
    std::size_t guard = 65;
    double phi_pilot = 10.0;
    double phi1 = 1.0;
    // Zero switches the private stream off.
    double phi2 = 0.1;
    Constellation constellation = Constellation::qpsk();
    Approach approach = Approach::CleanPilot;
    std::size_t cp_len = 2;
    // Channel extent the receiver is designed for.
    std::size_t max_delay = 1;
    std::size_t max_doppler = 1;

    // guard = c1' l_max + k_max, cp_len = 2 l_max.
    static FrameConfig with_channel_extent(const AffineParams& affine, std::size_t max_delay,
                                           std::size_t max_doppler);

    bool private_active() const { return phi2 > 0.0; }

    // Throws InvalidConfig on negative powers, phi1 <= phi2 with both streams
    // active, 2G + 1 >= N, c1' == 0 or cp_len < max_delay.
    void validate() const;
};

struct ResourceMap {
    std::size_t pilot_index = 0;
    std::vector<std::size_t> common_indices;
    std::vector<std::size_t> extra_indices;
    std::vector<std::size_t> private_subcarriers;
    // [m] == 0; carries only the pilot image in approach 1.
    std::vector<std::size_t> pilot_subcarriers;
};

ResourceMap resource_map(const FrameConfig& cfg);

struct CapacityCounts {
    std::size_t n_common = 0;
    std::size_t n_extra = 0;
    std::size_t n_private = 0;
};

CapacityCounts capacity_counts(const FrameConfig& cfg);

/**
 * Bits carried by one frame pair.
 *
 * common_bits holds user 1's ceil(C/2) common bits followed by user 2's
 * floor(C/2), with C = (n_common + n_extra) * bits_per_symbol.
 */
struct RsmaMessages {
    Bits common_bits;
    Bits private_bits_user1;
    Bits private_bits_user2;
};

// Bits each user must supply: its common share followed by n_private symbols.
std::size_t user_bit_demand(const FrameConfig& cfg, int user);

// Takes the first user_bit_demand() bits of each stream; throws
// InvalidLength when a stream is shorter.
RsmaMessages split_messages(std::span<const std::uint8_t> user1_bits,
                            std::span<const std::uint8_t> user2_bits, const FrameConfig& cfg);

struct UserStreams {
    Bits user1;
    Bits user2;
};

UserStreams merge_messages(const RsmaMessages& msgs, const FrameConfig& cfg);

ComplexFrame build_affine_common(std::span<const Complex> symbols, const FrameConfig& cfg);
ComplexFrame build_affine_extra(std::span<const Complex> symbols, const FrameConfig& cfg);
ComplexFrame build_affine_pilot(const FrameConfig& cfg);
ComplexFrame build_freq_private(std::span<const Complex> symbols, const FrameConfig& cfg);

struct TxFrame {
    CVec common_symbols;
    CVec extra_symbols;
    CVec private_symbols;
    // pilot + sqrt(phi1) common + extra
    ComplexFrame affine_plane;
    // sqrt(phi2) private
    ComplexFrame private_plane;
    // affine_to_freq(affine_plane) + private_plane
    ComplexFrame freq_plane;
    // idft(freq_plane) with cp_len samples of prefix
    ComplexFrame time;
};

TxFrame compose_frame(std::span<const Complex> common_symbols, std::span<const Complex> extra_symbols,
                      std::span<const Complex> private_symbols, const FrameConfig& cfg);

// Symbols for the shared common block and for the private block of `user`
// (1 or 2).
TxFrame compose_frame(const RsmaMessages& msgs, const FrameConfig& cfg, int user);

ComplexFrame build_frame(const RsmaMessages& msgs, const FrameConfig& cfg, int user);

// Inverse of the modulation step in compose_frame: the first n_common
// entries of `symbols` are the common block, the rest the extra block.
struct CommonSplit {
    CVec common;
    CVec extra;
};
CommonSplit split_common_symbols(std::span<const Complex> symbols, const FrameConfig& cfg);

ComplexFrame add_cyclic_prefix(const ComplexFrame& time, std::size_t cp_len);

struct ReceivedPlanes {
    ComplexFrame freq;
    ComplexFrame affine;
};

// Drops the prefix and returns the DFT and DAFT of the body.
ReceivedPlanes extract_received_planes(const ComplexFrame& y_time, const FrameConfig& cfg);

// (phi + phi1 n_common + n_extra + phi2 n_private) / N, prefix excluded.
double average_sample_energy(const FrameConfig& cfg);

}  // namespace afdm_rsma
