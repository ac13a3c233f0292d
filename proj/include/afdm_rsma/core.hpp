// core.hpp - numeric types, constellations, bit handling and seeding
//
// Everything downstream passes signals around as ComplexFrame values tagged
// with the domain they live in. Constellations are unit average energy; all
// power scaling is done by the framing layer.

#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace afdm_rsma {

using Complex = std::complex<double>;
using CVec = std::vector<Complex>;
using Bits = std::vector<std::uint8_t>;

inline constexpr double kPi = 3.14159265358979323846;

enum class ErrorCode {
    InvalidLength,
    InvalidIndex,
    InvalidConfig,
    InvalidChannel,
    DopplerPresent,
    PilotContaminated,
    DegeneratePilot,
    AliasedDelay,
    GuardViolation,
    UnresolvableDoppler,
    SingularChannel,
    IoError,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what);
    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

enum class Domain { Time, Frequency, Affine };

const char* to_string(Domain d);

/**
 * A length-N complex signal tagged with its domain.
 *
 * Time-domain frames may additionally carry a cyclic prefix; `prefix()`
 * samples precede the N-sample body. The domain tag is fixed at
 * construction, so only the transform functions produce a frame in a
 * different domain.
 */
class ComplexFrame {
public:
    ComplexFrame(Domain domain, CVec samples, std::size_t prefix = 0);

    static ComplexFrame zeros(Domain domain, std::size_t n);

    Domain domain() const noexcept { return domain_; }
    // N, excluding the prefix.
    std::size_t size() const noexcept { return samples_.size() - prefix_; }
    std::size_t prefix() const noexcept { return prefix_; }
    std::size_t total_size() const noexcept { return samples_.size(); }

    std::span<const Complex> body() const { return {samples_.data() + prefix_, size()}; }
    std::span<Complex> body() { return {samples_.data() + prefix_, size()}; }
    const CVec& samples() const noexcept { return samples_; }

    Complex operator[](std::size_t i) const { return samples_[prefix_ + i]; }
    Complex& operator[](std::size_t i) { return samples_[prefix_ + i]; }

    double energy() const;

    // Throws InvalidLength unless size() == n.
    void expect_size(std::size_t n, const char* what) const;

private:
    Domain domain_;
    CVec samples_;
    std::size_t prefix_;
};

/**
 * Gray-labelled constellation with unit average energy.
 *
 * `points()[label]` is the point for the label whose bits (MSB first) form
 * the integer `label`.
 */
class Constellation {
public:
    static Constellation bpsk();
    static Constellation qpsk();
    // Square Gray QAM; order must be 4, 16, 64 or 256.
    static Constellation qam(unsigned order);
    static Constellation from_order(unsigned order);

    unsigned order() const noexcept { return static_cast<unsigned>(points_.size()); }
    unsigned bits_per_symbol() const noexcept { return bits_; }
    std::span<const Complex> points() const { return points_; }

    // Nearest point by Euclidean distance; ties go to the lowest label.
    unsigned nearest(Complex z) const;

private:
    Constellation(unsigned bits, CVec points);

    unsigned bits_;
    CVec points_;
};

CVec modulate_bits(std::span<const std::uint8_t> bits, const Constellation& c);
Bits demodulate_symbols(std::span<const Complex> symbols, const Constellation& c);

struct Seed {
    std::uint64_t value = 0;
    friend bool operator==(Seed, Seed) = default;
};

std::uint64_t splitmix64(std::uint64_t x);

// Counter-based sub-seed: the same (base, stream, counter) always yields the
// same seed, independent of evaluation order.
Seed derive_seed(Seed base, std::uint64_t stream, std::uint64_t counter);

class Rng {
public:
    explicit Rng(Seed seed) : engine_(seed.value) {}

    Bits bits(std::size_t n);
    // Circularly-symmetric complex Gaussian with E|z|^2 = variance.
    Complex complex_gaussian(double variance);
    std::mt19937_64& engine() { return engine_; }

private:
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace afdm_rsma
