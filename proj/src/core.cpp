#include "afdm_rsma/core.hpp"

#include <cmath>
#include <limits>

namespace afdm_rsma {

const char* to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::InvalidLength: return "InvalidLength";
        case ErrorCode::InvalidIndex: return "InvalidIndex";
        case ErrorCode::InvalidConfig: return "InvalidConfig";
        case ErrorCode::InvalidChannel: return "InvalidChannel";
        case ErrorCode::DopplerPresent: return "DopplerPresent";
        case ErrorCode::PilotContaminated: return "PilotContaminated";
        case ErrorCode::DegeneratePilot: return "DegeneratePilot";
        case ErrorCode::AliasedDelay: return "AliasedDelay";
        case ErrorCode::GuardViolation: return "GuardViolation";
        case ErrorCode::UnresolvableDoppler: return "UnresolvableDoppler";
        case ErrorCode::SingularChannel: return "SingularChannel";
        case ErrorCode::IoError: return "IoError";
    }
    return "Unknown";
}

Error::Error(ErrorCode code, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

const char* to_string(Domain d) {
    switch (d) {
        case Domain::Time: return "time";
        case Domain::Frequency: return "frequency";
        case Domain::Affine: return "affine";
    }
    return "?";
}

ComplexFrame::ComplexFrame(Domain domain, CVec samples, std::size_t prefix)
    : domain_(domain), samples_(std::move(samples)), prefix_(prefix) {
    if (prefix_ > samples_.size()) {
        throw Error(ErrorCode::InvalidLength, "prefix longer than frame");
    }
}

ComplexFrame ComplexFrame::zeros(Domain domain, std::size_t n) {
    return ComplexFrame(domain, CVec(n));
}

double ComplexFrame::energy() const {
    double e = 0.0;
    for (const Complex& z : body()) e += std::norm(z);
    return e;
}

void ComplexFrame::expect_size(std::size_t n, const char* what) const {
    if (size() != n) {
        throw Error(ErrorCode::InvalidLength, std::string(what) + ": expected " + std::to_string(n) +
                                                  " samples, got " + std::to_string(size()));
    }
}

// ---------------------------------------------------------------------------
// Constellations

namespace {

unsigned gray_to_binary(unsigned g) {
    unsigned b = 0;
    for (; g; g >>= 1) b ^= g;
    return b;
}

// Gray-coded PAM level for a label of `bits` bits: label -> amplitude index.
double pam_level(unsigned label, unsigned bits) {
    const unsigned levels = 1u << bits;
    const unsigned idx = gray_to_binary(label);
    // idx 0 maps to the most positive level so that an all-zero label sits in
    // the first quadrant.
    return static_cast<double>(levels - 1) - 2.0 * static_cast<double>(idx);
}

}  // namespace

Constellation::Constellation(unsigned bits, CVec points) : bits_(bits), points_(std::move(points)) {}

Constellation Constellation::bpsk() { return Constellation(1, {Complex(1, 0), Complex(-1, 0)}); }

Constellation Constellation::qpsk() { return qam(4); }

Constellation Constellation::qam(unsigned order) {
    unsigned bits = 0;
    while ((1u << bits) < order) ++bits;
    if (order < 4 || (1u << bits) != order || bits % 2 != 0 || bits > 8) {
        throw Error(ErrorCode::InvalidConfig, "unsupported QAM order " + std::to_string(order));
    }
    const unsigned half = bits / 2;
    const unsigned mask = (1u << half) - 1;
    CVec pts(order);
    double energy = 0.0;
    for (unsigned label = 0; label < order; ++label) {
        const double re = pam_level(label >> half, half);
        const double im = pam_level(label & mask, half);
        pts[label] = Complex(re, im);
        energy += std::norm(pts[label]);
    }
    const double scale = 1.0 / std::sqrt(energy / order);
    for (auto& p : pts) p *= scale;
    return Constellation(bits, std::move(pts));
}

Constellation Constellation::from_order(unsigned order) {
    if (order == 2) return bpsk();
    return qam(order);
}

unsigned Constellation::nearest(Complex z) const {
    unsigned best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (unsigned k = 0; k < points_.size(); ++k) {
        const double d = std::norm(z - points_[k]);
        if (d < best_d) {
            best_d = d;
            best = k;
        }
    }
    return best;
}

CVec modulate_bits(std::span<const std::uint8_t> bits, const Constellation& c) {
    const unsigned bps = c.bits_per_symbol();
    if (bits.size() % bps != 0) {
        throw Error(ErrorCode::InvalidLength, "bit count " + std::to_string(bits.size()) +
                                                  " not divisible by " + std::to_string(bps));
    }
    CVec out(bits.size() / bps);
    for (std::size_t s = 0; s < out.size(); ++s) {
        unsigned label = 0;
        for (unsigned b = 0; b < bps; ++b) label = (label << 1) | (bits[s * bps + b] & 1u);
        out[s] = c.points()[label];
    }
    return out;
}

Bits demodulate_symbols(std::span<const Complex> symbols, const Constellation& c) {
    const unsigned bps = c.bits_per_symbol();
    Bits out(symbols.size() * bps);
    for (std::size_t s = 0; s < symbols.size(); ++s) {
        const unsigned label = c.nearest(symbols[s]);
        for (unsigned b = 0; b < bps; ++b) {
            out[s * bps + b] = static_cast<std::uint8_t>((label >> (bps - 1 - b)) & 1u);
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Seeding

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

Seed derive_seed(Seed base, std::uint64_t stream, std::uint64_t counter) {
    return Seed{splitmix64(splitmix64(base.value ^ splitmix64(stream)) + counter)};
}

Bits Rng::bits(std::size_t n) {
    Bits out(n);
    std::uint64_t word = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (i % 64 == 0) word = engine_();
        out[i] = static_cast<std::uint8_t>(word & 1u);
        word >>= 1;
    }
    return out;
}

Complex Rng::complex_gaussian(double variance) {
    const double s = std::sqrt(variance / 2.0);
    const double re = normal_(engine_);
    const double im = normal_(engine_);
    return {s * re, s * im};
}

}  // namespace afdm_rsma
