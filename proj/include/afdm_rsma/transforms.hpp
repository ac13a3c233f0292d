// transforms.hpp - DFT, DAFT and the affine <-> frequency spreading maps
//
// All transforms are unitary (1/sqrt(N) on both directions).
//
//   idaft:  s(n) = 1/sqrt(N) sum_i X(i) exp(j2pi(c1 n^2 + c2 i^2 + n i / N))
//   daft:   the adjoint (and inverse) of idaft
//
// With c1 = c1'/(2N), N = c1' M and M >= 2, an affine index i only feeds subcarriers
// m with m = i (mod c1'), and vice versa. affine_to_freq / freq_to_affine use
// the fast path (chirp + FFT); kernel_phi gives the closed-form per-entry
// coefficients and is kept as an independent cross-check.

#pragma once

#include <cstddef>
#include <memory>
#include <span>

#include "afdm_rsma/core.hpp"

namespace afdm_rsma {

struct AffineParams {
    std::size_t n = 256;
    // Power of two dividing n. Zero selects the plain DFT (c1 = 0).
    std::size_t c1_prime = 64;
    double c2 = 0.0;

    double c1() const { return static_cast<double>(c1_prime) / (2.0 * static_cast<double>(n)); }
    // Residue class size N / c1'; zero when c1' == 0.
    std::size_t m() const { return c1_prime == 0 ? 0 : n / c1_prime; }
    // i mod c1'
    std::size_t residue(std::size_t i) const { return c1_prime == 0 ? i : i % c1_prime; }

    // Throws InvalidConfig for a non-power-of-two N or a c1' that is not a
    // power of two dividing N.
    void validate() const;
};

class FftPlan;

/**
 * Precomputed chirp tables and FFT plans for one AffineParams.
 *
 * Immutable after construction and safe to share across threads.
 */
class AffineTransform {
public:
    explicit AffineTransform(const AffineParams& params);
    ~AffineTransform();
    AffineTransform(const AffineTransform&);
    AffineTransform& operator=(const AffineTransform&);

    const AffineParams& params() const noexcept { return params_; }
    std::size_t size() const noexcept { return params_.n; }

    void dft(std::span<const Complex> in, std::span<Complex> out) const;
    void idft(std::span<const Complex> in, std::span<Complex> out) const;
    void idaft(std::span<const Complex> in, std::span<Complex> out) const;
    void daft(std::span<const Complex> in, std::span<Complex> out) const;
    void affine_to_freq(std::span<const Complex> in, std::span<Complex> out) const;
    void freq_to_affine(std::span<const Complex> in, std::span<Complex> out) const;

    ComplexFrame dft(const ComplexFrame& x) const;
    ComplexFrame idft(const ComplexFrame& x) const;
    ComplexFrame idaft(const ComplexFrame& x) const;
    ComplexFrame daft(const ComplexFrame& x) const;
    ComplexFrame affine_to_freq(const ComplexFrame& x) const;
    ComplexFrame freq_to_affine(const ComplexFrame& x) const;

    // exp(j2pi c1 n^2) and exp(j2pi c2 i^2)
    std::span<const Complex> time_chirp() const { return chirp1_; }
    std::span<const Complex> index_chirp() const { return chirp2_; }

private:
    AffineParams params_;
    std::shared_ptr<const FftPlan> plan_;
    CVec chirp1_;
    CVec chirp2_;
};

// Unitary DFT / IDFT on frames of any length (uses a cached FFT plan).
ComplexFrame dft(const ComplexFrame& x);
ComplexFrame idft(const ComplexFrame& x);

ComplexFrame idaft(const ComplexFrame& x, const AffineParams& p);
ComplexFrame daft(const ComplexFrame& s, const AffineParams& p);
ComplexFrame affine_to_freq(const ComplexFrame& x, const AffineParams& p);
ComplexFrame freq_to_affine(const ComplexFrame& xf, const AffineParams& p);

/**
 * Spreading kernel between affine index i and subcarrier m.
 *
 *   phi^i(m) = sum_{p<M} exp(j pi (p - m')^2 / M) exp(j2pi (i - [i]) p / N)
 *
 * with m' = floor(m / c1') and [i] = i mod c1'. Zero when i and m are in
 * different residue classes. Throws InvalidIndex for i or m >= N.
 */
Complex kernel_phi(std::size_t i, std::size_t m, const AffineParams& p);

// Coefficient of affine index i in subcarrier m under affine_to_freq:
//   (c1'/N) exp(j2pi c2 i^2) exp(-j pi m'^2 / M) phi^i(m)
// Requires M >= 2: for M = 1 the time chirp is (-1)^n, which moves class
// alpha to class alpha + N/2 instead of keeping it in place.
Complex spreading_coefficient(std::size_t i, std::size_t m, const AffineParams& p);

// Assembles affine_to_freq from spreading_coefficient (O(N M)).
ComplexFrame affine_to_freq_closed_form(const ComplexFrame& x, const AffineParams& p);

}  // namespace afdm_rsma
