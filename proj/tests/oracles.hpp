// Dense reference matrices built straight from the signal definitions.
// Deliberately naive: O(N^2) sums with no shared code from the library.

#pragma once

#include <cmath>
#include <complex>
#include <vector>

#include "afdm_rsma/core.hpp"

namespace oracle {

using afdm_rsma::Complex;
using afdm_rsma::CVec;
using Dense = std::vector<CVec>;  // row-major, Dense[row][col]

inline Complex cis(double cycles) { return std::polar(1.0, 2.0 * afdm_rsma::kPi * cycles); }

inline CVec apply(const Dense& a, const CVec& x) {
    CVec y(a.size());
    for (std::size_t r = 0; r < a.size(); ++r) {
        for (std::size_t c = 0; c < x.size(); ++c) y[r] += a[r][c] * x[c];
    }
    return y;
}

inline Dense adjoint(const Dense& a) {
    Dense out(a[0].size(), CVec(a.size()));
    for (std::size_t r = 0; r < a.size(); ++r) {
        for (std::size_t c = 0; c < a[0].size(); ++c) out[c][r] = std::conj(a[r][c]);
    }
    return out;
}

inline Dense product(const Dense& a, const Dense& b) {
    Dense out(a.size(), CVec(b[0].size()));
    for (std::size_t r = 0; r < a.size(); ++r) {
        for (std::size_t k = 0; k < b.size(); ++k) {
            for (std::size_t c = 0; c < b[0].size(); ++c) out[r][c] += a[r][k] * b[k][c];
        }
    }
    return out;
}

// X(m) = 1/sqrt(N) sum_n x(n) exp(-j2pi nm/N)
inline Dense dft_matrix(std::size_t n) {
    Dense f(n, CVec(n));
    for (std::size_t m = 0; m < n; ++m) {
        for (std::size_t k = 0; k < n; ++k) {
            f[m][k] = cis(-static_cast<double>(m * k) / static_cast<double>(n)) / std::sqrt(double(n));
        }
    }
    return f;
}

// s(n) = 1/sqrt(N) sum_i X(i) exp(j2pi (c1 n^2 + c2 i^2 + n i / N))
inline Dense idaft_matrix(std::size_t n, double c1, double c2) {
    Dense a(n, CVec(n));
    for (std::size_t t = 0; t < n; ++t) {
        for (std::size_t i = 0; i < n; ++i) {
            const double nn = double(t), ii = double(i);
            a[t][i] = cis(c1 * nn * nn + c2 * ii * ii + nn * ii / double(n)) / std::sqrt(double(n));
        }
    }
    return a;
}

// sum_r h_r Pi^{l_r} Delta^{k_r}; Pi is the cyclic shift, Delta = diag(z^0..z^{L-1}), z = exp(j2pi/L)
struct Tap {
    Complex h;
    std::size_t l;
    int k;
};

inline Dense channel_matrix(const std::vector<Tap>& taps, std::size_t len) {
    Dense h(len, CVec(len));
    for (const auto& tap : taps) {
        Dense pi(len, CVec(len)), delta(len, CVec(len));
        for (std::size_t r = 0; r < len; ++r) {
            pi[(r + tap.l) % len][r] = 1.0;
            delta[r][r] = cis(double(tap.k) * double(r) / double(len));
        }
        const Dense term = product(pi, delta);
        for (std::size_t r = 0; r < len; ++r) {
            for (std::size_t c = 0; c < len; ++c) h[r][c] += tap.h * term[r][c];
        }
    }
    return h;
}

inline double max_abs_diff(const CVec& a, const CVec& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

inline double energy(const CVec& a) {
    double e = 0.0;
    for (const auto& v : a) e += std::norm(v);
    return e;
}

inline CVec random_vector(std::size_t n, afdm_rsma::Rng& rng) {
    CVec v(n);
    for (auto& x : v) x = rng.complex_gaussian(1.0);
    return v;
}

}  // namespace oracle
