#include "afdm_rsma/transforms.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <mutex>

namespace afdm_rsma {

namespace {

bool is_pow2(std::size_t x) { return x != 0 && (x & (x - 1)) == 0; }

Complex unit_phase(long double cycles) {
    const long double frac = cycles - std::floor(cycles);
    const double angle = static_cast<double>(2.0L * 3.141592653589793238462643383279502884L * frac);
    return {std::cos(angle), std::sin(angle)};
}

}  // namespace

void AffineParams::validate() const {
    if (!is_pow2(n)) {
        throw Error(ErrorCode::InvalidConfig, "N must be a power of two, got " + std::to_string(n));
    }
    if (c1_prime != 0 && (!is_pow2(c1_prime) || n % c1_prime != 0)) {
        throw Error(ErrorCode::InvalidConfig,
                    "c1' must be a power of two dividing N, got " + std::to_string(c1_prime));
    }
    if (!std::isfinite(c2)) throw Error(ErrorCode::InvalidConfig, "c2 must be finite");
}

// ---------------------------------------------------------------------------
// FFT plans. FFTW's planner is not thread-safe, so plans are created under a
// lock and cached for the life of the process; fftw_execute_dft on an
// existing plan is.

class FftPlan {
public:
    explicit FftPlan(std::size_t n) : n_(n) {
        CVec a(n), b(n);
        auto* in = reinterpret_cast<fftw_complex*>(a.data());
        auto* out = reinterpret_cast<fftw_complex*>(b.data());
        const int len = static_cast<int>(n);
        const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
        forward_ = fftw_plan_dft_1d(len, in, out, FFTW_FORWARD, flags);
        backward_ = fftw_plan_dft_1d(len, in, out, FFTW_BACKWARD, flags);
        scale_ = 1.0 / std::sqrt(static_cast<double>(n));
    }
    FftPlan(const FftPlan&) = delete;
    FftPlan& operator=(const FftPlan&) = delete;

    // out = unitary DFT (sign = -1) or IDFT (sign = +1) of in; in != out.
    void run(const Complex* in, Complex* out, bool inverse) const {
        fftw_execute_dft(inverse ? backward_ : forward_,
                         reinterpret_cast<fftw_complex*>(const_cast<Complex*>(in)),
                         reinterpret_cast<fftw_complex*>(out));
        for (std::size_t k = 0; k < n_; ++k) out[k] *= scale_;
    }

    std::size_t size() const { return n_; }

private:
    std::size_t n_;
    fftw_plan forward_ = nullptr;
    fftw_plan backward_ = nullptr;
    double scale_ = 1.0;
};

namespace {

std::shared_ptr<const FftPlan> cached_plan(std::size_t n) {
    static std::mutex mu;
    static std::map<std::size_t, std::shared_ptr<const FftPlan>> cache;
    std::lock_guard lock(mu);
    auto& slot = cache[n];
    if (!slot) slot = std::make_shared<const FftPlan>(n);
    return slot;
}

void check_span(std::span<const Complex> in, std::span<Complex> out, std::size_t n) {
    if (in.size() != n || out.size() != n) {
        throw Error(ErrorCode::InvalidLength, "transform of size " + std::to_string(n) + " got " +
                                                  std::to_string(in.size()) + " -> " +
                                                  std::to_string(out.size()));
    }
}

}  // namespace

// ---------------------------------------------------------------------------

AffineTransform::AffineTransform(const AffineParams& params) : params_(params) {
    params_.validate();
    const std::size_t n = params_.n;
    plan_ = cached_plan(n);
    chirp1_.resize(n);
    chirp2_.resize(n);
    const std::uint64_t two_n = 2 * static_cast<std::uint64_t>(n);
    for (std::size_t k = 0; k < n; ++k) {
        // c1 k^2 = c1' k^2 / 2N, reduced exactly in integers.
        const std::uint64_t num = (static_cast<std::uint64_t>(params_.c1_prime) *
                                   ((static_cast<std::uint64_t>(k) * k) % two_n)) % two_n;
        chirp1_[k] = unit_phase(static_cast<long double>(num) / static_cast<long double>(two_n));
        chirp2_[k] = unit_phase(static_cast<long double>(params_.c2) * k * k);
    }
}

AffineTransform::~AffineTransform() = default;
AffineTransform::AffineTransform(const AffineTransform&) = default;
AffineTransform& AffineTransform::operator=(const AffineTransform&) = default;

void AffineTransform::dft(std::span<const Complex> in, std::span<Complex> out) const {
    check_span(in, out, size());
    if (in.data() == out.data()) {
        CVec tmp(in.begin(), in.end());
        plan_->run(tmp.data(), out.data(), false);
    } else {
        plan_->run(in.data(), out.data(), false);
    }
}

void AffineTransform::idft(std::span<const Complex> in, std::span<Complex> out) const {
    check_span(in, out, size());
    if (in.data() == out.data()) {
        CVec tmp(in.begin(), in.end());
        plan_->run(tmp.data(), out.data(), true);
    } else {
        plan_->run(in.data(), out.data(), true);
    }
}

void AffineTransform::idaft(std::span<const Complex> in, std::span<Complex> out) const {
    check_span(in, out, size());
    const std::size_t n = size();
    CVec tmp(n);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = in[i] * chirp2_[i];
    plan_->run(tmp.data(), out.data(), true);
    for (std::size_t k = 0; k < n; ++k) out[k] *= chirp1_[k];
}

void AffineTransform::daft(std::span<const Complex> in, std::span<Complex> out) const {
    check_span(in, out, size());
    const std::size_t n = size();
    CVec tmp(n);
    for (std::size_t k = 0; k < n; ++k) tmp[k] = in[k] * std::conj(chirp1_[k]);
    plan_->run(tmp.data(), out.data(), false);
    for (std::size_t i = 0; i < n; ++i) out[i] *= std::conj(chirp2_[i]);
}

void AffineTransform::affine_to_freq(std::span<const Complex> in, std::span<Complex> out) const {
    check_span(in, out, size());
    CVec time(size());
    idaft(in, time);
    plan_->run(time.data(), out.data(), false);
}

void AffineTransform::freq_to_affine(std::span<const Complex> in, std::span<Complex> out) const {
    check_span(in, out, size());
    CVec time(size());
    plan_->run(in.data(), time.data(), true);
    daft(time, out);
}

namespace {

template <typename Fn>
ComplexFrame apply(const AffineTransform& t, const ComplexFrame& x, Domain from, Domain to,
                   const char* what, Fn fn) {
    if (x.domain() != from) {
        throw Error(ErrorCode::InvalidConfig, std::string(what) + ": expected a " + to_string(from) +
                                                  "-domain frame, got " + to_string(x.domain()));
    }
    x.expect_size(t.size(), what);
    CVec out(t.size());
    (t.*fn)(x.body(), std::span<Complex>(out));
    return ComplexFrame(to, std::move(out));
}

using SpanFn = void (AffineTransform::*)(std::span<const Complex>, std::span<Complex>) const;

}  // namespace

ComplexFrame AffineTransform::dft(const ComplexFrame& x) const {
    return apply(*this, x, Domain::Time, Domain::Frequency, "dft", static_cast<SpanFn>(&AffineTransform::dft));
}
ComplexFrame AffineTransform::idft(const ComplexFrame& x) const {
    return apply(*this, x, Domain::Frequency, Domain::Time, "idft",
                 static_cast<SpanFn>(&AffineTransform::idft));
}
ComplexFrame AffineTransform::idaft(const ComplexFrame& x) const {
    return apply(*this, x, Domain::Affine, Domain::Time, "idaft",
                 static_cast<SpanFn>(&AffineTransform::idaft));
}
ComplexFrame AffineTransform::daft(const ComplexFrame& x) const {
    return apply(*this, x, Domain::Time, Domain::Affine, "daft",
                 static_cast<SpanFn>(&AffineTransform::daft));
}
ComplexFrame AffineTransform::affine_to_freq(const ComplexFrame& x) const {
    return apply(*this, x, Domain::Affine, Domain::Frequency, "affine_to_freq",
                 static_cast<SpanFn>(&AffineTransform::affine_to_freq));
}
ComplexFrame AffineTransform::freq_to_affine(const ComplexFrame& x) const {
    return apply(*this, x, Domain::Frequency, Domain::Affine, "freq_to_affine",
                 static_cast<SpanFn>(&AffineTransform::freq_to_affine));
}

ComplexFrame dft(const ComplexFrame& x) {
    return AffineTransform(AffineParams{x.size(), 0, 0.0}).dft(x);
}

ComplexFrame idft(const ComplexFrame& x) {
    return AffineTransform(AffineParams{x.size(), 0, 0.0}).idft(x);
}

namespace {

void expect_params_size(const ComplexFrame& x, const AffineParams& p, const char* what) {
    x.expect_size(p.n, what);
}

}  // namespace

ComplexFrame idaft(const ComplexFrame& x, const AffineParams& p) {
    expect_params_size(x, p, "idaft");
    return AffineTransform(p).idaft(x);
}

ComplexFrame daft(const ComplexFrame& s, const AffineParams& p) {
    expect_params_size(s, p, "daft");
    return AffineTransform(p).daft(s);
}

ComplexFrame affine_to_freq(const ComplexFrame& x, const AffineParams& p) {
    expect_params_size(x, p, "affine_to_freq");
    return AffineTransform(p).affine_to_freq(x);
}

ComplexFrame freq_to_affine(const ComplexFrame& xf, const AffineParams& p) {
    expect_params_size(xf, p, "freq_to_affine");
    return AffineTransform(p).freq_to_affine(xf);
}

// ---------------------------------------------------------------------------
// Closed-form spreading kernel

Complex kernel_phi(std::size_t i, std::size_t m, const AffineParams& p) {
    p.validate();
    if (i >= p.n || m >= p.n) {
        throw Error(ErrorCode::InvalidIndex, "kernel index (" + std::to_string(i) + ", " +
                                                 std::to_string(m) + ") out of range");
    }
    if (p.c1_prime == 0) throw Error(ErrorCode::InvalidConfig, "kernel_phi needs c1' >= 1");
    if (p.residue(i) != p.residue(m)) return {0.0, 0.0};
    const std::size_t big_m = p.m();
    const std::size_t m_prime = m / p.c1_prime;
    const std::size_t i_aligned = i - p.residue(i);
    const long double inv_m = 1.0L / static_cast<long double>(big_m);
    Complex acc{0.0, 0.0};
    for (std::size_t q = 0; q < big_m; ++q) {
        const long double d = static_cast<long double>(q) - static_cast<long double>(m_prime);
        // exp(j pi d^2 / M) exp(j 2 pi i_aligned q / N); i_aligned / N = i' / M.
        const long double cycles = 0.5L * d * d * inv_m +
                                   static_cast<long double>((i_aligned / p.c1_prime) * q % big_m) * inv_m;
        acc += unit_phase(cycles);
    }
    return acc;
}

Complex spreading_coefficient(std::size_t i, std::size_t m, const AffineParams& p) {
    if (p.c1_prime == 0 || p.m() < 2) {
        throw Error(ErrorCode::InvalidConfig, "closed-form spreading needs M = N/c1' >= 2");
    }
    const Complex phi = kernel_phi(i, m, p);
    if (phi == Complex{0.0, 0.0}) return phi;
    const std::size_t big_m = p.m();
    const std::size_t m_prime = m / p.c1_prime;
    const long double ld_i = static_cast<long double>(i);
    const Complex c2_phase = unit_phase(static_cast<long double>(p.c2) * ld_i * ld_i);
    const Complex m_phase = unit_phase(-0.5L * static_cast<long double>(m_prime * m_prime % (2 * big_m)) /
                                       static_cast<long double>(big_m));
    const double amp = static_cast<double>(p.c1_prime) / static_cast<double>(p.n);
    return amp * c2_phase * m_phase * phi;
}

ComplexFrame affine_to_freq_closed_form(const ComplexFrame& x, const AffineParams& p) {
    if (x.domain() != Domain::Affine) {
        throw Error(ErrorCode::InvalidConfig, "affine_to_freq_closed_form expects an affine frame");
    }
    x.expect_size(p.n, "affine_to_freq_closed_form");
    CVec out(p.n);
    for (std::size_t m = 0; m < p.n; ++m) {
        Complex acc{0.0, 0.0};
        for (std::size_t i = p.residue(m); i < p.n; i += p.c1_prime) {
            acc += spreading_coefficient(i, m, p) * x[i];
        }
        out[m] = acc;
    }
    return ComplexFrame(Domain::Frequency, std::move(out));
}

}  // namespace afdm_rsma
