// bench_sweep - serial reference vs OpenMP frame-parallel sweep
//
// Runs the same SNR point both ways, checks the results agree exactly and
// reports wall time per frame. Also times the transform kernels.

#include <omp.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>

#include "afdm_rsma/harness.hpp"
#include "afdm_rsma/transforms.hpp"

using namespace afdm_rsma;

namespace {

template <typename Fn>
double seconds(Fn&& fn) {
    const auto t0 = std::chrono::steady_clock::now();
    fn();
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void bench_transforms(std::size_t n, int reps) {
    const AffineTransform t(AffineParams{n, n / 4, 0.0});
    Rng rng(Seed{7});
    CVec x(n), y(n);
    for (auto& v : x) v = rng.complex_gaussian(1.0);
    const double fft = seconds([&] {
        for (int r = 0; r < reps; ++r) t.dft(x, y);
    });
    const double affine = seconds([&] {
        for (int r = 0; r < reps; ++r) t.affine_to_freq(x, y);
    });
    std::printf("N=%-5zu dft %8.2f us   affine_to_freq %8.2f us\n", n, 1e6 * fft / reps, 1e6 * affine / reps);
}

bool same(const LinkResult& a, const LinkResult& b) {
    const auto eq = [](double x, double y) { return x == y || (x != x && y != y); };
    return eq(a.ber_common, b.ber_common) && eq(a.ber_private, b.ber_private) && eq(a.se, b.se) &&
           eq(a.channel_nmse, b.channel_nmse);
}

}  // namespace

int main(int argc, char** argv) {
    const std::size_t frames = argc > 1 ? static_cast<std::size_t>(std::atoi(argv[1])) : 64;

    for (std::size_t n : {64, 256, 1024, 4096}) bench_transforms(n, 2000);

    for (bool doppler : {false, true}) {
        SimConfig sim;
        sim.channel = with_doppler(default_two_tap(false), doppler);
        sim.frame.approach = Approach::PilotAndData;
        fit_frame_to_channel(sim);
        sim.snr_grid_db = {16.0};
        sim.frames_per_point = frames;

        LinkResult serial, parallel;
        const double ts = seconds([&] { serial = run_point(sim, 0, Execution::Serial); });
        const double tp = seconds([&] { parallel = run_point(sim, 0, Execution::Parallel); });
        std::printf("%-13s frames=%zu threads=%d serial %.3f s  parallel %.3f s  speedup %.2fx  %s\n",
                    doppler ? "delay-doppler" : "delay-only", frames, omp_get_max_threads(), ts, tp, ts / tp,
                    same(serial, parallel) ? "identical" : "MISMATCH");
        if (!same(serial, parallel)) return 1;
    }
    return 0;
}
