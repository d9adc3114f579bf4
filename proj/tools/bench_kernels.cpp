// Serial reference against the OpenMP kernels: replica simulation, one
// finite-volume step, one spectral solve. Prints wall time, speed-up and
// whether the two paths agree bit for bit.

#include "tsync/estimators.hpp"
#include "tsync/hydro.hpp"
#include "tsync/parallel.hpp"

#include "CLI11.hpp"

#include <chrono>
#include <cstdio>
#include <functional>

namespace {

template <class Fn>
double best_of(int repeats, Fn&& fn)
{
    double best = 1e300;
    for (int k = 0; k < repeats; ++k) {
        const auto start = std::chrono::steady_clock::now();
        fn();
        best = std::min(best, std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
    }
    return best;
}

bool same(const tsync::Field& a, const tsync::Field& b)
{
    return a.m1 == b.m1 && a.m2 == b.m2 && a.outflow1 == b.outflow1 && a.outflow2 == b.outflow2;
}

bool same(const std::vector<tsync::MomentEstimates>& a, const std::vector<tsync::MomentEstimates>& b)
{
    for (std::size_t k = 0; k < a.size(); ++k) {
        if (a[k].R1.value != b[k].R1.value || a[k].mu1.value != b[k].mu1.value) {
            return false;
        }
    }
    return a.size() == b.size();
}

void report(const char* name, double serial, double parallel, bool identical)
{
    std::printf("%-16s serial %9.4f s  parallel %9.4f s  speed-up %5.2fx  identical %s\n", name, serial, parallel,
                serial / parallel, identical ? "yes" : "NO");
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Serial vs OpenMP kernel timings"};
    int threads = 0;
    int repeats = 3;
    std::size_t replicas = 64;
    std::size_t particles = 1000;
    std::size_t cells = 1 << 16;
    app.add_option("--threads", threads, "OpenMP threads (0: default)");
    app.add_option("--repeats", repeats, "best of this many runs");
    app.add_option("--replicas", replicas);
    app.add_option("--particles", particles, "N1 + N2 per replica");
    app.add_option("--cells", cells, "grid cells (power of two)");
    CLI11_PARSE(app, argc, argv);
    tsync::set_thread_count(threads);
    std::printf("threads: %d\n", tsync::max_threads());

    const tsync::ModelParams p{0.0, 1.0, 1.0, 1.0};

    tsync::MomentRun run;
    run.params = p;
    run.n1 = particles / 2;
    run.n2 = particles - particles / 2;
    run.times = {5.0, 10.0};
    run.seed = 7;
    std::vector<tsync::MomentEstimates> rs;
    std::vector<tsync::MomentEstimates> rp;
    const double ts = best_of(repeats, [&] { rs = tsync::mc_moments(run, replicas, tsync::Execution::Serial); });
    const double tp = best_of(repeats, [&] { rp = tsync::mc_moments(run, replicas, tsync::Execution::Parallel); });
    report("replicas", ts, tp, same(rs, rp));

    const tsync::GridSpec grid{-50.0, 50.0, cells};
    const tsync::Field field =
        tsync::init_field(tsync::gaussian_density(0.0, 1.0), tsync::gaussian_density(0.5, 2.0), grid);
    const double dt = 0.5 * grid.dx();
    tsync::Field fs;
    tsync::Field fp;
    const int steps = 50;
    const auto march = [&](tsync::Execution exec) {
        tsync::Field f = field;
        for (int k = 0; k < steps; ++k) {
            f = tsync::fv_step(f, p, dt, exec);
        }
        return f;
    };
    const double fvs = best_of(repeats, [&] { fs = march(tsync::Execution::Serial); });
    const double fvp = best_of(repeats, [&] { fp = march(tsync::Execution::Parallel); });
    report("fv_step x50", fvs, fvp, same(fs, fp));

    const double ss = best_of(repeats, [&] { fs = tsync::spectral_solve(field, p, 5.0, tsync::Execution::Serial); });
    const double sp = best_of(repeats, [&] { fp = tsync::spectral_solve(field, p, 5.0, tsync::Execution::Parallel); });
    report("spectral_solve", ss, sp, same(fs, fp));
    return 0;
}
