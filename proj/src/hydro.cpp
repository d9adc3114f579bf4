#include "tsync/hydro.hpp"

#include "tsync/errors.hpp"

#include <fftw3.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <mutex>
#include <numbers>
#include <numeric>
#include <string>
#include <tuple>
#include <utility>

namespace tsync {

double Field::mass1() const
{
    return std::accumulate(m1.begin(), m1.end(), 0.0) * dx;
}

double Field::mass2() const
{
    return std::accumulate(m2.begin(), m2.end(), 0.0) * dx;
}

Density gaussian_density(double mean, double sd)
{
    if (!(sd > 0.0)) {
        throw InvalidArgument("gaussian density needs sd > 0");
    }
    return [mean, sd](double x) { return normal_density((x - mean) / sd) / sd; };
}

double normal_density(double u)
{
    return std::exp(-0.5 * u * u) / std::sqrt(2.0 * std::numbers::pi);
}

Field init_field(const Density& density1, const Density& density2, const GridSpec& grid)
{
    if (grid.cells < 8 || !(grid.x_max > grid.x_min)) {
        throw InvalidArgument("grid needs at least 8 cells and x_max > x_min");
    }
    Field field;
    field.x_min = grid.x_min;
    field.dx = grid.dx();
    field.m1.resize(grid.cells);
    field.m2.resize(grid.cells);

    const auto fill = [&](const Density& density, std::vector<double>& m, int species) {
        for (std::size_t k = 0; k < grid.cells; ++k) {
            m[k] = density(field.center(k));
            if (!(m[k] >= 0.0)) {
                throw InvalidArgument("negative or undefined density for species " +
                                      std::to_string(species));
            }
        }
        // tail mass over one grid length beyond each edge
        double tail = 0.0;
        for (std::size_t k = 0; k < grid.cells; ++k) {
            tail += density(field.center(k) - (grid.x_max - grid.x_min));
            tail += density(field.center(k) + (grid.x_max - grid.x_min));
        }
        const double inside = std::accumulate(m.begin(), m.end(), 0.0);
        if (!(inside > 0.0)) {
            throw InvalidArgument("density of species " + std::to_string(species) +
                                  " has no mass on the grid");
        }
        if (tail > 1e-8 * (inside + tail)) {
            throw TailMassError("grid too narrow: species " + std::to_string(species) +
                                " has tail mass fraction " + std::to_string(tail / (inside + tail)));
        }
        const double scale = 1.0 / (inside * field.dx);
        for (auto& v : m) {
            v *= scale;
        }
    };
    fill(density1, field.m1, 1);
    fill(density2, field.m2, 2);
    return field;
}

GridSpec default_grid(const ModelParams& params, const InitialMoments& init, double horizon,
                      std::size_t min_cells)
{
    params.validate();
    if (!(horizon >= 0.0)) {
        throw InvalidArgument("horizon must be nonnegative");
    }
    double d_max = std::max(init.d1_0, init.d2_0);
    constexpr int probes = 64;
    for (int k = 1; k <= probes; ++k) {
        const VariancePair d = variance_trajectories(params, init, horizon * k / probes);
        d_max = std::max({d_max, d.d1, d.d2});
    }
    const double half_width = 10.0 * std::sqrt(std::max(d_max, 1e-4));
    GridSpec grid;
    grid.x_min = std::min(init.a1_0, init.a2_0) + std::min(params.v1, 0.0) * horizon - half_width;
    grid.x_max = std::max(init.a1_0, init.a2_0) + std::max(params.v2, 0.0) * horizon + half_width;
    grid.cells = std::bit_ceil(std::max<std::size_t>(min_cells, 8));
    return grid;
}

namespace detail {

Field fv_step(const Field& field, const TransportCoefficients& coef, double dt, Execution exec)
{
    const double vmax = std::max(std::abs(coef.v1), std::abs(coef.v2));
    if (!(dt > 0.0) || vmax * dt > field.dx * (1.0 + 1e-12)) {
        throw CflViolation("CFL violated: max|v| dt = " + std::to_string(vmax * dt) +
                           " exceeds dx = " + std::to_string(field.dx) +
                           "; reduce dt or coarsen the grid");
    }
    if (dt * (std::abs(coef.gain1) + std::abs(coef.gain2)) > 0.5 * (1.0 + 1e-12)) {
        throw CflViolation("exchange step too large: dt (alpha12 + alpha21) must be <= 0.5");
    }

    const std::size_t n = field.size();
    const auto idx = static_cast<std::ptrdiff_t>(n);
    Field next = field;
    next.t = field.t + dt;

    const auto advect = [&](const std::vector<double>& in, std::vector<double>& out, double v,
                            double& outflow) {
        const double c = v * dt / field.dx;
        if (c >= 0.0) {
            if (exec == Execution::Parallel) {
#pragma omp parallel for schedule(static)
                for (std::ptrdiff_t k = 0; k < idx; ++k) {
                    const double upstream = k > 0 ? in[k - 1] : 0.0;
                    out[k] = in[k] - c * (in[k] - upstream);
                }
            } else {
                for (std::ptrdiff_t k = 0; k < idx; ++k) {
                    const double upstream = k > 0 ? in[k - 1] : 0.0;
                    out[k] = in[k] - c * (in[k] - upstream);
                }
            }
            outflow += c * in[n - 1] * field.dx;
        } else {
            const double a = -c;
            if (exec == Execution::Parallel) {
#pragma omp parallel for schedule(static)
                for (std::ptrdiff_t k = 0; k < idx; ++k) {
                    const double upstream = k + 1 < idx ? in[k + 1] : 0.0;
                    out[k] = in[k] - a * (in[k] - upstream);
                }
            } else {
                for (std::ptrdiff_t k = 0; k < idx; ++k) {
                    const double upstream = k + 1 < idx ? in[k + 1] : 0.0;
                    out[k] = in[k] - a * (in[k] - upstream);
                }
            }
            outflow += a * in[0] * field.dx;
        }
    };
    advect(field.m1, next.m1, coef.v1, next.outflow1);
    advect(field.m2, next.m2, coef.v2, next.outflow2);

    const double e1 = dt * coef.gain1;
    const double e2 = dt * coef.gain2;
    const auto exchange = [&](std::ptrdiff_t k) {
        const double a = next.m1[k];
        const double b = next.m2[k];
        next.m1[k] = a + e1 * (b - a);
        next.m2[k] = b + e2 * (a - b);
    };
    if (exec == Execution::Parallel) {
#pragma omp parallel for schedule(static)
        for (std::ptrdiff_t k = 0; k < idx; ++k) {
            exchange(k);
        }
    } else {
        for (std::ptrdiff_t k = 0; k < idx; ++k) {
            exchange(k);
        }
    }
    return next;
}

std::array<Complex, 4> evolution_matrix(const TransportCoefficients& coef, double p, double t)
{
    const Complex i{0.0, 1.0};
    const Complex a11 = -i * coef.v1 * p - coef.gain1;
    const Complex a22 = -i * coef.v2 * p - coef.gain2;
    const Complex a12 = coef.gain1;
    const Complex a21 = coef.gain2;

    // exp(A t) = e^{mu t} [cosh(delta t) I + sinh(delta t)/delta (A - mu I)],
    // with mu +- delta the eigenvalues; even in delta, so any root will do
    const Complex mu = 0.5 * (a11 + a22);
    const Complex half_diff = 0.5 * (a11 - a22);
    const Complex delta = std::sqrt(half_diff * half_diff + a12 * a21);
    const Complex z = delta * t;

    Complex cosh_part;
    Complex sinhc_part; // e^{mu t} sinh(delta t) / delta
    if (std::abs(z) < 1e-3) {
        const Complex z2 = z * z;
        const Complex em = std::exp(mu * t);
        cosh_part = em * (1.0 + z2 / 2.0 + z2 * z2 / 24.0);
        sinhc_part = em * t * (1.0 + z2 / 6.0 + z2 * z2 / 120.0);
    } else {
        const Complex e_plus = std::exp((mu + delta) * t);
        const Complex e_minus = std::exp((mu - delta) * t);
        cosh_part = 0.5 * (e_plus + e_minus);
        sinhc_part = (e_plus - e_minus) / (2.0 * delta);
    }
    return {cosh_part + sinhc_part * half_diff, sinhc_part * a12, sinhc_part * a21,
            cosh_part - sinhc_part * half_diff};
}

namespace {

std::mutex& planner_mutex()
{
    static std::mutex m;
    return m;
}

// FFTW planning is not thread safe; execution with the new-array interface is.
class FftPlan {
public:
    FftPlan(std::size_t n, int sign)
    {
        std::vector<Complex> scratch(n);
        auto* buf = reinterpret_cast<fftw_complex*>(scratch.data());
        std::lock_guard lock(planner_mutex());
        plan_ = fftw_plan_dft_1d(static_cast<int>(n), buf, buf, sign,
                                 FFTW_ESTIMATE | FFTW_UNALIGNED);
    }
    FftPlan(const FftPlan&) = delete;
    FftPlan& operator=(const FftPlan&) = delete;
    ~FftPlan()
    {
        std::lock_guard lock(planner_mutex());
        fftw_destroy_plan(plan_);
    }

    void execute(std::vector<Complex>& data) const
    {
        auto* buf = reinterpret_cast<fftw_complex*>(data.data());
        fftw_execute_dft(plan_, buf, buf);
    }

private:
    fftw_plan plan_ = nullptr;
};

} // namespace

Field spectral_evolve(const Field& field0, const TransportCoefficients& coef, double duration,
                      Execution exec)
{
    const std::size_t n = field0.size();
    if (n < 8 || !std::has_single_bit(n)) {
        throw InvalidArgument("spectral solver needs a power-of-two cell count >= 8");
    }
    if (field0.m2.size() != n) {
        throw InvalidArgument("species arrays differ in length");
    }
    if (duration < 0.0) {
        throw InvalidArgument("duration must be nonnegative");
    }
    std::vector<Complex> g1(field0.m1.begin(), field0.m1.end());
    std::vector<Complex> g2(field0.m2.begin(), field0.m2.end());
    const FftPlan forward(n, FFTW_FORWARD);
    const FftPlan backward(n, FFTW_BACKWARD);
    forward.execute(g1);
    forward.execute(g2);

    const double length = field0.dx * static_cast<double>(n);
    const auto idx = static_cast<std::ptrdiff_t>(n);
    const auto advance = [&](std::ptrdiff_t k) {
        const std::ptrdiff_t signed_k = k <= idx / 2 ? k : k - idx;
        const double p = 2.0 * std::numbers::pi * static_cast<double>(signed_k) / length;
        const auto e = evolution_matrix(coef, p, duration);
        const Complex x = g1[k];
        const Complex y = g2[k];
        g1[k] = e[0] * x + e[1] * y;
        g2[k] = e[2] * x + e[3] * y;
    };
    if (exec == Execution::Parallel) {
#pragma omp parallel for schedule(static)
        for (std::ptrdiff_t k = 0; k < idx; ++k) {
            advance(k);
        }
    } else {
        for (std::ptrdiff_t k = 0; k < idx; ++k) {
            advance(k);
        }
    }
    // the Nyquist mode has no conjugate partner; keep its real part only
    g1[n / 2] = Complex{g1[n / 2].real(), 0.0};
    g2[n / 2] = Complex{g2[n / 2].real(), 0.0};

    backward.execute(g1);
    backward.execute(g2);

    Field out = field0;
    out.t = field0.t + duration;
    const double inv_n = 1.0 / static_cast<double>(n);
    double scale = 0.0;
    double residue = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        out.m1[k] = g1[k].real() * inv_n;
        out.m2[k] = g2[k].real() * inv_n;
        scale = std::max({scale, std::abs(out.m1[k]), std::abs(out.m2[k])});
        residue = std::max({residue, std::abs(g1[k].imag()), std::abs(g2[k].imag())});
    }
    residue *= inv_n;
    if (scale > 0.0 && residue > 1e-8 * scale) {
        throw AliasingError("spectral solve left imaginary residue " +
                            std::to_string(residue / scale) +
                            " of the field scale; refine the grid");
    }
    return out;
}

} // namespace detail

Field fv_step(const Field& field, const ModelParams& params, double dt, Execution exec)
{
    params.validate();
    return detail::fv_step(field, TransportCoefficients::from(params), dt, exec);
}

Field fv_solve(const Field& field, const ModelParams& params, double duration, double dt,
               Execution exec)
{
    params.validate();
    if (duration < 0.0 || !(dt > 0.0)) {
        throw InvalidArgument("fv_solve needs duration >= 0 and dt > 0");
    }
    const auto steps = static_cast<std::size_t>(std::ceil(duration / dt - 1e-12));
    Field current = field;
    if (steps == 0) {
        return current;
    }
    const double step = duration / static_cast<double>(steps);
    const auto coef = TransportCoefficients::from(params);
    for (std::size_t k = 0; k < steps; ++k) {
        current = detail::fv_step(current, coef, step, exec);
    }
    current.t = field.t + duration;
    return current;
}

Field spectral_solve(const Field& field0, const ModelParams& params, double duration, Execution exec)
{
    params.validate();
    return detail::spectral_evolve(field0, TransportCoefficients::from(params), duration, exec);
}

FieldMoments moments(const Field& field)
{
    const std::size_t n = field.size();
    const double m1 = field.mass1();
    const double m2 = field.mass2();
    if (!(m1 > 0.0) || !(m2 > 0.0)) {
        throw InvalidArgument("moments need positive species mass");
    }
    const double lost = std::max(field.outflow1 / (m1 + field.outflow1),
                                 field.outflow2 / (m2 + field.outflow2));
    if (lost > 1e-6) {
        throw OutflowError("mass fraction " + std::to_string(lost) +
                           " left the grid; moments are unreliable");
    }
    const std::size_t edge = std::max<std::size_t>(1, n / 50);
    double edge1 = 0.0;
    double edge2 = 0.0;
    for (std::size_t k = 0; k < edge; ++k) {
        edge1 += std::abs(field.m1[k]) + std::abs(field.m1[n - 1 - k]);
        edge2 += std::abs(field.m2[k]) + std::abs(field.m2[n - 1 - k]);
    }
    if (edge1 * field.dx > 1e-6 * m1 || edge2 * field.dx > 1e-6 * m2) {
        throw OutflowError("mass near the grid edge; widen the domain");
    }

    const auto moment_pair = [&](const std::vector<double>& m, double mass) {
        double first = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            first += field.center(k) * m[k];
        }
        const double mean = first * field.dx / mass;
        double second = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            const double y = field.center(k) - mean;
            second += y * y * m[k];
        }
        return std::pair{mean, second * field.dx / mass};
    };
    FieldMoments out;
    std::tie(out.a1, out.d1) = moment_pair(field.m1, m1);
    std::tie(out.a2, out.d2) = moment_pair(field.m2, m2);
    return out;
}

std::vector<double> rescaled_profile(const Field& field, int species, std::span<const double> u)
{
    if (species != 1 && species != 2) {
        throw InvalidArgument("species must be 1 or 2");
    }
    const FieldMoments mom = moments(field);
    const double mean = species == 1 ? mom.a1 : mom.a2;
    const double var = species == 1 ? mom.d1 : mom.d2;
    if (!(var > 0.0)) {
        throw InvalidArgument("rescaled profile needs a positive variance");
    }
    const std::vector<double>& m = species == 1 ? field.m1 : field.m2;
    const double mass = species == 1 ? field.mass1() : field.mass2();
    const double sd = std::sqrt(var);

    std::vector<double> out;
    out.reserve(u.size());
    for (double point : u) {
        const double x = mean + point * sd;
        const double pos = (x - field.x_min) / field.dx - 0.5;
        if (!(pos >= 0.0) || pos > static_cast<double>(field.size() - 1)) {
            throw InvalidArgument("profile sample u = " + std::to_string(point) +
                                  " falls outside the grid");
        }
        const auto k = std::min(static_cast<std::size_t>(pos), field.size() - 2);
        const double w = pos - static_cast<double>(k);
        const double value = (1.0 - w) * m[k] + w * m[k + 1];
        out.push_back(sd * value / mass);
    }
    return out;
}

double l1_distance(const Field& a, const Field& b)
{
    if (a.size() != b.size() || a.dx != b.dx || a.x_min != b.x_min) {
        throw InvalidArgument("l1_distance needs fields on the same grid");
    }
    double sum = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        sum += std::abs(a.m1[k] - b.m1[k]) + std::abs(a.m2[k] - b.m2[k]);
    }
    return sum * a.dx;
}

} // namespace tsync
