#pragma once

// Mean-field transport-exchange system
//
//   dm1/dt + v1 dm1/dx = alpha12 (m2 - m1)
//   dm2/dt + v2 dm2/dx = alpha21 (m1 - m2)
//
// solved two independent ways: a Fourier method that advances each mode by
// the exact 2x2 matrix exponential, and a first-order upwind finite-volume
// scheme with an explicit exchange step and outflow boundaries.

#include "tsync/model.hpp"
#include "tsync/parallel.hpp"

#include <array>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace tsync {

struct GridSpec {
    double x_min = -10.0;
    double x_max = 10.0;
    std::size_t cells = 2048;

    double dx() const { return (x_max - x_min) / static_cast<double>(cells); }
};

/// Cell averages of both species on a uniform grid. Outflow holds the mass
/// that has left the grid through the boundaries.
struct Field {
    double x_min = 0.0;
    double dx = 1.0;
    std::vector<double> m1;
    std::vector<double> m2;
    double t = 0.0;
    double outflow1 = 0.0;
    double outflow2 = 0.0;

    std::size_t size() const noexcept { return m1.size(); }
    double center(std::size_t k) const noexcept { return x_min + (static_cast<double>(k) + 0.5) * dx; }
    double mass1() const;
    double mass2() const;
};

using Density = std::function<double(double)>;

Density gaussian_density(double mean, double sd);
double normal_density(double u);

/// Midpoint cell averages, each species renormalized to unit mass. Throws
/// InvalidArgument on negative values and TailMassError when more than 1e-8
/// of a density's mass lies outside the grid.
Field init_field(const Density& density1, const Density& density2, const GridSpec& grid);

/// Domain [min a_i(0) + min(v1,0) T - L, max a_i(0) + max(v2,0) T + L] with
/// L = 10 sqrt(max variance over [0, T]); cell count is the smallest power of
/// two >= min_cells.
GridSpec default_grid(const ModelParams& params, const InitialMoments& init, double horizon,
                      std::size_t min_cells = 2048);

/// Coefficients of the linear system with the exchange gains decoupled from
/// the rate parameters, so tests can switch the exchange off or flip a sign.
struct TransportCoefficients {
    double v1 = 0.0;
    double v2 = 1.0;
    double gain1 = 1.0; ///< multiplies (m2 - m1) in the type-1 equation
    double gain2 = 1.0; ///< multiplies (m1 - m2) in the type-2 equation

    static TransportCoefficients from(const ModelParams& params)
    {
        return {params.v1, params.v2, params.alpha12, params.alpha21};
    }
};

/// One upwind step: each species advected at its own velocity, then the
/// explicit exchange applied to the advected densities. Throws CflViolation
/// unless max|v| dt <= dx and dt (alpha12 + alpha21) <= 0.5.
Field fv_step(const Field& field, const ModelParams& params, double dt,
              Execution exec = Execution::Parallel);

/// Repeated fv_step over `duration` with the largest step <= dt that divides it.
Field fv_solve(const Field& field, const ModelParams& params, double duration, double dt,
               Execution exec = Execution::Parallel);

/// Advances by `duration` through the discrete Fourier transform. The cell
/// count must be a power of two. Throws AliasingError when the inverse
/// transform leaves an imaginary part above 1e-8 of the field scale.
Field spectral_solve(const Field& field0, const ModelParams& params, double duration,
                     Execution exec = Execution::Parallel);

namespace detail {

Field fv_step(const Field& field, const TransportCoefficients& coef, double dt, Execution exec);
Field spectral_evolve(const Field& field0, const TransportCoefficients& coef, double duration,
                      Execution exec);

/// exp(A(p) t) in row-major order, A(p) = [[-i v1 p - g1, g1], [g2, -i v2 p - g2]].
std::array<Complex, 4> evolution_matrix(const TransportCoefficients& coef, double p, double t);

} // namespace detail

struct FieldMoments {
    double a1 = 0.0;
    double a2 = 0.0;
    double d1 = 0.0;
    double d2 = 0.0;
};

/// Mass-normalized means and centred second moments by midpoint quadrature.
/// Throws OutflowError when more than 1e-6 of the mass has left the grid or
/// sits in the outer 2% of cells on either side.
FieldMoments moments(const Field& field);

/// sqrt(d_i) m_i(a_i + u sqrt(d_i)) / M_i at each u, by linear interpolation
/// between cell centres. Throws InvalidArgument for points off the grid.
std::vector<double> rescaled_profile(const Field& field, int species, std::span<const double> u);

/// Sum over both species of the L1 distance between two fields on the same grid.
double l1_distance(const Field& a, const Field& b);

} // namespace tsync
