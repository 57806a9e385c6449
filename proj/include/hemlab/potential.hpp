#pragma once

#include <complex>
#include <vector>

#include "hemlab/errors.hpp"

namespace hemlab::potential {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;
};

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }

// =============================================================================
// PlanarCurve — polyline pieces with a global arc-length parametrization
// =============================================================================

struct PlanarCurve {
    struct Piece {
        std::vector<Vec2> points;
        std::vector<double> cumlen;  // cumulative arc length, cumlen[0] = 0
    };
    std::vector<Piece> pieces;
    double total_length = 0.0;

    static PlanarCurve segment(Vec2 a, Vec2 b);
    /// Validates each polyline is simple and the total length is positive.
    static PlanarCurve from_polylines(const std::vector<std::vector<Vec2>>& polys);

    /// Point at global arc-length parameter s in [0, total_length].
    Vec2 point_at(double s) const;
    /// Unit tangent at s (one-sided at junctions and kinks).
    Vec2 tangent_at(double s) const;
};

// =============================================================================
// ChargeConfiguration — normalized discrete measure
// =============================================================================

struct ChargeConfiguration {
    std::vector<Vec2> points;
    std::vector<double> weights;  // w_i >= 0, sum = 1
};

/// Throws Errc::semantic_error unless weights are nonnegative, normalized to
/// 1 within 1e-12, and points are pairwise distinct.
void validate_configuration(const ChargeConfiguration& cfg);

struct PhysicalUnits {
    double epsilon0 = 1.0 / (4.0 * M_PI);
    double a_const = 1.0;
};

/// sum_{i != j} w_i w_j ln(1/|r_i - r_j|). The diagonal is excluded: discrete
/// point-charge self-energy is infinite and omitted by convention.
double discrete_energy(const ChargeConfiguration& cfg);

/// Logarithmic-capacity estimate from an N-point configuration:
///   exp(-E / (1 - sum w_i^2)) / N^(1/(N-1)).
/// The pair-weight normalization makes the estimate scale exactly linearly
/// under dilation; the N^(1/(N-1)) factor removes the discretization bias
/// that is exact on the unit circle (N-th roots of unity give exactly 1).
/// Converges to cap(E) from above on Fekete configurations.
double capacity_estimate(const ChargeConfiguration& cfg);

struct FeketeResult {
    ChargeConfiguration config;
    double energy = 0.0;
    int sweeps = 0;
    double max_tangential_gradient = 0.0;
    bool converged = false;  // stationarity 1e-8 reached at interior points
};

/// Equal-weight energy minimizer constrained to the curve. Deterministic
/// initial placement at uniform arc-length quantiles, coordinate golden-
/// section sweeps plus a projected-Newton polish; energy never increases.
/// When max_iter sweeps pass without reaching stationarity the best-so-far
/// configuration is returned with converged = false.
FeketeResult fekete_points(const PlanarCurve& curve, int N, int max_iter = 400);

/// Arcsine equilibrium CDF of the segment [a, b].
double segment_equilibrium_cdf(double a, double b, double x);

/// (1/(2 pi eps0)) sum w_i ln(a_const / |r - r_i|)
double potential_at(const ChargeConfiguration& cfg, Vec2 r, const PhysicalUnits& units = {});

/// (1/(2 pi eps0)) sum w_i (r - r_i)/|r - r_i|^2
Vec2 field_at(const ChargeConfiguration& cfg, Vec2 r, const PhysicalUnits& units = {});

struct EnergyCapacity {
    double per_length_energy = 0.0;
    double capacity_from_energy = 0.0;
};

/// E_pL = discrete_energy/(4 pi eps0); capacity back out of E_pL with the
/// same discretization normalization, so capacity_from_energy ==
/// capacity_estimate identically. Requires a_const = 1.
EnergyCapacity energy_capacity_relation(const ChargeConfiguration& cfg, const PhysicalUnits& units = {});

/// Q^2 / (2 E) for a finite conductor system.
double electrostatic_capacitance(double total_charge, double energy);

/// Exact convergence factor for a straight-segment branch cut [A, B] in the
/// inverse plane: CF = 1/|phi(1/alpha)| with phi the exterior conformal map
/// of the segment onto the exterior of the unit disk.
double segment_green_cf(double A, double B, std::complex<double> alpha);

}  // namespace hemlab::potential
