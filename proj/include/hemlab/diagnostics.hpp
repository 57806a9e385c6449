#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "hemlab/hem.hpp"
#include "hemlab/pade.hpp"
#include "hemlab/potential.hpp"

namespace hemlab::diag {

using algebra::Complex;
using pade::RootSet;
using potential::ChargeConfiguration;

// Per-reference noise floor: measured PA errors below this are quantization,
// not signal. Kept low enough that slowly-decaying small-alpha profiles keep
// three usable samples in double precision.
inline double default_noise_floor(double reference_magnitude) {
    return 8.0 * std::numeric_limits<double>::epsilon() * reference_magnitude;
}

struct ConvergenceProfile {
    Complex alpha;
    std::vector<std::pair<int, double>> samples;  // (M, error), sorted by M
    std::optional<double> cf_hat;
    std::pair<int, int> fit_window{0, 0};
};

/// Least-squares slope of ln(error) against M over the usable window
/// (samples above the noise floor; the first is dropped as transient when at
/// least four remain). Returns exp(slope/2), the per-[M/M] convergence
/// factor, clamped to (0, 1]. Throws Errc::insufficient_decay.
double cf_estimate(const std::vector<std::pair<int, double>>& samples, double noise_floor);

/// Error profiles of [M/M] approximants against the closed-form two-bus
/// reference when available, the Newton reference otherwise. Per-alpha
/// failures leave cf_hat unset and the run continues.
std::vector<ConvergenceProfile> cf_curve(const hem::NetworkCase& net, int bus_id,
                                         const std::vector<double>& alphas, const std::vector<int>& m_list);

/// Empirical BCC: least-squares fit of cf_hat = s|alpha| + c alpha^2 over
/// profiles with cf_hat set and |alpha| <= alpha_max; returns s. The
/// quadratic term absorbs the O(alpha^2) tail so s estimates the origin
/// slope. Throws Errc::insufficient_profiles with fewer than 3 usable.
double slope_at_origin(const std::vector<ConvergenceProfile>& profiles, double alpha_max);

enum class RootSelection { poles, zeros, both };

struct KsResult {
    double distance = 0.0;
    int used = 0;
    int spurious = 0;  // roots outside the band, excluded from the CDF
};

/// Sup distance between the empirical CDF of in-band inverse-plane roots and
/// the arcsine law on [a, b]. Band: |Im| <= band and Re in [a-band, b+band].
KsResult ks_distance_to_equilibrium(const RootSet& rs, RootSelection which, std::pair<double, double> segment,
                                    double band);

/// Inverse-plane roots as unit charge quanta with equal weights summing
/// to 1. Coincident roots are perturbed by 1e-12; perturbed_count reports
/// how many. Throws Errc::empty_selection.
ChargeConfiguration roots_as_charges(const RootSet& rs, RootSelection which, int* perturbed_count = nullptr);

/// Max |tangential field| over probes on the middle (1 - 2 trim) fraction of
/// the segment. Probes sit at a normal offset of max(1e-6, 0.75 L / N) so the
/// statistic reads the continuum-scale field rather than the lattice ripple
/// between adjacent quanta; probes within 1e-6 of a charge are excluded.
double tangential_field_residual(const ChargeConfiguration& cfg, std::pair<double, double> segment, int n_probes,
                                 double trim);

/// Mean distance between the selected inverse-plane roots and their
/// reflection about Re = center under greedy matching, normalized by the
/// branch-cut half-length.
double symmetry_metric(const RootSet& rs, RootSelection which, double center, double half_length);

struct PairingReport {
    std::vector<std::pair<Complex, Complex>> pairs;  // (pole, zero) in the alpha plane
    int unpaired_poles = 0;
    int unpaired_zeros = 0;
};

/// Greedy nearest-neighbor pole/zero matching within radius, poles visited
/// in ascending |alpha|.
PairingReport pole_zero_pairing(const RootSet& rs, double radius);

}  // namespace hemlab::diag
