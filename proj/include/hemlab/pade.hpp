#pragma once

#include "hemlab/algebra.hpp"

namespace hemlab::pade {

using algebra::Complex;
using algebra::Polynomial;
using algebra::PowerSeries;

struct PadeApproximant {
    Polynomial numerator;    // degree <= L
    Polynomial denominator;  // degree <= M, constant term exactly 1
    int L = 0;
    int M = 0;
    double condition_estimate = 1.0;  // of the equilibrated Toeplitz system
    bool degenerate_warning = false;  // condition estimate beyond 1e14
};

/// [L/M] approximant by the accuracy-through-order conditions: denominator
/// from the M x M Toeplitz system sum_j c_{L+k-j} b_j = -c_{L+k}, k = 1..M
/// (negative-index c are zero), numerator by truncated convolution. The
/// system is solved after two-sided equilibration; near-singular blocks are
/// flagged via degenerate_warning, an exactly singular system throws
/// Errc::degenerate_block.
PadeApproximant build_pade(const PowerSeries& series, int L, int M);

/// P(alpha)/Q(alpha); throws Errc::pole_hit when |Q(alpha)| is at machine
/// scale relative to the coefficient mass of Q at |alpha|.
Complex eval_pade(const PadeApproximant& pa, Complex alpha);

struct RootSet {
    std::vector<Complex> poles_alpha;
    std::vector<Complex> zeros_alpha;
    std::vector<Complex> poles_inv;  // 1/alpha images, roots at 0 omitted
    std::vector<Complex> zeros_inv;
    int M = 0;
};

/// Poles = denominator roots, zeros = numerator roots, plus their
/// inverse-plane images (for roots with |alpha| above machine threshold).
RootSet pole_zero_sets(const PadeApproximant& pa, double root_tol = 1e-8);

}  // namespace hemlab::pade
