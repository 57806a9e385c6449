#pragma once

#include <complex>
#include <vector>

#include "hemlab/errors.hpp"

namespace hemlab::algebra {

using Complex = std::complex<double>;

// =============================================================================
// Polynomial — complex coefficients, ascending degree, trimmed representation
// =============================================================================

/// Coefficients in ascending degree. The highest stored coefficient is nonzero;
/// the zero polynomial is the empty list.
struct Polynomial {
    std::vector<Complex> coeffs;

    Polynomial() = default;
    explicit Polynomial(std::vector<Complex> c) : coeffs(std::move(c)) { trim(); }

    bool is_zero() const { return coeffs.empty(); }
    /// Degree of the zero polynomial is reported as -1.
    int degree() const { return static_cast<int>(coeffs.size()) - 1; }
    Complex leading() const { return coeffs.empty() ? Complex{0.0} : coeffs.back(); }

    /// Drop trailing coefficients that are exactly zero.
    void trim() {
        while (!coeffs.empty() && coeffs.back() == Complex{0.0}) coeffs.pop_back();
    }
    /// Drop trailing coefficients of magnitude <= rel_tol * max |coeff|.
    void trim(double rel_tol);
};

Complex poly_eval(const Polynomial& p, Complex z);

Polynomial poly_derivative(const Polynomial& p);

/// Expand leading * prod (z - r_i). Used as the reconstruction oracle and by
/// calibration checks; ascending-index summation, deterministic.
Polynomial poly_from_roots(const std::vector<Complex>& roots, Complex leading);

struct RootFindReport {
    int iterations = 0;
    double worst_residual = 0.0;
    bool precision_warning = false;  // degree > 60 in double precision
};

/// All roots (with multiplicity) by simultaneous Aberth-Ehrlich iteration.
/// Initial guesses sit on the Cauchy-bound circle with a fixed angular offset.
/// Each returned root r satisfies |p(r)| <= tol * max|c_k| * max(1,|r|)^deg.
/// Output sorted lexicographically by (re, im).
/// Throws NonConvergence if the bound is not met within max_iter sweeps.
std::vector<Complex> poly_roots(const Polynomial& p, double tol = 1e-10, int max_iter = 200,
                                RootFindReport* report = nullptr);

// =============================================================================
// PowerSeries — truncated Maclaurin coefficients c[0..N]
// =============================================================================

struct PowerSeries {
    std::vector<Complex> coeffs;  // length order()+1

    PowerSeries() : coeffs(1, Complex{0.0}) {}
    explicit PowerSeries(std::vector<Complex> c) : coeffs(std::move(c)) {
        if (coeffs.empty()) coeffs.assign(1, Complex{0.0});
    }
    static PowerSeries zero(int order) { return PowerSeries(std::vector<Complex>(order + 1, Complex{0.0})); }
    static PowerSeries one(int order) {
        PowerSeries s = zero(order);
        s.coeffs[0] = 1.0;
        return s;
    }

    int order() const { return static_cast<int>(coeffs.size()) - 1; }
    Complex at(int k) const { return k >= 0 && k <= order() ? coeffs[k] : Complex{0.0}; }

    /// Horner partial-sum evaluation.
    Complex eval(Complex alpha) const;
};

/// Cauchy product truncated at order N.
PowerSeries series_mul(const PowerSeries& a, const PowerSeries& b, int N);

/// Reciprocal series to order N: w[0] = 1/a[0], w[k] = -(sum a[j] w[k-j])/a[0].
/// Throws Errc::zero_leading_coefficient when |a[0]| is at machine scale.
PowerSeries series_reciprocal(const PowerSeries& a, int N);

/// Coefficient-wise conjugation; represents f*(alpha) = conj(f(conj(alpha))).
PowerSeries series_conj_reflect(const PowerSeries& a);

}  // namespace hemlab::algebra
