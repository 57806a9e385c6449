#include "hemlab/pade.hpp"

#include <algorithm>
#include <cmath>

namespace hemlab::pade {

namespace {

// The accuracy-through-order system inherits the geometric growth of the
// input coefficients and its condition reaches 1/eps(double) near M = 20.
// The solve therefore runs in 80-bit arithmetic internally; data stays
// double at the interfaces. On targets where long double is double the
// usable diagonal order shrinks accordingly.
using Cld = std::complex<long double>;

struct DenseLu {
    int n = 0;
    std::vector<Cld> a;  // row-major, factored in place
    std::vector<int> piv;
    bool singular = false;

    Cld& at(int i, int j) { return a[static_cast<std::size_t>(i) * n + j]; }
    const Cld& at(int i, int j) const { return a[static_cast<std::size_t>(i) * n + j]; }

    void factor() {
        piv.resize(n);
        for (int k = 0; k < n; ++k) {
            int p = k;
            long double best = std::abs(at(k, k));
            for (int i = k + 1; i < n; ++i)
                if (std::abs(at(i, k)) > best) {
                    best = std::abs(at(i, k));
                    p = i;
                }
            piv[k] = p;
            if (p != k)
                for (int j = 0; j < n; ++j) std::swap(at(k, j), at(p, j));
            if (at(k, k) == Cld{0.0L}) {
                singular = true;
                return;
            }
            for (int i = k + 1; i < n; ++i) {
                const Cld m = at(i, k) / at(k, k);
                at(i, k) = m;
                for (int j = k + 1; j < n; ++j) at(i, j) -= m * at(k, j);
            }
        }
    }

    std::vector<Cld> solve(std::vector<Cld> b) const {
        // all interchanges first: the stored L rows reflect later swaps too
        for (int k = 0; k < n; ++k)
            if (piv[k] != k) std::swap(b[k], b[piv[k]]);
        for (int k = 0; k < n; ++k)
            for (int i = k + 1; i < n; ++i) b[i] -= at(i, k) * b[k];
        for (int i = n - 1; i >= 0; --i) {
            for (int j = i + 1; j < n; ++j) b[i] -= at(i, j) * b[j];
            b[i] /= at(i, i);
        }
        return b;
    }
};

long double one_norm(const std::vector<Cld>& a, int n) {
    long double best = 0.0L;
    for (int j = 0; j < n; ++j) {
        long double col = 0.0L;
        for (int i = 0; i < n; ++i) col += std::abs(a[static_cast<std::size_t>(i) * n + j]);
        best = std::max(best, col);
    }
    return best;
}

}  // namespace

PadeApproximant build_pade(const PowerSeries& series, int L, int M) {
    if (L < 0 || M < 0) throw std::invalid_argument("build_pade: L, M must be >= 0");
    if (series.order() < L + M)
        throw std::invalid_argument("build_pade: series order must be at least L + M");

    PadeApproximant pa;
    pa.L = L;
    pa.M = M;

    auto c_at = [&](int k) -> Cld {
        if (k < 0 || k > series.order()) return Cld{0.0L};
        const Complex v = series.coeffs[k];
        return Cld{v.real(), v.imag()};
    };

    std::vector<Cld> q(M + 1, Cld{0.0L});
    q[0] = 1.0L;
    if (M > 0) {
        std::vector<Cld> A(static_cast<std::size_t>(M) * M);
        std::vector<Cld> rhs(M);
        for (int k = 1; k <= M; ++k) {
            for (int j = 1; j <= M; ++j) A[static_cast<std::size_t>(k - 1) * M + (j - 1)] = c_at(L + k - j);
            rhs[k - 1] = -c_at(L + k);
        }
        // two-sided equilibration: the raw entries carry the coefficient
        // growth, which is not the degeneracy of interest
        std::vector<long double> dr(M, 1.0L), dc(M, 1.0L);
        for (int i = 0; i < M; ++i) {
            long double m = 0.0L;
            for (int j = 0; j < M; ++j) m = std::max(m, std::abs(A[static_cast<std::size_t>(i) * M + j]));
            if (m > 0.0L) dr[i] = m;
            for (int j = 0; j < M; ++j) A[static_cast<std::size_t>(i) * M + j] /= dr[i];
            rhs[i] /= dr[i];
        }
        for (int j = 0; j < M; ++j) {
            long double m = 0.0L;
            for (int i = 0; i < M; ++i) m = std::max(m, std::abs(A[static_cast<std::size_t>(i) * M + j]));
            if (m > 0.0L) dc[j] = m;
            for (int i = 0; i < M; ++i) A[static_cast<std::size_t>(i) * M + j] /= dc[j];
        }

        DenseLu lu;
        lu.n = M;
        lu.a = A;
        lu.factor();
        if (lu.singular)
            throw Error(Errc::degenerate_block, "build_pade: Toeplitz block singular at [" + std::to_string(L) +
                                                    "/" + std::to_string(M) + "]");
        auto x = lu.solve(rhs);

        // exact one-norm condition of the equilibrated system (M is small)
        long double inv_norm = 0.0L;
        for (int j = 0; j < M; ++j) {
            std::vector<Cld> e(M, Cld{0.0L});
            e[j] = 1.0L;
            auto col = lu.solve(std::move(e));
            long double s = 0.0L;
            for (const auto& v : col) s += std::abs(v);
            inv_norm = std::max(inv_norm, s);
        }
        const long double cond = one_norm(A, M) * inv_norm;
        pa.condition_estimate = static_cast<double>(cond);
        if (!std::isfinite(pa.condition_estimate)) {
            throw Error(Errc::degenerate_block, "build_pade: Toeplitz block numerically singular at [" +
                                                    std::to_string(L) + "/" + std::to_string(M) + "]");
        }
        pa.degenerate_warning = pa.condition_estimate > 1e14;
        for (int j = 1; j <= M; ++j) q[j] = x[j - 1] / dc[j - 1];
    }

    std::vector<Complex> qd(M + 1), pd(L + 1);
    for (int j = 0; j <= M; ++j) qd[j] = Complex(static_cast<double>(q[j].real()), static_cast<double>(q[j].imag()));
    for (int k = 0; k <= L; ++k) {
        Cld acc{0.0L};
        for (int j = 0; j <= std::min(k, M); ++j) acc += q[j] * c_at(k - j);
        pd[k] = Complex(static_cast<double>(acc.real()), static_cast<double>(acc.imag()));
    }

    pa.denominator = Polynomial(std::move(qd));
    pa.denominator.trim(1e-13);
    if (pa.denominator.is_zero()) pa.denominator = Polynomial({Complex{1.0}});
    pa.numerator = Polynomial(std::move(pd));
    pa.numerator.trim(1e-13);
    return pa;
}

Complex eval_pade(const PadeApproximant& pa, Complex alpha) {
    const Complex qv = poly_eval(pa.denominator, alpha);
    double mass = 0.0;
    double apow = 1.0;
    for (const auto& c : pa.denominator.coeffs) {
        mass += std::abs(c) * apow;
        apow *= std::abs(alpha);
    }
    if (std::abs(qv) <= 1e-14 * std::max(mass, 1e-300))
        throw Error(Errc::pole_hit, "eval_pade: denominator vanishes at the evaluation point");
    return poly_eval(pa.numerator, alpha) / qv;
}

RootSet pole_zero_sets(const PadeApproximant& pa, double root_tol) {
    if (pa.numerator.degree() < 1 && pa.denominator.degree() < 1)
        throw std::invalid_argument("pole_zero_sets: both polynomials constant");
    RootSet rs;
    rs.M = pa.M;
    if (pa.denominator.degree() >= 1) rs.poles_alpha = algebra::poly_roots(pa.denominator, root_tol);
    if (pa.numerator.degree() >= 1) rs.zeros_alpha = algebra::poly_roots(pa.numerator, root_tol);
    for (const Complex& r : rs.poles_alpha)
        if (std::abs(r) > 1e-12) rs.poles_inv.push_back(1.0 / r);
    for (const Complex& r : rs.zeros_alpha)
        if (std::abs(r) > 1e-12) rs.zeros_inv.push_back(1.0 / r);
    return rs;
}

}  // namespace hemlab::pade
