#include "hemlab/algebra.hpp"

#include <algorithm>
#include <cmath>

namespace hemlab::algebra {

void Polynomial::trim(double rel_tol) {
    double maxmag = 0.0;
    for (const auto& c : coeffs) maxmag = std::max(maxmag, std::abs(c));
    const double cut = rel_tol * maxmag;
    while (!coeffs.empty() && std::abs(coeffs.back()) <= cut) coeffs.pop_back();
}

Complex poly_eval(const Polynomial& p, Complex z) {
    Complex acc{0.0};
    for (auto it = p.coeffs.rbegin(); it != p.coeffs.rend(); ++it) acc = acc * z + *it;
    return acc;
}

Polynomial poly_derivative(const Polynomial& p) {
    if (p.degree() < 1) return Polynomial{};
    std::vector<Complex> d(p.coeffs.size() - 1);
    for (std::size_t k = 0; k < d.size(); ++k) d[k] = double(k + 1) * p.coeffs[k + 1];
    return Polynomial(std::move(d));
}

Polynomial poly_from_roots(const std::vector<Complex>& roots, Complex leading) {
    std::vector<Complex> c{leading};
    for (const Complex& r : roots) {
        c.push_back(c.back());
        for (std::size_t k = c.size() - 2; k > 0; --k) c[k] = c[k - 1] - r * c[k];
        c[0] = -r * c[0];
    }
    return Polynomial(std::move(c));
}

namespace {

// High-order approximant polynomials are ill-conditioned enough in double
// that the simultaneous iteration runs in 80-bit arithmetic internally;
// the data stays double at the interface.
using Cld = std::complex<long double>;

// p and p' at z in one Horner pass
std::pair<Cld, Cld> eval_with_derivative(const std::vector<Cld>& c, Cld z) {
    Cld p{0.0L}, dp{0.0L};
    for (auto it = c.rbegin(); it != c.rend(); ++it) {
        dp = dp * z + p;
        p = p * z + *it;
    }
    return {p, dp};
}

}  // namespace

std::vector<Complex> poly_roots(const Polynomial& p, double tol, int max_iter, RootFindReport* report) {
    if (p.degree() < 1) throw std::invalid_argument("poly_roots: degree must be >= 1");
    std::vector<Complex> c = p.coeffs;

    // factor out exact roots at the origin
    std::size_t zero_roots = 0;
    while (zero_roots < c.size() - 1 && c[zero_roots] == Complex{0.0}) ++zero_roots;
    c.erase(c.begin(), c.begin() + zero_roots);

    const int n = static_cast<int>(c.size()) - 1;
    if (report && p.degree() > 60) report->precision_warning = true;

    double maxc = 0.0;
    for (const auto& ck : c) maxc = std::max(maxc, std::abs(ck));

    std::vector<Complex> roots(zero_roots, Complex{0.0});
    if (n >= 1) {
        std::vector<Cld> cw(c.size());
        for (std::size_t k = 0; k < c.size(); ++k) cw[k] = Cld{c[k].real(), c[k].imag()};

        // Cauchy bound radius, offset angles to break real-axis symmetry traps
        long double ratio = 0.0L;
        for (int k = 0; k < n; ++k) ratio = std::max(ratio, std::abs(cw[k] / cw[n]));
        const long double radius = 1.0L + ratio;
        std::vector<Cld> z(n);
        for (int k = 0; k < n; ++k) {
            const long double theta = 2.0L * M_PI * k / n + 0.4L;
            z[k] = radius * Cld(std::cos(theta), std::sin(theta));
        }

        // iterate to step-size convergence; the residual bound below is a
        // post-condition, far too loose to steer the iteration
        const long double step_tol = 16.0L * 1.0842e-19L;  // ~eps(long double)
        std::vector<bool> done(n, false);
        int iter = 0;
        bool all_done = false;
        for (; iter < max_iter && !all_done; ++iter) {
            all_done = true;
            for (int i = 0; i < n; ++i) {
                if (done[i]) continue;
                auto [pv, dpv] = eval_with_derivative(cw, z[i]);
                if (pv == Cld{0.0L}) {
                    done[i] = true;
                    continue;
                }
                Cld newton = (dpv == Cld{0.0L}) ? Cld{0.0L} : pv / dpv;
                Cld srep{0.0L};
                for (int j = 0; j < n; ++j) {
                    if (j != i) srep += 1.0L / (z[i] - z[j]);
                }
                Cld denom = 1.0L - newton * srep;
                Cld step = (std::abs(denom) > 1e-300L) ? newton / denom : newton;
                if (dpv == Cld{0.0L}) {
                    // nudge off a critical point
                    step = (1e-3L + 1e-3L * std::abs(z[i])) *
                           Cld(std::cos(0.7L * i + 0.3L), std::sin(0.7L * i + 0.3L));
                }
                z[i] -= step;
                if (std::abs(step) <= step_tol * std::max<long double>(1.0L, std::abs(z[i])))
                    done[i] = true;
                else
                    all_done = false;
            }
        }

        double worst = 0.0;
        for (int i = 0; i < n; ++i) {
            auto [pv, dpv] = eval_with_derivative(cw, z[i]);
            (void)dpv;
            const long double scale =
                maxc * std::pow(std::max<long double>(1.0L, std::abs(z[i])), static_cast<long double>(n));
            worst = std::max(worst, static_cast<double>(std::abs(pv) / scale));
            if (std::abs(pv) > static_cast<long double>(tol) * scale)
                throw NonConvergence(iter, static_cast<double>(std::abs(pv)),
                                     "poly_roots: residual bound not met after " + std::to_string(iter) + " sweeps");
        }
        if (report) {
            report->iterations = iter;
            report->worst_residual = worst;
        }
        for (const Cld& zi : z)
            roots.emplace_back(static_cast<double>(zi.real()), static_cast<double>(zi.imag()));
    }

    std::sort(roots.begin(), roots.end(), [](const Complex& a, const Complex& b) {
        if (a.real() != b.real()) return a.real() < b.real();
        return a.imag() < b.imag();
    });
    return roots;
}

Complex PowerSeries::eval(Complex alpha) const {
    Complex acc{0.0};
    for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) acc = acc * alpha + *it;
    return acc;
}

PowerSeries series_mul(const PowerSeries& a, const PowerSeries& b, int N) {
    std::vector<Complex> c(N + 1, Complex{0.0});
    for (int k = 0; k <= N; ++k) {
        Complex acc{0.0};
        for (int j = 0; j <= k; ++j) acc += a.at(j) * b.at(k - j);
        c[k] = acc;
    }
    return PowerSeries(std::move(c));
}

PowerSeries series_reciprocal(const PowerSeries& a, int N) {
    double maxmag = 0.0;
    for (const auto& ck : a.coeffs) maxmag = std::max(maxmag, std::abs(ck));
    if (std::abs(a.at(0)) <= 1e-12 * std::max(1.0, maxmag))
        throw Error(Errc::zero_leading_coefficient, "series_reciprocal: |a[0]| at machine scale");
    std::vector<Complex> w(N + 1, Complex{0.0});
    w[0] = 1.0 / a.at(0);
    for (int k = 1; k <= N; ++k) {
        Complex acc{0.0};
        for (int j = 1; j <= k; ++j) acc += a.at(j) * w[k - j];
        w[k] = -acc / a.at(0);
    }
    return PowerSeries(std::move(w));
}

PowerSeries series_conj_reflect(const PowerSeries& a) {
    std::vector<Complex> c(a.coeffs.size());
    for (std::size_t k = 0; k < c.size(); ++k) c[k] = std::conj(a.coeffs[k]);
    return PowerSeries(std::move(c));
}

}  // namespace hemlab::algebra
