#pragma once

// Shared oracles for the unit and acceptance suites. Everything here checks
// the library from the outside: residuals are recomputed from the series
// algebra, never taken from the recursion internals.

#include <algorithm>
#include <cmath>

#include "hemlab/hem.hpp"

namespace testsupport {

using hemlab::algebra::Complex;
using hemlab::algebra::PowerSeries;

/// Worst normalized residual of the embedded equations over all non-slack
/// buses and orders 1..N, plus the pv magnitude constraint. The residual at
/// order n is scaled by the term mass of that order's equation, so the bound
/// is meaningful even when the coefficients grow geometrically.
inline double embedding_residual(const hemlab::hem::NetworkCase& net, const hemlab::hem::EmbeddedSolution& sol) {
    using namespace hemlab;
    const auto Y = hem::build_ybus(net);
    const int n_bus = Y.n;
    const int N = sol.order;
    const int slack = net.slack_index();

    double s_norm = 0.0;
    for (const auto& b : net.buses) s_norm = std::max(s_norm, std::hypot(b.p_inject, b.q_inject));
    const double tol_scale = std::max(1.0, s_norm);

    double worst = 0.0;
    for (int i = 0; i < n_bus; ++i) {
        if (i == slack) {
            for (int n = 1; n <= N; ++n) worst = std::max(worst, std::abs(sol.voltage[i].coeffs[n]));
            continue;
        }
        const auto w_star = algebra::series_conj_reflect(algebra::series_reciprocal(sol.voltage[i], N));
        // conj-reflected complex power series: pq buses have S constant
        PowerSeries c_series = PowerSeries::zero(N);
        if (net.buses[i].kind == hem::BusKind::pv) {
            c_series.coeffs[0] = Complex{net.buses[i].p_inject, 0.0};
            for (int k = 0; k < static_cast<int>(sol.reactive[i].coeffs.size()) && k <= N; ++k)
                c_series.coeffs[k] += Complex{0.0, 1.0} * sol.reactive[i].coeffs[k];
        } else {
            c_series.coeffs[0] = Complex{net.buses[i].p_inject, -net.buses[i].q_inject};
        }
        const auto rhs_series = hemlab::algebra::series_mul(c_series, w_star, N);

        for (int n = 1; n <= N; ++n) {
            Complex lhs{0.0};
            double mass = 0.0;
            for (int k = 0; k < n_bus; ++k) {
                lhs += Y.at(i, k) * sol.voltage[k].coeffs[n];
                mass += std::abs(Y.at(i, k)) * std::abs(sol.voltage[k].coeffs[n]);
            }
            const Complex rhs = rhs_series.coeffs[n - 1];
            for (int j = 0; j <= n - 1; ++j) mass += std::abs(c_series.coeffs[j]) * std::abs(w_star.coeffs[n - 1 - j]);
            worst = std::max(worst, std::abs(lhs - rhs) / (tol_scale * std::max(1.0, mass)));
        }
        if (net.buses[i].kind == hem::BusKind::pv) {
            const double sp2 = net.buses[i].v_setpoint * net.buses[i].v_setpoint;
            for (int n = 0; n <= N; ++n) {
                Complex acc{0.0};
                double mass = sp2;
                for (int j = 0; j <= n; ++j) {
                    acc += sol.voltage[i].coeffs[j] * std::conj(sol.voltage[i].coeffs[n - j]);
                    mass += std::abs(sol.voltage[i].coeffs[j]) * std::abs(sol.voltage[i].coeffs[n - j]);
                }
                if (n == 0) acc -= sp2;
                worst = std::max(worst, std::abs(acc) / std::max(1.0, mass));
            }
        }
    }
    return worst;
}

/// Fixed five-bus pq ring-with-chord case, light loading so the series
/// converges well past |alpha| = 1.
inline hemlab::hem::NetworkCase five_bus_case() {
    using namespace hemlab::hem;
    NetworkCase net;
    net.base_power = 100.0;
    net.buses = {
        Bus{1, BusKind::slack, 0.0, 0.0, 1.0, 0.0, 0.0},
        Bus{2, BusKind::pq, -0.15, -0.08, 1.0, 0.0, 0.0},
        Bus{3, BusKind::pq, -0.22, 0.05, 1.0, 0.0, 0.02},
        Bus{4, BusKind::pq, 0.10, -0.04, 1.0, 0.0, 0.0},
        Bus{5, BusKind::pq, -0.18, -0.12, 1.0, 0.01, 0.0},
    };
    net.branches = {
        Branch{1, 2, 0.01, 0.06, 0.02, 1.0},
        Branch{2, 3, 0.02, 0.09, 0.01, 1.0},
        Branch{3, 4, 0.015, 0.08, 0.0, 1.0},
        Branch{4, 5, 0.01, 0.07, 0.0, 0.98},
        Branch{5, 1, 0.02, 0.10, 0.02, 1.0},
        Branch{2, 5, 0.03, 0.12, 0.0, 1.0},
    };
    return net;
}

inline hemlab::hem::NetworkCase twobus_fixture() { return hemlab::hem::calibrate_two_bus(-1.0 / 3.0, 1.0); }

}  // namespace testsupport
