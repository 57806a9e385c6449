#include "hemlab/hem.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <queue>

namespace hemlab::hem {

int NetworkCase::bus_index(int id) const {
    for (std::size_t i = 0; i < buses.size(); ++i)
        if (buses[i].id == id) return static_cast<int>(i);
    return -1;
}

int NetworkCase::slack_index() const {
    for (std::size_t i = 0; i < buses.size(); ++i)
        if (buses[i].kind == BusKind::slack) return static_cast<int>(i);
    return -1;
}

void validate_case(const NetworkCase& net) {
    if (net.buses.empty()) throw Error(Errc::semantic_error, "case has no buses");
    int slack_count = 0;
    for (const auto& b : net.buses) slack_count += (b.kind == BusKind::slack) ? 1 : 0;
    if (slack_count == 0) throw Error(Errc::semantic_error, "no slack bus");
    if (slack_count > 1) throw Error(Errc::semantic_error, "more than one slack bus");
    for (std::size_t i = 0; i < net.buses.size(); ++i)
        for (std::size_t j = i + 1; j < net.buses.size(); ++j)
            if (net.buses[i].id == net.buses[j].id)
                throw Error(Errc::semantic_error, "duplicate bus id " + std::to_string(net.buses[i].id));
    for (const auto& br : net.branches) {
        if (net.bus_index(br.from) < 0 || net.bus_index(br.to) < 0)
            throw Error(Errc::semantic_error, "dangling branch endpoint " + std::to_string(br.from) + "-" +
                                                  std::to_string(br.to));
        if (br.r * br.r + br.x * br.x <= 0.0)
            throw Error(Errc::semantic_error, "branch with zero impedance");
    }
    // connectivity
    const int n = static_cast<int>(net.buses.size());
    std::vector<std::vector<int>> adj(n);
    for (const auto& br : net.branches) {
        int a = net.bus_index(br.from), b = net.bus_index(br.to);
        adj[a].push_back(b);
        adj[b].push_back(a);
    }
    std::vector<bool> seen(n, false);
    std::queue<int> q;
    q.push(0);
    seen[0] = true;
    int reached = 1;
    while (!q.empty()) {
        int u = q.front();
        q.pop();
        for (int v : adj[u])
            if (!seen[v]) {
                seen[v] = true;
                ++reached;
                q.push(v);
            }
    }
    if (reached != n) throw Error(Errc::semantic_error, "network is not connected");
}

AdmittanceMatrix build_ybus(const NetworkCase& net) {
    const int n = static_cast<int>(net.buses.size());
    AdmittanceMatrix Y;
    Y.n = n;
    Y.entries.assign(static_cast<std::size_t>(n) * n, Complex{0.0});
    for (const auto& br : net.branches) {
        if (br.r == 0.0 && br.x == 0.0) throw Error(Errc::singular_branch, "branch with r = x = 0");
        const int i = net.bus_index(br.from);
        const int k = net.bus_index(br.to);
        const Complex y = 1.0 / Complex(br.r, br.x);
        const double tap = (br.tap == 0.0) ? 1.0 : br.tap;
        Y.at(i, k) -= y / tap;
        Y.at(k, i) -= y / tap;
        Y.at(i, i) += y / (tap * tap) + Complex(0.0, br.charging_b / 2.0);
        Y.at(k, k) += y + Complex(0.0, br.charging_b / 2.0);
    }
    for (int i = 0; i < n; ++i) Y.at(i, i) += Complex(net.buses[i].shunt_g, net.buses[i].shunt_b);
    return Y;
}

namespace {

Eigen::MatrixXcd to_eigen(const AdmittanceMatrix& Y) {
    Eigen::MatrixXcd M(Y.n, Y.n);
    for (int i = 0; i < Y.n; ++i)
        for (int k = 0; k < Y.n; ++k) M(i, k) = Y.at(i, k);
    return M;
}

}  // namespace

EmbeddedSolution hem_series(const NetworkCase& net, int order) {
    validate_case(net);
    if (order < 1) throw std::invalid_argument("hem_series: order must be >= 1");

    const int n = static_cast<int>(net.buses.size());
    const int slack = net.slack_index();
    const AdmittanceMatrix Ym = build_ybus(net);
    const Eigen::MatrixXcd Y = to_eigen(Ym);

    std::vector<int> unknown;  // bus indices with unknown voltage series
    std::vector<int> pv;       // pv bus indices
    for (int i = 0; i < n; ++i) {
        if (i != slack) unknown.push_back(i);
        if (net.buses[i].kind == BusKind::pv) pv.push_back(i);
    }
    const int nu = static_cast<int>(unknown.size());
    const int np = static_cast<int>(pv.size());
    std::vector<int> col_of(n, -1);  // bus -> position in unknown vector
    for (int u = 0; u < nu; ++u) col_of[unknown[u]] = u;
    std::vector<int> pvslot(n, -1);
    for (int s = 0; s < np; ++s) pvslot[pv[s]] = s;

    // germ: zero-injection linear solve with the slack pinned
    const Complex v_slack = net.buses[slack].v_setpoint;
    Eigen::MatrixXcd A0(nu, nu);
    Eigen::VectorXcd b0(nu);
    for (int r = 0; r < nu; ++r) {
        const int i = unknown[r];
        for (int c = 0; c < nu; ++c) A0(r, c) = Y(i, unknown[c]);
        b0(r) = -Y(i, slack) * v_slack;
    }
    std::vector<Complex> germ(n);
    germ[slack] = v_slack;
    if (nu > 0) {
        Eigen::PartialPivLU<Eigen::MatrixXcd> lu0(A0);
        if (lu0.rcond() < 1e-14) throw Error(Errc::singular_germ, "germ system singular (islanded or degenerate)");
        Eigen::VectorXcd v0 = lu0.solve(b0);
        for (int r = 0; r < nu; ++r) germ[unknown[r]] = v0(r);
    }
    for (int i : pv) {
        if (std::abs(std::abs(germ[i]) - net.buses[i].v_setpoint) > 1e-8 * net.buses[i].v_setpoint)
            throw Error(Errc::singular_germ, "pv setpoint at bus " + std::to_string(net.buses[i].id) +
                                                 " inconsistent with the germ magnitude " +
                                                 std::to_string(std::abs(germ[i])));
    }
    for (int i = 0; i < n; ++i)
        if (std::abs(germ[i]) < 1e-8) throw Error(Errc::singular_germ, "germ voltage collapses at a bus");

    // order-n operator on (V[n] for non-slack buses, Q[n-1] for pv buses), real form.
    // Complex row of bus i contributes rows 2r, 2r+1; pv magnitude rows follow.
    const int dim = 2 * nu + np;
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(dim, dim);
    for (int r = 0; r < nu; ++r) {
        const int i = unknown[r];
        for (int c = 0; c < nu; ++c) {
            const Complex y = Y(i, unknown[c]);
            A(2 * r, 2 * c) = y.real();
            A(2 * r, 2 * c + 1) = -y.imag();
            A(2 * r + 1, 2 * c) = y.imag();
            A(2 * r + 1, 2 * c + 1) = y.real();
        }
        if (pvslot[i] >= 0) {
            // unknown Q_i[n-1] enters the left side as -j conj(W_i[0]) Q
            const Complex coef = Complex(0.0, -1.0) * std::conj(1.0 / germ[i]);
            A(2 * r, 2 * nu + pvslot[i]) = coef.real();
            A(2 * r + 1, 2 * nu + pvslot[i]) = coef.imag();
        }
    }
    for (int s = 0; s < np; ++s) {
        const int i = pv[s];
        const int r = col_of[i];
        A(2 * nu + s, 2 * r) = 2.0 * germ[i].real();
        A(2 * nu + s, 2 * r + 1) = 2.0 * germ[i].imag();
    }
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(A);
    if (dim > 0 && lu.rcond() < 1e-14)
        throw Error(Errc::singular_germ, "order-recursion operator singular");

    EmbeddedSolution sol;
    sol.order = order;
    sol.order_overflow_warning = order > 60;
    sol.voltage.assign(n, PowerSeries::zero(order));
    sol.reactive.assign(n, PowerSeries::zero(std::max(order - 1, 0)));
    sol.germ = germ;
    for (int i = 0; i < n; ++i) sol.voltage[i].coeffs[0] = germ[i];

    // W_i = 1/V_i maintained incrementally
    std::vector<std::vector<Complex>> W(n);
    for (int i = 0; i < n; ++i) W[i].assign(order + 1, Complex{0.0});
    for (int i = 0; i < n; ++i) W[i][0] = 1.0 / germ[i];

    Eigen::VectorXd rhs(dim);
    for (int ord = 1; ord <= order; ++ord) {
        rhs.setZero();
        for (int r = 0; r < nu; ++r) {
            const int i = unknown[r];
            Complex b;
            if (pvslot[i] < 0) {
                const Complex s_conj = Complex(net.buses[i].p_inject, -net.buses[i].q_inject);
                b = s_conj * std::conj(W[i][ord - 1]);
            } else {
                b = net.buses[i].p_inject * std::conj(W[i][ord - 1]);
                for (int m = 0; m + 1 < ord; ++m)
                    b += Complex(0.0, 1.0) * sol.reactive[i].coeffs[m] * std::conj(W[i][ord - 1 - m]);
            }
            rhs(2 * r) = b.real();
            rhs(2 * r + 1) = b.imag();
        }
        for (int s = 0; s < np; ++s) {
            const int i = pv[s];
            Complex acc{0.0};
            for (int j = 1; j <= ord - 1; ++j)
                acc += sol.voltage[i].coeffs[j] * std::conj(sol.voltage[i].coeffs[ord - j]);
            rhs(2 * nu + s) = -acc.real();
        }
        Eigen::VectorXd xsol = lu.solve(rhs);
        for (int r = 0; r < nu; ++r) sol.voltage[unknown[r]].coeffs[ord] = Complex(xsol(2 * r), xsol(2 * r + 1));
        for (int s = 0; s < np; ++s) sol.reactive[pv[s]].coeffs[ord - 1] = xsol(2 * nu + s);
        for (int i = 0; i < n; ++i) {
            Complex acc{0.0};
            for (int j = 1; j <= ord; ++j) acc += sol.voltage[i].coeffs[j] * W[i][ord - j];
            W[i][ord] = -acc / germ[i];
        }
    }
    return sol;
}

std::vector<Complex> evaluate_solution(const EmbeddedSolution& sol, Complex alpha) {
    std::vector<Complex> out(sol.voltage.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = sol.voltage[i].eval(alpha);
    return out;
}

std::vector<Complex> newton_reference(const NetworkCase& net, double alpha) {
    validate_case(net);
    if (alpha < 0.0) throw std::invalid_argument("newton_reference: alpha must be >= 0");

    const int n = static_cast<int>(net.buses.size());
    const int slack = net.slack_index();
    const AdmittanceMatrix Ym = build_ybus(net);

    // germ start (high-voltage branch)
    EmbeddedSolution g;
    {
        // reuse the germ path of hem_series without building the recursion
        NetworkCase probe = net;
        g = hem_series(probe, 1);
    }
    std::vector<double> vm(n), va(n);
    for (int i = 0; i < n; ++i) {
        vm[i] = std::abs(g.germ[i]);
        va[i] = std::arg(g.germ[i]);
    }
    for (int i = 0; i < n; ++i)
        if (net.buses[i].kind == BusKind::pv) vm[i] = net.buses[i].v_setpoint;
    vm[slack] = net.buses[slack].v_setpoint;

    std::vector<int> ang_idx, mag_idx;
    for (int i = 0; i < n; ++i) {
        if (i != slack) ang_idx.push_back(i);
        if (net.buses[i].kind == BusKind::pq) mag_idx.push_back(i);
    }
    const int na = static_cast<int>(ang_idx.size());
    const int nm = static_cast<int>(mag_idx.size());
    const int dim = na + nm;
    if (dim == 0) return {Complex(vm[slack], 0.0) * Complex(std::cos(va[slack]), std::sin(va[slack]))};

    auto calc_pq = [&](std::vector<double>& P, std::vector<double>& Q) {
        for (int i = 0; i < n; ++i) {
            double pi = 0.0, qi = 0.0;
            for (int k = 0; k < n; ++k) {
                const Complex y = Ym.at(i, k);
                const double th = va[i] - va[k];
                const double ct = std::cos(th), st = std::sin(th);
                pi += vm[i] * vm[k] * (y.real() * ct + y.imag() * st);
                qi += vm[i] * vm[k] * (y.real() * st - y.imag() * ct);
            }
            P[i] = pi;
            Q[i] = qi;
        }
    };

    std::vector<double> P(n), Q(n);
    Eigen::MatrixXd J(dim, dim);
    Eigen::VectorXd f(dim);
    const int max_iter = 60;
    for (int iter = 0; iter <= max_iter; ++iter) {
        calc_pq(P, Q);
        double norm = 0.0;
        for (int r = 0; r < na; ++r) {
            const int i = ang_idx[r];
            f(r) = P[i] - alpha * net.buses[i].p_inject;
            norm = std::max(norm, std::abs(f(r)));
        }
        for (int r = 0; r < nm; ++r) {
            const int i = mag_idx[r];
            f(na + r) = Q[i] - alpha * net.buses[i].q_inject;
            norm = std::max(norm, std::abs(f(na + r)));
        }
        if (norm <= 1e-12) {
            std::vector<Complex> out(n);
            for (int i = 0; i < n; ++i) out[i] = vm[i] * Complex(std::cos(va[i]), std::sin(va[i]));
            return out;
        }
        if (iter == max_iter || !std::isfinite(norm) || norm > 1e8)
            throw Error(Errc::newton_diverged, "newton_reference diverged at alpha = " + std::to_string(alpha));

        // polar Jacobian
        for (int r = 0; r < na; ++r) {
            const int i = ang_idx[r];
            for (int c = 0; c < na; ++c) {
                const int k = ang_idx[c];
                const Complex y = Ym.at(i, k);
                const double th = va[i] - va[k];
                if (i == k) {
                    J(r, c) = -Q[i] - y.imag() * vm[i] * vm[i];
                } else {
                    J(r, c) = vm[i] * vm[k] * (y.real() * std::sin(th) - y.imag() * std::cos(th));
                }
            }
            for (int c = 0; c < nm; ++c) {
                const int k = mag_idx[c];
                const Complex y = Ym.at(i, k);
                const double th = va[i] - va[k];
                if (i == k) {
                    J(r, na + c) = P[i] / vm[i] + y.real() * vm[i];
                } else {
                    J(r, na + c) = vm[i] * (y.real() * std::cos(th) + y.imag() * std::sin(th));
                }
            }
        }
        for (int r = 0; r < nm; ++r) {
            const int i = mag_idx[r];
            for (int c = 0; c < na; ++c) {
                const int k = ang_idx[c];
                const Complex y = Ym.at(i, k);
                const double th = va[i] - va[k];
                if (i == k) {
                    J(na + r, c) = P[i] - y.real() * vm[i] * vm[i];
                } else {
                    J(na + r, c) = -vm[i] * vm[k] * (y.real() * std::cos(th) + y.imag() * std::sin(th));
                }
            }
            for (int c = 0; c < nm; ++c) {
                const int k = mag_idx[c];
                const Complex y = Ym.at(i, k);
                const double th = va[i] - va[k];
                if (i == k) {
                    J(na + r, na + c) = Q[i] / vm[i] - y.imag() * vm[i];
                } else {
                    J(na + r, na + c) = vm[i] * (y.real() * std::sin(th) - y.imag() * std::cos(th));
                }
            }
        }
        Eigen::PartialPivLU<Eigen::MatrixXd> lu(J);
        if (lu.rcond() < 1e-14)
            throw Error(Errc::singular_jacobian, "newton_reference: singular Jacobian at alpha = " + std::to_string(alpha));
        Eigen::VectorXd dx = lu.solve(f);
        for (int r = 0; r < na; ++r) va[ang_idx[r]] -= dx(r);
        for (int r = 0; r < nm; ++r) vm[mag_idx[r]] -= dx(na + r);
    }
    throw Error(Errc::newton_diverged, "newton_reference: unreachable");
}

NetworkCase calibrate_two_bus(double bp_neg, double bp_pos) {
    if (!(bp_neg < 0.0 && 0.0 < bp_pos))
        throw Error(Errc::infeasible, "calibrate_two_bus: need bp_neg < 0 < bp_pos");
    // V satisfies V^2 - (1 + j t a) V - a ((t^2 (A+B) - 2 j t)/4) = 0 with
    // t^2 = -1/(A B); discriminant = -t^2 (a - A)(a - B). Load sign picked so
    // the real-power injection is a load.
    const double t = -std::sqrt(-1.0 / (bp_neg * bp_pos));
    const Complex y{0.0, -1.0};  // one line, x = 1.0 pu
    const Complex S = std::conj(y) * (t * t * (bp_neg + bp_pos) - Complex(0.0, 2.0 * t)) / 4.0;

    NetworkCase net;
    net.base_power = 100.0;
    net.buses.push_back(Bus{1, BusKind::slack, 0.0, 0.0, 1.0, 0.0, 0.0});
    net.buses.push_back(Bus{2, BusKind::pq, S.real(), S.imag(), 1.0, 0.0, 0.0});
    net.branches.push_back(Branch{1, 2, 0.0, 1.0, 0.0, 1.0});

    const auto [a, b] = two_bus_branch_points(net);
    if (std::abs(a - Complex(bp_neg, 0.0)) > 1e-9 || std::abs(b - Complex(bp_pos, 0.0)) > 1e-9)
        throw Error(Errc::infeasible, "calibrate_two_bus: discriminant zeros missed the targets");
    return net;
}

namespace {

struct TwoBusQuadratic {
    Complex beta;  // coefficient of alpha in the linear term
    Complex gamma; // c2' = S / conj(y)
};

TwoBusQuadratic two_bus_quadratic(const NetworkCase& net) {
    if (net.buses.size() != 2 || net.branches.size() != 1)
        throw std::invalid_argument("two_bus_closed_form: need a two-bus single-line case");
    const int slack = net.slack_index();
    const int load = 1 - slack;
    if (net.buses[load].kind != BusKind::pq)
        throw std::invalid_argument("two_bus_closed_form: load bus must be pq");
    if (std::abs(net.buses[slack].v_setpoint - 1.0) > 0.0 || net.branches[0].tap != 1.0 ||
        net.buses[load].shunt_g != 0.0 || net.buses[load].shunt_b != 0.0)
        throw std::invalid_argument("two_bus_closed_form: calibrated form requires slack v=1, tap=1, no shunts");
    const Complex y = 1.0 / Complex(net.branches[0].r, net.branches[0].x);
    const Complex S{net.buses[load].p_inject, net.buses[load].q_inject};
    return {std::conj(S) / y - S / std::conj(y), S / std::conj(y)};
}

}  // namespace

std::pair<Complex, Complex> two_bus_branch_points(const NetworkCase& net) {
    const auto [beta, gamma] = two_bus_quadratic(net);
    // D(a) = beta^2 a^2 + (2 beta + 4 gamma) a + 1
    const Complex qa = beta * beta;
    const Complex qb = 2.0 * beta + 4.0 * gamma;
    const Complex qc{1.0};
    const Complex disc = std::sqrt(qb * qb - 4.0 * qa * qc);
    Complex r1 = (-qb - disc) / (2.0 * qa);
    Complex r2 = (-qb + disc) / (2.0 * qa);
    if (r1.real() > r2.real()) std::swap(r1, r2);
    return {r1, r2};
}

Complex two_bus_closed_form(const NetworkCase& net, Complex alpha) {
    const auto [beta, gamma] = two_bus_quadratic(net);
    const Complex lin = 1.0 + beta * alpha;
    const Complex D = lin * lin + 4.0 * alpha * gamma;
    // the principal sqrt branch cut is exactly the BC image: D real negative
    if (std::abs(D.imag()) <= 1e-14 * std::abs(D) && D.real() <= 0.0)
        throw Error(Errc::on_branch_cut, "two_bus_closed_form: alpha lies on the branch cut");
    return (lin + std::sqrt(D)) / 2.0;
}

}  // namespace hemlab::hem
