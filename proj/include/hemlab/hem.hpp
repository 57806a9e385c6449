#pragma once

#include <string>
#include <vector>

#include "hemlab/algebra.hpp"

namespace hemlab::hem {

using algebra::Complex;
using algebra::PowerSeries;

enum class BusKind { slack, pq, pv };

struct Bus {
    int id = 0;
    BusKind kind = BusKind::pq;
    double p_inject = 0.0;   // pu
    double q_inject = 0.0;   // pu, ignored for pv buses
    double v_setpoint = 1.0; // pu, slack/pv only
    double shunt_g = 0.0;    // pu
    double shunt_b = 0.0;    // pu
};

struct Branch {
    int from = 0;
    int to = 0;
    double r = 0.0;
    double x = 0.0;
    double charging_b = 0.0;
    double tap = 1.0;
};

struct NetworkCase {
    double base_power = 100.0;  // MVA
    std::vector<Bus> buses;
    std::vector<Branch> branches;

    int bus_index(int id) const;  // -1 if absent
    int slack_index() const;
};

/// Checks the NetworkCase invariants: exactly one slack, resolvable branch
/// endpoints, connectivity, r^2 + x^2 > 0. Throws Errc::semantic_error.
void validate_case(const NetworkCase& net);

struct AdmittanceMatrix {
    int n = 0;
    std::vector<Complex> entries;  // dense row-major n*n

    Complex& at(int i, int k) { return entries[static_cast<std::size_t>(i) * n + k]; }
    const Complex& at(int i, int k) const { return entries[static_cast<std::size_t>(i) * n + k]; }
};

/// Standard bus-admittance assembly in case bus order.
AdmittanceMatrix build_ybus(const NetworkCase& net);

struct EmbeddedSolution {
    std::vector<PowerSeries> voltage;   // per bus, shared truncation order
    std::vector<PowerSeries> reactive;  // per bus; meaningful (order-1 shorter) for pv buses only
    std::vector<Complex> germ;          // order-0 coefficients
    int order = 0;
    bool order_overflow_warning = false;  // order past the double-precision ceiling
};

/// Maclaurin coefficients of the embedded power flow, classical form:
/// pq bus i:   sum_k Y_ik V_k(a) = a * conj(S_i) * W_i*(a),  W_i = 1/V_i
/// slack:      V(a) = v_setpoint
/// pv bus i:   same balance with S_i = p_i - j Q_i(a), plus the magnitude
///             constraint [V_i V_i*](n) = 0 for every order n >= 1.
/// The germ is the zero-injection solve at a = 0; pv setpoints must agree
/// with the germ magnitude (this embedding keeps |V_i(a)| constant).
EmbeddedSolution hem_series(const NetworkCase& net, int order);

/// Horner partial sums of every bus series.
std::vector<Complex> evaluate_solution(const EmbeddedSolution& sol, Complex alpha);

/// Full Newton-Raphson power flow with all injections scaled by alpha,
/// started from the germ. Mismatch infinity-norm <= 1e-12 on success.
std::vector<Complex> newton_reference(const NetworkCase& net, double alpha);

/// Two-bus case (slack v=1, one line, one complex load) whose V_2(alpha) has
/// branch points exactly at bp_neg and bp_pos in the alpha plane.
NetworkCase calibrate_two_bus(double bp_neg, double bp_pos);

/// Exact V_2(alpha) of a two-bus pq case from the embedded quadratic,
/// principal branch with V(0) = 1. Throws Errc::on_branch_cut on the cut.
Complex two_bus_closed_form(const NetworkCase& net, Complex alpha);

/// Branch points of the two-bus closed form (discriminant zeros), ordered.
std::pair<Complex, Complex> two_bus_branch_points(const NetworkCase& net);

}  // namespace hemlab::hem
