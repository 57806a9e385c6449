#include "hemlab/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace hemlab::diag {

double cf_estimate(const std::vector<std::pair<int, double>>& samples, double noise_floor) {
    std::vector<std::pair<int, double>> usable;
    for (const auto& [m, e] : samples)
        if (e > noise_floor && std::isfinite(e)) usable.emplace_back(m, e);
    std::sort(usable.begin(), usable.end());
    if (usable.size() >= 4) usable.erase(usable.begin());  // transient
    if (usable.size() < 3)
        throw Error(Errc::insufficient_decay, "cf_estimate: fewer than 3 samples above the noise floor");

    // least squares of ln(e) on M
    const std::size_t n = usable.size();
    double sm = 0.0, se = 0.0, smm = 0.0, sme = 0.0;
    for (const auto& [m, e] : usable) {
        const double le = std::log(e);
        sm += m;
        se += le;
        smm += double(m) * m;
        sme += m * le;
    }
    const double slope = (n * sme - sm * se) / (n * smm - sm * sm);
    if (!(slope < 0.0))
        throw Error(Errc::insufficient_decay, "cf_estimate: errors are not decreasing");
    return std::min(std::exp(slope / 2.0), 1.0);
}

std::vector<ConvergenceProfile> cf_curve(const hem::NetworkCase& net, int bus_id, const std::vector<double>& alphas,
                                         const std::vector<int>& m_list) {
    const int bus = net.bus_index(bus_id);
    if (bus < 0) throw std::invalid_argument("cf_curve: unknown bus id");
    int max_m = 0;
    for (int m : m_list) max_m = std::max(max_m, m);
    const int order = std::max(2 * max_m, 50);

    const hem::EmbeddedSolution sol = hem::hem_series(net, order);
    std::vector<std::pair<int, pade::PadeApproximant>> pas;
    for (int m : m_list) pas.emplace_back(m, pade::build_pade(sol.voltage[bus], m, m));

    const bool closed_form_available = [&] {
        try {
            (void)hem::two_bus_closed_form(net, Complex{0.0});
            return true;
        } catch (const std::exception&) {
            return false;
        }
    }();

    std::vector<ConvergenceProfile> profiles;
    for (double a : alphas) {
        ConvergenceProfile prof;
        prof.alpha = Complex{a};
        try {
            Complex ref;
            if (closed_form_available) {
                ref = hem::two_bus_closed_form(net, Complex{a});
            } else {
                ref = hem::newton_reference(net, a)[bus];
            }
            for (const auto& [m, pa] : pas) prof.samples.emplace_back(m, std::abs(ref - pade::eval_pade(pa, Complex{a})));
            prof.fit_window = {m_list.front(), m_list.back()};
            prof.cf_hat = cf_estimate(prof.samples, default_noise_floor(std::abs(ref)));
        } catch (const Error&) {
            prof.cf_hat.reset();  // unset profile, run continues
        }
        profiles.push_back(std::move(prof));
    }
    return profiles;
}

double slope_at_origin(const std::vector<ConvergenceProfile>& profiles, double alpha_max) {
    double s_aa = 0.0, s_ab = 0.0, s_bb = 0.0, s_ay = 0.0, s_by = 0.0;
    int used = 0;
    for (const auto& p : profiles) {
        if (!p.cf_hat) continue;
        const double a = std::abs(p.alpha);
        if (a > alpha_max || a == 0.0) continue;
        const double a2 = a * a;
        s_aa += a * a;
        s_ab += a * a2;
        s_bb += a2 * a2;
        s_ay += a * *p.cf_hat;
        s_by += a2 * *p.cf_hat;
        ++used;
    }
    if (used < 3) throw Error(Errc::insufficient_profiles, "slope_at_origin: fewer than 3 usable profiles");
    const double det = s_aa * s_bb - s_ab * s_ab;
    if (std::abs(det) < 1e-300) throw Error(Errc::insufficient_profiles, "slope_at_origin: degenerate alpha grid");
    return (s_ay * s_bb - s_by * s_ab) / det;
}

namespace {

const std::vector<Complex>* select_inv(const RootSet& rs, RootSelection which, std::vector<Complex>& joined) {
    switch (which) {
        case RootSelection::poles:
            return &rs.poles_inv;
        case RootSelection::zeros:
            return &rs.zeros_inv;
        case RootSelection::both:
            joined = rs.poles_inv;
            joined.insert(joined.end(), rs.zeros_inv.begin(), rs.zeros_inv.end());
            return &joined;
    }
    return &joined;
}

}  // namespace

KsResult ks_distance_to_equilibrium(const RootSet& rs, RootSelection which, std::pair<double, double> segment,
                                    double band) {
    const auto [a, b] = segment;
    if (!(a < b)) throw std::invalid_argument("ks_distance_to_equilibrium: need a < b");
    std::vector<Complex> joined;
    const auto& roots = *select_inv(rs, which, joined);

    std::vector<double> xs;
    for (const Complex& r : roots)
        if (std::abs(r.imag()) <= band && r.real() >= a - band && r.real() <= b + band) xs.push_back(r.real());
    KsResult out;
    out.spurious = static_cast<int>(roots.size() - xs.size());
    out.used = static_cast<int>(xs.size());
    if (xs.empty()) throw Error(Errc::no_roots_in_band, "ks_distance_to_equilibrium: no roots in band");
    std::sort(xs.begin(), xs.end());
    const double n = static_cast<double>(xs.size());
    double ks = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double F = potential::segment_equilibrium_cdf(a, b, xs[i]);
        ks = std::max(ks, std::abs((i + 1) / n - F));
        ks = std::max(ks, std::abs(i / n - F));
    }
    out.distance = ks;
    return out;
}

ChargeConfiguration roots_as_charges(const RootSet& rs, RootSelection which, int* perturbed_count) {
    std::vector<Complex> joined;
    const auto& roots = *select_inv(rs, which, joined);
    if (roots.empty()) throw Error(Errc::empty_selection, "roots_as_charges: empty selection");

    ChargeConfiguration cfg;
    int perturbed = 0;
    for (const Complex& r : roots) {
        potential::Vec2 p{r.real(), r.imag()};
        bool moved = true;
        while (moved) {
            moved = false;
            for (const auto& q : cfg.points) {
                if (potential::norm(p - q) < 1e-14) {
                    p.x += 1e-12;
                    ++perturbed;
                    moved = true;
                }
            }
        }
        cfg.points.push_back(p);
    }
    cfg.weights.assign(cfg.points.size(), 1.0 / static_cast<double>(cfg.points.size()));
    if (perturbed_count) *perturbed_count = perturbed;
    return cfg;
}

double tangential_field_residual(const ChargeConfiguration& cfg, std::pair<double, double> segment, int n_probes,
                                 double trim) {
    const auto [a, b] = segment;
    if (!(a < b)) throw std::invalid_argument("tangential_field_residual: need a < b");
    if (n_probes < 3) throw std::invalid_argument("tangential_field_residual: need n_probes >= 3");
    if (!(trim > 0.0 && trim < 0.5)) throw std::invalid_argument("tangential_field_residual: need 0 < trim < 0.5");

    const double L = b - a;
    const double h = std::max(1e-6, 0.75 * L / static_cast<double>(cfg.points.size()));
    const double lo = a + trim * L;
    const double hi = b - trim * L;
    double worst = 0.0;
    for (int k = 0; k < n_probes; ++k) {
        const potential::Vec2 probe{lo + (hi - lo) * k / (n_probes - 1), h};
        double dmin = std::numeric_limits<double>::infinity();
        for (const auto& p : cfg.points) dmin = std::min(dmin, potential::norm(probe - p));
        if (dmin < 1e-6) continue;
        const potential::Vec2 E = potential::field_at(cfg, probe);
        worst = std::max(worst, std::abs(E.x));
    }
    return worst;
}

double symmetry_metric(const RootSet& rs, RootSelection which, double center, double half_length) {
    std::vector<Complex> joined;
    const auto& roots = *select_inv(rs, which, joined);
    if (roots.empty()) throw Error(Errc::empty_selection, "symmetry_metric: empty selection");
    if (!(half_length > 0.0)) throw std::invalid_argument("symmetry_metric: half_length must be > 0");
    const double half = half_length;

    std::vector<Complex> reflected;
    for (const Complex& r : roots) reflected.emplace_back(2.0 * center - r.real(), r.imag());

    // greedy matching in deterministic order
    std::vector<bool> taken(roots.size(), false);
    double total = 0.0;
    for (const Complex& r : reflected) {
        double best = std::numeric_limits<double>::infinity();
        int arg = -1;
        for (std::size_t j = 0; j < roots.size(); ++j) {
            if (taken[j]) continue;
            const double d = std::abs(r - roots[j]);
            if (d < best) {
                best = d;
                arg = static_cast<int>(j);
            }
        }
        taken[arg] = true;
        total += best;
    }
    return total / static_cast<double>(roots.size()) / half;
}

PairingReport pole_zero_pairing(const RootSet& rs, double radius) {
    PairingReport report;
    std::vector<Complex> poles = rs.poles_alpha;
    std::sort(poles.begin(), poles.end(), [](const Complex& a, const Complex& b) {
        if (std::abs(a) != std::abs(b)) return std::abs(a) < std::abs(b);
        if (a.real() != b.real()) return a.real() < b.real();
        return a.imag() < b.imag();
    });
    std::vector<bool> taken(rs.zeros_alpha.size(), false);
    for (const Complex& p : poles) {
        double best = radius;
        int arg = -1;
        for (std::size_t j = 0; j < rs.zeros_alpha.size(); ++j) {
            if (taken[j]) continue;
            const double d = std::abs(p - rs.zeros_alpha[j]);
            if (d <= best) {
                best = d;
                arg = static_cast<int>(j);
            }
        }
        if (arg >= 0) {
            taken[arg] = true;
            report.pairs.emplace_back(p, rs.zeros_alpha[arg]);
        } else {
            ++report.unpaired_poles;
        }
    }
    for (bool t : taken)
        if (!t) ++report.unpaired_zeros;
    return report;
}

}  // namespace hemlab::diag
