#include "hemlab/cli.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <fstream>
#include <iostream>

#include "hemlab/diagnostics.hpp"
#include "hemlab/io.hpp"

namespace hemlab::cli {

namespace {

using algebra::Complex;

struct CaseOptions {
    std::string fixture;
    std::string case_path;
    double scale = 1.0;
    int bus_id = -1;
};

void add_case_options(CLI::App* cmd, CaseOptions& opt) {
    auto* fx = cmd->add_option("--fixture", opt.fixture, "Built-in fixture name (twobus-asym)");
    auto* cs = cmd->add_option("--case", opt.case_path, "Path to a native JSON or MATPOWER case file");
    fx->excludes(cs);
    cmd->add_option("--scale", opt.scale, "Scale all P/Q injections by this factor")->capture_default_str();
    cmd->add_option("--bus", opt.bus_id, "Bus id to analyze (default: first non-slack bus)");
}

hem::NetworkCase load_case(const CaseOptions& opt) {
    hem::NetworkCase net;
    if (!opt.fixture.empty()) {
        if (opt.fixture != "twobus-asym")
            throw CLI::ValidationError("--fixture", "unknown fixture '" + opt.fixture + "'");
        net = hem::calibrate_two_bus(-1.0 / 3.0, 1.0);
    } else if (!opt.case_path.empty()) {
        std::ifstream in(opt.case_path, std::ios::binary);
        if (!in) throw Error(Errc::io_error, "cannot open case file: " + opt.case_path);
        std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
        const bool looks_matpower = text.find("baseMVA") != std::string::npos;
        net = looks_matpower ? io::parse_matpower(text) : io::parse_case_native(text);
    } else {
        throw CLI::ValidationError("case", "one of --fixture or --case is required");
    }
    if (opt.scale != 1.0) {
        for (auto& b : net.buses) {
            b.p_inject *= opt.scale;
            b.q_inject *= opt.scale;
        }
    }
    return net;
}

int pick_bus(const hem::NetworkCase& net, int requested) {
    if (requested >= 0) {
        if (net.bus_index(requested) < 0) throw Error(Errc::semantic_error, "unknown bus id");
        return requested;
    }
    for (const auto& b : net.buses)
        if (b.kind != hem::BusKind::slack) return b.id;
    return net.buses.front().id;
}

void require_light(bool allow_heavy, int m, int n_points, int order) {
    if (allow_heavy) return;
    if (m > 60 || order > 120)
        throw CLI::ValidationError("--M", "orders beyond [60/60] exhaust double precision; pass --allow-heavy");
    if (n_points > 256)
        throw CLI::ValidationError("--N", "N > 256 is slow; pass --allow-heavy to proceed");
}

std::vector<int> int_range(int lo, int hi) {
    std::vector<int> v;
    for (int m = lo; m <= hi; ++m) v.push_back(m);
    return v;
}

double positive_branch_point(const hem::NetworkCase& net) {
    try {
        return hem::two_bus_branch_points(net).second.real();
    } catch (const std::exception&) {
        return 1.0;  // general case: caller supplies --alpha-max when it matters
    }
}

}  // namespace

int run(const std::vector<std::string>& args) {
    CLI::App app{"HEM power-flow series, Pade root distributions, and electrostatic equilibrium diagnostics"};
    app.require_subcommand(1);
    bool allow_heavy = false;
    app.add_flag("--allow-heavy", allow_heavy, "Permit M > 60 / N > 256 despite the double-precision ceiling");

    // --- series ---
    auto* c_series = app.add_subcommand("series", "Emit Maclaurin coefficients of the embedded voltages");
    CaseOptions o_series;
    add_case_options(c_series, o_series);
    int series_order = 50;
    std::string series_out = "series.csv";
    c_series->add_option("--order", series_order, "Truncation order")->capture_default_str();
    c_series->add_option("--out", series_out, "Output CSV path")->capture_default_str();

    // --- pade ---
    auto* c_pade = app.add_subcommand("pade", "Build an [L/M] Pade approximant and emit its coefficients");
    CaseOptions o_pade;
    add_case_options(c_pade, o_pade);
    int pade_m = 10, pade_l = -1, pade_order = -1;
    std::string pade_out = "pade.csv";
    c_pade->add_option("--M", pade_m, "Denominator degree")->capture_default_str();
    c_pade->add_option("--L", pade_l, "Numerator degree (default M)");
    c_pade->add_option("--order", pade_order, "Series order (default max(L+M, 50))");
    c_pade->add_option("--out", pade_out, "Output CSV path")->capture_default_str();

    // --- roots ---
    auto* c_roots = app.add_subcommand("roots", "Emit pole/zero sets as CSV and SVG in both planes");
    CaseOptions o_roots;
    add_case_options(c_roots, o_roots);
    int roots_m = 10, roots_order = -1;
    double root_tol = 1e-8;
    std::string roots_csv = "roots.csv", svg_alpha = "roots_alpha.svg", svg_inv = "roots_inv.svg";
    c_roots->add_option("--M", roots_m, "Diagonal order of the [M/M] approximant")->capture_default_str();
    c_roots->add_option("--order", roots_order, "Series order (default max(2M, 50))");
    c_roots->add_option("--root-tol", root_tol, "Root residual tolerance")->capture_default_str();
    c_roots->add_option("--out-csv", roots_csv, "Roots CSV path")->capture_default_str();
    c_roots->add_option("--svg-alpha", svg_alpha, "Alpha-plane SVG path")->capture_default_str();
    c_roots->add_option("--svg-inv", svg_inv, "Inverse-plane SVG path")->capture_default_str();

    // --- cf ---
    auto* c_cf = app.add_subcommand("cf", "Convergence-factor profiles over an alpha grid");
    CaseOptions o_cf;
    add_case_options(c_cf, o_cf);
    std::vector<double> cf_alphas;
    int cf_mlo = 3, cf_mhi = 12;
    std::string cf_out = "cf.csv";
    c_cf->add_option("--alphas", cf_alphas, "Alpha grid (default 0.05..0.5 step 0.05)");
    c_cf->add_option("--M-lo", cf_mlo, "Smallest M")->capture_default_str();
    c_cf->add_option("--M-hi", cf_mhi, "Largest M")->capture_default_str();
    c_cf->add_option("--out", cf_out, "Output CSV path")->capture_default_str();

    // --- slope ---
    auto* c_slope = app.add_subcommand("slope", "Empirical branch-cut capacity from the CF origin slope");
    CaseOptions o_slope;
    add_case_options(c_slope, o_slope);
    std::vector<double> slope_alphas;
    int slope_mlo = 3, slope_mhi = 12;
    double alpha_max_frac = 0.3;
    c_slope->add_option("--alphas", slope_alphas, "Alpha grid (default 0.03 0.05 0.08 0.1 0.15 0.2)");
    c_slope->add_option("--M-lo", slope_mlo, "Smallest M")->capture_default_str();
    c_slope->add_option("--M-hi", slope_mhi, "Largest M")->capture_default_str();
    c_slope->add_option("--alpha-max-frac", alpha_max_frac, "Usable-alpha cap as a fraction of the positive branch point")
        ->capture_default_str();

    // --- fekete ---
    auto* c_fekete = app.add_subcommand("fekete", "Equilibrium (Fekete) configuration on a segment");
    std::vector<double> fek_seg{-1.0, 1.0};
    int fek_n = 32, fek_iters = 400;
    std::string fek_out;
    c_fekete->add_option("--segment", fek_seg, "Segment endpoints a b")->expected(2)->capture_default_str();
    c_fekete->add_option("--N", fek_n, "Number of charges")->capture_default_str();
    c_fekete->add_option("--max-iter", fek_iters, "Maximum optimizer sweeps")->capture_default_str();
    c_fekete->add_option("--out", fek_out, "Optional CSV of charge positions (i,x,y,w)");

    // --- capacity ---
    auto* c_cap = app.add_subcommand("capacity", "Capacity estimates from Fekete configurations");
    std::vector<double> cap_seg{-1.0, 1.0};
    std::vector<int> cap_ns;
    int cap_n = 64;
    std::string cap_out;
    c_cap->add_option("--segment", cap_seg, "Segment endpoints a b")->expected(2)->capture_default_str();
    c_cap->add_option("--N", cap_n, "Number of charges")->capture_default_str();
    c_cap->add_option("--N-list", cap_ns, "Several N values (overrides --N)");
    c_cap->add_option("--out", cap_out, "Optional capacity CSV path");

    // --- field ---
    auto* c_field = app.add_subcommand("field", "Tangential-field residual of roots-as-charges on the BC");
    CaseOptions o_field;
    add_case_options(c_field, o_field);
    int field_m = 20, field_probes = 64;
    double field_trim = 0.1;
    c_field->add_option("--M", field_m, "Diagonal order")->capture_default_str();
    c_field->add_option("--probes", field_probes, "Probe count")->capture_default_str();
    c_field->add_option("--trim", field_trim, "End fraction excluded per side")->capture_default_str();

    // --- diagnose ---
    auto* c_diag = app.add_subcommand("diagnose", "One-shot summary: BCC, KS trend, pairing, symmetry");
    CaseOptions o_diag;
    add_case_options(c_diag, o_diag);
    int diag_mmax = 20;
    double diag_band = -1.0;
    c_diag->add_option("--M-max", diag_mmax, "Largest diagonal order")->capture_default_str();
    c_diag->add_option("--band", diag_band, "Root-selection band (default 0.1 x BC half-length)");

    try {
        std::vector<std::string> rev(args.rbegin(), args.rend());
        app.parse(rev);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }

    try {
        if (*c_series) {
            const auto net = load_case(o_series);
            require_light(allow_heavy, 0, 0, series_order);
            const auto sol = hem::hem_series(net, series_order);
            std::ofstream out(series_out, std::ios::binary);
            if (!out) throw Error(Errc::io_error, "cannot open " + series_out);
            out << "bus,k,re,im\n";
            for (std::size_t i = 0; i < sol.voltage.size(); ++i)
                for (int k = 0; k <= sol.order; ++k) {
                    const Complex c = sol.voltage[i].coeffs[k];
                    out << net.buses[i].id << ',' << k << ',' << c.real() << ',' << c.imag() << '\n';
                }
            std::cout << "wrote " << series_out << " (order " << series_order << ", " << net.buses.size()
                      << " buses)\n";
            if (sol.order_overflow_warning)
                std::cerr << "warning: order beyond the double-precision ceiling; coefficients are noisy\n";
        } else if (*c_pade) {
            const auto net = load_case(o_pade);
            const int L = pade_l < 0 ? pade_m : pade_l;
            const int order = pade_order < 0 ? std::max(L + pade_m, 50) : pade_order;
            require_light(allow_heavy, pade_m, 0, order);
            const int bus = net.bus_index(pick_bus(net, o_pade.bus_id));
            const auto sol = hem::hem_series(net, order);
            const auto pa = pade::build_pade(sol.voltage[bus], L, pade_m);
            std::ofstream out(pade_out, std::ios::binary);
            if (!out) throw Error(Errc::io_error, "cannot open " + pade_out);
            out << "part,k,re,im\n";
            for (std::size_t k = 0; k < pa.numerator.coeffs.size(); ++k)
                out << "num," << k << ',' << pa.numerator.coeffs[k].real() << ',' << pa.numerator.coeffs[k].imag()
                    << '\n';
            for (std::size_t k = 0; k < pa.denominator.coeffs.size(); ++k)
                out << "den," << k << ',' << pa.denominator.coeffs[k].real() << ',' << pa.denominator.coeffs[k].imag()
                    << '\n';
            std::cout << "[" << L << "/" << pade_m << "] built; condition estimate " << pa.condition_estimate
                      << (pa.degenerate_warning ? " (degenerate-block warning)" : "") << "; wrote " << pade_out
                      << '\n';
        } else if (*c_roots) {
            const auto net = load_case(o_roots);
            const int order = roots_order < 0 ? std::max(2 * roots_m, 50) : roots_order;
            require_light(allow_heavy, roots_m, 0, order);
            const int bus = net.bus_index(pick_bus(net, o_roots.bus_id));
            const auto sol = hem::hem_series(net, order);
            const auto pa = pade::build_pade(sol.voltage[bus], roots_m, roots_m);
            const auto rs = pade::pole_zero_sets(pa, root_tol);
            io::write_roots_csv(rs, roots_csv);
            io::PlotSpec alpha_spec{{-1.0, 1.5}, {-2.0, 2.0}, io::ScatterPlane::alpha,
                                    "[" + std::to_string(roots_m) + "/" + std::to_string(roots_m) + "] alpha plane"};
            io::PlotSpec inv_spec{{-3.2, 1.2}, {-1.2, 1.2}, io::ScatterPlane::inverse,
                                  "[" + std::to_string(roots_m) + "/" + std::to_string(roots_m) + "] inverse plane"};
            io::write_svg_scatter(rs, alpha_spec, svg_alpha);
            io::write_svg_scatter(rs, inv_spec, svg_inv);
            std::cout << "wrote " << roots_csv << ", " << svg_alpha << ", " << svg_inv << " (" << rs.poles_alpha.size()
                      << " poles, " << rs.zeros_alpha.size() << " zeros)\n";
        } else if (*c_cf) {
            const auto net = load_case(o_cf);
            if (cf_alphas.empty())
                for (int k = 1; k <= 10; ++k) cf_alphas.push_back(0.05 * k);
            require_light(allow_heavy, cf_mhi, 0, 2 * cf_mhi);
            const int bus = pick_bus(net, o_cf.bus_id);
            const auto profiles = diag::cf_curve(net, bus, cf_alphas, int_range(cf_mlo, cf_mhi));
            io::write_cf_csv(profiles, cf_out);
            for (const auto& p : profiles) {
                std::cout << "alpha " << p.alpha.real() << ": cf_hat ";
                if (p.cf_hat)
                    std::cout << *p.cf_hat << '\n';
                else
                    std::cout << "unset (errors at the noise floor)\n";
            }
            std::cout << "wrote " << cf_out << '\n';
        } else if (*c_slope) {
            const auto net = load_case(o_slope);
            if (slope_alphas.empty()) slope_alphas = {0.03, 0.05, 0.08, 0.1, 0.15, 0.2};
            require_light(allow_heavy, slope_mhi, 0, 2 * slope_mhi);
            const int bus = pick_bus(net, o_slope.bus_id);
            const auto profiles = diag::cf_curve(net, bus, slope_alphas, int_range(slope_mlo, slope_mhi));
            const double bcc = diag::slope_at_origin(profiles, alpha_max_frac * positive_branch_point(net));
            std::cout << "empirical BCC = " << bcc << '\n';
        } else if (*c_fekete) {
            require_light(allow_heavy, 0, fek_n, 0);
            const auto curve = potential::PlanarCurve::segment({fek_seg[0], 0.0}, {fek_seg[1], 0.0});
            const auto fr = potential::fekete_points(curve, fek_n, fek_iters);
            std::cout << "N = " << fek_n << ": energy " << fr.energy << ", capacity "
                      << potential::capacity_estimate(fr.config) << ", sweeps " << fr.sweeps << ", max gradient "
                      << fr.max_tangential_gradient << (fr.converged ? "" : " (stationarity not reached)") << '\n';
            if (!fek_out.empty()) {
                std::ofstream out(fek_out, std::ios::binary);
                if (!out) throw Error(Errc::io_error, "cannot open " + fek_out);
                out << "i,x,y,w\n";
                for (std::size_t i = 0; i < fr.config.points.size(); ++i)
                    out << i << ',' << fr.config.points[i].x << ',' << fr.config.points[i].y << ','
                        << fr.config.weights[i] << '\n';
            }
        } else if (*c_cap) {
            if (cap_ns.empty()) cap_ns.push_back(cap_n);
            std::vector<io::CapacityRow> rows;
            for (int n : cap_ns) {
                require_light(allow_heavy, 0, n, 0);
                const auto curve = potential::PlanarCurve::segment({cap_seg[0], 0.0}, {cap_seg[1], 0.0});
                const auto fr = potential::fekete_points(curve, n);
                rows.push_back({n, fr.energy, potential::capacity_estimate(fr.config)});
                std::cout << "N = " << n << ": energy " << fr.energy << ", cap_est " << rows.back().cap_est << '\n';
            }
            if (!cap_out.empty()) io::write_capacity_csv(rows, cap_out);
        } else if (*c_field) {
            const auto net = load_case(o_field);
            require_light(allow_heavy, field_m, 0, 2 * field_m);
            const int bus = net.bus_index(pick_bus(net, o_field.bus_id));
            const auto [bp_neg, bp_pos] = hem::two_bus_branch_points(net);
            const double za = 1.0 / bp_neg.real(), zb = 1.0 / bp_pos.real();
            const std::pair<double, double> seg{std::min(za, zb), std::max(za, zb)};
            const double band = 0.1 * (seg.second - seg.first) / 2.0;
            const auto sol = hem::hem_series(net, std::max(2 * field_m, 50));
            const auto pa = pade::build_pade(sol.voltage[bus], field_m, field_m);
            auto rs = pade::pole_zero_sets(pa);
            // keep the on-cut population; spurious quanta would swamp the probe field
            auto in_band = [&](const std::vector<Complex>& v) {
                std::vector<Complex> kept;
                for (const auto& z : v)
                    if (std::abs(z.imag()) <= band && z.real() >= seg.first - band && z.real() <= seg.second + band)
                        kept.push_back(z);
                return kept;
            };
            pade::RootSet filtered = rs;
            filtered.poles_inv = in_band(rs.poles_inv);
            filtered.zeros_inv = in_band(rs.zeros_inv);
            const auto cfg = diag::roots_as_charges(filtered, diag::RootSelection::both);
            const double res = diag::tangential_field_residual(cfg, seg, field_probes, field_trim);
            potential::ChargeConfiguration uniform;
            const int n = static_cast<int>(cfg.points.size());
            for (int k = 0; k < n; ++k)
                uniform.points.push_back({seg.first + (seg.second - seg.first) * k / (n - 1), 0.0});
            uniform.weights.assign(n, 1.0 / n);
            const double res_u = diag::tangential_field_residual(uniform, seg, field_probes, field_trim);
            std::cout << "tangential residual (roots, M = " << field_m << ", n = " << n << "): " << res << '\n';
            std::cout << "tangential residual (uniform, n = " << n << "): " << res_u << '\n';
        } else if (*c_diag) {
            const auto net = load_case(o_diag);
            require_light(allow_heavy, diag_mmax, 0, 2 * diag_mmax);
            const int bus_id = pick_bus(net, o_diag.bus_id);
            const int bus = net.bus_index(bus_id);
            const int m_hi = diag_mmax;
            const int m_lo = std::max(3, m_hi / 4);
            const auto sol = hem::hem_series(net, std::max(2 * m_hi, 50));
            const auto pa_lo = pade::build_pade(sol.voltage[bus], m_lo, m_lo);
            const auto pa_hi = pade::build_pade(sol.voltage[bus], m_hi, m_hi);
            const auto rs_lo = pade::pole_zero_sets(pa_lo);
            const auto rs_hi = pade::pole_zero_sets(pa_hi);

            // segment hull of the high-order in-band roots
            double band0 = diag_band > 0.0 ? diag_band : 0.2;
            std::vector<double> xs;
            for (const auto& z : rs_hi.poles_inv)
                if (std::abs(z.imag()) <= band0) xs.push_back(z.real());
            for (const auto& z : rs_hi.zeros_inv)
                if (std::abs(z.imag()) <= band0) xs.push_back(z.real());
            if (xs.size() < 2) throw Error(Errc::no_roots_in_band, "diagnose: no in-band roots to hull");
            const auto [mn, mx] = std::minmax_element(xs.begin(), xs.end());
            const std::pair<double, double> seg{*mn, *mx};
            const double band = diag_band > 0.0 ? diag_band : 0.1 * (seg.second - seg.first) / 2.0;

            std::cout << "root hull in the inverse plane: [" << seg.first << ", " << seg.second << "]\n";
            const auto fr = potential::fekete_points(potential::PlanarCurve::segment({seg.first, 0.0}, {seg.second, 0.0}), 64);
            const double hull_cap = potential::capacity_estimate(fr.config);
            std::cout << "Fekete capacity of the hull segment: " << hull_cap << '\n';

            std::vector<double> alphas{0.03, 0.05, 0.08, 0.1, 0.15, 0.2};
            const double bp = positive_branch_point(net);
            double bcc = std::nan("");
            try {
                const auto profiles = diag::cf_curve(net, bus_id, alphas, int_range(3, std::min(m_hi, 12)));
                bcc = diag::slope_at_origin(profiles, 0.3 * bp);
                std::cout << "empirical BCC = " << bcc << " (hull capacity ratio " << bcc / hull_cap << ")\n";
            } catch (const Error& e) {
                std::cout << "empirical BCC unavailable: " << e.what() << '\n';
            }

            const auto ks_lo = diag::ks_distance_to_equilibrium(rs_lo, diag::RootSelection::poles, seg, band);
            const auto ks_hi = diag::ks_distance_to_equilibrium(rs_hi, diag::RootSelection::poles, seg, band);
            std::cout << "KS to arcsine: M = " << m_lo << ": " << ks_lo.distance << " (" << ks_lo.spurious
                      << " spurious), M = " << m_hi << ": " << ks_hi.distance << " (" << ks_hi.spurious
                      << " spurious)\n";

            const auto pairing = diag::pole_zero_pairing(rs_hi, 0.1);
            std::cout << "pole/zero pairs within 0.1: " << pairing.pairs.size() << ", unpaired poles "
                      << pairing.unpaired_poles << ", unpaired zeros " << pairing.unpaired_zeros << '\n';

            const double center = (seg.first + seg.second) / 2.0;
            const double half_len = (seg.second - seg.first) / 2.0;
            std::cout << "symmetry metric about " << center << ": poles "
                      << diag::symmetry_metric(rs_hi, diag::RootSelection::poles, center, half_len) << ", zeros "
                      << diag::symmetry_metric(rs_hi, diag::RootSelection::zeros, center, half_len) << '\n';
            const double frac = [&] {
                int inb = 0, tot = 0;
                for (const auto& z : rs_hi.poles_inv) {
                    ++tot;
                    if (std::abs(z.imag()) <= band0) ++inb;
                }
                for (const auto& z : rs_hi.zeros_inv) {
                    ++tot;
                    if (std::abs(z.imag()) <= band0) ++inb;
                }
                return tot ? double(inb) / tot : 0.0;
            }();
            std::cout << "fraction of roots with |Im| <= " << band0 << " in the inverse plane: " << frac << '\n';
        }
        return 0;
    } catch (const CLI::Error& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return 1;
    } catch (const SyntaxError& e) {
        std::cerr << "parse error at line " << e.line << ", col " << e.col << ": " << e.what() << '\n';
        return 2;
    } catch (const Error& e) {
        switch (e.code()) {
            case Errc::syntax_error:
            case Errc::semantic_error:
            case Errc::unsupported_feature:
            case Errc::io_error:
                std::cerr << "input error: " << e.what() << '\n';
                return 2;
            default:
                std::cerr << "numerical failure: " << e.what() << '\n';
                return 3;
        }
    } catch (const std::invalid_argument& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    }
}

}  // namespace hemlab::cli
