#include "hemlab/potential.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>

namespace hemlab::potential {

namespace {

bool segments_intersect(Vec2 p1, Vec2 p2, Vec2 q1, Vec2 q2) {
    auto cross = [](Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; };
    const double d1 = cross(q2 - q1, p1 - q1);
    const double d2 = cross(q2 - q1, p2 - q1);
    const double d3 = cross(p2 - p1, q1 - p1);
    const double d4 = cross(p2 - p1, q2 - p1);
    return ((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0));
}

}  // namespace

PlanarCurve PlanarCurve::segment(Vec2 a, Vec2 b) { return from_polylines({{a, b}}); }

PlanarCurve PlanarCurve::from_polylines(const std::vector<std::vector<Vec2>>& polys) {
    PlanarCurve curve;
    for (const auto& poly : polys) {
        if (poly.size() < 2) throw Error(Errc::semantic_error, "polyline needs at least two points");
        Piece piece;
        piece.points = poly;
        piece.cumlen.assign(poly.size(), 0.0);
        for (std::size_t k = 1; k < poly.size(); ++k)
            piece.cumlen[k] = piece.cumlen[k - 1] + norm(poly[k] - poly[k - 1]);
        // simplicity: non-adjacent segments must not cross
        for (std::size_t i = 0; i + 1 < poly.size(); ++i)
            for (std::size_t j = i + 2; j + 1 < poly.size(); ++j)
                if (segments_intersect(poly[i], poly[i + 1], poly[j], poly[j + 1]))
                    throw Error(Errc::semantic_error, "polyline self-intersects");
        curve.total_length += piece.cumlen.back();
        curve.pieces.push_back(std::move(piece));
    }
    if (!(curve.total_length > 0.0)) throw Error(Errc::semantic_error, "curve has zero length");
    return curve;
}

Vec2 PlanarCurve::point_at(double s) const {
    s = std::clamp(s, 0.0, total_length);
    for (const auto& piece : pieces) {
        const double len = piece.cumlen.back();
        if (s <= len || &piece == &pieces.back()) {
            const double t = std::clamp(s, 0.0, len);
            auto it = std::upper_bound(piece.cumlen.begin(), piece.cumlen.end(), t);
            std::size_t k = std::min<std::size_t>(piece.cumlen.size() - 1,
                                                  static_cast<std::size_t>(it - piece.cumlen.begin()));
            if (k == 0) k = 1;
            const double seg = piece.cumlen[k] - piece.cumlen[k - 1];
            const double u = seg > 0.0 ? (t - piece.cumlen[k - 1]) / seg : 0.0;
            return piece.points[k - 1] + u * (piece.points[k] - piece.points[k - 1]);
        }
        s -= len;
    }
    return pieces.back().points.back();
}

Vec2 PlanarCurve::tangent_at(double s) const {
    s = std::clamp(s, 0.0, total_length);
    for (const auto& piece : pieces) {
        const double len = piece.cumlen.back();
        if (s <= len || &piece == &pieces.back()) {
            const double t = std::clamp(s, 0.0, len);
            auto it = std::upper_bound(piece.cumlen.begin(), piece.cumlen.end(), t);
            std::size_t k = std::min<std::size_t>(piece.cumlen.size() - 1,
                                                  static_cast<std::size_t>(it - piece.cumlen.begin()));
            if (k == 0) k = 1;
            Vec2 d = piece.points[k] - piece.points[k - 1];
            const double n = norm(d);
            return n > 0.0 ? (1.0 / n) * d : Vec2{1.0, 0.0};
        }
        s -= len;
    }
    return {1.0, 0.0};
}

void validate_configuration(const ChargeConfiguration& cfg) {
    if (cfg.points.size() != cfg.weights.size())
        throw Error(Errc::semantic_error, "configuration points/weights size mismatch");
    if (cfg.points.empty()) throw Error(Errc::semantic_error, "empty configuration");
    double sum = 0.0;
    for (double w : cfg.weights) {
        if (w < 0.0) throw Error(Errc::semantic_error, "negative charge weight");
        sum += w;
    }
    if (std::abs(sum - 1.0) > 1e-12) throw Error(Errc::semantic_error, "weights must sum to 1");
    for (std::size_t i = 0; i < cfg.points.size(); ++i)
        for (std::size_t j = i + 1; j < cfg.points.size(); ++j)
            if (norm(cfg.points[i] - cfg.points[j]) < 1e-14)
                throw Error(Errc::coincident_points, "coincident charge points");
}

double discrete_energy(const ChargeConfiguration& cfg) {
    const std::size_t n = cfg.points.size();
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const double d = norm(cfg.points[i] - cfg.points[j]);
            if (d < 1e-14) throw Error(Errc::coincident_points, "coincident charge points in energy sum");
            acc += 2.0 * cfg.weights[i] * cfg.weights[j] * std::log(1.0 / d);
        }
    }
    return acc;
}

double capacity_estimate(const ChargeConfiguration& cfg) {
    const std::size_t n = cfg.points.size();
    if (n < 2) throw std::invalid_argument("capacity_estimate: need at least two charges");
    double wsq = 0.0;
    for (double w : cfg.weights) wsq += w * w;
    const double offdiag = 1.0 - wsq;
    if (offdiag <= 0.0) throw std::invalid_argument("capacity_estimate: degenerate weight vector");
    const double E = discrete_energy(cfg);
    const double bias = std::pow(double(n), 1.0 / (double(n) - 1.0));
    return std::exp(-E / offdiag) / bias;
}

// ----------------------------------------------------------------------------
// Fekete optimizer
// ----------------------------------------------------------------------------

namespace {

struct FeketeWork {
    const PlanarCurve* curve;
    std::vector<double> s;   // global arc-length parameters, kept sorted
    std::vector<Vec2> pts;
    double w = 0.0;          // common weight 1/N

    void refresh(int i) { pts[i] = curve->point_at(s[i]); }

    // energy terms involving point i only (both orientations of each pair)
    double local_energy(int i, Vec2 candidate) const {
        double acc = 0.0;
        for (std::size_t j = 0; j < pts.size(); ++j) {
            if (static_cast<int>(j) == i) continue;
            const double d = norm(candidate - pts[j]);
            if (d < 1e-300) return HUGE_VAL;
            acc += std::log(1.0 / d);
        }
        return 2.0 * w * w * acc;
    }

    double gradient(int i) const {
        const Vec2 t = curve->tangent_at(s[i]);
        double acc = 0.0;
        for (std::size_t j = 0; j < pts.size(); ++j) {
            if (static_cast<int>(j) == i) continue;
            const Vec2 d = pts[i] - pts[j];
            acc += dot(d, t) / dot(d, d);
        }
        return -2.0 * w * w * acc;
    }

    double total_energy() const {
        double acc = 0.0;
        for (std::size_t i = 0; i < pts.size(); ++i)
            for (std::size_t j = i + 1; j < pts.size(); ++j)
                acc += 2.0 * w * w * std::log(1.0 / norm(pts[i] - pts[j]));
        return acc;
    }
};

constexpr double kGolden = 0.6180339887498949;

double golden_min(FeketeWork& work, int i, double lo, double hi) {
    auto f = [&](double sv) { return work.local_energy(i, work.curve->point_at(sv)); };
    double a = lo, b = hi;
    double x1 = b - kGolden * (b - a), x2 = a + kGolden * (b - a);
    double f1 = f(x1), f2 = f(x2);
    for (int it = 0; it < 120 && b - a > 1e-15 * std::max(1.0, work.curve->total_length); ++it) {
        if (f1 <= f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - kGolden * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + kGolden * (b - a);
            f2 = f(x2);
        }
    }
    return (a + b) / 2.0;
}

}  // namespace

FeketeResult fekete_points(const PlanarCurve& curve, int N, int max_iter) {
    if (N < 2) throw std::invalid_argument("fekete_points: N must be >= 2");
    const double L = curve.total_length;

    FeketeWork work;
    work.curve = &curve;
    work.w = 1.0 / N;
    work.s.resize(N);
    work.pts.resize(N);
    for (int i = 0; i < N; ++i) {
        work.s[i] = L * (i + 0.5) / N;
        work.refresh(i);
    }

    const bool multi_piece = curve.pieces.size() > 1;
    const double grad_tol = 1e-8;
    const double edge_eps = 1e-11 * std::max(1.0, L);

    auto interior = [&](int i) { return work.s[i] > edge_eps && work.s[i] < L - edge_eps; };
    auto max_interior_gradient = [&]() {
        double g = 0.0;
        for (int i = 0; i < N; ++i)
            if (interior(i)) g = std::max(g, std::abs(work.gradient(i)));
        return g;
    };

    FeketeResult result;
    int sweep = 0;
    double gmax = max_interior_gradient();
    for (; sweep < max_iter && gmax > grad_tol; ++sweep) {
        // coordinate sweeps: golden-section between the arc-length neighbors
        for (int i = 0; i < N; ++i) {
            double lo = (i == 0) ? 0.0 : work.s[i - 1];
            double hi = (i == N - 1) ? L : work.s[i + 1];
            double best_s = golden_min(work, i, lo, hi);
            double best_e = work.local_energy(i, curve.point_at(best_s));
            // curve endpoints are admissible for the extreme charges
            for (double cand : {(i == 0) ? 0.0 : -1.0, (i == N - 1) ? L : -1.0}) {
                if (cand < 0.0) continue;
                const double e = work.local_energy(i, curve.point_at(cand));
                if (e < best_e) {
                    best_e = e;
                    best_s = cand;
                }
            }
            if (multi_piece) {
                // coarse global scan allows migration across pieces
                const int G = 64;
                for (int g = 0; g <= G; ++g) {
                    const double cand = L * g / G;
                    const double e = work.local_energy(i, curve.point_at(cand));
                    if (e < best_e) {
                        best_e = e;
                        best_s = cand;
                    }
                }
            }
            if (best_e < work.local_energy(i, work.pts[i])) {
                work.s[i] = best_s;
                work.refresh(i);
            }
        }
        std::sort(work.s.begin(), work.s.end());
        for (int i = 0; i < N; ++i) work.refresh(i);

        gmax = max_interior_gradient();
        if (gmax <= 1e-3 && gmax > grad_tol) {
            // projected-Newton polish on the interior parameters
            std::vector<int> free_idx;
            for (int i = 0; i < N; ++i)
                if (interior(i)) free_idx.push_back(i);
            const int nf = static_cast<int>(free_idx.size());
            for (int polish = 0; polish < 50 && nf > 0; ++polish) {
                Eigen::VectorXd g(nf);
                Eigen::MatrixXd H = Eigen::MatrixXd::Zero(nf, nf);
                for (int a = 0; a < nf; ++a) {
                    const int i = free_idx[a];
                    g(a) = work.gradient(i);
                    const Vec2 ti = curve.tangent_at(work.s[i]);
                    double hii = 0.0;
                    for (int j = 0; j < N; ++j) {
                        if (j == i) continue;
                        const Vec2 d = work.pts[i] - work.pts[j];
                        const double d2 = dot(d, d);
                        const double proj = dot(d, ti);
                        hii += 2.0 * work.w * work.w * (2.0 * proj * proj / (d2 * d2) - 1.0 / d2);
                    }
                    H(a, a) = hii;
                    for (int b = a + 1; b < nf; ++b) {
                        const int j = free_idx[b];
                        const Vec2 tj = curve.tangent_at(work.s[j]);
                        const Vec2 d = work.pts[i] - work.pts[j];
                        const double d2 = dot(d, d);
                        const double hij = -2.0 * work.w * work.w *
                                           (2.0 * dot(d, ti) * dot(d, tj) / (d2 * d2) - dot(ti, tj) / d2);
                        H(a, b) = hij;
                        H(b, a) = hij;
                    }
                }
                Eigen::VectorXd step = H.ldlt().solve(-g);
                if (!step.allFinite()) break;
                const double e_before = work.total_energy();
                std::vector<double> saved = work.s;
                double t = 1.0;
                bool improved = false;
                for (int bt = 0; bt < 30; ++bt) {
                    for (int a = 0; a < nf; ++a)
                        work.s[free_idx[a]] = std::clamp(saved[free_idx[a]] + t * step(a), 0.0, L);
                    std::sort(work.s.begin(), work.s.end());
                    for (int i = 0; i < N; ++i) work.refresh(i);
                    bool distinct = true;
                    for (int i = 0; i + 1 < N; ++i)
                        if (norm(work.pts[i + 1] - work.pts[i]) < 1e-14) distinct = false;
                    if (distinct && work.total_energy() <= e_before) {
                        improved = true;
                        break;
                    }
                    t *= 0.5;
                }
                if (!improved) {
                    work.s = saved;
                    for (int i = 0; i < N; ++i) work.refresh(i);
                    break;
                }
                gmax = max_interior_gradient();
                if (gmax <= grad_tol) break;
            }
        }
        if (gmax <= grad_tol) break;
    }

    result.config.points = work.pts;
    result.config.weights.assign(N, work.w);
    result.energy = work.total_energy();
    result.sweeps = sweep;
    result.max_tangential_gradient = gmax;
    result.converged = gmax <= grad_tol;
    return result;
}

double segment_equilibrium_cdf(double a, double b, double x) {
    if (!(a < b)) throw std::invalid_argument("segment_equilibrium_cdf: need a < b");
    if (x <= a) return 0.0;
    if (x >= b) return 1.0;
    return (2.0 / M_PI) * std::asin(std::sqrt((x - a) / (b - a)));
}

double potential_at(const ChargeConfiguration& cfg, Vec2 r, const PhysicalUnits& units) {
    double acc = 0.0;
    for (std::size_t i = 0; i < cfg.points.size(); ++i) {
        const double d = norm(r - cfg.points[i]);
        if (d < 1e-12) throw Error(Errc::coincident_with_charge, "potential_at: probe coincides with a charge");
        acc += cfg.weights[i] * std::log(units.a_const / d);
    }
    return acc / (2.0 * M_PI * units.epsilon0);
}

Vec2 field_at(const ChargeConfiguration& cfg, Vec2 r, const PhysicalUnits& units) {
    Vec2 acc{0.0, 0.0};
    for (std::size_t i = 0; i < cfg.points.size(); ++i) {
        const Vec2 d = r - cfg.points[i];
        const double d2 = dot(d, d);
        if (d2 < 1e-24) throw Error(Errc::coincident_with_charge, "field_at: probe coincides with a charge");
        acc = acc + (cfg.weights[i] / d2) * d;
    }
    return (1.0 / (2.0 * M_PI * units.epsilon0)) * acc;
}

EnergyCapacity energy_capacity_relation(const ChargeConfiguration& cfg, const PhysicalUnits& units) {
    if (units.a_const != 1.0)
        throw Error(Errc::a_const_not_unity, "energy_capacity_relation: requires a_const = 1");
    const double E = discrete_energy(cfg);
    EnergyCapacity out;
    out.per_length_energy = E / (4.0 * M_PI * units.epsilon0);
    const std::size_t n = cfg.points.size();
    double wsq = 0.0;
    for (double w : cfg.weights) wsq += w * w;
    const double offdiag = 1.0 - wsq;
    const double bias = std::pow(double(n), 1.0 / (double(n) - 1.0));
    out.capacity_from_energy =
        std::exp(-(4.0 * M_PI * units.epsilon0) * out.per_length_energy / offdiag) / bias;
    return out;
}

double electrostatic_capacitance(double total_charge, double energy) {
    if (!(energy > 0.0)) throw Error(Errc::non_positive_energy, "electrostatic_capacitance: energy must be > 0");
    return total_charge * total_charge / (2.0 * energy);
}

double segment_green_cf(double A, double B, std::complex<double> alpha) {
    if (!(A < B)) throw std::invalid_argument("segment_green_cf: need A < B");
    if (alpha == std::complex<double>{0.0}) return 0.0;
    const std::complex<double> z = 1.0 / alpha;
    if (std::abs(z.imag()) <= 1e-12 && z.real() >= A - 1e-12 && z.real() <= B + 1e-12)
        throw Error(Errc::on_branch_cut, "segment_green_cf: evaluation point on the segment");
    const std::complex<double> w = (2.0 * z - A - B) / (B - A);
    std::complex<double> phi = w + std::sqrt(w * w - 1.0);
    if (std::abs(phi) < 1.0) phi = w - std::sqrt(w * w - 1.0);
    return 1.0 / std::abs(phi);
}

}  // namespace hemlab::potential
