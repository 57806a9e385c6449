#include "hemlab/io.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

namespace hemlab::io {

namespace {

using nlohmann::json;

std::string fmt(double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

std::pair<int, int> line_col(std::string_view text, std::size_t byte) {
    int line = 1, col = 1;
    for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return {line, col};
}

double num_or(const json& obj, const char* key, double fallback) {
    auto it = obj.find(key);
    if (it == obj.end()) return fallback;
    if (!it->is_number()) throw Error(Errc::semantic_error, std::string("field '") + key + "' must be a number");
    return it->get<double>();
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(Errc::io_error, "cannot open for writing: " + path);
    return out;
}

}  // namespace

hem::NetworkCase parse_case_native(std::string_view text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        auto [line, col] = line_col(text, e.byte > 0 ? e.byte - 1 : 0);
        throw SyntaxError(line, col, std::string("case document: ") + e.what());
    }
    if (!doc.is_object() || !doc.contains("buses") || !doc.contains("branches"))
        throw Error(Errc::semantic_error, "case document needs top-level buses and branches arrays");

    hem::NetworkCase net;
    net.base_power = num_or(doc, "base_mva", 100.0);
    for (const auto& jb : doc["buses"]) {
        hem::Bus bus;
        if (!jb.contains("id") || !jb["id"].is_number_integer())
            throw Error(Errc::semantic_error, "bus entry without integer id");
        bus.id = jb["id"].get<int>();
        const std::string kind = jb.value("kind", "pq");
        if (kind == "slack")
            bus.kind = hem::BusKind::slack;
        else if (kind == "pq")
            bus.kind = hem::BusKind::pq;
        else if (kind == "pv")
            bus.kind = hem::BusKind::pv;
        else
            throw Error(Errc::semantic_error, "unknown bus kind '" + kind + "'");
        bus.p_inject = num_or(jb, "p", 0.0);
        bus.q_inject = num_or(jb, "q", 0.0);
        bus.v_setpoint = num_or(jb, "v_setpoint", 1.0);
        bus.shunt_g = num_or(jb, "shunt_g", 0.0);
        bus.shunt_b = num_or(jb, "shunt_b", 0.0);
        net.buses.push_back(bus);
    }
    for (const auto& jb : doc["branches"]) {
        hem::Branch br;
        if (!jb.contains("from") || !jb.contains("to"))
            throw Error(Errc::semantic_error, "branch entry without from/to");
        br.from = jb["from"].get<int>();
        br.to = jb["to"].get<int>();
        br.r = num_or(jb, "r", 0.0);
        br.x = num_or(jb, "x", 0.0);
        br.charging_b = num_or(jb, "charging_b", 0.0);
        br.tap = num_or(jb, "tap", 1.0);
        net.branches.push_back(br);
    }
    hem::validate_case(net);
    return net;
}

std::string write_case_native(const hem::NetworkCase& net) {
    json doc;
    doc["base_mva"] = net.base_power;
    doc["buses"] = json::array();
    for (const auto& b : net.buses) {
        json jb;
        jb["id"] = b.id;
        jb["kind"] = b.kind == hem::BusKind::slack ? "slack" : (b.kind == hem::BusKind::pv ? "pv" : "pq");
        jb["p"] = b.p_inject;
        jb["q"] = b.q_inject;
        jb["v_setpoint"] = b.v_setpoint;
        jb["shunt_g"] = b.shunt_g;
        jb["shunt_b"] = b.shunt_b;
        doc["buses"].push_back(jb);
    }
    doc["branches"] = json::array();
    for (const auto& br : net.branches) {
        json jb;
        jb["from"] = br.from;
        jb["to"] = br.to;
        jb["r"] = br.r;
        jb["x"] = br.x;
        jb["charging_b"] = br.charging_b;
        jb["tap"] = br.tap;
        doc["branches"].push_back(jb);
    }
    return doc.dump(2) + "\n";
}

// ----------------------------------------------------------------------------
// MATPOWER subset
// ----------------------------------------------------------------------------

namespace {

struct MpSource {
    std::string text;  // comments blanked, positions preserved
    std::string_view original;

    std::pair<int, int> pos(std::size_t byte) const { return line_col(original, byte); }
};

MpSource strip_comments(std::string_view text) {
    MpSource src;
    src.original = text;
    src.text.assign(text);
    bool in_comment = false;
    for (std::size_t i = 0; i < src.text.size(); ++i) {
        if (src.text[i] == '\n') in_comment = false;
        else if (src.text[i] == '%') in_comment = true;
        if (in_comment) src.text[i] = ' ';
    }
    return src;
}

// position just past "<name> =", npos when the assignment is absent
std::size_t find_assignment(const std::string& t, const std::string& name) {
    for (const std::string& probe : {"mpc." + name, name}) {
        std::size_t from = 0, at;
        while ((at = t.find(probe, from)) != std::string::npos) {
            const bool left_ok =
                at == 0 || !(std::isalnum(static_cast<unsigned char>(t[at - 1])) || t[at - 1] == '.' || t[at - 1] == '_');
            std::size_t after = at + probe.size();
            while (after < t.size() && std::isspace(static_cast<unsigned char>(t[after]))) ++after;
            if (left_ok && after < t.size() && t[after] == '=') return after + 1;
            from = at + 1;
        }
    }
    return std::string::npos;
}

// matrix literal after "<name> = [ ... ];" with rows split on ';' or newline
std::vector<std::vector<double>> parse_matrix(const MpSource& src, const std::string& name, bool required) {
    const std::string& t = src.text;
    const std::size_t at = find_assignment(t, name);
    if (at == std::string::npos) {
        if (required) throw Error(Errc::semantic_error, "matpower case: missing '" + name + "' assignment");
        return {};
    }
    std::size_t first = at;
    while (first < t.size() && std::isspace(static_cast<unsigned char>(t[first]))) ++first;
    if (first < t.size() && t[first] != '[') {
        // scalar assignment (baseMVA)
        const char* begin = t.data() + first;
        char* end = nullptr;
        const double v = std::strtod(begin, &end);
        if (end == begin) {
            auto [l, c] = src.pos(first);
            throw SyntaxError(l, c, "matpower case: expected a number after '" + name + " ='");
        }
        return {{v}};
    }
    std::size_t open = t.find('[', at);
    if (open == std::string::npos) {
        auto [l, c] = src.pos(at);
        throw SyntaxError(l, c, "matpower case: expected '[' after '" + name + " ='");
    }
    std::size_t close = t.find(']', open);
    if (close == std::string::npos) {
        auto [l, c] = src.pos(open);
        throw SyntaxError(l, c, "matpower case: unterminated matrix '" + name + "'");
    }
    std::vector<std::vector<double>> rows;
    std::vector<double> row;
    std::size_t i = open + 1;
    while (i < close) {
        const char ch = t[i];
        if (ch == ';' || ch == '\n') {
            if (!row.empty()) rows.push_back(std::move(row));
            row.clear();
            ++i;
        } else if (std::isspace(static_cast<unsigned char>(ch)) || ch == ',') {
            ++i;
        } else {
            const char* begin = t.data() + i;
            char* end = nullptr;
            const double v = std::strtod(begin, &end);
            if (end == begin) {
                auto [l, c] = src.pos(i);
                throw SyntaxError(l, c, "matpower case: expected a number in '" + name + "'");
            }
            row.push_back(v);
            i += static_cast<std::size_t>(end - begin);
        }
    }
    if (!row.empty()) rows.push_back(std::move(row));
    return rows;
}

}  // namespace

hem::NetworkCase parse_matpower(std::string_view text) {
    const MpSource src = strip_comments(text);

    const auto base_rows = parse_matrix(src, "baseMVA", true);
    if (base_rows.size() != 1 || base_rows[0].size() != 1)
        throw Error(Errc::semantic_error, "matpower case: baseMVA must be a scalar");
    const double base = base_rows[0][0];
    if (!(base > 0.0)) throw Error(Errc::semantic_error, "matpower case: baseMVA must be positive");

    const auto bus_rows = parse_matrix(src, "bus", true);
    const auto gen_rows = parse_matrix(src, "gen", true);
    const auto branch_rows = parse_matrix(src, "branch", true);

    struct GenAgg {
        double pg = 0.0, qg = 0.0;
        double vg = 0.0;
        bool any = false;
    };
    std::map<int, GenAgg> gens;
    for (const auto& row : gen_rows) {
        if (row.size() < 8) throw Error(Errc::semantic_error, "matpower case: gen row needs >= 8 columns");
        if (row[7] <= 0.0) continue;  // GEN_STATUS
        GenAgg& g = gens[static_cast<int>(row[0])];
        g.pg += row[1];
        g.qg += row[2];
        if (!g.any) g.vg = row[5];
        g.any = true;
    }

    hem::NetworkCase net;
    net.base_power = base;
    for (const auto& row : bus_rows) {
        if (row.size() < 8) throw Error(Errc::semantic_error, "matpower case: bus row needs >= 8 columns");
        hem::Bus bus;
        bus.id = static_cast<int>(row[0]);
        const int type = static_cast<int>(row[1]);
        const auto git = gens.find(bus.id);
        const bool has_gen = git != gens.end();
        switch (type) {
            case 1:
                bus.kind = hem::BusKind::pq;
                break;
            case 2:
                // a pv bus without an in-service generator reverts to pq
                bus.kind = has_gen ? hem::BusKind::pv : hem::BusKind::pq;
                break;
            case 3:
                bus.kind = hem::BusKind::slack;
                break;
            default:
                throw Error(Errc::unsupported_feature,
                            "matpower case: bus type " + std::to_string(type) + " not supported");
        }
        const double pg = has_gen ? git->second.pg : 0.0;
        const double qg = has_gen ? git->second.qg : 0.0;
        bus.p_inject = (pg - row[2]) / base;
        bus.q_inject = (qg - row[3]) / base;
        bus.shunt_g = row[4] / base;
        bus.shunt_b = row[5] / base;
        bus.v_setpoint = (has_gen && git->second.vg > 0.0) ? git->second.vg : row[7];
        net.buses.push_back(bus);
    }
    for (const auto& row : branch_rows) {
        if (row.size() < 11) throw Error(Errc::semantic_error, "matpower case: branch row needs >= 11 columns");
        if (row[10] == 0.0) continue;  // BR_STATUS
        if (row[9] != 0.0)
            throw Error(Errc::unsupported_feature, "matpower case: phase shift angle != 0 not supported");
        hem::Branch br;
        br.from = static_cast<int>(row[0]);
        br.to = static_cast<int>(row[1]);
        br.r = row[2];
        br.x = row[3];
        br.charging_b = row[4];
        br.tap = row[8] == 0.0 ? 1.0 : row[8];
        net.branches.push_back(br);
    }
    hem::validate_case(net);
    return net;
}

// ----------------------------------------------------------------------------
// CSV / SVG emission
// ----------------------------------------------------------------------------

void write_roots_csv(const pade::RootSet& rs, const std::string& path) {
    auto out = open_out(path);
    out << "kind,plane,re,im,M\n";
    auto rows = [&](const std::vector<algebra::Complex>& v, const char* kind, const char* plane) {
        for (const auto& r : v)
            out << kind << ',' << plane << ',' << fmt(r.real()) << ',' << fmt(r.imag()) << ',' << rs.M << '\n';
    };
    rows(rs.poles_alpha, "pole", "alpha");
    rows(rs.zeros_alpha, "zero", "alpha");
    rows(rs.poles_inv, "pole", "inv");
    rows(rs.zeros_inv, "zero", "inv");
    if (!out) throw Error(Errc::io_error, "write failure: " + path);
}

void write_cf_csv(const std::vector<diag::ConvergenceProfile>& profiles, const std::string& path) {
    auto out = open_out(path);
    out << "alpha,M,error,cf_hat\n";
    for (const auto& p : profiles) {
        const std::string cf = p.cf_hat ? fmt(*p.cf_hat) : "";
        for (const auto& [m, e] : p.samples)
            out << fmt(p.alpha.real()) << ',' << m << ',' << fmt(e) << ',' << cf << '\n';
    }
    if (!out) throw Error(Errc::io_error, "write failure: " + path);
}

void write_capacity_csv(const std::vector<CapacityRow>& rows, const std::string& path) {
    auto out = open_out(path);
    out << "N,energy,cap_est\n";
    for (const auto& row : rows) out << row.n << ',' << fmt(row.energy) << ',' << fmt(row.cap_est) << '\n';
    if (!out) throw Error(Errc::io_error, "write failure: " + path);
}

std::vector<std::vector<std::string>> read_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(Errc::io_error, "cannot open for reading: " + path);
    std::vector<std::vector<std::string>> rows;
    std::string line;
    while (std::getline(in, line)) {
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (!line.empty() && line.back() == ',') cells.push_back("");
        rows.push_back(std::move(cells));
    }
    return rows;
}

void write_svg_scatter(const pade::RootSet& rs, const PlotSpec& spec, const std::string& path) {
    const auto [x0, x1] = spec.x_range;
    const auto [y0, y1] = spec.y_range;
    if (!(x0 < x1) || !(y0 < y1)) throw std::invalid_argument("write_svg_scatter: degenerate ranges");
    const double margin = 20.0;
    const double W = spec.width, H = spec.height;
    auto px = [&](double x) { return margin + (x - x0) / (x1 - x0) * (W - 2 * margin); };
    auto py = [&](double y) { return H - margin - (y - y0) / (y1 - y0) * (H - 2 * margin); };

    auto out = open_out(path);
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << spec.width << "\" height=\"" << spec.height
        << "\" viewBox=\"0 0 " << spec.width << ' ' << spec.height << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    if (!spec.title.empty())
        out << "<text x=\"" << fmt(W / 2) << "\" y=\"14\" text-anchor=\"middle\" font-size=\"12\">" << spec.title
            << "</text>\n";
    if (y0 < 0.0 && 0.0 < y1)
        out << "<line x1=\"" << fmt(px(x0)) << "\" y1=\"" << fmt(py(0)) << "\" x2=\"" << fmt(px(x1)) << "\" y2=\""
            << fmt(py(0)) << "\" stroke=\"#888\" stroke-width=\"0.5\"/>\n";
    if (x0 < 0.0 && 0.0 < x1)
        out << "<line x1=\"" << fmt(px(0)) << "\" y1=\"" << fmt(py(y0)) << "\" x2=\"" << fmt(px(0)) << "\" y2=\""
            << fmt(py(y1)) << "\" stroke=\"#888\" stroke-width=\"0.5\"/>\n";

    const auto& poles = spec.plane == ScatterPlane::alpha ? rs.poles_alpha : rs.poles_inv;
    const auto& zeros = spec.plane == ScatterPlane::alpha ? rs.zeros_alpha : rs.zeros_inv;
    const double r = 4.0;
    for (const auto& z : poles) {
        if (z.real() < x0 || z.real() > x1 || z.imag() < y0 || z.imag() > y1) continue;
        const double cx = px(z.real()), cy = py(z.imag());
        out << "<line x1=\"" << fmt(cx - r) << "\" y1=\"" << fmt(cy - r) << "\" x2=\"" << fmt(cx + r) << "\" y2=\""
            << fmt(cy + r) << "\" stroke=\"black\" stroke-width=\"1\"/>\n";
        out << "<line x1=\"" << fmt(cx - r) << "\" y1=\"" << fmt(cy + r) << "\" x2=\"" << fmt(cx + r) << "\" y2=\""
            << fmt(cy - r) << "\" stroke=\"black\" stroke-width=\"1\"/>\n";
    }
    for (const auto& z : zeros) {
        if (z.real() < x0 || z.real() > x1 || z.imag() < y0 || z.imag() > y1) continue;
        out << "<circle cx=\"" << fmt(px(z.real())) << "\" cy=\"" << fmt(py(z.imag())) << "\" r=\"" << fmt(r)
            << "\" fill=\"none\" stroke=\"black\" stroke-width=\"1\"/>\n";
    }
    out << "</svg>\n";
    if (!out) throw Error(Errc::io_error, "write failure: " + path);
}

}  // namespace hemlab::io
