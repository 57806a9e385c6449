#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "hemlab/io.hpp"

using namespace hemlab;
using namespace hemlab::io;
using algebra::Complex;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

std::string tmp_path(const std::string& name) {
    return (std::filesystem::temp_directory_path() / name).string();
}

const char* kMiniCase = R"({
  "base_mva": 100,
  "buses": [
    {"id": 1, "kind": "slack", "v_setpoint": 1.0},
    {"id": 2, "kind": "pq", "p": -0.5, "q": -0.2}
  ],
  "branches": [
    {"from": 1, "to": 2, "x": 0.1}
  ]
})";

const char* kMatpower3 = R"(% three-bus fixture
function mpc = case3
mpc.version = '2';
mpc.baseMVA = 100;
mpc.bus = [
  1 3 0  0  0 0 1 1.00 0 345 1 1.1 0.9;
  2 1 50 20 0 5 1 1.00 0 345 1 1.1 0.9;
  3 2 20 10 0 0 1 1.02 0 345 1 1.1 0.9;
];
mpc.gen = [
  1 0  0 300 -300 1.00 100 1 250 10;
  3 60 0 300 -300 1.02 100 1 250 10;
];
mpc.branch = [
  1 2 0.01 0.10 0.02 250 250 250 0    0 1 -360 360;
  2 3 0.02 0.20 0.00 250 250 250 0.98 0 1 -360 360;
  3 1 0.00 0.15 0.04 250 250 250 0    0 0 -360 360;
];
)";

}  // namespace

TEST_CASE("parse_case_native: minimal two-bus document") {
    auto net = parse_case_native(kMiniCase);
    REQUIRE(net.buses.size() == 2);
    CHECK(net.buses[0].kind == hem::BusKind::slack);
    CHECK(net.buses[1].p_inject == -0.5);
    CHECK(net.buses[1].q_inject == -0.2);
    REQUIRE(net.branches.size() == 1);
    CHECK(net.branches[0].x == 0.1);
    CHECK(net.branches[0].tap == 1.0);
}

TEST_CASE("parse_case_native: errors") {
    // two slack buses
    std::string two_slacks = kMiniCase;
    auto pos = two_slacks.find("\"pq\"");
    two_slacks.replace(pos, 4, "\"slack\"");
    CHECK_THROWS_WITH_AS(parse_case_native(two_slacks), doctest::Contains("slack"), Error);

    // dangling branch endpoint
    std::string dangling = kMiniCase;
    pos = dangling.find("\"to\": 2");
    dangling.replace(pos, 7, "\"to\": 99");
    CHECK_THROWS_WITH_AS(parse_case_native(dangling), doctest::Contains("dangling"), Error);

    // malformed JSON reports a position
    try {
        parse_case_native("{\n  \"base_mva\": 100,\n  \"buses\": [}");
        FAIL("expected SyntaxError");
    } catch (const SyntaxError& e) {
        CHECK(e.line >= 3);
        CHECK(e.col >= 1);
    }
}

TEST_CASE("native case round-trips exactly") {
    auto net = parse_case_native(kMiniCase);
    const std::string text = write_case_native(net);
    auto again = parse_case_native(text);
    REQUIRE(again.buses.size() == net.buses.size());
    for (std::size_t i = 0; i < net.buses.size(); ++i) {
        CHECK(again.buses[i].id == net.buses[i].id);
        CHECK(again.buses[i].kind == net.buses[i].kind);
        CHECK(again.buses[i].p_inject == net.buses[i].p_inject);
        CHECK(again.buses[i].q_inject == net.buses[i].q_inject);
        CHECK(again.buses[i].v_setpoint == net.buses[i].v_setpoint);
        CHECK(again.buses[i].shunt_g == net.buses[i].shunt_g);
        CHECK(again.buses[i].shunt_b == net.buses[i].shunt_b);
    }
    REQUIRE(again.branches.size() == net.branches.size());
    for (std::size_t i = 0; i < net.branches.size(); ++i) {
        CHECK(again.branches[i].from == net.branches[i].from);
        CHECK(again.branches[i].to == net.branches[i].to);
        CHECK(again.branches[i].r == net.branches[i].r);
        CHECK(again.branches[i].x == net.branches[i].x);
        CHECK(again.branches[i].charging_b == net.branches[i].charging_b);
        CHECK(again.branches[i].tap == net.branches[i].tap);
    }
    CHECK(write_case_native(again) == text);
}

TEST_CASE("parse_matpower: three-bus fixture against a hand-computed ybus") {
    auto net = parse_matpower(kMatpower3);
    REQUIRE(net.buses.size() == 3);
    CHECK(net.buses[0].kind == hem::BusKind::slack);
    CHECK(net.buses[1].kind == hem::BusKind::pq);
    CHECK(net.buses[2].kind == hem::BusKind::pv);
    CHECK(net.buses[1].p_inject == doctest::Approx(-0.5).epsilon(1e-14));
    CHECK(net.buses[1].q_inject == doctest::Approx(-0.2).epsilon(1e-14));
    CHECK(net.buses[1].shunt_b == doctest::Approx(0.05).epsilon(1e-14));
    CHECK(net.buses[2].p_inject == doctest::Approx(0.4).epsilon(1e-14));
    CHECK(net.buses[2].v_setpoint == doctest::Approx(1.02).epsilon(1e-14));
    REQUIRE(net.branches.size() == 2);  // the out-of-service branch is dropped

    auto Y = hem::build_ybus(net);
    const Complex y12 = 1.0 / Complex(0.01, 0.10);
    const Complex y23 = 1.0 / Complex(0.02, 0.20);
    const double tap = 0.98;
    CHECK(std::abs(Y.at(0, 0) - (y12 + Complex(0, 0.01))) < 1e-12);
    CHECK(std::abs(Y.at(0, 1) - (-y12)) < 1e-12);
    CHECK(std::abs(Y.at(1, 1) - (y12 + Complex(0, 0.01) + y23 / (tap * tap) + Complex(0, 0.05))) < 1e-12);
    CHECK(std::abs(Y.at(1, 2) - (-y23 / tap)) < 1e-12);
    CHECK(std::abs(Y.at(2, 2) - y23) < 1e-12);
    CHECK(std::abs(Y.at(2, 0)) < 1e-15);
}

TEST_CASE("parse_matpower: unsupported and degraded features") {
    // nonzero phase-shift angle fails loudly
    std::string shifted = kMatpower3;
    auto pos = shifted.find("0.98 0 1");
    shifted.replace(pos, 8, "0.98 30 1");
    CHECK_THROWS_AS(parse_matpower(shifted), Error);

    // a pv bus without an in-service generator reverts to pq
    std::string nogen = kMatpower3;
    pos = nogen.find("3 60 0 300 -300 1.02 100 1");
    nogen.replace(pos + 25, 1, "0");  // flip GEN_STATUS
    auto net = parse_matpower(nogen);
    CHECK(net.buses[2].kind == hem::BusKind::pq);

    CHECK_THROWS_AS(parse_matpower("mpc.bus = [1 3 0 0 0 0 1 1 0 345 1 1.1 0.9];"), Error);  // missing pieces
}

TEST_CASE("roots csv: exact rows and round-trip") {
    pade::RootSet rs;
    rs.M = 3;
    rs.poles_alpha = {Complex{1, 0}};
    rs.poles_inv = {Complex{1, 0}};
    const auto path = tmp_path("hemlab_roots.csv");
    write_roots_csv(rs, path);
    const std::string text = slurp(path);
    CHECK(text == "kind,plane,re,im,M\npole,alpha,1,0,3\npole,inv,1,0,3\n");

    // empty set: header only
    write_roots_csv(pade::RootSet{}, path);
    CHECK(slurp(path) == "kind,plane,re,im,M\n");

    // round-trip values
    rs.poles_alpha = {Complex{0.1234567890123456, -7.25e-3}};
    rs.poles_inv = {1.0 / rs.poles_alpha[0]};
    rs.zeros_alpha = {Complex{-2.0, 1.0 / 3.0}};
    rs.zeros_inv = {1.0 / rs.zeros_alpha[0]};
    write_roots_csv(rs, path);
    auto rows = read_csv(path);
    REQUIRE(rows.size() == 5);
    CHECK(std::stod(rows[1][2]) == rs.poles_alpha[0].real());
    CHECK(std::stod(rows[1][3]) == rs.poles_alpha[0].imag());
    CHECK(std::stod(rows[2][2]) == rs.zeros_alpha[0].real());
    CHECK(std::stod(rows[3][2]) == rs.poles_inv[0].real());
    CHECK(std::stod(rows[4][3]) == rs.zeros_inv[0].imag());

    // determinism
    const std::string once = slurp(path);
    write_roots_csv(rs, path);
    CHECK(slurp(path) == once);
}

TEST_CASE("cf and capacity csv") {
    diag::ConvergenceProfile p;
    p.alpha = Complex{0.1, 0.0};
    p.samples = {{3, 1e-3}, {4, 1e-5}};
    p.cf_hat = 0.09163;
    diag::ConvergenceProfile unset;
    unset.alpha = Complex{0.01, 0.0};
    unset.samples = {{3, 1e-14}};
    const auto path = tmp_path("hemlab_cf.csv");
    write_cf_csv({p, unset}, path);
    auto rows = read_csv(path);
    REQUIRE(rows.size() == 4);
    CHECK(rows[0] == std::vector<std::string>{"alpha", "M", "error", "cf_hat"});
    CHECK(std::stod(rows[1][0]) == 0.1);
    CHECK(std::stod(rows[1][2]) == 1e-3);
    CHECK(std::stod(rows[1][3]) == 0.09163);
    CHECK(rows[3][3] == "");  // unset profile leaves the column empty

    const auto cap_path = tmp_path("hemlab_cap.csv");
    write_capacity_csv({{16, 0.43059, 0.52518}}, cap_path);
    auto crows = read_csv(cap_path);
    REQUIRE(crows.size() == 2);
    CHECK(crows[0] == std::vector<std::string>{"N", "energy", "cap_est"});
    CHECK(std::stod(crows[1][1]) == 0.43059);
}

TEST_CASE("svg scatter") {
    const auto path = tmp_path("hemlab_scatter.svg");
    PlotSpec spec{{-3.2, 1.2}, {-1.2, 1.2}, ScatterPlane::inverse, "test"};

    write_svg_scatter(pade::RootSet{}, spec, path);
    std::string text = slurp(path);
    CHECK(text.find("<line") != std::string::npos);       // axes
    CHECK(text.find("<circle") == std::string::npos);     // no zeros
    CHECK(text.find("stroke=\"black\"") == std::string::npos);  // no markers

    pade::RootSet rs;
    rs.poles_inv = {Complex{-1.0, 0.0}};  // geometric center of the x range
    rs.zeros_inv = {Complex{0.0, 5.0}};   // outside the y range: clipped
    write_svg_scatter(rs, spec, path);
    text = slurp(path);
    CHECK(text.find("<circle") == std::string::npos);
    // cross centered at px(-1) = 20 + ((-1+3.2)/4.4)*600 = 320, py(0) = 240
    CHECK(text.find("x1=\"316\" y1=\"236\" x2=\"324\" y2=\"244\"") != std::string::npos);

    const std::string once = text;
    write_svg_scatter(rs, spec, path);
    CHECK(slurp(path) == once);

    CHECK_THROWS_AS(write_svg_scatter(rs, spec, "/nonexistent-dir/x.svg"), Error);
}
