#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "hemlab/diagnostics.hpp"
#include "hemlab/hem.hpp"
#include "hemlab/pade.hpp"

namespace hemlab::io {

/// Native case format: a JSON document with top-level keys base_mva,
/// buses, branches. Throws SyntaxError (with line/col) on malformed JSON,
/// Errc::semantic_error on schema or invariant violations.
hem::NetworkCase parse_case_native(std::string_view text);

/// Serialization that parse_case_native round-trips exactly.
std::string write_case_native(const hem::NetworkCase& net);

/// MATPOWER case subset: baseMVA, bus, gen, branch matrices. Out-of-service
/// elements are dropped; unsupported features (phase shift) fail loudly.
hem::NetworkCase parse_matpower(std::string_view text);

struct CapacityRow {
    int n = 0;
    double energy = 0.0;
    double cap_est = 0.0;
};

// CSV emitters. Headers are fixed: roots `kind,plane,re,im,M`,
// cf `alpha,M,error,cf_hat`, capacity `N,energy,cap_est`. Numbers are
// shortest round-trip decimals; identical inputs give byte-identical files.
void write_roots_csv(const pade::RootSet& rs, const std::string& path);
void write_cf_csv(const std::vector<diag::ConvergenceProfile>& profiles, const std::string& path);
void write_capacity_csv(const std::vector<CapacityRow>& rows, const std::string& path);

/// Minimal CSV reader for round-trip checks: rows of comma-split cells.
std::vector<std::vector<std::string>> read_csv(const std::string& path);

enum class ScatterPlane { alpha, inverse };

struct PlotSpec {
    std::pair<double, double> x_range;
    std::pair<double, double> y_range;
    ScatterPlane plane = ScatterPlane::inverse;
    std::string title;
    int width = 640;
    int height = 480;
};

/// Standalone SVG: poles as crosses, zeros as circles, points outside the
/// ranges clipped, zero axes drawn when in range.
void write_svg_scatter(const pade::RootSet& rs, const PlotSpec& spec, const std::string& path);

}  // namespace hemlab::io
