#pragma once

#include <stdexcept>
#include <string>

namespace hemlab {

enum class Errc {
    non_convergence,
    zero_leading_coefficient,
    singular_branch,
    singular_germ,
    newton_diverged,
    singular_jacobian,
    infeasible,
    on_branch_cut,
    degenerate_block,
    pole_hit,
    coincident_points,
    coincident_with_charge,
    a_const_not_unity,
    non_positive_energy,
    insufficient_decay,
    insufficient_profiles,
    no_roots_in_band,
    empty_selection,
    syntax_error,
    semantic_error,
    unsupported_feature,
    io_error,
};

/// Base for all typed failures. Catch by Errc when the distinction matters.
class Error : public std::runtime_error {
  public:
    Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
    Errc code() const noexcept { return code_; }

  private:
    Errc code_;
};

/// Root finder gave up before meeting the residual bound.
class NonConvergence : public Error {
  public:
    NonConvergence(int iterations, double worst_residual, const std::string& what)
        : Error(Errc::non_convergence, what), iterations(iterations), worst_residual(worst_residual) {}
    int iterations;
    double worst_residual;
};

/// Parse failure with a source position.
class SyntaxError : public Error {
  public:
    SyntaxError(int line, int col, const std::string& what)
        : Error(Errc::syntax_error, what), line(line), col(col) {}
    int line;
    int col;
};

}  // namespace hemlab
