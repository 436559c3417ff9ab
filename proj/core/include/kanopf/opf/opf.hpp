#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "kanopf/grid/power_flow.hpp"

namespace kanopf::opf {

/// Settings of the augmented-Lagrangian solver. Decisions are the active
/// setpoints of non-slack generators and the DC-side setpoints of
/// P-controlled converters; voltage setpoints stay at the case values.
struct OpfOptions {
    double feasibility_tolerance = 1e-6;
    double stationarity_tolerance = 1e-9;  ///< projected-gradient inf-norm, scaled objective
    double pf_tolerance = 1e-11;
    double fd_step = 1e-6;  ///< central-difference step, p.u.
    int max_outer = 30;
    int max_inner = 2000;
    double initial_penalty = 10.0;
    double max_penalty = 1e12;
};

struct OpfSolution {
    grid::Dispatch dispatch;
    grid::PfState state;
    double objective = 0.0;  ///< Σ c0 + c1·P + c2·P², P in p.u.
    std::vector<double> violation_report;  ///< h-values, see grid::constraint_labels
    double max_violation = 0.0;
    bool converged = false;
    int iterations = 0;  ///< inner iterations over all outer rounds
    int outer_rounds = 0;
};

/// Solves the cost-minimizing dispatch of `sys` as given (scenario already
/// applied). Throws InfeasibleError when the violations cannot be driven
/// below the tolerance; power-flow errors propagate.
OpfSolution solve_opf(const grid::PowerSystem& sys, const OpfOptions& options = {});

/// apply_scenario followed by solve_opf.
OpfSolution solve_opf(const grid::PowerSystem& sys, std::span<const double> xi, const OpfOptions& options = {});

enum class SelectorKind { objective, gen_p, bus_vm, branch_flow, conv_p };

/// One component of Y. Text forms: "objective", "gen_p:<id>",
/// "bus_vm:<id>", "branch_flow:<id>" (active power at the from end) and
/// "conv_p:<id>" (AC-side injection).
struct OutputSelector {
    SelectorKind kind = SelectorKind::objective;
    int id = 0;

    std::string text() const;
    static OutputSelector parse(const std::string& text);
    bool operator==(const OutputSelector&) const = default;
};

struct OutputSpec {
    std::vector<OutputSelector> selectors;

    static OutputSpec parse(const std::vector<std::string>& texts);
    std::vector<std::string> names() const;
    std::size_t size() const noexcept { return selectors.size(); }
    /// Throws SpecError when empty or when a selector names a missing element.
    void validate(const grid::PowerSystem& sys) const;
    std::uint64_t fingerprint() const;
    bool operator==(const OutputSpec&) const = default;
};

/// Y ordered exactly as `spec`. Throws SpecError on unresolved selectors
/// and NumericError when the solution is not converged.
std::vector<double> extract_outputs(const grid::PowerSystem& sys, const OpfSolution& sol, const OutputSpec& spec);

}  // namespace kanopf::opf
