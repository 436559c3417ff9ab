#pragma once

#include <memory>
#include <string>
#include <vector>

#include "kanopf/grid/power_system.hpp"

namespace kanopf::grid {

/// Decisions u: generator active setpoints, generator voltage setpoints and
/// converter DC-side setpoints, all p.u. and indexed like the system's
/// generator / converter vectors. The slack generator's entry in gen_p and
/// the DC-slack converters' entries in conv_p_dc are ignored by the solver.
struct Dispatch {
    std::vector<double> gen_p;
    std::vector<double> gen_v;
    std::vector<double> conv_p_dc;
};

/// Setpoints stored in the case.
Dispatch nominal_dispatch(const PowerSystem& sys);

struct AcFlow {
    double p_from = 0.0;
    double q_from = 0.0;
    double p_to = 0.0;
    double q_to = 0.0;

    double s_from() const noexcept;
    double s_to() const noexcept;
};

struct DcFlow {
    double p_from = 0.0;
    double p_to = 0.0;
};

/// Electrical state x. vm/va/vdc and the converter powers are the primary
/// variables; flows and generator outputs are derived from them.
struct PfState {
    std::vector<double> vm;
    std::vector<double> va;
    std::vector<double> vdc;
    std::vector<double> conv_p_ac;
    std::vector<double> conv_p_dc;
    std::vector<double> gen_p;
    std::vector<double> gen_q;
    std::vector<AcFlow> ac_flows;
    std::vector<DcFlow> dc_flows;
    int iterations = 0;
    double residual_norm = 0.0;
};

struct PowerFlowOptions {
    double tolerance = 1e-8;
    int max_iterations = 50;
    /// Newton steps taken after the tolerance is met; a step is kept only
    /// if it does not increase the residual.
    int polish_iterations = 0;
};

/// Residuals f(x, u) of the full state, in this order:
///   AC active balance per AC bus, AC reactive balance per AC bus,
///   voltage magnitude setpoint per slack/PV bus, slack angle,
///   DC balance per DC bus, DC voltage setpoint per DC-slack converter,
///   DC power setpoint per P-controlled converter,
///   converter coupling P_ac + P_dc + P_loss(P_ac) per converter.
/// Zero iff `state` solves the network for `dispatch`.
std::vector<double> pf_residuals(const PowerSystem& sys, const Dispatch& dispatch, const PfState& state);

/// Precompiled network (admittances, index maps) for repeated solves of
/// one system under different dispatches.
class PowerFlowSolver {
public:
    explicit PowerFlowSolver(const PowerSystem& sys);
    ~PowerFlowSolver();
    PowerFlowSolver(PowerFlowSolver&&) noexcept;
    PowerFlowSolver& operator=(PowerFlowSolver&&) noexcept;

    /// Newton-Raphson from a flat start with an analytic Jacobian.
    /// Throws DivergenceError after max_iterations and
    /// SingularJacobianError on a singular Jacobian.
    PfState solve(const Dispatch& dispatch, const PowerFlowOptions& options = {}) const;

    const PowerSystem& system() const noexcept;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

PfState newton_power_flow(const PowerSystem& sys, const Dispatch& dispatch, const PowerFlowOptions& options = {});

/// Recomputes flows and generator outputs from the primary state variables.
void complete_state(const PowerSystem& sys, const Dispatch& dispatch, PfState& state);

/// h(x, u) with positive entries violated, in this order: per AC bus
/// [V - v_max, v_min - V]; per AC branch max(|S_from|, |S_to|) - s_max;
/// per generator [P - p_max, p_min - P, Q - q_max, q_min - Q]; per
/// converter max(|P_ac|, |P_dc|) - p_max; per DC bus [V - v_max,
/// v_min - V]; per DC branch max(|P_from|, |P_to|) - p_max.
std::vector<double> constraint_violations(const PowerSystem& sys, const PfState& state, const Dispatch& dispatch);
std::vector<std::string> constraint_labels(const PowerSystem& sys);

struct EnergyBalance {
    double generation = 0.0;
    double res = 0.0;
    double load = 0.0;
    double ac_losses = 0.0;
    double dc_losses = 0.0;
    double converter_losses = 0.0;

    /// generation + res - load - all losses
    double mismatch() const noexcept;
};

EnergyBalance energy_balance(const PowerSystem& sys, const PfState& state);

}  // namespace kanopf::grid
