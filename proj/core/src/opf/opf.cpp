#include "kanopf/opf/opf.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <numeric>

#include "kanopf/errors.hpp"
#include "kanopf/random.hpp"

namespace kanopf::opf {

namespace {

using grid::Dispatch;
using grid::PfState;
using grid::PowerSystem;

constexpr double kInf = std::numeric_limits<double>::infinity();

double max_of(const std::vector<double>& v) {
    return v.empty() ? -kInf : *std::max_element(v.begin(), v.end());
}

// Reduced problem: decision vector u -> dispatch -> power flow -> (F, h).
class Problem {
public:
    Problem(const PowerSystem& sys, const OpfOptions& options)
        : sys_(sys), solver_(sys), options_(options), base_(grid::nominal_dispatch(sys)) {
        const int slack_gen = sys.slack_generator();
        for (std::size_t g = 0; g < sys.generators.size(); ++g) {
            if (static_cast<int>(g) == slack_gen) continue;
            gens_.push_back(g);
            lower_.push_back(sys.generators[g].p_min);
            upper_.push_back(sys.generators[g].p_max);
        }
        for (std::size_t c = 0; c < sys.converters.size(); ++c) {
            if (sys.converters[c].dc_slack) continue;
            convs_.push_back(c);
            lower_.push_back(-sys.converters[c].p_max);
            upper_.push_back(sys.converters[c].p_max);
        }
        for (const auto& g : sys.generators) {
            scale_ += std::abs(g.c1) + 2.0 * std::abs(g.c2) * std::max(std::abs(g.p_min), std::abs(g.p_max));
        }
    }

    std::size_t dim() const noexcept { return lower_.size(); }
    double scale() const noexcept { return scale_; }

    void project(std::vector<double>& u) const {
        for (std::size_t k = 0; k < u.size(); ++k) u[k] = std::clamp(u[k], lower_[k], upper_[k]);
    }

    Dispatch dispatch(const std::vector<double>& u) const {
        Dispatch d = base_;
        std::size_t k = 0;
        for (std::size_t g : gens_) d.gen_p[g] = u[k++];
        for (std::size_t c : convs_) d.conv_p_dc[c] = u[k++];
        return d;
    }

    // Merit-order start: cheapest marginal cost first, lowest id on ties.
    std::vector<double> initial_point() const {
        std::vector<std::size_t> order(sys_.generators.size());
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            const auto& ga = sys_.generators[a];
            const auto& gb = sys_.generators[b];
            const double ma = ga.c1 + 2.0 * ga.c2 * ga.p_min;
            const double mb = gb.c1 + 2.0 * gb.c2 * gb.p_min;
            if (ma != mb) return ma < mb;
            return ga.id < gb.id;
        });
        double residual = sys_.total_load();
        for (const auto& r : sys_.res_units) residual -= r.output;
        std::vector<double> pg(sys_.generators.size(), 0.0);
        for (const auto& g : sys_.generators) residual -= g.p_min;
        for (std::size_t g : order) {
            const auto& gen = sys_.generators[g];
            const double extra = std::clamp(residual, 0.0, gen.p_max - gen.p_min);
            pg[g] = gen.p_min + extra;
            residual -= extra;
        }
        std::vector<double> u;
        for (std::size_t g : gens_) u.push_back(pg[g]);
        for (std::size_t c : convs_) u.push_back(sys_.converters[c].p_dc_setpoint);
        project(u);
        return u;
    }

    struct Eval {
        bool ok = false;
        double objective = 0.0;
        std::vector<double> h;
        PfState state;
    };

    Eval evaluate(const std::vector<double>& u) const {
        Eval e;
        const Dispatch d = dispatch(u);
        try {
            e.state = solver_.solve(d, {options_.pf_tolerance, 50, 1});
        } catch (const NumericError&) {
            return e;
        }
        for (std::size_t g = 0; g < sys_.generators.size(); ++g) e.objective += sys_.generators[g].cost(e.state.gen_p[g]);
        e.h = grid::constraint_violations(sys_, e.state, d);
        e.ok = true;
        return e;
    }

    // Augmented Lagrangian on the scaled objective.
    double lagrangian(const Eval& e, const std::vector<double>& mu, double rho) const {
        if (!e.ok) return kInf;
        double l = e.objective / scale_;
        for (std::size_t i = 0; i < e.h.size(); ++i) {
            const double t = std::max(0.0, mu[i] + rho * e.h[i]);
            l += (t * t - mu[i] * mu[i]) / (2.0 * rho);
        }
        return l;
    }

    double lagrangian(const std::vector<double>& u, const std::vector<double>& mu, double rho) const {
        return lagrangian(evaluate(u), mu, rho);
    }

    // Central differences; one-sided at the box faces.
    bool gradient(const std::vector<double>& u, const std::vector<double>& mu, double rho,
                  std::vector<double>& grad) const {
        grad.assign(u.size(), 0.0);
        const double h = options_.fd_step;
        for (std::size_t k = 0; k < u.size(); ++k) {
            std::vector<double> up = u, dn = u;
            up[k] = std::min(u[k] + h, upper_[k]);
            dn[k] = std::max(u[k] - h, lower_[k]);
            if (up[k] == dn[k]) continue;
            const double lp = lagrangian(up, mu, rho);
            const double ln = lagrangian(dn, mu, rho);
            if (!std::isfinite(lp) || !std::isfinite(ln)) return false;
            grad[k] = (lp - ln) / (up[k] - dn[k]);
        }
        return true;
    }

    double projected_gradient_norm(const std::vector<double>& u, const std::vector<double>& grad) const {
        double n = 0.0;
        for (std::size_t k = 0; k < u.size(); ++k) {
            const double moved = std::clamp(u[k] - grad[k], lower_[k], upper_[k]);
            n = std::max(n, std::abs(moved - u[k]));
        }
        return n;
    }

private:
    const PowerSystem& sys_;
    grid::PowerFlowSolver solver_;
    OpfOptions options_;
    Dispatch base_;
    std::vector<std::size_t> gens_;
    std::vector<std::size_t> convs_;
    std::vector<double> lower_;
    std::vector<double> upper_;
    double scale_ = 1.0;
};

// Projected gradient descent with Barzilai-Borwein steps and Armijo
// backtracking. Returns the number of iterations; `converged` is set when
// the projected-gradient test is met, or when the line search stalls at the
// finite-difference noise floor within 1000x the tolerance.
int minimize_inner(const Problem& prob, std::vector<double>& u, const std::vector<double>& mu, double rho,
                   const OpfOptions& options, bool& converged) {
    converged = false;
    std::vector<double> grad;
    if (!prob.gradient(u, mu, rho, grad)) throw NumericError("power flow failed around the current dispatch");
    double value = prob.lagrangian(u, mu, rho);
    const double gmax = std::accumulate(grad.begin(), grad.end(), 0.0,
                                        [](double a, double g) { return std::max(a, std::abs(g)); });
    double step = gmax > 0.0 ? 0.1 / gmax : 1.0;
    int it = 0;
    for (; it < options.max_inner; ++it) {
        if (prob.projected_gradient_norm(u, grad) <= options.stationarity_tolerance) {
            converged = true;
            break;
        }
        std::vector<double> trial(u.size());
        double trial_value = kInf;
        bool accepted = false;
        for (int bt = 0; bt < 60; ++bt) {
            for (std::size_t k = 0; k < u.size(); ++k) trial[k] = u[k] - step * grad[k];
            prob.project(trial);
            double decrease = 0.0;
            for (std::size_t k = 0; k < u.size(); ++k) decrease += grad[k] * (trial[k] - u[k]);
            trial_value = prob.lagrangian(trial, mu, rho);
            if (trial_value <= value + 1e-4 * decrease) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) {
            converged = prob.projected_gradient_norm(u, grad) <= 1e3 * options.stationarity_tolerance;
            break;
        }
        std::vector<double> next_grad;
        if (!prob.gradient(trial, mu, rho, next_grad)) break;
        double ss = 0.0, sy = 0.0;
        for (std::size_t k = 0; k < u.size(); ++k) {
            const double s = trial[k] - u[k];
            const double y = next_grad[k] - grad[k];
            ss += s * s;
            sy += s * y;
        }
        step = sy > 0.0 ? std::clamp(ss / sy, 1e-12, 1e12) : std::min(step * 4.0, 1e12);
        u = std::move(trial);
        grad = std::move(next_grad);
        value = trial_value;
        if (ss == 0.0) {
            converged = prob.projected_gradient_norm(u, grad) <= 1e3 * options.stationarity_tolerance;
            break;
        }
    }
    if (!converged && it == options.max_inner) {
        converged = prob.projected_gradient_norm(u, grad) <= options.stationarity_tolerance;
    }
    return it;
}

OpfSolution finish(const Problem& prob, const std::vector<double>& u, int iterations,
                   int outer, bool converged) {
    OpfSolution sol;
    const auto e = prob.evaluate(u);
    if (!e.ok) throw NumericError("power flow failed at the final dispatch");
    sol.dispatch = prob.dispatch(u);
    sol.state = e.state;
    sol.objective = e.objective;
    sol.violation_report = e.h;
    sol.max_violation = std::max(0.0, max_of(e.h));
    sol.converged = converged;
    sol.iterations = iterations;
    sol.outer_rounds = outer;
    return sol;
}

}  // namespace

OpfSolution solve_opf(const PowerSystem& sys, const OpfOptions& options) {
    double available = 0.0;
    for (const auto& g : sys.generators) available += g.p_max;
    for (const auto& r : sys.res_units) available += r.output;
    const double deficit = sys.total_load() - available;
    if (deficit > options.feasibility_tolerance) {
        throw InfeasibleError("load exceeds generation capacity by " + std::to_string(deficit) + " p.u.", deficit);
    }

    const Problem prob(sys, options);
    std::vector<double> u = prob.initial_point();
    const auto start = prob.evaluate(u);
    if (!start.ok) throw NumericError("power flow failed at the initial dispatch");
    std::vector<double> mu(start.h.size(), 0.0);
    double rho = options.initial_penalty;
    double previous = kInf;
    int iterations = 0;
    double worst = kInf;
    for (int outer = 1; outer <= options.max_outer; ++outer) {
        bool inner_ok = false;
        iterations += minimize_inner(prob, u, mu, rho, options, inner_ok);
        const auto e = prob.evaluate(u);
        if (!e.ok) throw NumericError("power flow failed at the current dispatch");
        worst = std::max(0.0, max_of(e.h));
        if (worst <= options.feasibility_tolerance && inner_ok) {
            return finish(prob, u, iterations, outer, true);
        }
        for (std::size_t i = 0; i < mu.size(); ++i) mu[i] = std::max(0.0, mu[i] + rho * e.h[i]);
        if (worst > 0.25 * previous) rho = std::min(rho * 10.0, options.max_penalty);
        previous = worst;
    }
    if (worst <= options.feasibility_tolerance) {
        return finish(prob, u, iterations, options.max_outer, true);
    }
    throw InfeasibleError("no feasible dispatch found, worst violation " + std::to_string(worst), worst);
}

OpfSolution solve_opf(const PowerSystem& sys, std::span<const double> xi, const OpfOptions& options) {
    return solve_opf(grid::apply_scenario(sys, xi), options);
}

std::string OutputSelector::text() const {
    switch (kind) {
        case SelectorKind::objective: return "objective";
        case SelectorKind::gen_p: return "gen_p:" + std::to_string(id);
        case SelectorKind::bus_vm: return "bus_vm:" + std::to_string(id);
        case SelectorKind::branch_flow: return "branch_flow:" + std::to_string(id);
        case SelectorKind::conv_p: return "conv_p:" + std::to_string(id);
    }
    return "objective";
}

OutputSelector OutputSelector::parse(const std::string& text) {
    if (text == "objective") return {};
    const auto colon = text.find(':');
    if (colon == std::string::npos) throw SpecError("unknown output selector '" + text + "'");
    const std::string head = text.substr(0, colon);
    OutputSelector s;
    if (head == "gen_p") {
        s.kind = SelectorKind::gen_p;
    } else if (head == "bus_vm") {
        s.kind = SelectorKind::bus_vm;
    } else if (head == "branch_flow") {
        s.kind = SelectorKind::branch_flow;
    } else if (head == "conv_p") {
        s.kind = SelectorKind::conv_p;
    } else {
        throw SpecError("unknown output selector '" + text + "'");
    }
    const char* first = text.data() + colon + 1;
    const char* last = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(first, last, s.id);
    if (ec != std::errc() || ptr != last || first == last) {
        throw SpecError("output selector '" + text + "' needs an integer id");
    }
    return s;
}

OutputSpec OutputSpec::parse(const std::vector<std::string>& texts) {
    OutputSpec spec;
    for (const auto& t : texts) spec.selectors.push_back(OutputSelector::parse(t));
    if (spec.selectors.empty()) throw SpecError("output spec is empty");
    return spec;
}

std::vector<std::string> OutputSpec::names() const {
    std::vector<std::string> out;
    for (const auto& s : selectors) out.push_back(s.text());
    return out;
}

void OutputSpec::validate(const PowerSystem& sys) const {
    if (selectors.empty()) throw SpecError("output spec is empty");
    for (const auto& s : selectors) {
        switch (s.kind) {
            case SelectorKind::objective: break;
            case SelectorKind::gen_p: sys.generator_index(s.id); break;
            case SelectorKind::bus_vm: sys.ac_index(s.id); break;
            case SelectorKind::branch_flow: sys.branch_index(s.id); break;
            case SelectorKind::conv_p: sys.converter_index(s.id); break;
        }
    }
}

std::uint64_t OutputSpec::fingerprint() const {
    std::string joined;
    for (const auto& s : selectors) joined += s.text() + ";";
    return fnv1a64(joined.data(), joined.size());
}

std::vector<double> extract_outputs(const PowerSystem& sys, const OpfSolution& sol, const OutputSpec& spec) {
    if (!sol.converged) throw NumericError("extract_outputs: solution is not converged");
    spec.validate(sys);
    std::vector<double> y;
    for (const auto& s : spec.selectors) {
        switch (s.kind) {
            case SelectorKind::objective: y.push_back(sol.objective); break;
            case SelectorKind::gen_p:
                y.push_back(sol.state.gen_p.at(static_cast<std::size_t>(sys.generator_index(s.id))));
                break;
            case SelectorKind::bus_vm: y.push_back(sol.state.vm.at(static_cast<std::size_t>(sys.ac_index(s.id)))); break;
            case SelectorKind::branch_flow:
                y.push_back(sol.state.ac_flows.at(static_cast<std::size_t>(sys.branch_index(s.id))).p_from);
                break;
            case SelectorKind::conv_p:
                y.push_back(sol.state.conv_p_ac.at(static_cast<std::size_t>(sys.converter_index(s.id))));
                break;
        }
    }
    return y;
}

}  // namespace kanopf::opf
