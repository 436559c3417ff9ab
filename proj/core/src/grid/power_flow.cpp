#include "kanopf/grid/power_flow.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <string>

#include "kanopf/errors.hpp"

namespace kanopf::grid {

namespace {

using Complex = std::complex<double>;

double inf_norm(const Eigen::VectorXd& v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }

double sign(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

void check_dispatch(const PowerSystem& sys, const Dispatch& d) {
    if (d.gen_p.size() != sys.generators.size() || d.gen_v.size() != sys.generators.size() ||
        d.conv_p_dc.size() != sys.converters.size()) {
        throw ShapeError("dispatch does not match the system's generators/converters");
    }
    auto finite = [](const std::vector<double>& v) {
        return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
    };
    if (!finite(d.gen_p) || !finite(d.gen_v) || !finite(d.conv_p_dc)) {
        throw DomainError("dispatch has non-finite entries");
    }
}

}  // namespace

double AcFlow::s_from() const noexcept { return std::hypot(p_from, q_from); }
double AcFlow::s_to() const noexcept { return std::hypot(p_to, q_to); }

double EnergyBalance::mismatch() const noexcept {
    return generation + res - load - ac_losses - dc_losses - converter_losses;
}

Dispatch nominal_dispatch(const PowerSystem& sys) {
    Dispatch d;
    for (const auto& g : sys.generators) {
        d.gen_p.push_back(g.p_setpoint);
        d.gen_v.push_back(sys.ac_buses[static_cast<std::size_t>(sys.ac_index(g.bus))].v_setpoint);
    }
    for (const auto& c : sys.converters) d.conv_p_dc.push_back(c.p_dc_setpoint);
    return d;
}

namespace {

struct Network {
    PowerSystem sys;
    std::size_t n_ac = 0;
    std::size_t n_dc = 0;
    std::size_t n_conv = 0;
    int slack = 0;
    Eigen::MatrixXd g;    // bus conductance
    Eigen::MatrixXd b;    // bus susceptance
    Eigen::MatrixXd gdc;  // DC conductance
    std::vector<int> gen_bus;           // AC bus index per generator
    std::vector<int> bus_setpoint_gen;  // generator index holding the bus voltage, -1 for PQ
    std::vector<int> conv_ac;
    std::vector<int> conv_dc;
    std::vector<double> p_fixed;  // RES injection minus load per AC bus
    std::vector<int> dc_slack_conv;  // converter holding each DC bus voltage, -1 if free
    // Newton unknown layout
    std::vector<int> theta_buses;  // non-slack
    std::vector<int> vm_buses;     // PQ
    std::vector<int> vdc_buses;    // DC buses without a slack converter
    std::vector<int> slack_convs;  // DC-slack converters (P_dc unknown)

    explicit Network(const PowerSystem& s) : sys(s) {
        validate(sys);
        n_ac = sys.ac_buses.size();
        n_dc = sys.dc_buses.size();
        n_conv = sys.converters.size();
        slack = sys.slack_index();

        g = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n_ac), static_cast<Eigen::Index>(n_ac));
        b = g;
        for (const auto& br : sys.ac_branches) {
            if (!br.in_service) continue;
            const Complex y = 1.0 / Complex(br.r, br.x);
            const int f = sys.ac_index(br.from);
            const int t = sys.ac_index(br.to);
            g(f, f) += y.real();
            b(f, f) += y.imag();
            g(t, t) += y.real();
            b(t, t) += y.imag();
            g(f, t) -= y.real();
            b(f, t) -= y.imag();
            g(t, f) -= y.real();
            b(t, f) -= y.imag();
        }
        gdc = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n_dc), static_cast<Eigen::Index>(n_dc));
        for (const auto& br : sys.dc_branches) {
            const double y = 1.0 / br.r;
            const int f = sys.dc_index(br.from);
            const int t = sys.dc_index(br.to);
            gdc(f, f) += y;
            gdc(t, t) += y;
            gdc(f, t) -= y;
            gdc(t, f) -= y;
        }

        bus_setpoint_gen.assign(n_ac, -1);
        for (std::size_t k = 0; k < sys.generators.size(); ++k) {
            const int bus = sys.ac_index(sys.generators[k].bus);
            gen_bus.push_back(bus);
            auto& holder = bus_setpoint_gen[static_cast<std::size_t>(bus)];
            if (holder < 0 || sys.generators[k].id < sys.generators[static_cast<std::size_t>(holder)].id) {
                holder = static_cast<int>(k);
            }
        }
        p_fixed.assign(n_ac, 0.0);
        for (std::size_t i = 0; i < n_ac; ++i) p_fixed[i] = -sys.ac_buses[i].p_load;
        for (const auto& r : sys.res_units) p_fixed[static_cast<std::size_t>(sys.ac_index(r.bus))] += r.output;

        dc_slack_conv.assign(n_dc, -1);
        for (std::size_t c = 0; c < n_conv; ++c) {
            conv_ac.push_back(sys.ac_index(sys.converters[c].ac_bus));
            conv_dc.push_back(sys.dc_index(sys.converters[c].dc_bus));
            if (sys.converters[c].dc_slack) {
                dc_slack_conv[static_cast<std::size_t>(conv_dc.back())] = static_cast<int>(c);
                slack_convs.push_back(static_cast<int>(c));
            }
        }
        for (std::size_t i = 0; i < n_ac; ++i) {
            if (static_cast<int>(i) != slack) theta_buses.push_back(static_cast<int>(i));
            if (sys.ac_buses[i].type == BusType::pq) vm_buses.push_back(static_cast<int>(i));
        }
        for (std::size_t d = 0; d < n_dc; ++d) {
            if (dc_slack_conv[d] < 0) vdc_buses.push_back(static_cast<int>(d));
        }
    }

    // Net injections P_i(V, θ), Q_i(V, θ) leaving each bus into the network.
    void injections(const std::vector<double>& vm, const std::vector<double>& va, Eigen::VectorXd& p,
                    Eigen::VectorXd& q) const {
        const auto n = static_cast<Eigen::Index>(n_ac);
        p.setZero(n);
        q.setZero(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            for (Eigen::Index m = 0; m < n; ++m) {
                if (g(i, m) == 0.0 && b(i, m) == 0.0) continue;
                const double th = va[static_cast<std::size_t>(i)] - va[static_cast<std::size_t>(m)];
                const double c = std::cos(th);
                const double s = std::sin(th);
                const double vv = vm[static_cast<std::size_t>(i)] * vm[static_cast<std::size_t>(m)];
                p(i) += vv * (g(i, m) * c + b(i, m) * s);
                q(i) += vv * (g(i, m) * s - b(i, m) * c);
            }
        }
    }

    Eigen::VectorXd dc_injections(const std::vector<double>& vdc) const {
        const auto n = static_cast<Eigen::Index>(n_dc);
        Eigen::VectorXd p = Eigen::VectorXd::Zero(n);
        for (Eigen::Index d = 0; d < n; ++d) {
            double s = 0.0;
            for (Eigen::Index m = 0; m < n; ++m) s += gdc(d, m) * vdc[static_cast<std::size_t>(m)];
            p(d) = vdc[static_cast<std::size_t>(d)] * s;
        }
        return p;
    }

    // Specified AC active injection at a bus, excluding the slack generator's
    // unknown output and the converter terms.
    double scheduled_p(std::size_t bus, const Dispatch& dispatch) const {
        double s = p_fixed[bus];
        for (std::size_t k = 0; k < gen_bus.size(); ++k) {
            if (static_cast<std::size_t>(gen_bus[k]) == bus) s += dispatch.gen_p[k];
        }
        return s;
    }

    double bus_voltage_setpoint(std::size_t bus, const Dispatch& dispatch) const {
        const int k = bus_setpoint_gen[bus];
        return k < 0 ? 1.0 : dispatch.gen_v[static_cast<std::size_t>(k)];
    }

    Eigen::VectorXd mismatch(const PfState& st, const Dispatch& dispatch) const {
        Eigen::VectorXd p, q;
        injections(st.vm, st.va, p, q);
        const Eigen::VectorXd pdc = dc_injections(st.vdc);
        std::vector<double> conv_p_ac_at(n_ac, 0.0);
        for (std::size_t c = 0; c < n_conv; ++c) conv_p_ac_at[static_cast<std::size_t>(conv_ac[c])] += st.conv_p_ac[c];
        std::vector<double> conv_p_dc_at(n_dc, 0.0);
        for (std::size_t c = 0; c < n_conv; ++c) conv_p_dc_at[static_cast<std::size_t>(conv_dc[c])] += st.conv_p_dc[c];

        Eigen::VectorXd f(static_cast<Eigen::Index>(theta_buses.size() + vm_buses.size() + n_dc + n_conv));
        Eigen::Index r = 0;
        for (int i : theta_buses) {
            const auto u = static_cast<std::size_t>(i);
            f(r++) = p(i) - scheduled_p(u, dispatch) - conv_p_ac_at[u];
        }
        for (int i : vm_buses) f(r++) = q(i) + sys.ac_buses[static_cast<std::size_t>(i)].q_load;
        for (std::size_t d = 0; d < n_dc; ++d) f(r++) = pdc(static_cast<Eigen::Index>(d)) - conv_p_dc_at[d];
        for (std::size_t c = 0; c < n_conv; ++c) {
            f(r++) = st.conv_p_ac[c] + st.conv_p_dc[c] + sys.converters[c].loss(st.conv_p_ac[c]);
        }
        return f;
    }

    Eigen::MatrixXd jacobian(const PfState& st) const {
        const Eigen::Index n_th = static_cast<Eigen::Index>(theta_buses.size());
        const Eigen::Index n_vm = static_cast<Eigen::Index>(vm_buses.size());
        const Eigen::Index n_vdc = static_cast<Eigen::Index>(vdc_buses.size());
        const Eigen::Index n_sc = static_cast<Eigen::Index>(slack_convs.size());
        const Eigen::Index n_c = static_cast<Eigen::Index>(n_conv);
        const Eigen::Index n = n_th + n_vm + n_vdc + n_sc + n_c;
        Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(n, n);

        std::vector<int> th_col(n_ac, -1), vm_col(n_ac, -1), vdc_col(n_dc, -1), pdc_col(n_conv, -1);
        for (Eigen::Index k = 0; k < n_th; ++k) th_col[static_cast<std::size_t>(theta_buses[static_cast<std::size_t>(k)])] = static_cast<int>(k);
        for (Eigen::Index k = 0; k < n_vm; ++k) vm_col[static_cast<std::size_t>(vm_buses[static_cast<std::size_t>(k)])] = static_cast<int>(n_th + k);
        for (Eigen::Index k = 0; k < n_vdc; ++k) vdc_col[static_cast<std::size_t>(vdc_buses[static_cast<std::size_t>(k)])] = static_cast<int>(n_th + n_vm + k);
        for (Eigen::Index k = 0; k < n_sc; ++k) pdc_col[static_cast<std::size_t>(slack_convs[static_cast<std::size_t>(k)])] = static_cast<int>(n_th + n_vm + n_vdc + k);
        const Eigen::Index pac0 = n_th + n_vm + n_vdc + n_sc;

        Eigen::VectorXd p, q;
        injections(st.vm, st.va, p, q);
        const auto& vm = st.vm;
        const auto& va = st.va;

        // AC rows: P at non-slack buses, then Q at PQ buses.
        auto fill_ac_row = [&](Eigen::Index row, int i, bool active) {
            const auto ui = static_cast<std::size_t>(i);
            for (std::size_t m = 0; m < n_ac; ++m) {
                const auto mi = static_cast<Eigen::Index>(m);
                const double gim = g(i, mi);
                const double bim = b(i, mi);
                double d_th, d_vm;
                if (m == ui) {
                    d_th = active ? -q(i) - bim * vm[ui] * vm[ui] : p(i) - gim * vm[ui] * vm[ui];
                    d_vm = active ? p(i) / vm[ui] + gim * vm[ui] : q(i) / vm[ui] - bim * vm[ui];
                } else {
                    if (gim == 0.0 && bim == 0.0) continue;
                    const double th = va[ui] - va[m];
                    const double c = std::cos(th);
                    const double s = std::sin(th);
                    d_th = active ? vm[ui] * vm[m] * (gim * s - bim * c) : -vm[ui] * vm[m] * (gim * c + bim * s);
                    d_vm = active ? vm[ui] * (gim * c + bim * s) : vm[ui] * (gim * s - bim * c);
                }
                if (th_col[m] >= 0) jac(row, th_col[m]) = d_th;
                if (vm_col[m] >= 0) jac(row, vm_col[m]) = d_vm;
            }
            if (active) {
                for (std::size_t c = 0; c < n_conv; ++c) {
                    if (conv_ac[c] == i) jac(row, pac0 + static_cast<Eigen::Index>(c)) = -1.0;
                }
            }
        };
        Eigen::Index row = 0;
        for (int i : theta_buses) fill_ac_row(row++, i, true);
        for (int i : vm_buses) fill_ac_row(row++, i, false);

        for (std::size_t d = 0; d < n_dc; ++d, ++row) {
            const auto di = static_cast<Eigen::Index>(d);
            double s = 0.0;
            for (std::size_t m = 0; m < n_dc; ++m) s += gdc(di, static_cast<Eigen::Index>(m)) * st.vdc[m];
            for (std::size_t m = 0; m < n_dc; ++m) {
                if (vdc_col[m] < 0) continue;
                const double dv = (m == d) ? s + gdc(di, di) * st.vdc[d] : st.vdc[d] * gdc(di, static_cast<Eigen::Index>(m));
                jac(row, vdc_col[m]) = dv;
            }
            for (std::size_t c = 0; c < n_conv; ++c) {
                if (static_cast<std::size_t>(conv_dc[c]) == d && pdc_col[c] >= 0) jac(row, pdc_col[c]) = -1.0;
            }
        }
        for (std::size_t c = 0; c < n_conv; ++c, ++row) {
            const auto& cv = sys.converters[c];
            jac(row, pac0 + static_cast<Eigen::Index>(c)) = 1.0 + cv.loss_b * sign(st.conv_p_ac[c]) + 2.0 * cv.loss_c * st.conv_p_ac[c];
            if (pdc_col[c] >= 0) jac(row, pdc_col[c]) = 1.0;
        }
        return jac;
    }

    PfState flat_start(const Dispatch& dispatch) const {
        PfState st;
        st.vm.assign(n_ac, 1.0);
        st.va.assign(n_ac, 0.0);
        for (std::size_t i = 0; i < n_ac; ++i) {
            if (sys.ac_buses[i].type != BusType::pq) st.vm[i] = bus_voltage_setpoint(i, dispatch);
        }
        st.vdc.assign(n_dc, 1.0);
        for (std::size_t d = 0; d < n_dc; ++d) {
            if (dc_slack_conv[d] >= 0) st.vdc[d] = sys.converters[static_cast<std::size_t>(dc_slack_conv[d])].v_dc_setpoint;
        }
        st.conv_p_ac.assign(n_conv, 0.0);
        st.conv_p_dc.assign(n_conv, 0.0);
        for (std::size_t c = 0; c < n_conv; ++c) {
            if (!sys.converters[c].dc_slack) st.conv_p_dc[c] = dispatch.conv_p_dc[c];
        }
        return st;
    }

    void apply_step(PfState& st, const Eigen::VectorXd& dx) const {
        Eigen::Index k = 0;
        for (int i : theta_buses) st.va[static_cast<std::size_t>(i)] += dx(k++);
        for (int i : vm_buses) st.vm[static_cast<std::size_t>(i)] += dx(k++);
        for (int d : vdc_buses) st.vdc[static_cast<std::size_t>(d)] += dx(k++);
        for (int c : slack_convs) st.conv_p_dc[static_cast<std::size_t>(c)] += dx(k++);
        for (std::size_t c = 0; c < n_conv; ++c) st.conv_p_ac[c] += dx(k++);
    }

    PfState solve(const Dispatch& dispatch, const PowerFlowOptions& options) const {
        check_dispatch(sys, dispatch);
        if (!(options.tolerance > 0.0) || options.max_iterations < 1) {
            throw ConfigError("power flow options: need tolerance > 0 and max_iterations >= 1");
        }
        PfState st = flat_start(dispatch);
        Eigen::VectorXd f = mismatch(st, dispatch);
        double norm = inf_norm(f);
        int it = 0;
        while (!(norm <= options.tolerance)) {
            if (it >= options.max_iterations || !std::isfinite(norm)) {
                throw DivergenceError("power flow did not converge after " + std::to_string(it) +
                                          " iterations (residual " + std::to_string(norm) + ")",
                                      it, norm);
            }
            const Eigen::FullPivLU<Eigen::MatrixXd> lu(jacobian(st));
            if (!lu.isInvertible()) throw SingularJacobianError("power flow Jacobian is singular");
            apply_step(st, lu.solve(-f));
            ++it;
            f = mismatch(st, dispatch);
            norm = inf_norm(f);
        }
        for (int k = 0; k < options.polish_iterations; ++k) {
            const Eigen::FullPivLU<Eigen::MatrixXd> lu(jacobian(st));
            if (!lu.isInvertible()) break;
            PfState trial = st;
            apply_step(trial, lu.solve(-f));
            const Eigen::VectorXd ft = mismatch(trial, dispatch);
            const double nt = inf_norm(ft);
            if (!(nt <= norm)) break;
            st = std::move(trial);
            f = ft;
            norm = nt;
        }
        st.iterations = it;
        st.residual_norm = norm;
        complete(dispatch, st);
        return st;
    }

    void complete(const Dispatch& dispatch, PfState& st) const {
        Eigen::VectorXd p, q;
        injections(st.vm, st.va, p, q);
        const std::size_t n_gen = sys.generators.size();
        st.gen_p = dispatch.gen_p;
        st.gen_q.assign(n_gen, 0.0);
        const int slack_gen = sys.slack_generator();
        {
            const auto sb = static_cast<std::size_t>(slack);
            double conv = 0.0;
            for (std::size_t c = 0; c < n_conv; ++c) {
                if (static_cast<std::size_t>(conv_ac[c]) == sb) conv += st.conv_p_ac[c];
            }
            double others = 0.0;
            for (std::size_t k = 0; k < n_gen; ++k) {
                if (static_cast<std::size_t>(gen_bus[k]) == sb && static_cast<int>(k) != slack_gen) others += dispatch.gen_p[k];
            }
            st.gen_p[static_cast<std::size_t>(slack_gen)] = p(slack) - p_fixed[sb] - conv - others;
        }
        // Reactive output of a voltage-controlled bus is shared equally by its generators.
        for (std::size_t i = 0; i < n_ac; ++i) {
            if (sys.ac_buses[i].type == BusType::pq) continue;
            int count = 0;
            for (std::size_t k = 0; k < n_gen; ++k) count += static_cast<std::size_t>(gen_bus[k]) == i ? 1 : 0;
            const double qi = q(static_cast<Eigen::Index>(i)) + sys.ac_buses[i].q_load;
            for (std::size_t k = 0; k < n_gen; ++k) {
                if (static_cast<std::size_t>(gen_bus[k]) == i) st.gen_q[k] = qi / count;
            }
        }
        st.ac_flows.clear();
        for (const auto& br : sys.ac_branches) {
            AcFlow fl;
            if (br.in_service) {
                const auto f = static_cast<std::size_t>(sys.ac_index(br.from));
                const auto t = static_cast<std::size_t>(sys.ac_index(br.to));
                const Complex y = 1.0 / Complex(br.r, br.x);
                const Complex vf = std::polar(st.vm[f], st.va[f]);
                const Complex vt = std::polar(st.vm[t], st.va[t]);
                const Complex sf = vf * std::conj(y * (vf - vt));
                const Complex stt = vt * std::conj(y * (vt - vf));
                fl = {sf.real(), sf.imag(), stt.real(), stt.imag()};
            }
            st.ac_flows.push_back(fl);
        }
        st.dc_flows.clear();
        for (const auto& br : sys.dc_branches) {
            const double vf = st.vdc[static_cast<std::size_t>(sys.dc_index(br.from))];
            const double vt = st.vdc[static_cast<std::size_t>(sys.dc_index(br.to))];
            st.dc_flows.push_back({vf * (vf - vt) / br.r, vt * (vt - vf) / br.r});
        }
    }
};

}  // namespace

struct PowerFlowSolver::Impl : Network {
    using Network::Network;
};

PowerFlowSolver::PowerFlowSolver(const PowerSystem& sys) : impl_(std::make_unique<Impl>(sys)) {}
PowerFlowSolver::~PowerFlowSolver() = default;
PowerFlowSolver::PowerFlowSolver(PowerFlowSolver&&) noexcept = default;
PowerFlowSolver& PowerFlowSolver::operator=(PowerFlowSolver&&) noexcept = default;

PfState PowerFlowSolver::solve(const Dispatch& dispatch, const PowerFlowOptions& options) const {
    return impl_->solve(dispatch, options);
}

const PowerSystem& PowerFlowSolver::system() const noexcept { return impl_->sys; }

PfState newton_power_flow(const PowerSystem& sys, const Dispatch& dispatch, const PowerFlowOptions& options) {
    return PowerFlowSolver(sys).solve(dispatch, options);
}

void complete_state(const PowerSystem& sys, const Dispatch& dispatch, PfState& state) {
    check_dispatch(sys, dispatch);
    const Network impl(sys);
    impl.complete(dispatch, state);
}

std::vector<double> pf_residuals(const PowerSystem& sys, const Dispatch& dispatch, const PfState& state) {
    check_dispatch(sys, dispatch);
    const std::size_t n_ac = sys.ac_buses.size();
    const std::size_t n_dc = sys.dc_buses.size();
    const std::size_t n_conv = sys.converters.size();
    const std::size_t n_gen = sys.generators.size();
    if (state.vm.size() != n_ac || state.va.size() != n_ac || state.vdc.size() != n_dc ||
        state.conv_p_ac.size() != n_conv || state.conv_p_dc.size() != n_conv || state.gen_p.size() != n_gen ||
        state.gen_q.size() != n_gen) {
        throw ShapeError("pf_residuals: state does not match the system");
    }
    const Network impl(sys);
    Eigen::VectorXd p, q;
    impl.injections(state.vm, state.va, p, q);
    const Eigen::VectorXd pdc = impl.dc_injections(state.vdc);
    const int slack_gen = sys.slack_generator();

    std::vector<double> r;
    std::vector<double> p_spec(impl.p_fixed), q_spec(n_ac, 0.0);
    for (std::size_t i = 0; i < n_ac; ++i) q_spec[i] = -sys.ac_buses[i].q_load;
    for (std::size_t k = 0; k < n_gen; ++k) {
        const auto bus = static_cast<std::size_t>(impl.gen_bus[k]);
        p_spec[bus] += static_cast<int>(k) == slack_gen ? state.gen_p[k] : dispatch.gen_p[k];
        q_spec[bus] += state.gen_q[k];
    }
    for (std::size_t c = 0; c < n_conv; ++c) p_spec[static_cast<std::size_t>(impl.conv_ac[c])] += state.conv_p_ac[c];
    for (std::size_t i = 0; i < n_ac; ++i) r.push_back(p(static_cast<Eigen::Index>(i)) - p_spec[i]);
    for (std::size_t i = 0; i < n_ac; ++i) r.push_back(q(static_cast<Eigen::Index>(i)) - q_spec[i]);
    for (std::size_t i = 0; i < n_ac; ++i) {
        if (sys.ac_buses[i].type != BusType::pq) r.push_back(state.vm[i] - impl.bus_voltage_setpoint(i, dispatch));
    }
    r.push_back(state.va[static_cast<std::size_t>(impl.slack)]);
    std::vector<double> dc_spec(n_dc, 0.0);
    for (std::size_t c = 0; c < n_conv; ++c) dc_spec[static_cast<std::size_t>(impl.conv_dc[c])] += state.conv_p_dc[c];
    for (std::size_t d = 0; d < n_dc; ++d) r.push_back(pdc(static_cast<Eigen::Index>(d)) - dc_spec[d]);
    for (std::size_t c = 0; c < n_conv; ++c) {
        const auto& cv = sys.converters[c];
        if (cv.dc_slack) r.push_back(state.vdc[static_cast<std::size_t>(impl.conv_dc[c])] - cv.v_dc_setpoint);
    }
    for (std::size_t c = 0; c < n_conv; ++c) {
        if (!sys.converters[c].dc_slack) r.push_back(state.conv_p_dc[c] - dispatch.conv_p_dc[c]);
    }
    for (std::size_t c = 0; c < n_conv; ++c) {
        r.push_back(state.conv_p_ac[c] + state.conv_p_dc[c] + sys.converters[c].loss(state.conv_p_ac[c]));
    }
    return r;
}

std::vector<double> constraint_violations(const PowerSystem& sys, const PfState& state, const Dispatch& dispatch) {
    check_dispatch(sys, dispatch);
    std::vector<double> h;
    for (std::size_t i = 0; i < sys.ac_buses.size(); ++i) {
        h.push_back(state.vm[i] - sys.ac_buses[i].v_max);
        h.push_back(sys.ac_buses[i].v_min - state.vm[i]);
    }
    for (std::size_t k = 0; k < sys.ac_branches.size(); ++k) {
        const auto& fl = state.ac_flows[k];
        h.push_back(std::max(fl.s_from(), fl.s_to()) - sys.ac_branches[k].s_max);
    }
    for (std::size_t k = 0; k < sys.generators.size(); ++k) {
        const auto& gen = sys.generators[k];
        h.push_back(state.gen_p[k] - gen.p_max);
        h.push_back(gen.p_min - state.gen_p[k]);
        h.push_back(state.gen_q[k] - gen.q_max);
        h.push_back(gen.q_min - state.gen_q[k]);
    }
    for (std::size_t c = 0; c < sys.converters.size(); ++c) {
        h.push_back(std::max(std::abs(state.conv_p_ac[c]), std::abs(state.conv_p_dc[c])) - sys.converters[c].p_max);
    }
    for (std::size_t d = 0; d < sys.dc_buses.size(); ++d) {
        h.push_back(state.vdc[d] - sys.dc_buses[d].v_max);
        h.push_back(sys.dc_buses[d].v_min - state.vdc[d]);
    }
    for (std::size_t k = 0; k < sys.dc_branches.size(); ++k) {
        const auto& fl = state.dc_flows[k];
        h.push_back(std::max(std::abs(fl.p_from), std::abs(fl.p_to)) - sys.dc_branches[k].p_max);
    }
    return h;
}

std::vector<std::string> constraint_labels(const PowerSystem& sys) {
    std::vector<std::string> out;
    auto id = [](int v) { return std::to_string(v); };
    for (const auto& bus : sys.ac_buses) {
        out.push_back("bus_vm_max:" + id(bus.id));
        out.push_back("bus_vm_min:" + id(bus.id));
    }
    for (const auto& br : sys.ac_branches) out.push_back("branch_s_max:" + id(br.id));
    for (const auto& gen : sys.generators) {
        out.push_back("gen_p_max:" + id(gen.id));
        out.push_back("gen_p_min:" + id(gen.id));
        out.push_back("gen_q_max:" + id(gen.id));
        out.push_back("gen_q_min:" + id(gen.id));
    }
    for (const auto& c : sys.converters) out.push_back("conv_p_max:" + id(c.id));
    for (const auto& bus : sys.dc_buses) {
        out.push_back("dc_vm_max:" + id(bus.id));
        out.push_back("dc_vm_min:" + id(bus.id));
    }
    for (const auto& br : sys.dc_branches) out.push_back("dc_branch_p_max:" + id(br.id));
    return out;
}

EnergyBalance energy_balance(const PowerSystem& sys, const PfState& state) {
    EnergyBalance e;
    for (double p : state.gen_p) e.generation += p;
    for (const auto& r : sys.res_units) e.res += r.output;
    e.load = sys.total_load();
    for (const auto& fl : state.ac_flows) e.ac_losses += fl.p_from + fl.p_to;
    for (const auto& fl : state.dc_flows) e.dc_losses += fl.p_from + fl.p_to;
    for (std::size_t c = 0; c < sys.converters.size(); ++c) {
        e.converter_losses += -(state.conv_p_ac[c] + state.conv_p_dc[c]);
    }
    return e;
}

}  // namespace kanopf::grid
