#pragma once

// Independent reference implementations used as test oracles. None of
// these call into the library code they are checking.

#include <cmath>
#include <filesystem>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "kanopf/grid/power_system.hpp"
#include "kanopf/kan/network.hpp"

namespace kanopf::test {

// Uniformly extended knot vector: G + 2k + 1 knots from t_min - k·h.
inline std::vector<double> extended_knots(double lo, double hi, int G, int k) {
    const double h = (hi - lo) / G;
    std::vector<double> t;
    for (int m = -k; m <= G + k; ++m) t.push_back(lo + m * h);
    return t;
}

// Textbook Cox-de Boor recursion with half-open degree-0 indicators.
inline double cox_de_boor(const std::vector<double>& t, int i, int k, double x) {
    if (k == 0) return (t[i] <= x && x < t[i + 1]) ? 1.0 : 0.0;
    double left = 0.0;
    double right = 0.0;
    if (t[i + k] != t[i]) left = (x - t[i]) / (t[i + k] - t[i]) * cox_de_boor(t, i, k - 1, x);
    if (t[i + k + 1] != t[i + 1]) {
        right = (t[i + k + 1] - x) / (t[i + k + 1] - t[i + 1]) * cox_de_boor(t, i + 1, k - 1, x);
    }
    return left + right;
}

inline std::vector<double> oracle_basis(double lo, double hi, int G, int k, double x) {
    const auto t = extended_knots(lo, hi, G, k);
    std::vector<double> b(static_cast<std::size_t>(G + k));
    for (int i = 0; i < G + k; ++i) b[static_cast<std::size_t>(i)] = cox_de_boor(t, i, k, x);
    return b;
}

// Least-squares coefficients of f on the oracle basis over n uniform points.
template <class F>
std::vector<double> fit_coefficients(double lo, double hi, int G, int k, F f, int n = 400) {
    Eigen::MatrixXd A(n, G + k);
    Eigen::VectorXd y(n);
    for (int r = 0; r < n; ++r) {
        const double x = lo + (hi - lo) * r / (n - 1.0);
        const auto b = oracle_basis(lo, hi, G, k, x == hi ? std::nextafter(hi, lo) : x);
        for (int c = 0; c < G + k; ++c) A(r, c) = b[static_cast<std::size_t>(c)];
        y(r) = f(x);
    }
    const Eigen::VectorXd c = A.colPivHouseholderQr().solve(y);
    return {c.data(), c.data() + c.size()};
}

// Edge with w_b = 0, w_s = 1 whose spline is the least-squares identity.
inline kan::SplineEdge identity_edge(double lo = -1.0, double hi = 1.0, int G = 5, int k = 3) {
    return kan::SplineEdge(kan::SplineGrid(lo, hi, G, k), fit_coefficients(lo, hi, G, k, [](double x) { return x; }),
                           0.0, 1.0);
}

inline double silu_reference(double x) { return x / (1.0 + std::exp(-x)); }

inline std::vector<double> uniform_samples(std::size_t n, double lo, double hi, std::uint64_t seed) {
    std::mt19937_64 eng(seed);
    std::uniform_real_distribution<double> u(lo, hi);
    std::vector<double> v(n);
    for (double& x : v) x = u(eng);
    return v;
}

// Two AC buses joined by one branch: bus 1 slack (generator 1), bus 2 PV
// with a zero-output generator 2 holding V = 1, load p_load at bus 2.
inline grid::PowerSystem two_bus(double p_load, double r = 0.0, double x = 0.1) {
    grid::PowerSystem s;
    s.name = "two_bus";
    s.ac_buses = {{1, grid::BusType::slack, 0.9, 1.1, 0.0, 0.0, 1.0}, {2, grid::BusType::pv, 0.9, 1.1, p_load, 0.0, 1.0}};
    s.ac_branches = {{1, 1, 2, r, x, 10.0, true}};
    s.generators = {{1, 1, 0.0, 10.0, -10.0, 10.0, 0.0, 10.0, 0.0, 0.0},
                    {2, 2, 0.0, 10.0, -10.0, 10.0, 0.0, 30.0, 0.0, 0.0}};
    return s;
}

// Three-bus lossless toy: generator 1 (10·P, cap 0.6) at slack bus 1,
// generator 2 (30·P) at PV bus 2, load at PQ bus 3.
inline grid::PowerSystem two_generator_toy(double load = 0.8, double cap1 = 0.6) {
    grid::PowerSystem s;
    s.name = "two_generator_toy";
    s.ac_buses = {{1, grid::BusType::slack, 0.9, 1.1, 0.0, 0.0, 1.0},
                  {2, grid::BusType::pv, 0.9, 1.1, 0.0, 0.0, 1.0},
                  {3, grid::BusType::pq, 0.8, 1.2, load, 0.0, 1.0}};
    s.ac_branches = {{1, 1, 3, 0.0, 0.05, 10.0, true}, {2, 2, 3, 0.0, 0.05, 10.0, true}};
    s.generators = {{1, 1, 0.0, cap1, -5.0, 5.0, 0.0, 10.0, 0.0, 0.0}, {2, 2, 0.0, 1.0, -5.0, 5.0, 0.0, 30.0, 0.0, 0.5}};
    return s;
}

struct GridSearchOptimum {
    double p1 = 0.0;
    double p2 = 0.0;
    double cost = std::numeric_limits<double>::infinity();
};

// Exhaustive search over the 2-D dispatch box at `step` for a lossless
// system: feasible points balance generation and load to within step/2.
inline GridSearchOptimum grid_search_lossless(const grid::Generator& g1, const grid::Generator& g2, double load,
                                              double step = 1e-3) {
    GridSearchOptimum best;
    const int n1 = static_cast<int>(std::round((g1.p_max - g1.p_min) / step));
    const int n2 = static_cast<int>(std::round((g2.p_max - g2.p_min) / step));
    for (int a = 0; a <= n1; ++a) {
        const double p1 = g1.p_min + a * step;
        for (int b = 0; b <= n2; ++b) {
            const double p2 = g2.p_min + b * step;
            if (std::abs(p1 + p2 - load) > 0.5 * step) continue;
            const double cost = g1.c0 + g1.c1 * p1 + g1.c2 * p1 * p1 + g2.c0 + g2.c1 * p2 + g2.c2 * p2 * p2;
            if (cost < best.cost) best = {p1, p2, cost};
        }
    }
    return best;
}

inline std::filesystem::path fresh_dir(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / ("kanopf_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

inline std::string slurp(const std::filesystem::path& p) {
    std::FILE* f = std::fopen(p.string().c_str(), "rb");
    if (!f) return {};
    std::string s;
    char buf[4096];
    std::size_t n;
    while ((n = std::fread(buf, 1, sizeof buf, f)) > 0) s.append(buf, n);
    std::fclose(f);
    return s;
}

}  // namespace kanopf::test
