#include "kanopf/kan/spline.hpp"

#include <array>
#include <cmath>
#include <string>

#include "kanopf/errors.hpp"

namespace kanopf::kan {

namespace {
constexpr int kMaxDegree = 16;
}

SplineGrid::SplineGrid(double t_min, double t_max, int num_intervals, int degree)
    : t_min_(t_min), t_max_(t_max), num_intervals_(num_intervals), degree_(degree) {
    if (!std::isfinite(t_min) || !std::isfinite(t_max) || !(t_min < t_max)) {
        throw DomainError("SplineGrid: need finite t_min < t_max, got [" + std::to_string(t_min) +
                          ", " + std::to_string(t_max) + "]");
    }
    if (num_intervals < 1) throw DomainError("SplineGrid: num_intervals must be >= 1");
    if (degree < 0 || degree > kMaxDegree) {
        throw DomainError("SplineGrid: degree must be in [0, " + std::to_string(kMaxDegree) + "]");
    }
    const int count = num_intervals + 2 * degree + 1;
    knots_.resize(static_cast<std::size_t>(count));
    for (int m = 0; m < count; ++m) knots_[m] = knot(m);
}

double SplineGrid::knot(int m) const noexcept {
    const int offset = m - degree_;
    if (offset == num_intervals_) return t_max_;
    return t_min_ + offset * (t_max_ - t_min_) / num_intervals_;
}

LocalBasis local_basis(const SplineGrid& grid, double x, std::span<double> values,
                       std::span<double> derivatives) {
    if (!std::isfinite(x)) throw DomainError("bspline basis: non-finite input");
    const int k = grid.degree();
    const int G = grid.num_intervals();
    for (int r = 0; r <= k; ++r) values[r] = 0.0;
    if (!derivatives.empty()) {
        for (int r = 0; r <= k; ++r) derivatives[r] = 0.0;
    }

    const int last_interval = G + 2 * k - 1;
    if (x < grid.knot(0) || x >= grid.knot(last_interval + 1)) return {0, false};

    int j;
    if (x == grid.t_max()) {
        j = G + k - 1;  // right end of the domain is closed
    } else {
        const double h = grid.spacing();
        j = static_cast<int>(std::floor((x - grid.t_min()) / h)) + k;
        if (j < 0) j = 0;
        if (j > last_interval) j = last_interval;
        while (j > 0 && x < grid.knot(j)) --j;
        while (j < last_interval && x >= grid.knot(j + 1)) ++j;
    }

    // Triangular Cox-de Boor scheme; lower[] holds the degree k-1 values
    // needed for the derivative.
    std::array<double, kMaxDegree + 1> left{};
    std::array<double, kMaxDegree + 1> right{};
    std::array<double, kMaxDegree + 1> lower{};
    values[0] = 1.0;
    for (int p = 1; p <= k; ++p) {
        if (p == k) {
            for (int r = 0; r < k; ++r) lower[r] = values[r];
        }
        left[p] = x - grid.knot(j + 1 - p);
        right[p] = grid.knot(j + p) - x;
        double saved = 0.0;
        for (int r = 0; r < p; ++r) {
            const double denom = right[r + 1] + left[p - r];
            const double temp = values[r] / denom;
            values[r] = saved + right[r + 1] * temp;
            saved = left[p - r] * temp;
        }
        values[p] = saved;
    }

    if (!derivatives.empty() && k >= 1) {
        const double inv_h = 1.0 / grid.spacing();
        for (int r = 0; r <= k; ++r) {
            const double prev = r >= 1 ? lower[r - 1] : 0.0;
            const double cur = r < k ? lower[r] : 0.0;
            derivatives[r] = (prev - cur) * inv_h;
        }
    }
    return {j - k, true};
}

namespace {

std::vector<double> scatter(const SplineGrid& grid, double x, bool derivative) {
    const int k = grid.degree();
    std::array<double, kMaxDegree + 1> values{};
    std::array<double, kMaxDegree + 1> derivs{};
    const std::span<double> vspan(values.data(), static_cast<std::size_t>(k + 1));
    const std::span<double> dspan(derivs.data(), static_cast<std::size_t>(k + 1));
    const LocalBasis lb = local_basis(grid, x, vspan, derivative ? dspan : std::span<double>{});
    std::vector<double> out(static_cast<std::size_t>(grid.basis_count()), 0.0);
    if (!lb.inside) return out;
    const auto& src = derivative ? derivs : values;
    for (int r = 0; r <= k; ++r) {
        const int idx = lb.first + r;
        if (idx >= 0 && idx < grid.basis_count()) {
            out[idx] = src[r];
        }
    }
    return out;
}

}  // namespace

std::vector<double> bspline_basis(double x, const SplineGrid& grid) {
    return scatter(grid, x, false);
}

std::vector<double> bspline_basis_derivative(double x, const SplineGrid& grid) {
    return scatter(grid, x, true);
}

double spline_value(const SplineGrid& grid, std::span<const double> coeffs, double x) {
    const int k = grid.degree();
    std::array<double, kMaxDegree + 1> values{};
    const LocalBasis lb =
        local_basis(grid, x, std::span<double>(values.data(), static_cast<std::size_t>(k + 1)));
    if (!lb.inside) return 0.0;
    double sum = 0.0;
    for (int r = 0; r <= k; ++r) {
        const int idx = lb.first + r;
        if (idx >= 0 && idx < grid.basis_count()) {
            sum += coeffs[idx] * values[r];
        }
    }
    return sum;
}

}  // namespace kanopf::kan
