#pragma once

#include <span>
#include <vector>

namespace kanopf::kan {

/// Uniform B-spline grid on [t_min, t_max] with G intervals and degree k.
///
/// The knot vector has G + 2k + 1 entries: the G + 1 interior knots plus k
/// knots continued uniformly on each side (no repeated end knots). This
/// gives G + k basis functions, and inputs outside [t_min, t_max] are
/// evaluated against the extended knots instead of being clamped.
class SplineGrid {
public:
    SplineGrid(double t_min, double t_max, int num_intervals, int degree);

    double t_min() const noexcept { return t_min_; }
    double t_max() const noexcept { return t_max_; }
    int num_intervals() const noexcept { return num_intervals_; }
    int degree() const noexcept { return degree_; }
    int basis_count() const noexcept { return num_intervals_ + degree_; }
    double spacing() const noexcept { return (t_max_ - t_min_) / num_intervals_; }
    std::span<const double> knots() const noexcept { return knots_; }

    /// Knot m of the infinitely extended uniform sequence; equals knots()[m]
    /// for 0 <= m <= G + 2k.
    double knot(int m) const noexcept;

    friend bool operator==(const SplineGrid& a, const SplineGrid& b) {
        return a.t_min_ == b.t_min_ && a.t_max_ == b.t_max_ &&
               a.num_intervals_ == b.num_intervals_ && a.degree_ == b.degree_;
    }

private:
    double t_min_;
    double t_max_;
    int num_intervals_;
    int degree_;
    std::vector<double> knots_;
};

/// The k + 1 basis functions that can be nonzero at one point.
///
/// `first` is the index of the basis function stored in values[0]; it may
/// be negative or run past basis_count() near the ends of the extended
/// knot range, in which case callers skip the out-of-range entries. When
/// the point lies outside the extended knots, `inside` is false and every
/// value is zero.
struct LocalBasis {
    int first = 0;
    bool inside = false;
};

/// Evaluates the k + 1 nonzero basis values at x into `values` (size k + 1)
/// and, if `derivatives` is non-empty, their first derivatives (size k + 1).
/// Throws DomainError for non-finite x.
LocalBasis local_basis(const SplineGrid& grid, double x, std::span<double> values,
                       std::span<double> derivatives = {});

/// All G + k basis values at x (Cox-de Boor on the extended knots).
std::vector<double> bspline_basis(double x, const SplineGrid& grid);

/// First derivatives of all G + k basis functions at x.
std::vector<double> bspline_basis_derivative(double x, const SplineGrid& grid);

/// Σ coeffs[i] B_i(x).
double spline_value(const SplineGrid& grid, std::span<const double> coeffs, double x);

}  // namespace kanopf::kan
