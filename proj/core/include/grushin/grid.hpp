#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <vector>

namespace grushin {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Uniform tensor grid on [x0, x1] x [y0, y1] with nx, ny nodes per axis.
class Grid2D {
public:
    /// Throws PreconditionError unless x1 > x0, y1 > y0 and nx, ny >= 3.
    Grid2D(double x0, double x1, double y0, double y1, std::size_t nx, std::size_t ny);

    /// Grid centred at (cx, cy) with the given half widths.
    static Grid2D centered(double cx, double cy, double half_x, double half_y,
                           std::size_t nx, std::size_t ny);

    double x0() const noexcept { return x0_; }
    double x1() const noexcept { return x1_; }
    double y0() const noexcept { return y0_; }
    double y1() const noexcept { return y1_; }
    std::size_t nx() const noexcept { return nx_; }
    std::size_t ny() const noexcept { return ny_; }
    std::size_t size() const noexcept { return nx_ * ny_; }
    double hx() const noexcept { return (x1_ - x0_) / static_cast<double>(nx_ - 1); }
    double hy() const noexcept { return (y1_ - y0_) / static_cast<double>(ny_ - 1); }
    double x(std::size_t i) const noexcept { return x0_ + hx() * static_cast<double>(i); }
    double y(std::size_t j) const noexcept { return y0_ + hy() * static_cast<double>(j); }

    bool operator==(const Grid2D&) const = default;

private:
    double x0_, x1_, y0_, y1_;
    std::size_t nx_, ny_;
};

/// Scalar field sampled on a Grid2D.
///
/// Storage is x-major: value(i, j) lives at index i * ny + j. `margin` counts
/// boundary rings that hold no valid data (one ring per differencing pass);
/// every norm below reduces over the valid interior only.
class GridFunction {
public:
    GridFunction(Grid2D grid, std::vector<double> values, std::size_t margin = 0);

    static GridFunction zeros(const Grid2D& grid);
    static GridFunction sample(const Grid2D& grid, const std::function<double(double, double)>& fn);

    const Grid2D& grid() const noexcept { return grid_; }
    std::span<const double> values() const noexcept { return values_; }
    std::size_t margin() const noexcept { return margin_; }
    double operator()(std::size_t i, std::size_t j) const noexcept { return values_[i * grid_.ny() + j]; }

    bool valid(std::size_t i, std::size_t j) const noexcept {
        return i >= margin_ && j >= margin_ && i + margin_ < grid_.nx() && j + margin_ < grid_.ny();
    }

    /// Pointwise a*this + b*other on the same grid; margin is the larger of both.
    GridFunction axpby(double a, const GridFunction& other, double b) const;
    GridFunction scaled(double c) const;
    GridFunction map(const std::function<double(double)>& fn) const;
    /// Copy with the invalid boundary rings overwritten by `fill`.
    GridFunction with_margin_filled(double fill) const;

private:
    Grid2D grid_;
    std::vector<double> values_;
    std::size_t margin_;
};

/// Exponents of the mixed-norm estimates. Any of p, q, r may be kInf.
struct MixedNormSpec {
    double p = 2.0;
    double q = 2.0;
    double r = 2.0;
    double s = 0.5;
    double beta = 0.5;

    /// Throws DomainError if an exponent is < 1 or s / beta leave (0, 1).
    void validate() const;
};

// ---------------------------------------------------------------------------
// Differencing

/// 0.5 * (D_xx u + x^2 D_yy u) by second-order central differences.
/// The result carries one more invalid boundary ring than u.
GridFunction apply_grushin(const GridFunction& u);

GridFunction diff_x(const GridFunction& u);
GridFunction diff_y(const GridFunction& u);
GridFunction diff_xx(const GridFunction& u);
GridFunction diff_yy(const GridFunction& u);

// ---------------------------------------------------------------------------
// Norms

double sup_norm(const GridFunction& u);
/// (sum |u|^r hx hy)^(1/r); r may be kInf.
double lp_norm(const GridFunction& u, double r);
/// Inner L^q over y for each column, then outer L^p over x.
double mixed_norm(const GridFunction& u, double p, double q);

enum class HolderAxis { x, y, both };

/// Hölder quotient max |u(P) - u(Q)| / (|dx|^beta + |dy|^beta).
///
/// Axis-restricted variants only compare points on the same row/column and
/// use |dx|^beta (resp. |dy|^beta). The pair set is exhaustive on grids with
/// at most 64x64 valid points and a seeded dyadic stratified sample otherwise.
double holder_seminorm(const GridFunction& u, double beta, HolderAxis axis = HolderAxis::both,
                       std::uint64_t seed = 0x5EED);

/// Quotient maxima for several exponents over one shared pair set.
///
/// exponent 0 gives the sup-oscillation max |u(P) - u(Q)|; exponent 1 gives the
/// discrete Lipschitz constant with denominator |dx| + |dy|.
std::vector<double> holder_profile(const GridFunction& u, std::span<const double> exponents,
                                   HolderAxis axis = HolderAxis::both, std::uint64_t seed = 0x5EED);

/// sup over grid columns x_i of the 1-D y-axis Hölder seminorm of u(x_i, .),
/// i.e. the L^inf(R; C^beta(R)) seminorm.
double sup_x_holder_y(const GridFunction& u, double beta);

struct SlobodeckijResult {
    double value = 0.0;          ///< seminorm on the given sampling
    double coarse_value = 0.0;   ///< same sum on every other sample
    bool h_dependent = false;    ///< relative change under coarsening > 5%
};

/// (sum_{i != j} |f_i - f_j|^q / |x_i - x_j|^(1 + s q) h^2)^(1/q).
SlobodeckijResult slobodeckij_seminorm(std::span<const double> f, double h, double s, double q);

}  // namespace grushin
