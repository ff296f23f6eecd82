#pragma once

#include "poincare/numeric.hpp"
#include "poincare/weights.hpp"

#include <array>
#include <cmath>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <vector>

namespace poincare {

struct Point {
    double x = 0.0;
    double y = 0.0;
};

inline double distance(const Point& a, const Point& b) noexcept {
    return std::sqrt((a.x - b.x) * (a.x - b.x) + (a.y - b.y) * (a.y - b.y));
}

/// Uniform cell-centered discretization of the open unit ball in R^d,
/// d in {1, 2}. A cell is kept iff its center has norm < 1.
class Grid {
public:
    Grid(int dim, int cells_per_axis) : dim_(dim), n_(cells_per_axis), h_(2.0 / cells_per_axis) {
        require(dim == 1 || dim == 2, "dimension must be 1 or 2");
        require(cells_per_axis >= 4 && cells_per_axis % 2 == 0, "cells per axis must be even and >= 4");

        const int rows = dim == 2 ? n_ : 1;
        lookup_.assign(static_cast<std::size_t>(n_) * rows, -1);
        for (int j = 0; j < rows; ++j) {
            for (int i = 0; i < n_; ++i) {
                Point c{coordinate(i), dim == 2 ? coordinate(j) : 0.0};
                const double r = dim == 2 ? std::sqrt(c.x * c.x + c.y * c.y) : std::abs(c.x);
                if (!(r < 1.0)) continue;
                lookup_[static_cast<std::size_t>(j) * n_ + i] = static_cast<std::int32_t>(centers_.size());
                centers_.push_back(c);
                radii_.push_back(r);
                lattice_.push_back({i, j});
            }
        }
    }

    int dim() const noexcept { return dim_; }
    int cells_per_axis() const noexcept { return n_; }
    double h() const noexcept { return h_; }
    double cell_measure() const noexcept { return dim_ == 2 ? h_ * h_ : h_; }
    std::size_t size() const noexcept { return centers_.size(); }

    const std::vector<Point>& centers() const noexcept { return centers_; }
    const Point& center(std::size_t i) const { return centers_[i]; }
    double radius(std::size_t i) const { return radii_[i]; }
    std::array<int, 2> lattice(std::size_t i) const { return lattice_[i]; }

    /// Index of the cell one step forward along `axis`, or -1 outside the ball.
    std::int64_t forward_neighbor(std::size_t i, int axis) const {
        auto [a, b] = lattice_[i];
        if (axis == 0) ++a; else ++b;
        if (a >= n_ || (dim_ == 2 && b >= n_) || (dim_ == 1 && axis == 1)) return -1;
        return lookup_[static_cast<std::size_t>(b) * n_ + a];
    }

    /// Total measure of the discrete ball, cell count times h^d.
    double ball_measure() const noexcept { return static_cast<double>(size()) * cell_measure(); }

private:
    double coordinate(int i) const noexcept { return -1.0 + (i + 0.5) * h_; }

    int dim_;
    int n_;
    double h_;
    std::vector<Point> centers_;
    std::vector<double> radii_;
    std::vector<std::array<int, 2>> lattice_;
    std::vector<std::int32_t> lookup_;
};

using GridPtr = std::shared_ptr<const Grid>;

inline GridPtr build_grid(int dim, int cells_per_axis) {
    return std::make_shared<const Grid>(dim, cells_per_axis);
}

/// Sorted unique cell indices of one grid.
class CellSet {
public:
    CellSet() = default;
    CellSet(const Grid& grid, std::vector<std::size_t> indices) : indices_(std::move(indices)) {
        for (std::size_t k = 0; k < indices_.size(); ++k) {
            require(indices_[k] < grid.size(), "cell index out of range");
            require(k == 0 || indices_[k] > indices_[k - 1], "cell indices must be sorted and unique");
        }
    }

    static CellSet all(const Grid& grid) {
        CellSet s;
        s.indices_.resize(grid.size());
        for (std::size_t i = 0; i < grid.size(); ++i) s.indices_[i] = i;
        return s;
    }

    const std::vector<std::size_t>& indices() const noexcept { return indices_; }
    std::size_t size() const noexcept { return indices_.size(); }
    bool empty() const noexcept { return indices_.empty(); }
    auto begin() const noexcept { return indices_.begin(); }
    auto end() const noexcept { return indices_.end(); }

    std::vector<char> mask(const Grid& grid) const {
        std::vector<char> m(grid.size(), 0);
        for (auto i : indices_) m[i] = 1;
        return m;
    }

    friend bool operator==(const CellSet&, const CellSet&) = default;

private:
    std::vector<std::size_t> indices_;
};

class GridFunction {
public:
    GridFunction(GridPtr grid, std::vector<double> values) : grid_(std::move(grid)), values_(std::move(values)) {
        require(grid_ != nullptr, "grid function needs a grid");
        require(values_.size() == grid_->size(), "value count must equal cell count");
        for (double v : values_) require(std::isfinite(v), "grid function values must be finite");
    }

    template <class F>
    static GridFunction from(GridPtr grid, F&& f) {
        std::vector<double> v;
        v.reserve(grid->size());
        for (const auto& c : grid->centers()) v.push_back(f(c));
        return GridFunction(std::move(grid), std::move(v));
    }

    const Grid& grid() const noexcept { return *grid_; }
    const GridPtr& grid_ptr() const noexcept { return grid_; }
    const std::vector<double>& values() const noexcept { return values_; }
    std::size_t size() const noexcept { return values_.size(); }
    double operator[](std::size_t i) const { return values_[i]; }

    GridFunction shifted(double a) const {
        auto v = values_;
        for (double& x : v) x += a;
        return GridFunction(grid_, std::move(v));
    }
    GridFunction scaled(double lambda) const {
        auto v = values_;
        for (double& x : v) x *= lambda;
        return GridFunction(grid_, std::move(v));
    }

private:
    GridPtr grid_;
    std::vector<double> values_;
};

/// Cells whose center lies strictly inside the ball of radius t.
inline CellSet ball_cells(const Grid& grid, double t) {
    require(t > 0.0 && t <= 1.0, "ball radius must lie in (0,1]");
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < grid.size(); ++i)
        if (grid.radius(i) < t) idx.push_back(i);
    return CellSet(grid, std::move(idx));
}

/// phi(x_i) for every cell.
inline std::vector<double> weight_vector(const Grid& grid, const RadialProfile& profile) {
    std::vector<double> w(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) w[i] = profile.at(grid.radius(i));
    return w;
}

inline double mean(const GridFunction& u, const CellSet& cells) {
    require(!cells.empty(), "mean over an empty cell set");
    CompensatedSum acc;
    for (auto i : cells) acc += u[i];
    return acc.value() / static_cast<double>(cells.size());
}

inline double weighted_mean(const GridFunction& u, const RadialProfile& profile, const CellSet& cells) {
    require(!cells.empty(), "weighted mean over an empty cell set");
    CompensatedSum num;
    CompensatedSum den;
    for (auto i : cells) {
        const double w = profile.at(u.grid().radius(i));
        num += u[i] * w;
        den += w;
    }
    require(den.value() > 0.0, "weight vanishes on every cell");
    return num.value() / den.value();
}

inline double weighted_mean(const GridFunction& u, const RadialProfile& profile) {
    return weighted_mean(u, profile, CellSet::all(u.grid()));
}

/// sum_{i in cells} |u_i - c|^p w_i h^d, with w = phi when a profile is given
/// and c defaulting to the matching (weighted) mean over `cells`.
inline double deviation_p(const GridFunction& u, const CellSet& cells, double p,
                          const std::optional<RadialProfile>& profile = std::nullopt,
                          std::optional<double> center = std::nullopt) {
    require(!cells.empty(), "deviation over an empty cell set");
    require(p >= 1.0, "exponent p must be >= 1");
    const double c = center ? *center : (profile ? weighted_mean(u, *profile, cells) : mean(u, cells));
    CompensatedSum acc;
    for (auto i : cells) {
        const double w = profile ? profile->at(u.grid().radius(i)) : 1.0;
        acc += abs_pow(u[i] - c, p) * w;
    }
    return acc.value() * u.grid().cell_measure();
}

} // namespace poincare
