#pragma once

#include "poincare/grid.hpp"
#include "poincare/numeric.hpp"
#include "poincare/weights.hpp"

#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace poincare {

enum class KernelKind { local_gradient, fractional, constant_floor };

inline std::string to_string(KernelKind kind) {
    switch (kind) {
    case KernelKind::local_gradient: return "local_gradient";
    case KernelKind::fractional: return "fractional";
    case KernelKind::constant_floor: return "constant_floor";
    }
    return "unknown";
}

/// Optional extra factor m(x, y) multiplied into the pair kernel.
using PairMultiplier = std::function<double(const Point&, const Point&)>;

/// Which energy to evaluate on the right-hand side.
///
/// - local_gradient: sum of |grad_h u|^p h^d.
/// - fractional: pair kernel |x-y|^{-d-ps}, restricted to |x-y| <= 1/R when R is set.
/// - constant_floor: pair kernel 1 (times the multiplier); `floor` is the
///   lower bound c carried separately into the constants.
struct KernelSpec {
    KernelKind kind = KernelKind::local_gradient;
    double s = 0.5;
    double p = 2.0;
    std::optional<double> R;
    double floor = 1.0;
    PairMultiplier multiplier;

    static KernelSpec local(double p) {
        KernelSpec k;
        k.kind = KernelKind::local_gradient;
        k.p = p;
        k.validate();
        return k;
    }
    static KernelSpec fractional(double s, double p, std::optional<double> R = std::nullopt) {
        KernelSpec k;
        k.kind = KernelKind::fractional;
        k.s = s;
        k.p = p;
        k.R = R;
        k.validate();
        return k;
    }
    static KernelSpec constant_floor(double c, double p, PairMultiplier multiplier = {}) {
        KernelSpec k;
        k.kind = KernelKind::constant_floor;
        k.floor = c;
        k.p = p;
        k.multiplier = std::move(multiplier);
        k.validate();
        return k;
    }

    void validate() const {
        require(p >= 1.0 && std::isfinite(p), "p must be >= 1");
        if (kind == KernelKind::fractional) {
            require(s > 0.0 && s < 1.0, "s must lie in (0,1)");
            require(!R || (*R >= 1.0 && std::isfinite(*R)), "R must be >= 1");
        }
        if (kind == KernelKind::constant_floor) require(floor > 0.0 && std::isfinite(floor), "c must be > 0");
    }

    bool is_pair_kernel() const noexcept { return kind != KernelKind::local_gradient; }

    /// Truncation radius 1/R, or infinity.
    double cutoff() const noexcept { return R ? 1.0 / *R : std::numeric_limits<double>::infinity(); }

    /// K(x, y) for x != y.
    double pair_value(const Point& x, const Point& y, int dim) const {
        double k = 1.0;
        if (kind == KernelKind::fractional) {
            const double r = distance(x, y);
            if (R && !within_cutoff(r)) return 0.0;
            k = std::pow(r, -(dim + p * s));
        }
        if (multiplier) k *= multiplier(x, y);
        return k;
    }

    /// Non-strict |x-y| <= 1/R, with a relative guard for lattice distances
    /// that should equal the cutoff exactly.
    bool within_cutoff(double r) const noexcept { return !R || r <= cutoff() * (1.0 + 1e-12); }
};

namespace detail {

/// Kernel values on lattice offsets (translation invariant kernels only).
class OffsetTable {
public:
    OffsetTable(const Grid& grid, const KernelSpec& kernel) : n_(grid.cells_per_axis()), dim_(grid.dim()) {
        const int span = 2 * n_ + 1;
        const int rows = dim_ == 2 ? span : 1;
        table_.assign(static_cast<std::size_t>(span) * rows, 0.0);
        const double h = grid.h();
        for (int b = 0; b < rows; ++b) {
            for (int a = 0; a < span; ++a) {
                const int da = a - n_;
                const int db = dim_ == 2 ? b - n_ : 0;
                if (da == 0 && db == 0) continue;
                table_[static_cast<std::size_t>(b) * span + a] =
                    kernel.pair_value(Point{0.0, 0.0}, Point{da * h, db * h}, dim_);
            }
        }
    }

    double operator()(const std::array<int, 2>& li, const std::array<int, 2>& lj) const noexcept {
        const int span = 2 * n_ + 1;
        const int a = lj[0] - li[0] + n_;
        const int b = dim_ == 2 ? lj[1] - li[1] + n_ : 0;
        return table_[static_cast<std::size_t>(b) * span + a];
    }

private:
    int n_;
    int dim_;
    std::vector<double> table_;
};

} // namespace detail

/// Pair kernel K(x_i, x_j) for every ordered pair in `cells`, row-major over
/// positions in `cells`, diagonal zero.
inline std::vector<double> pair_kernel_matrix(const Grid& grid, const CellSet& cells, const KernelSpec& kernel) {
    require(kernel.is_pair_kernel(), "local_gradient has no pair kernel");
    const auto& idx = cells.indices();
    const std::size_t n = idx.size();
    std::vector<double> k(n * n, 0.0);
    if (!kernel.multiplier) {
        const detail::OffsetTable table(grid, kernel);
        for (std::size_t a = 0; a < n; ++a)
            for (std::size_t b = 0; b < n; ++b)
                if (a != b) k[a * n + b] = table(grid.lattice(idx[a]), grid.lattice(idx[b]));
    } else {
        for (std::size_t a = 0; a < n; ++a)
            for (std::size_t b = 0; b < n; ++b)
                if (a != b) k[a * n + b] = kernel.pair_value(grid.center(idx[a]), grid.center(idx[b]), grid.dim());
    }
    return k;
}

/// sum over cells of |grad_h u|^p (phi) h^d with forward differences; an
/// axis is omitted when the forward neighbor is not in `cells`.
inline double local_energy(const GridFunction& u, const CellSet& cells, double p,
                           const std::optional<RadialProfile>& weight = std::nullopt) {
    require(p >= 1.0, "exponent p must be >= 1");
    const Grid& grid = u.grid();
    const auto in = cells.mask(grid);
    const double h = grid.h();
    CompensatedSum acc;
    for (auto i : cells) {
        double g2 = 0.0;
        for (int axis = 0; axis < grid.dim(); ++axis) {
            const auto j = grid.forward_neighbor(i, axis);
            if (j < 0 || !in[static_cast<std::size_t>(j)]) continue;
            const double g = (u[static_cast<std::size_t>(j)] - u[i]) / h;
            g2 += g * g;
        }
        if (g2 == 0.0) continue;
        const double term = p == 2.0 ? g2 : std::pow(g2, 0.5 * p);
        acc += weight ? term * weight->at(grid.radius(i)) : term;
    }
    return acc.value() * grid.cell_measure();
}

/// sum over ordered pairs i != j in `cells` of
/// |u_i - u_j|^p K(x_i, x_j) W_ij h^{2d}, W_ij = min(phi_i, phi_j) when weighted.
inline double kernel_energy(const GridFunction& u, const CellSet& cells, const KernelSpec& kernel,
                            const std::optional<RadialProfile>& weight = std::nullopt) {
    kernel.validate();
    if (!kernel.is_pair_kernel()) return local_energy(u, cells, kernel.p, weight);
    const Grid& grid = u.grid();
    const auto& idx = cells.indices();
    const std::size_t n = idx.size();
    std::vector<double> w;
    if (weight) {
        w.resize(n);
        for (std::size_t a = 0; a < n; ++a) w[a] = weight->at(grid.radius(idx[a]));
    }
    std::optional<detail::OffsetTable> table;
    if (!kernel.multiplier) table.emplace(grid, kernel);
    const double p = kernel.p;
    CompensatedSum total;
    for (std::size_t a = 0; a < n; ++a) {
        const double ua = u[idx[a]];
        const auto la = grid.lattice(idx[a]);
        CompensatedSum row;
        for (std::size_t b = 0; b < n; ++b) {
            if (a == b) continue;
            const double du = ua - u[idx[b]];
            if (du == 0.0) continue;
            const double k = table ? (*table)(la, grid.lattice(idx[b]))
                                   : kernel.pair_value(grid.center(idx[a]), grid.center(idx[b]), grid.dim());
            if (k == 0.0) continue;
            double term = abs_pow(du, p) * k;
            if (weight) term *= std::min(w[a], w[b]);
            row += term;
        }
        total += row.value();
    }
    const double hd = grid.cell_measure();
    return total.value() * hd * hd;
}

/// 8^p |B_1|/|B_{1/2}| Phi(0)/Phi(1/2) with |B_1|/|B_{1/2}| = 2^d.
inline double theorem_constant_M(double p, int dim, const RadialProfile& profile) {
    require(p >= 1.0, "exponent p must be >= 1");
    require(dim == 1 || dim == 2, "dimension must be 1 or 2");
    return std::pow(8.0, p) * std::pow(2.0, dim) * profile.at_center() / profile.at_half();
}

/// 2^{3p+d} Phi(0)/Phi(1/2) c_hat.
inline double corollary_local_constant(double p, int dim, const RadialProfile& profile, double c_hat) {
    require(c_hat > 0.0, "c_hat must be > 0");
    require(p >= 1.0, "exponent p must be >= 1");
    return std::pow(2.0, 3.0 * p + dim) * profile.at_center() / profile.at_half() * c_hat;
}

/// sum_j w_j F(t_j) over the atoms of nu.
inline double nu_integrated_rhs(const std::function<double(double)>& F, const LayerCakeMeasure& measure) {
    CompensatedSum acc;
    for (const auto& atom : measure.atoms()) {
        const double f = F(atom.t);
        require(std::isfinite(f), "functional is not finite at an atom");
        acc += atom.mass * f;
    }
    return acc.value();
}

} // namespace poincare
