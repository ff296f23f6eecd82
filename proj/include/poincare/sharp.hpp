#pragma once

#include "poincare/forms.hpp"
#include "poincare/grid.hpp"
#include "poincare/numeric.hpp"
#include "poincare/weights.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace poincare {

/// Energy form A (symmetric psd, A 1 = 0) and diagonal mass D of a p = 2
/// Poincare inequality  sum |u - u^phi|^2 D <= C u^T A u.
///
/// A is held as an operator; dense forms keep their matrix as well.
class QuadraticFormPair {
public:
    using Apply = std::function<void(std::span<const double>, std::span<double>)>;

    QuadraticFormPair(std::size_t n, Apply energy, std::vector<double> mass)
        : n_(n), apply_(std::move(energy)), mass_(std::move(mass)) {
        require(mass_.size() == n_, "mass size mismatch");
    }

    static QuadraticFormPair dense(std::vector<double> matrix, std::vector<double> mass) {
        const std::size_t n = mass.size();
        require(matrix.size() == n * n, "matrix size mismatch");
        auto shared = std::make_shared<const std::vector<double>>(std::move(matrix));
        QuadraticFormPair pair(
            n,
            [shared, n](std::span<const double> in, std::span<double> out) {
                const auto& a = *shared;
                for (std::size_t i = 0; i < n; ++i) {
                    CompensatedSum acc;
                    for (std::size_t j = 0; j < n; ++j) acc += a[i * n + j] * in[j];
                    out[i] = acc.value();
                }
            },
            std::move(mass));
        pair.dense_ = std::move(shared);
        return pair;
    }

    std::size_t size() const noexcept { return n_; }
    const std::vector<double>& mass() const noexcept { return mass_; }

    void apply(std::span<const double> in, std::span<double> out) const {
        std::fill(out.begin(), out.end(), 0.0);
        apply_(in, out);
    }

    std::vector<double> apply(std::span<const double> in) const {
        std::vector<double> out(n_, 0.0);
        apply(in, out);
        return out;
    }

    /// u^T A u.
    double energy(std::span<const double> u) const {
        const auto au = apply(u);
        return compensated_dot(u, au);
    }

    /// A as a dense row-major matrix.
    std::vector<double> dense_energy() const {
        if (dense_) return *dense_;
        std::vector<double> a(n_ * n_, 0.0);
        std::vector<double> e(n_, 0.0);
        std::vector<double> col(n_, 0.0);
        for (std::size_t j = 0; j < n_; ++j) {
            e[j] = 1.0;
            apply(e, col);
            for (std::size_t i = 0; i < n_; ++i) a[i * n_ + j] = col[i];
            e[j] = 0.0;
        }
        return a;
    }

private:
    std::size_t n_;
    Apply apply_;
    std::vector<double> mass_;
    std::shared_ptr<const std::vector<double>> dense_;
};

namespace detail {

inline std::vector<double> cell_mass(const Grid& grid, const CellSet& cells,
                                     const std::optional<RadialProfile>& weight) {
    std::vector<double> d;
    d.reserve(cells.size());
    for (auto i : cells) d.push_back((weight ? weight->at(grid.radius(i)) : 1.0) * grid.cell_measure());
    return d;
}

struct Edge {
    std::size_t a;
    std::size_t b;
    double c;
};

} // namespace detail

/// p = 2 energy and mass for a cell set; vectors are indexed by position
/// within `cells`. u^T A u reproduces local_energy / kernel_energy.
inline QuadraticFormPair assemble_p2(const Grid& grid, const CellSet& cells, const KernelSpec& kernel,
                                     const std::optional<RadialProfile>& weight = std::nullopt) {
    kernel.validate();
    require(kernel.p == 2.0, "quadratic assembly needs p = 2");
    require(!cells.empty(), "assembly over an empty cell set");
    const auto& idx = cells.indices();
    const std::size_t n = idx.size();
    auto mass = detail::cell_mass(grid, cells, weight);

    if (!kernel.is_pair_kernel()) {
        std::vector<std::int64_t> position(grid.size(), -1);
        for (std::size_t a = 0; a < n; ++a) position[idx[a]] = static_cast<std::int64_t>(a);
        const double scale = grid.cell_measure() / (grid.h() * grid.h());
        std::vector<detail::Edge> edges;
        for (std::size_t a = 0; a < n; ++a) {
            for (int axis = 0; axis < grid.dim(); ++axis) {
                const auto j = grid.forward_neighbor(idx[a], axis);
                if (j < 0 || position[static_cast<std::size_t>(j)] < 0) continue;
                const double w = weight ? weight->at(grid.radius(idx[a])) : 1.0;
                edges.push_back({a, static_cast<std::size_t>(position[static_cast<std::size_t>(j)]), scale * w});
            }
        }
        auto shared = std::make_shared<const std::vector<detail::Edge>>(std::move(edges));
        return QuadraticFormPair(
            n,
            [shared](std::span<const double> in, std::span<double> out) {
                for (const auto& e : *shared) {
                    const double f = e.c * (in[e.a] - in[e.b]);
                    out[e.a] += f;
                    out[e.b] -= f;
                }
            },
            std::move(mass));
    }

    const auto k = pair_kernel_matrix(grid, cells, kernel);
    std::vector<double> w(n, 1.0);
    if (weight)
        for (std::size_t a = 0; a < n; ++a) w[a] = weight->at(grid.radius(idx[a]));
    const double h2d = grid.cell_measure() * grid.cell_measure();
    std::vector<double> A(n * n, 0.0);
    for (std::size_t a = 0; a < n; ++a) {
        for (std::size_t b = a + 1; b < n; ++b) {
            const double c = (k[a * n + b] + k[b * n + a]) * std::min(w[a], w[b]) * h2d;
            A[a * n + b] = -c;
            A[b * n + a] = -c;
        }
    }
    for (std::size_t a = 0; a < n; ++a) {
        CompensatedSum diag;
        for (std::size_t b = 0; b < n; ++b)
            if (b != a) diag += -A[a * n + b];
        A[a * n + a] = diag.value();
    }
    return QuadraticFormPair::dense(std::move(A), std::move(mass));
}

/// p = 2 form of sum_j w_j deviation_2(u, B_{t_j}) over the whole grid,
/// against mass phi h^d.
inline QuadraticFormPair assemble_ball_deviation_p2(const Grid& grid, const RadialProfile& profile) {
    const auto measure = layer_cake(profile);
    std::vector<std::pair<double, std::vector<std::size_t>>> balls;
    for (const auto& atom : measure.atoms())
        balls.emplace_back(atom.mass * grid.cell_measure(), ball_cells(grid, atom.t).indices());
    auto shared = std::make_shared<const decltype(balls)>(std::move(balls));
    return QuadraticFormPair(
        grid.size(),
        [shared](std::span<const double> in, std::span<double> out) {
            for (const auto& [scale, cells] : *shared) {
                CompensatedSum acc;
                for (auto i : cells) acc += in[i];
                const double m = acc.value() / static_cast<double>(cells.size());
                for (auto i : cells) out[i] += scale * (in[i] - m);
            }
        },
        detail::cell_mass(grid, CellSet::all(grid), profile));
}

struct SymmetricEigen {
    std::vector<double> values;
    /// Column-major eigenvectors, column k pairs with values[k].
    std::vector<double> vectors;
};

/// Cyclic Jacobi rotations on a dense symmetric matrix until the
/// off-diagonal Frobenius norm falls below tol times the full norm.
inline SymmetricEigen jacobi_eigen(std::vector<double> a, std::size_t n, double tol = 1e-12,
                                   int max_sweeps = 100) {
    require(a.size() == n * n, "matrix size mismatch");
    std::vector<double> v(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) v[i * n + i] = 1.0;

    auto off_norm = [&] {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                if (i != j) s += a[i * n + j] * a[i * n + j];
        return std::sqrt(s);
    };
    double full = 0.0;
    for (double x : a) full += x * x;
    full = std::sqrt(full);
    const double target = tol * std::max(full, 1e-300);

    int sweep = 0;
    for (; sweep < max_sweeps && off_norm() > target; ++sweep) {
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = a[p * n + q];
                if (apq == 0.0) continue;
                const double app = a[p * n + p];
                const double aqq = a[q * n + q];
                const double theta = (aqq - app) / (2.0 * apq);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = a[k * n + p];
                    const double akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double apk = a[p * n + k];
                    const double aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
                a[p * n + q] = 0.0;
                a[q * n + p] = 0.0;
                for (std::size_t k = 0; k < n; ++k) {
                    const double vkp = v[k * n + p];
                    const double vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }
    if (off_norm() > target) throw ConvergenceError("Jacobi sweeps exhausted", off_norm());

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t x, std::size_t y) { return a[x * n + x] < a[y * n + y]; });
    SymmetricEigen out;
    out.values.resize(n);
    out.vectors.resize(n * n);
    for (std::size_t k = 0; k < n; ++k) {
        out.values[k] = a[order[k] * n + order[k]];
        for (std::size_t i = 0; i < n; ++i) out.vectors[k * n + i] = v[i * n + order[k]];
    }
    return out;
}

inline constexpr std::size_t dense_oracle_cap = 600;

/// Full spectrum of D^{-1/2} A D^{-1/2}, ascending.
inline std::vector<double> dense_oracle_eigen(const QuadraticFormPair& pair) {
    const std::size_t n = pair.size();
    require(n <= dense_oracle_cap, "dense oracle is capped at 600 cells");
    auto a = pair.dense_energy();
    const auto& d = pair.mass();
    for (std::size_t i = 0; i < n; ++i) {
        require(d[i] > 0.0, "mass must be positive");
        for (std::size_t j = 0; j < n; ++j) a[i * n + j] /= std::sqrt(d[i] * d[j]);
    }
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            const double m = 0.5 * (a[i * n + j] + a[j * n + i]);
            a[i * n + j] = m;
            a[j * n + i] = m;
        }
    return jacobi_eigen(std::move(a), n).values;
}

struct EigenOptions {
    double tolerance = 1e-8;
    int max_iterations = 500;
    std::size_t block = 3;
    double inner_tolerance = 1e-12;
    /// Called once per outer iteration with (iteration, lambda, relative residual).
    std::function<void(int, double, double)> trace;
};

struct EigenResult {
    double lambda = 0.0;
    /// D-normalized, D-orthogonal to constants; indexed like the pair.
    std::vector<double> vector;
    double residual = 0.0;
    int iterations = 0;
};

namespace detail {

inline double norm(std::span<const double> x) { return std::sqrt(compensated_dot(x, x)); }

inline void remove_component(std::span<double> x, std::span<const double> unit) {
    const double c = compensated_dot(x, unit);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] -= c * unit[i];
}

/// Conjugate gradients for B y = b on the complement of `null`.
template <class Op>
std::vector<double> deflated_cg(const Op& op, std::span<const double> b, std::span<const double> null,
                                double tol, std::size_t max_iter) {
    const std::size_t n = b.size();
    std::vector<double> x(n, 0.0);
    std::vector<double> r(b.begin(), b.end());
    remove_component(r, null);
    std::vector<double> p = r;
    std::vector<double> q(n);
    double rr = compensated_dot(r, r);
    const double stop = tol * tol * std::max(rr, 1e-300);
    for (std::size_t it = 0; it < max_iter && rr > stop; ++it) {
        op(p, q);
        remove_component(q, null);
        const double pq = compensated_dot(p, q);
        if (!(pq > 0.0)) break;
        const double alpha = rr / pq;
        for (std::size_t i = 0; i < n; ++i) {
            x[i] += alpha * p[i];
            r[i] -= alpha * q[i];
        }
        const double rr_next = compensated_dot(r, r);
        const double beta = rr_next / rr;
        rr = rr_next;
        for (std::size_t i = 0; i < n; ++i) p[i] = r[i] + beta * p[i];
    }
    remove_component(x, null);
    return x;
}

/// Deterministic start vectors: low-frequency cosines in cell position.
inline std::vector<double> start_vector(std::size_t n, std::size_t k) {
    std::vector<double> x(n);
    std::uint64_t state = 0x9E3779B97F4A7C15ull * (k + 1);
    for (std::size_t i = 0; i < n; ++i) {
        state = state * 6364136223846793005ull + 1442695040888963407ull;
        const double noise = static_cast<double>(state >> 11) * 0x1.0p-53 - 0.5;
        x[i] = std::cos(3.14159265358979323846 * (k + 1) * (i + 0.5) / n) + 0.1 * noise;
    }
    return x;
}

} // namespace detail

/// Smallest positive lambda with A v = lambda D v, by block inverse
/// iteration on D^{-1/2} A D^{-1/2} with the constant direction deflated
/// and CG inner solves, followed by Rayleigh-Ritz on the block.
inline EigenResult smallest_nonzero_eigen(const QuadraticFormPair& pair, const EigenOptions& options = {}) {
    const std::size_t n = pair.size();
    require(n >= 2, "need at least two cells");
    const auto& d = pair.mass();
    std::vector<double> sqrt_d(n);
    for (std::size_t i = 0; i < n; ++i) {
        require(d[i] > 0.0, "mass must be positive");
        sqrt_d[i] = std::sqrt(d[i]);
    }
    std::vector<double> null = sqrt_d;
    {
        const double z = detail::norm(null);
        for (double& x : null) x /= z;
    }

    std::vector<double> scratch(n);
    auto op = [&](std::span<const double> in, std::span<double> out) {
        for (std::size_t i = 0; i < n; ++i) scratch[i] = in[i] / sqrt_d[i];
        pair.apply(scratch, out);
        for (std::size_t i = 0; i < n; ++i) out[i] /= sqrt_d[i];
    };

    const std::size_t k = std::min(options.block, n - 1);
    std::vector<std::vector<double>> block(k);
    for (std::size_t c = 0; c < k; ++c) block[c] = detail::start_vector(n, c);

    auto orthonormalize = [&](std::vector<std::vector<double>>& vs) {
        for (int pass = 0; pass < 2; ++pass) {
            for (std::size_t c = 0; c < vs.size(); ++c) {
                detail::remove_component(vs[c], null);
                for (std::size_t e = 0; e < c; ++e) detail::remove_component(vs[c], vs[e]);
                const double len = detail::norm(vs[c]);
                require(len > 0.0, "degenerate iteration block");
                for (double& x : vs[c]) x /= len;
            }
        }
    };
    orthonormalize(block);

    EigenResult result;
    std::vector<double> bx(n);
    const std::size_t cg_iter = 20 * n + 100;
    for (int it = 1; it <= options.max_iterations; ++it) {
        for (auto& col : block) col = detail::deflated_cg(op, col, null, options.inner_tolerance, cg_iter);
        orthonormalize(block);

        std::vector<std::vector<double>> images(k, std::vector<double>(n));
        for (std::size_t c = 0; c < k; ++c) op(block[c], images[c]);
        std::vector<double> h(k * k);
        for (std::size_t a = 0; a < k; ++a)
            for (std::size_t b = 0; b < k; ++b) h[a * k + b] = compensated_dot(block[a], images[b]);
        for (std::size_t a = 0; a < k; ++a)
            for (std::size_t b = a + 1; b < k; ++b) h[a * k + b] = h[b * k + a] = 0.5 * (h[a * k + b] + h[b * k + a]);
        const auto ritz = jacobi_eigen(h, k, 1e-15);

        std::vector<std::vector<double>> rotated(k, std::vector<double>(n, 0.0));
        for (std::size_t c = 0; c < k; ++c)
            for (std::size_t e = 0; e < k; ++e) {
                const double q = ritz.vectors[c * k + e];
                for (std::size_t i = 0; i < n; ++i) rotated[c][i] += q * block[e][i];
            }
        block = std::move(rotated);

        const auto& x = block.front();
        op(x, bx);
        const double lambda = compensated_dot(x, bx);
        // ||A v - lambda D v|| / ||A v|| with v = D^{-1/2} x
        CompensatedSum res;
        CompensatedSum av;
        for (std::size_t i = 0; i < n; ++i) {
            const double r = sqrt_d[i] * (bx[i] - lambda * x[i]);
            const double a = sqrt_d[i] * bx[i];
            res += r * r;
            av += a * a;
        }
        const double rel = std::sqrt(res.value()) / std::max(std::sqrt(av.value()), 1e-300);
        result.lambda = lambda;
        result.residual = rel;
        result.iterations = it;
        if (options.trace) options.trace(it, lambda, rel);
        if (rel <= options.tolerance) break;
    }
    if (result.residual > options.tolerance)
        throw ConvergenceError("eigen iteration did not converge", result.residual);

    result.vector.resize(n);
    for (std::size_t i = 0; i < n; ++i) result.vector[i] = block.front()[i] / sqrt_d[i];
    // sign convention: first nonzero entry positive
    for (double x : result.vector) {
        if (std::abs(x) < 1e-14) continue;
        if (x < 0.0)
            for (double& y : result.vector) y = -y;
        break;
    }
    return result;
}

/// Best constant C in sum |u - u^phi|^2 phi h^d <= C E(u): 1 / lambda_1.
inline double sharp_constant_p2(const Grid& grid, const KernelSpec& kernel,
                                const std::optional<RadialProfile>& weight = std::nullopt,
                                const EigenOptions& options = {}) {
    const auto pair = assemble_p2(grid, CellSet::all(grid), kernel, weight);
    return 1.0 / smallest_nonzero_eigen(pair, options).lambda;
}

using GridFunctional = std::function<double(const GridFunction&)>;

struct AscentOptions {
    /// Recentering weight; constant when absent.
    std::optional<RadialProfile> weight;
    double fd_step = 1e-6;
};

struct AscentResult {
    double ratio = 0.0;
    GridFunction maximizer;
    int accepted_steps = 0;
};

/// Local maximization of lhs(u)/rhs(u) by normalized forward-difference
/// gradient ascent. Each iterate is recentered to weighted mean zero and
/// rescaled to unit Euclidean norm; a rejected step halves the step size.
/// Both functionals must be shift invariant and p-homogeneous.
inline AscentResult ratio_ascent(const GridPtr& grid, double p, const GridFunctional& lhs, const GridFunctional& rhs,
                                 const GridFunction& u0, int steps, double step_size,
                                 const AscentOptions& options = {}) {
    require(p >= 1.0, "exponent p must be >= 1");
    require(steps >= 0, "steps must be >= 0");
    require(u0.size() == grid->size(), "start function lives on a different grid");
    const auto profile = options.weight.value_or(constant_profile());

    auto normalize = [&](std::vector<double> v) {
        const double m = weighted_mean(GridFunction(grid, v), profile);
        for (double& x : v) x -= m;
        const double len = detail::norm(v);
        if (len > 0.0)
            for (double& x : v) x /= len;
        return v;
    };
    auto ratio = [&](const std::vector<double>& v) {
        const GridFunction f(grid, v);
        return lhs(f) / rhs(f);
    };

    std::vector<double> u = u0.values();
    if (!(rhs(u0) > 0.0)) {
        const double len = std::max(detail::norm(u), 1.0);
        for (std::size_t i = 0; i < u.size(); ++i) {
            const auto& c = grid->center(i);
            u[i] += 1e-3 * len * (c.x + 0.5 * c.y);
        }
        require(rhs(GridFunction(grid, u)) > 0.0, "rhs functional vanishes after perturbation");
    }
    if (steps == 0) return {ratio(u), GridFunction(grid, u), 0};

    u = normalize(std::move(u));
    double current = ratio(u);
    AscentResult best{current, GridFunction(grid, u), 0};
    std::vector<double> g(u.size());
    double step = step_size;
    for (int it = 0; it < steps && step > 1e-12; ++it) {
        const double delta = options.fd_step * detail::norm(u);
        std::vector<double> probe = u;
        for (std::size_t i = 0; i < u.size(); ++i) {
            probe[i] = u[i] + delta;
            g[i] = (ratio(probe) - current) / delta;
            probe[i] = u[i];
        }
        const double gn = detail::norm(g);
        if (!(gn > 0.0)) break;
        std::vector<double> next = u;
        for (std::size_t i = 0; i < u.size(); ++i) next[i] += step * g[i] / gn;
        next = normalize(std::move(next));
        const double r = ratio(next);
        if (r > current) {
            u = std::move(next);
            current = r;
            ++best.accepted_steps;
            best.ratio = r;
            best.maximizer = GridFunction(grid, u);
        } else {
            step *= 0.5;
        }
    }
    return best;
}

/// c_hat: max over `radii` of sharp_constant_p2 on the unweighted local
/// form restricted to B_r, divided by r^p.
inline double estimate_local_constant(const Grid& grid, double p, std::span<const double> radii,
                                      const EigenOptions& options = {}) {
    require(p >= 1.0, "exponent p must be >= 1");
    require(!radii.empty(), "need at least one radius");
    double best = 0.0;
    for (double r : radii) {
        const auto pair = assemble_p2(grid, ball_cells(grid, r), KernelSpec::local(2.0));
        best = std::max(best, 1.0 / smallest_nonzero_eigen(pair, options).lambda / std::pow(r, p));
    }
    return best;
}

} // namespace poincare
