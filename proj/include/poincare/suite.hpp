#pragma once

#include "poincare/forms.hpp"
#include "poincare/grid.hpp"
#include "poincare/sharp.hpp"

#include <cmath>
#include <cstdint>
#include <optional>
#include <utility>
#include <algorithm>
#include <random>
#include <string>
#include <vector>

namespace poincare {

struct SuiteFunction {
    std::string label;
    GridFunction u;
};

namespace detail {

/// Uniform draw from the raw 64-bit stream, so sequences do not depend on
/// the standard library's distribution implementations.
inline double uniform(std::mt19937_64& rng, double lo, double hi) {
    return lo + (hi - lo) * (static_cast<double>(rng() >> 11) * 0x1.0p-53);
}

inline std::vector<double> smooth(const Grid& grid, std::vector<double> v, int passes) {
    std::vector<std::pair<std::size_t, std::size_t>> edges;
    for (std::size_t i = 0; i < v.size(); ++i)
        for (int axis = 0; axis < grid.dim(); ++axis)
            if (const auto j = grid.forward_neighbor(i, axis); j >= 0)
                edges.emplace_back(i, static_cast<std::size_t>(j));
    for (int pass = 0; pass < passes; ++pass) {
        std::vector<double> sum = v;
        std::vector<int> count(v.size(), 1);
        for (const auto& [i, j] : edges) {
            sum[i] += v[j];
            sum[j] += v[i];
            ++count[i];
            ++count[j];
        }
        for (std::size_t i = 0; i < v.size(); ++i) v[i] = sum[i] / count[i];
    }
    return v;
}

} // namespace detail

/// u = a.x + b with a random direction and amplitude.
inline GridFunction affine_function(const GridPtr& grid, std::mt19937_64& rng) {
    const double angle = detail::uniform(rng, 0.0, 2.0 * 3.14159265358979323846);
    const double amplitude = detail::uniform(rng, 0.5, 2.0);
    const double offset = detail::uniform(rng, -1.0, 1.0);
    const double ax = amplitude * std::cos(angle);
    const double ay = grid->dim() == 2 ? amplitude * std::sin(angle) : 0.0;
    return GridFunction::from(grid, [&](const Point& c) { return ax * c.x + ay * c.y + offset; });
}

/// exp(-|x - x_c|^2 / sigma^2) with |x_c| < 1/2.
inline GridFunction bump_function(const GridPtr& grid, std::mt19937_64& rng) {
    const double cx = detail::uniform(rng, -0.5, 0.5);
    const double cy = grid->dim() == 2 ? detail::uniform(rng, -0.5, 0.5) : 0.0;
    const double sigma = detail::uniform(rng, 0.2, 0.6);
    return GridFunction::from(grid, [&](const Point& c) {
        const double r2 = (c.x - cx) * (c.x - cx) + (c.y - cy) * (c.y - cy);
        return std::exp(-r2 / (sigma * sigma));
    });
}

/// Seeded uniform noise relaxed by three neighbor-averaging passes.
inline GridFunction random_field(const GridPtr& grid, std::mt19937_64& rng) {
    std::vector<double> v(grid->size());
    for (auto& x : v) x = detail::uniform(rng, -1.0, 1.0);
    return GridFunction(grid, detail::smooth(*grid, std::move(v), 3));
}

/// First nonzero eigenvector of the unweighted local p = 2 form.
inline GridFunction neumann_eigenfunction(const GridPtr& grid, const EigenOptions& options = {}) {
    const auto pair = assemble_p2(*grid, CellSet::all(*grid), KernelSpec::local(2.0));
    return GridFunction(grid, smallest_nonzero_eigen(pair, options).vector);
}

inline const std::vector<std::string>& suite_families() {
    static const std::vector<std::string> names{"affine", "bump", "random", "eigen"};
    return names;
}

/// Function i uses families[i % families.size()]. Repeated eigen entries add
/// a small smoothed random field to the eigenvector.
inline std::vector<SuiteFunction> make_suite(const GridPtr& grid, std::uint64_t seed, int count,
                                             const std::vector<std::string>& families,
                                             const EigenOptions& options = {}) {
    require(count >= 0, "suite count must be >= 0");
    require(!families.empty() || count == 0, "suite needs at least one family");
    std::mt19937_64 rng(seed);
    std::optional<GridFunction> eigen;
    int eigen_uses = 0;
    std::vector<SuiteFunction> suite;
    for (int i = 0; i < count; ++i) {
        const auto& family = families[static_cast<std::size_t>(i) % families.size()];
        const std::string label = family + "#" + std::to_string(i);
        if (family == "affine") {
            suite.push_back({label, affine_function(grid, rng)});
        } else if (family == "bump") {
            suite.push_back({label, bump_function(grid, rng)});
        } else if (family == "random") {
            suite.push_back({label, random_field(grid, rng)});
        } else if (family == "eigen") {
            if (!eigen) eigen = neumann_eigenfunction(grid, options);
            if (eigen_uses++ == 0) {
                suite.push_back({label, *eigen});
            } else {
                const auto noise = random_field(grid, rng);
                double scale = 0.0;
                for (double x : eigen->values()) scale = std::max(scale, std::abs(x));
                std::vector<double> v = eigen->values();
                for (std::size_t k = 0; k < v.size(); ++k) v[k] += 0.1 * scale * noise[k];
                suite.push_back({label, GridFunction(grid, std::move(v))});
            }
        } else {
            throw std::invalid_argument("unknown function family: " + family);
        }
    }
    return suite;
}

} // namespace poincare
