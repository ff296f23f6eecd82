#pragma once

#include "poincare/forms.hpp"
#include "poincare/grid.hpp"
#include "poincare/numeric.hpp"
#include "poincare/weights.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace poincare {

/// Quadrature slack for checks whose discrete analogue is exact.
inline constexpr double exact_tolerance = 0.0;
/// Quadrature slack for checks comparing two independently discretized integrals.
inline constexpr double quadrature_tolerance = 0.05;

/// A hypothesis of an inequality failed on the given input.
class HypothesisError : public std::invalid_argument {
public:
    HypothesisError(const std::string& what, std::size_t atom, double t)
        : std::invalid_argument(what), atom_(atom), t_(t) {}
    std::size_t atom() const noexcept { return atom_; }
    double radius() const noexcept { return t_; }

private:
    std::size_t atom_;
    double t_;
};

struct ReportMetadata {
    double p = 0.0;
    int dim = 0;
    int cells_per_axis = 0;
    std::optional<double> s;
    std::optional<double> R;
    std::string profile;
    std::string function;
    std::vector<std::pair<std::string, double>> extras;
};

struct InequalityReport {
    std::string check_id;
    double lhs = 0.0;
    double rhs = 0.0;
    double ratio = 0.0;
    double constant_used = 0.0;
    double tolerance = 0.0;
    bool pass = true;
    ReportMetadata meta;
};

inline ReportMetadata make_metadata(const Grid& grid, double p, const std::optional<RadialProfile>& profile = {}) {
    ReportMetadata m;
    m.p = p;
    m.dim = grid.dim();
    m.cells_per_axis = grid.cells_per_axis();
    m.profile = profile ? profile->describe() : std::string("none");
    return m;
}

/// lhs <= rhs (1 + tol); both zero counts as a pass with ratio 0.
inline InequalityReport make_report(std::string id, double lhs, double rhs, double constant, double tol,
                                    ReportMetadata meta) {
    InequalityReport r;
    r.check_id = std::move(id);
    r.lhs = lhs;
    r.rhs = rhs;
    r.constant_used = constant;
    r.tolerance = tol;
    r.meta = std::move(meta);
    if (lhs == 0.0 && rhs == 0.0)
        r.ratio = 0.0;
    else
        r.ratio = rhs > 0.0 ? lhs / rhs : std::numeric_limits<double>::infinity();
    r.pass = lhs >= 0.0 && rhs >= 0.0 && r.ratio <= 1.0 + tol;
    return r;
}

/// F(u, t), defined for t in (1/2, 1].
using BallFunctional = std::function<double(const GridFunction&, double)>;

/// The tightest admissible functional: the discrete p-deviation over B_t.
inline BallFunctional ball_deviation_functional(double p) {
    return [p](const GridFunction& u, double t) { return deviation_p(u, ball_cells(u.grid(), t), p); };
}

namespace detail {

inline bool hypothesis_holds(double lhs, double bound) noexcept { return lhs <= bound + 1e-12 * std::abs(lhs); }

/// Checks deviation_p(u, B_t) <= bound(t) at every atom of nu.
template <class Bound>
void verify_ball_hypothesis(const GridFunction& u, const LayerCakeMeasure& measure, double p, Bound&& bound,
                            const std::string& name) {
    const auto& atoms = measure.atoms();
    for (std::size_t j = 0; j < atoms.size(); ++j) {
        const double t = atoms[j].t;
        const double dev = deviation_p(u, ball_cells(u.grid(), t), p);
        const double b = bound(t);
        if (!hypothesis_holds(dev, b))
            throw HypothesisError(name + " hypothesis violated at atom " + std::to_string(j) +
                                      " (t = " + std::to_string(t) + ")",
                                  j, t);
    }
}

} // namespace detail

/// Weighted deviation of u over B_1 about its weighted mean.
inline double weighted_deviation(const GridFunction& u, const RadialProfile& profile, double p) {
    return deviation_p(u, CellSet::all(u.grid()), p, profile);
}

/// Weighted Poincare inequality from an unweighted family F(u, t):
/// lhs = weighted deviation, rhs = M sum_j w_j F(u, t_j).
inline InequalityReport check_theorem(const GridFunction& u, const RadialProfile& profile, const BallFunctional& F,
                                      double p, double tol = exact_tolerance) {
    const auto measure = layer_cake(profile);
    detail::verify_ball_hypothesis(u, measure, p, [&](double t) { return F(u, t); }, "ball Poincare");
    const double M = theorem_constant_M(p, u.grid().dim(), profile);
    const double integrated = nu_integrated_rhs([&](double t) { return F(u, t); }, measure);
    return make_report("theorem", weighted_deviation(u, profile, p), M * integrated, M, tol,
                       make_metadata(u.grid(), p, profile));
}

inline InequalityReport check_local_weighted(const GridFunction& u, const RadialProfile& profile, double p,
                                             double c_hat, double tol = exact_tolerance) {
    const double C = corollary_local_constant(p, u.grid().dim(), profile, c_hat);
    const double energy = local_energy(u, CellSet::all(u.grid()), p, profile);
    auto meta = make_metadata(u.grid(), p, profile);
    meta.extras.emplace_back("c_hat", c_hat);
    return make_report("local", weighted_deviation(u, profile, p), C * energy, C, tol, std::move(meta));
}

/// max over atoms t of deviation_p(u, B_t) / E_t(u): the smallest constant
/// for which the unweighted nonlocal hypothesis holds for this u.
inline double estimate_nonlocal_constant(const GridFunction& u, const RadialProfile& profile,
                                         const KernelSpec& kernel) {
    double best = 0.0;
    const auto measure = layer_cake(profile);
    for (const auto& atom : measure.atoms()) {
        const auto ball = ball_cells(u.grid(), atom.t);
        const double dev = deviation_p(u, ball, kernel.p);
        const double energy = kernel_energy(u, ball, kernel);
        if (dev == 0.0) continue;
        require(energy > 0.0, "kernel energy vanishes on a nonconstant function");
        best = std::max(best, dev / energy);
    }
    return best;
}

/// Weighted nonlocal inequality given an unweighted constant C:
/// rhs = C M E_w(u) with pair weight min(phi(x), phi(y)).
inline InequalityReport check_nonlocal_weighted(const GridFunction& u, const RadialProfile& profile,
                                                const KernelSpec& kernel, double C_unweighted,
                                                double tol = exact_tolerance, std::string id = "nonlocal") {
    require(C_unweighted > 0.0, "unweighted constant must be > 0");
    const Grid& grid = u.grid();
    const double p = kernel.p;
    detail::verify_ball_hypothesis(
        u, layer_cake(profile), p,
        [&](double t) { return C_unweighted * kernel_energy(u, ball_cells(grid, t), kernel); }, "nonlocal");
    const double M = theorem_constant_M(p, grid.dim(), profile);
    const double energy = kernel_energy(u, CellSet::all(grid), kernel, profile);
    auto meta = make_metadata(grid, p, profile);
    if (kernel.kind == KernelKind::fractional) {
        meta.s = kernel.s;
        meta.R = kernel.R;
    }
    meta.extras.emplace_back("C_unweighted", C_unweighted);
    return make_report(std::move(id), weighted_deviation(u, profile, p), C_unweighted * M * energy,
                       C_unweighted * M, tol, std::move(meta));
}

/// Kernels bounded below by c: the unweighted constant is 1/(c |B_{1/2}|)
/// from the discrete Jensen chain, then as check_nonlocal_weighted.
inline InequalityReport check_kernel_bounded_below(const GridFunction& u, const RadialProfile& profile,
                                                   const KernelSpec& kernel, double tol = exact_tolerance) {
    require(kernel.kind == KernelKind::constant_floor, "kernel must be of kind constant_floor");
    const double c = kernel.floor;
    require(c > 0.0, "c must be > 0");
    const Grid& grid = u.grid();
    if (kernel.multiplier) {
        const auto all = CellSet::all(grid);
        const auto k = pair_kernel_matrix(grid, all, kernel);
        const std::size_t n = all.size();
        for (std::size_t a = 0; a < n; ++a)
            for (std::size_t b = 0; b < n; ++b)
                require(a == b || k[a * n + b] >= c, "kernel falls below its floor c");
    } else {
        require(c <= 1.0, "kernel falls below its floor c");
    }
    const double half_measure = static_cast<double>(ball_cells(grid, 0.5).size()) * grid.cell_measure();
    const double C_unweighted = 1.0 / (c * half_measure);
    auto report = check_nonlocal_weighted(u, profile, kernel, C_unweighted, tol, "kernel_floor");
    report.meta.extras.emplace_back("c", c);
    return report;
}

/// Truncated fractional inequality:
/// rhs = C_robust (1-s) R^{p(1-s)} E_w(u; s, p, 1/R).
inline InequalityReport check_ckk(const GridFunction& u, const RadialProfile& profile, double p, double s,
                                  double R, double C_robust, double tol = quadrature_tolerance) {
    require(R >= 1.0, "R must be >= 1");
    require(C_robust > 0.0, "C_robust must be > 0");
    const auto kernel = KernelSpec::fractional(s, p, R);
    const double constant = C_robust * (1.0 - s) * std::pow(R, p * (1.0 - s));
    const double energy = kernel_energy(u, CellSet::all(u.grid()), kernel, profile);
    auto meta = make_metadata(u.grid(), p, profile);
    meta.s = s;
    meta.R = R;
    meta.extras.emplace_back("C_robust", C_robust);
    return make_report("ckk", weighted_deviation(u, profile, p), constant * energy, constant, tol,
                       std::move(meta));
}

/// C_robust for check_ckk, frozen at s0: the empirical constant of the
/// unweighted robust inequality (max over functions and atom radii r of
/// dev_r / ((1-s0) r^{p s0} E_r)), times 3^{p(1-s0)} and M.
inline double estimate_robust_constant(std::span<const GridFunction> suite, const RadialProfile& profile, double p,
                                       double s0) {
    require(!suite.empty(), "need at least one function");
    const auto kernel = KernelSpec::fractional(s0, p);
    double best = 0.0;
    const auto measure = layer_cake(profile);
    for (const auto& u : suite) {
        for (const auto& atom : measure.atoms()) {
            const auto ball = ball_cells(u.grid(), atom.t);
            const double dev = deviation_p(u, ball, p);
            if (dev == 0.0) continue;
            const double energy = kernel_energy(u, ball, kernel);
            best = std::max(best, dev / ((1.0 - s0) * std::pow(atom.t, p * s0) * energy));
        }
    }
    require(best > 0.0, "every function in the suite is constant");
    return best * std::pow(3.0, p * (1.0 - s0)) * theorem_constant_M(p, suite.front().grid().dim(), profile);
}

struct ShiftLemmaReport {
    double norm = 0.0;
    double shifted_norm = 0.0;
    /// shifted_norm / norm.
    double ratio = 0.0;
    bool pass = true;

    InequalityReport to_report(double p) const {
        InequalityReport r = make_report("shift_lemma", 0.5 * norm, shifted_norm, 0.5, exact_tolerance, {});
        r.meta.p = p;
        return r;
    }
};

/// ||f + a||_p >= ||f||_p / 2 for mean-zero f under counting measure.
inline ShiftLemmaReport check_shift_lemma(std::span<const double> f, double a, double p) {
    require(p >= 1.0, "exponent p must be >= 1");
    CompensatedSum total;
    CompensatedSum magnitude;
    for (double x : f) {
        total += x;
        magnitude += std::abs(x);
    }
    require(std::abs(total.value()) <= 1e-12 * std::max(1.0, magnitude.value()), "f must have zero sum");
    CompensatedSum plain;
    CompensatedSum shifted;
    for (double x : f) {
        plain += abs_pow(x, p);
        shifted += abs_pow(x + a, p);
    }
    ShiftLemmaReport r;
    r.norm = std::pow(plain.value(), 1.0 / p);
    r.shifted_norm = std::pow(shifted.value(), 1.0 / p);
    if (r.norm > 0.0)
        r.ratio = r.shifted_norm / r.norm;
    else
        r.ratio = r.shifted_norm > 0.0 ? std::numeric_limits<double>::infinity() : 1.0;
    r.pass = r.shifted_norm >= 0.5 * r.norm;
    return r;
}

/// Full fractional energy against (3R)^{p(1-s)} times the energy truncated at 1/R.
inline InequalityReport check_chain_lemma(const GridFunction& u, double p, double s, double R,
                                          double tol = quadrature_tolerance) {
    require(R >= 1.0, "R must be >= 1");
    const auto all = CellSet::all(u.grid());
    const double full = kernel_energy(u, all, KernelSpec::fractional(s, p));
    const double truncated = kernel_energy(u, all, KernelSpec::fractional(s, p, R));
    const double factor = std::pow(3.0 * R, p * (1.0 - s));
    auto meta = make_metadata(u.grid(), p);
    meta.s = s;
    meta.R = R;
    return make_report("chain_lemma", full, factor * truncated, factor, tol, std::move(meta));
}

} // namespace poincare
