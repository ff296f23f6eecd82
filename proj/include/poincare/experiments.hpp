#pragma once

#include "poincare/config.hpp"
#include "poincare/forms.hpp"
#include "poincare/grid.hpp"
#include "poincare/inequalities.hpp"
#include "poincare/report.hpp"
#include "poincare/sharp.hpp"
#include "poincare/suite.hpp"
#include "poincare/weights.hpp"

#include <cmath>
#include <cstdint>
#include <limits>
#include <algorithm>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace poincare {

struct RunOptions {
    /// Progress lines go here when set.
    std::ostream* log = nullptr;
    /// Collects eigen iterations in run_sharp when set.
    TraceLog* trace = nullptr;
    std::optional<std::uint64_t> seed;
};

namespace detail {

inline std::vector<GridFunction> suite_values(const std::vector<SuiteFunction>& suite) {
    std::vector<GridFunction> out;
    out.reserve(suite.size());
    for (const auto& f : suite) out.push_back(f.u);
    return out;
}

inline std::vector<double> atom_radii(const RadialProfile& profile) {
    std::vector<double> radii;
    const auto measure = layer_cake(profile);
    for (const auto& atom : measure.atoms()) radii.push_back(atom.t);
    return radii;
}

inline EigenOptions eigen_options(const ExperimentConfig& config) {
    EigenOptions o;
    o.tolerance = config.sharp.tolerance;
    o.max_iterations = config.sharp.max_iterations;
    return o;
}

inline std::vector<SuiteFunction> build_suite(const GridPtr& grid, const ExperimentConfig& config,
                                              const RunOptions& options) {
    return make_suite(grid, options.seed.value_or(config.suite.seed), config.suite.count, config.suite.families,
                      eigen_options(config));
}

inline InequalityReport failed_report(const std::string& id, const Grid& grid, double p,
                                      const std::optional<RadialProfile>& profile, double tol) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    InequalityReport r;
    r.check_id = id;
    r.lhs = nan;
    r.rhs = nan;
    r.ratio = nan;
    r.constant_used = nan;
    r.tolerance = tol;
    r.pass = false;
    r.meta = make_metadata(grid, p, profile);
    return r;
}

/// c_hat at the largest configured N, cached per (p, weight index).
class LocalConstantCache {
public:
    explicit LocalConstantCache(const ExperimentConfig& config) : config_(config) {}

    double get(double p, std::size_t weight) {
        if (config_.c_hat) return *config_.c_hat;
        for (const auto& e : entries_)
            if (e.p == p && e.weight == weight) return e.value;
        if (!grid_) grid_ = build_grid(config_.dimension, *std::max_element(config_.grid_sizes.begin(), config_.grid_sizes.end()));
        const double value = estimate_local_constant(*grid_, p, atom_radii(config_.weights[weight].profile),
                                                     eigen_options(config_));
        entries_.push_back({p, weight, value});
        return value;
    }

private:
    struct Entry {
        double p;
        std::size_t weight;
        double value;
    };
    const ExperimentConfig& config_;
    GridPtr grid_;
    std::vector<Entry> entries_;
};

} // namespace detail

/// Every requested check over N x p x weight x u x kernel, in that nesting
/// order. Weight-independent checks run once per (N, p, u).
inline Table run_verify(const ExperimentConfig& config, const RunOptions& options = {}) {
    Table table(verify_columns());
    if (config.checks.empty()) return table;
    detail::LocalConstantCache local_constants(config);

    for (int N : config.grid_sizes) {
        const auto grid = build_grid(config.dimension, N);
        const auto suite = detail::build_suite(grid, config, options);
        const auto suite_u = detail::suite_values(suite);
        for (double p : config.p_values) {
            for (std::size_t wi = 0; wi < config.weights.size(); ++wi) {
                const auto& profile = config.weights[wi].profile;
                std::optional<double> c_hat;
                std::optional<double> c_robust;
                auto needs = [&](const char* name) {
                    return std::find(config.checks.begin(), config.checks.end(), name) != config.checks.end();
                };
                if (needs("local")) c_hat = local_constants.get(p, wi);
                if (needs("ckk")) c_robust = estimate_robust_constant(suite_u, profile, p, config.robust_s0);
                if (options.log)
                    *options.log << "verify d=" << config.dimension << " N=" << N << " p=" << format_double(p)
                                 << " weight=" << profile.describe() << '\n';

                for (const auto& f : suite) {
                    auto emit = [&](InequalityReport r) {
                        r.meta.function = f.label;
                        table.add(to_row(r));
                    };
                    auto guarded = [&](const std::string& id, double tol, auto&& run) {
                        try {
                            emit(run());
                        } catch (const HypothesisError&) {
                            emit(detail::failed_report(id, *grid, p, profile, tol));
                        }
                    };
                    for (const auto& check : config.checks) {
                        if (check == "theorem") {
                            guarded("theorem", config.exact_tol, [&] {
                                return check_theorem(f.u, profile, ball_deviation_functional(p), p, config.exact_tol);
                            });
                        } else if (check == "local") {
                            emit(check_local_weighted(f.u, profile, p, *c_hat, config.exact_tol));
                        } else if (check == "nonlocal") {
                            for (const auto& k : config.kernels) {
                                if (k.kind != KernelKind::fractional || !k.applies_to(p)) continue;
                                const auto kernel = k.at(p);
                                double C = estimate_nonlocal_constant(f.u, profile, kernel);
                                if (C == 0.0) C = 1.0;
                                guarded("nonlocal", config.exact_tol, [&] {
                                    return check_nonlocal_weighted(f.u, profile, kernel, C, config.exact_tol);
                                });
                            }
                        } else if (check == "kernel_floor") {
                            for (const auto& k : config.kernels) {
                                if (k.kind != KernelKind::constant_floor || !k.applies_to(p)) continue;
                                guarded("kernel_floor", config.exact_tol, [&] {
                                    return check_kernel_bounded_below(f.u, profile, k.at(p), config.exact_tol);
                                });
                            }
                        } else if (check == "ckk") {
                            for (const auto& k : config.kernels) {
                                if (k.kind != KernelKind::fractional || !k.applies_to(p)) continue;
                                emit(check_ckk(f.u, profile, p, k.s, k.R.value_or(1.0), *c_robust,
                                               config.quadrature_tol));
                            }
                        } else if (check == "shift_lemma" && wi == 0) {
                            // ||u||_p >= ||u - mean||_p / 2 under counting measure
                            std::vector<double> centered = f.u.values();
                            CompensatedSum total;
                            for (double x : centered) total += x;
                            const double m = total.value() / static_cast<double>(centered.size());
                            for (double& x : centered) x -= m;
                            auto r = check_shift_lemma(centered, m, p).to_report(p);
                            r.meta.dim = grid->dim();
                            r.meta.cells_per_axis = N;
                            r.meta.profile = "none";
                            r.tolerance = config.exact_tol;
                            emit(r);
                        } else if (check == "chain_lemma" && wi == 0) {
                            for (const auto& k : config.kernels) {
                                if (k.kind != KernelKind::fractional || !k.applies_to(p)) continue;
                                emit(check_chain_lemma(f.u, p, k.s, k.R.value_or(1.0), config.quadrature_tol));
                            }
                        }
                    }
                }
            }
        }
    }
    return table;
}

inline const std::vector<std::string>& sharp_columns() {
    static const std::vector<std::string> cols{
        "check_id", "d",          "N",          "p",         "profile",  "method",     "lambda",
        "residual", "iterations", "empirical_constant",      "paper_constant", "gap_factor", "pass"};
    return cols;
}

/// Empirical sharp constants against the theoretical ones for the theorem
/// (ball-deviation right side) and the local corollary. p = 2 uses the
/// generalized eigenproblem; other p a ratio ascent started from it.
inline Table run_sharp(const ExperimentConfig& config, const RunOptions& options = {}) {
    Table table(sharp_columns());
    detail::LocalConstantCache local_constants(config);
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (int N : config.grid_sizes) {
        const auto grid = build_grid(config.dimension, N);
        const auto all = CellSet::all(*grid);
        for (double p : config.p_values) {
            for (std::size_t wi = 0; wi < config.weights.size(); ++wi) {
                const auto& profile = config.weights[wi].profile;
                for (const auto& check : config.checks) {
                    if (check != "theorem" && check != "local") continue;
                    const std::string run = check + " d=" + std::to_string(config.dimension) + " N=" +
                                            std::to_string(N) + " p=" + format_double(p) + " " + profile.describe();
                    if (options.log) *options.log << "sharp " << run << '\n';

                    auto eig_opts = detail::eigen_options(config);
                    if (options.trace)
                        eig_opts.trace = [&](int it, double lambda, double res) {
                            options.trace->record(run, it, lambda, res);
                        };

                    Row row;
                    double paper = nan;
                    GridFunctional lhs = [&](const GridFunction& u) { return weighted_deviation(u, profile, p); };
                    GridFunctional rhs;
                    std::optional<QuadraticFormPair> pair;
                    if (check == "theorem") {
                        paper = theorem_constant_M(p, config.dimension, profile);
                        pair = assemble_ball_deviation_p2(*grid, profile);
                        std::vector<std::pair<double, CellSet>> balls;
                        const auto measure = layer_cake(profile);
                        for (const auto& atom : measure.atoms()) balls.emplace_back(atom.mass, ball_cells(*grid, atom.t));
                        rhs = [balls, p](const GridFunction& u) {
                            CompensatedSum acc;
                            for (const auto& [mass, cells] : balls) acc += mass * deviation_p(u, cells, p);
                            return acc.value();
                        };
                    } else {
                        pair = assemble_p2(*grid, all, KernelSpec::local(2.0), profile);
                        rhs = [&all, p, &profile](const GridFunction& u) { return local_energy(u, all, p, profile); };
                    }

                    std::string method = p == 2.0 ? "eigen" : "ascent";
                    double lambda = nan;
                    double residual = nan;
                    std::int64_t iterations = 0;
                    double empirical = nan;
                    bool converged = true;
                    try {
                        if (check == "local")
                            paper = corollary_local_constant(p, config.dimension, profile, local_constants.get(p, wi));
                        const auto eig = smallest_nonzero_eigen(*pair, eig_opts);
                        lambda = eig.lambda;
                        residual = eig.residual;
                        iterations = eig.iterations;
                        if (p == 2.0) {
                            empirical = 1.0 / eig.lambda;
                        } else {
                            AscentOptions ao;
                            ao.weight = profile;
                            const auto res = ratio_ascent(grid, p, lhs, rhs, GridFunction(grid, eig.vector),
                                                          config.sharp.ascent_steps, config.sharp.ascent_step_size, ao);
                            empirical = res.ratio;
                        }
                    } catch (const ConvergenceError& e) {
                        converged = false;
                        residual = e.residual();
                        method += " (not converged)";
                    }
                    const double gap = converged ? paper / empirical : nan;
                    row.pass = converged && gap >= 1.0;
                    row.cells = {check,     static_cast<std::int64_t>(config.dimension),
                                 static_cast<std::int64_t>(N), p,
                                 profile.describe(), method,
                                 lambda,    residual,
                                 iterations, empirical,
                                 paper,     gap,
                                 row.pass};
                    table.add(std::move(row));
                }
            }
        }
    }
    return table;
}

inline const std::vector<std::string>& sweep_columns() {
    static const std::vector<std::string> cols{
        "d",          "N",       "p",          "profile",     "function",     "s",          "R",
        "scaled_energy", "scaled_truncated_energy", "local_energy", "bbm_ratio", "energy_factor",
        "ckk_ratio",  "chain_ratio", "pass"};
    return cols;
}

/// (1-s) times the fractional energy, its truncation, and the CKK and chain
/// ratios over the s x R grid. C_robust is frozen at robust_s0 once per
/// (N, p, weight). Empty axes collapse to s = robust_s0 and R = 1.
inline Table run_sweep(const ExperimentConfig& config, const RunOptions& options = {}) {
    Table table(sweep_columns());
    const auto s_values = config.sweep_s.empty() ? std::vector<double>{config.robust_s0} : config.sweep_s;
    const auto R_values = config.sweep_R.empty() ? std::vector<double>{1.0} : config.sweep_R;
    for (int N : config.grid_sizes) {
        const auto grid = build_grid(config.dimension, N);
        const auto all = CellSet::all(*grid);
        const auto suite = detail::build_suite(grid, config, options);
        const auto suite_u = detail::suite_values(suite);
        for (double p : config.p_values) {
            for (const auto& w : config.weights) {
                const auto& profile = w.profile;
                const double c_robust = estimate_robust_constant(suite_u, profile, p, config.robust_s0);
                if (options.log)
                    *options.log << "sweep d=" << config.dimension << " N=" << N << " p=" << format_double(p)
                                 << " weight=" << profile.describe() << " C_robust=" << format_double(c_robust)
                                 << '\n';
                for (const auto& f : suite) {
                    const double local = local_energy(f.u, all, p);
                    const double reference = (1.0 - s_values.front()) *
                                             kernel_energy(f.u, all, KernelSpec::fractional(s_values.front(), p));
                    for (double s : s_values) {
                        const double scaled = (1.0 - s) * kernel_energy(f.u, all, KernelSpec::fractional(s, p));
                        for (double R : R_values) {
                            const double truncated =
                                (1.0 - s) * kernel_energy(f.u, all, KernelSpec::fractional(s, p, R));
                            const auto ckk = check_ckk(f.u, profile, p, s, R, c_robust, config.quadrature_tol);
                            const auto chain = check_chain_lemma(f.u, p, s, R, config.quadrature_tol);
                            Row row;
                            row.pass = ckk.pass && chain.pass;
                            row.cells = {static_cast<std::int64_t>(config.dimension),
                                         static_cast<std::int64_t>(N),
                                         p,
                                         profile.describe(),
                                         f.label,
                                         s,
                                         R,
                                         scaled,
                                         truncated,
                                         local,
                                         local > 0.0 ? scaled / local : std::numeric_limits<double>::quiet_NaN(),
                                         reference > 0.0 ? scaled / reference : std::numeric_limits<double>::quiet_NaN(),
                                         ckk.ratio,
                                         chain.ratio,
                                         row.pass};
                            row.extra["C_robust"] = c_robust;
                            table.add(std::move(row));
                        }
                    }
                }
            }
        }
    }
    return table;
}

} // namespace poincare
