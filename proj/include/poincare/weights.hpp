#pragma once

#include "poincare/numeric.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

namespace poincare {

/// Nonincreasing right-continuous step profile on [0, 1).
///
/// With breakpoints r_1 < ... < r_m the profile takes the value
/// values[i] on [r_i, r_{i+1}), where r_0 = 0 and r_{m+1} = 1.
class RadialProfile {
public:
    RadialProfile(std::vector<double> breakpoints, std::vector<double> values)
        : breakpoints_(std::move(breakpoints)), values_(std::move(values)) {
        require(values_.size() == breakpoints_.size() + 1,
                "profile needs exactly one more value than breakpoints");
        for (std::size_t i = 0; i < breakpoints_.size(); ++i) {
            const double r = breakpoints_[i];
            require(std::isfinite(r) && r > 0.0 && r < 1.0, "breakpoint out of (0,1)");
            require(i == 0 || r > breakpoints_[i - 1], "breakpoints must be strictly increasing");
        }
        for (std::size_t i = 0; i < values_.size(); ++i) {
            require(std::isfinite(values_[i]), "profile values must be finite");
            require(values_[i] >= 0.0, "profile values must be nonnegative");
            require(i == 0 || values_[i] <= values_[i - 1], "profile values must be nonincreasing");
        }
        require(at(0.5) > 0.0, "profile must be positive at 1/2");
    }

    const std::vector<double>& breakpoints() const noexcept { return breakpoints_; }
    const std::vector<double>& values() const noexcept { return values_; }

    /// Level on the interval containing t; t must lie in [0, 1).
    double at(double t) const {
        require(t >= 0.0 && t < 1.0, "radius must lie in [0,1)");
        const auto it = std::upper_bound(breakpoints_.begin(), breakpoints_.end(), t);
        return values_[static_cast<std::size_t>(it - breakpoints_.begin())];
    }

    double at_center() const noexcept { return values_.front(); }
    double at_half() const { return at(0.5); }

    bool is_constant() const noexcept { return values_.front() == values_.back(); }

    std::string describe() const {
        std::string out = "step[";
        for (std::size_t i = 0; i < breakpoints_.size(); ++i) out += (i ? " " : "") + format_double(breakpoints_[i]);
        out += "|";
        for (std::size_t i = 0; i < values_.size(); ++i) out += (i ? " " : "") + format_double(values_[i]);
        return out + "]";
    }

    friend bool operator==(const RadialProfile&, const RadialProfile&) = default;

private:
    std::vector<double> breakpoints_;
    std::vector<double> values_;
};

struct Atom {
    double t;
    double mass;
    friend bool operator==(const Atom&, const Atom&) = default;
};

/// Finite atomic measure on (1/2, 1].
class LayerCakeMeasure {
public:
    explicit LayerCakeMeasure(std::vector<Atom> atoms) : atoms_(std::move(atoms)) {
        bool any_positive = false;
        for (std::size_t j = 0; j < atoms_.size(); ++j) {
            const auto& a = atoms_[j];
            require(a.t > 0.5 && a.t <= 1.0, "atom location must lie in (1/2,1]");
            require(j == 0 || a.t > atoms_[j - 1].t, "atom locations must be strictly increasing");
            require(std::isfinite(a.mass) && a.mass >= 0.0, "atom mass must be finite and nonnegative");
            any_positive = any_positive || a.mass > 0.0;
        }
        require(any_positive, "measure must be non-zero");
    }

    const std::vector<Atom>& atoms() const noexcept { return atoms_; }

    double total_mass() const noexcept {
        CompensatedSum acc;
        for (const auto& a : atoms_) acc += a.mass;
        return acc.value();
    }

private:
    std::vector<Atom> atoms_;
};

inline RadialProfile make_step_profile(std::vector<double> breakpoints, std::vector<double> values) {
    return RadialProfile(std::move(breakpoints), std::move(values));
}

inline RadialProfile constant_profile(double level = 1.0) { return RadialProfile({}, {level}); }

/// Left-endpoint sampling on m uniform subintervals, so the step profile
/// dominates the sampled map pointwise when the map is nonincreasing.
inline RadialProfile sample_profile(const std::function<double(double)>& profile, int m) {
    require(m >= 1, "step count must be at least 1");
    std::vector<double> breakpoints;
    std::vector<double> values;
    for (int i = 0; i < m; ++i) {
        const double t = static_cast<double>(i) / m;
        if (i > 0) breakpoints.push_back(t);
        values.push_back(profile(t));
    }
    return RadialProfile(std::move(breakpoints), std::move(values));
}

inline double eval_weight(const RadialProfile& profile, double radius) { return profile.at(radius); }

/// Measure nu with nu((r,1]) = Phi(r) on (1/2,1). Jumps at radii <= 1/2 are
/// not atoms; zero-mass atoms are dropped.
inline LayerCakeMeasure layer_cake(const RadialProfile& profile) {
    const auto& r = profile.breakpoints();
    const auto& v = profile.values();
    std::vector<Atom> atoms;
    for (std::size_t i = 0; i < r.size(); ++i) {
        if (r[i] <= 0.5) continue;
        const double jump = v[i] - v[i + 1];
        if (jump > 0.0) atoms.push_back({r[i], jump});
    }
    if (v.back() > 0.0) atoms.push_back({1.0, v.back()});
    return LayerCakeMeasure(std::move(atoms));
}

/// nu((radius, 1]), summed from the outermost atom inward.
inline double reconstruct(const LayerCakeMeasure& measure, double radius) {
    require(radius > 0.5 && radius < 1.0, "radius must lie in (1/2,1)");
    CompensatedSum acc;
    const auto& atoms = measure.atoms();
    for (auto it = atoms.rbegin(); it != atoms.rend() && it->t > radius; ++it) acc += it->mass;
    return acc.value();
}

/// Drops breakpoints across which the level does not change.
inline RadialProfile simplify(const RadialProfile& profile) {
    const auto& r = profile.breakpoints();
    const auto& v = profile.values();
    std::vector<double> breakpoints;
    std::vector<double> values{v.front()};
    for (std::size_t i = 0; i < r.size(); ++i) {
        if (v[i + 1] == values.back()) continue;
        breakpoints.push_back(r[i]);
        values.push_back(v[i + 1]);
    }
    return RadialProfile(std::move(breakpoints), std::move(values));
}

/// min(Phi, Phi(1/2)); constant on [0, 1/2].
inline RadialProfile truncate_profile(const RadialProfile& profile) {
    const double cap = profile.at_half();
    std::vector<double> values = profile.values();
    for (double& x : values) x = std::min(x, cap);
    return simplify(RadialProfile(profile.breakpoints(), std::move(values)));
}

} // namespace poincare
