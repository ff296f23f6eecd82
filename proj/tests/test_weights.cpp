#include "poincare/weights.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

using namespace poincare;

namespace {

RadialProfile random_profile(std::mt19937_64& rng, int max_steps) {
    std::uniform_int_distribution<int> count(0, max_steps);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const int m = count(rng);
    std::vector<double> r;
    while (static_cast<int>(r.size()) < m) {
        const double x = unit(rng);
        if (x <= 0.0 || x >= 1.0) continue;
        r.push_back(x);
        std::sort(r.begin(), r.end());
        r.erase(std::unique(r.begin(), r.end()), r.end());
    }
    std::vector<double> v(r.size() + 1);
    double level = 1.0 + 4.0 * unit(rng);
    for (auto& x : v) {
        x = level;
        level *= 0.1 + 0.9 * unit(rng);
    }
    return RadialProfile(r, v);
}

} // namespace

TEST(StepProfile, Construction) {
    const auto c = make_step_profile({}, {1.0});
    EXPECT_EQ(c.at(0.0), 1.0);
    EXPECT_EQ(c.at(0.99), 1.0);

    const auto p = make_step_profile({0.75}, {2.0, 1.0});
    EXPECT_EQ(p.at(0.5), 2.0);
    EXPECT_EQ(p.at(0.75), 1.0);
    EXPECT_EQ(p.at(0.9), 1.0);

    EXPECT_THROW(make_step_profile({0.6}, {1.0, 2.0}), std::invalid_argument);
    EXPECT_THROW(make_step_profile({1.0}, {2.0, 1.0}), std::invalid_argument);
    EXPECT_THROW(make_step_profile({0.0}, {2.0, 1.0}), std::invalid_argument);
    EXPECT_THROW(make_step_profile({0.4}, {2.0, 0.0}), std::invalid_argument);
    EXPECT_THROW(make_step_profile({0.5, 0.4}, {3.0, 2.0, 1.0}), std::invalid_argument);
    EXPECT_THROW(make_step_profile({0.5}, {1.0}), std::invalid_argument);
}

TEST(StepProfile, SampleProfile) {
    const auto p = sample_profile([](double t) { return 1.0 - t * t; }, 2);
    EXPECT_EQ(p.breakpoints(), std::vector<double>{0.5});
    EXPECT_EQ(p.values(), (std::vector<double>{1.0, 0.75}));

    const auto c = sample_profile([](double) { return 1.0; }, 7);
    for (double t : {0.0, 0.3, 0.6, 0.99}) EXPECT_EQ(c.at(t), 1.0);

    EXPECT_THROW(sample_profile([](double t) { return t; }, 2), std::invalid_argument);
    EXPECT_THROW(sample_profile([](double) { return 1.0; }, 0), std::invalid_argument);
}

TEST(StepProfile, SampleDominatesContinuousMap) {
    const auto f = [](double t) { return std::pow(1.0 - t, 0.5); };
    const auto p = sample_profile(f, 16);
    for (int i = 0; i < 1000; ++i) {
        const double t = i / 1000.0;
        EXPECT_GE(p.at(t), f(t));
    }
}

TEST(StepProfile, EvalWeightRange) {
    const auto p = make_step_profile({0.75}, {2.0, 1.0});
    EXPECT_EQ(eval_weight(p, 0.5), 2.0);
    EXPECT_EQ(eval_weight(p, 0.75), 1.0);
    EXPECT_THROW(eval_weight(p, 1.0), std::invalid_argument);
    EXPECT_THROW(eval_weight(p, -0.1), std::invalid_argument);
}

TEST(LayerCake, Examples) {
    const auto unit = layer_cake(constant_profile());
    ASSERT_EQ(unit.atoms().size(), 1u);
    EXPECT_EQ(unit.atoms()[0], (Atom{1.0, 1.0}));

    const auto step = layer_cake(make_step_profile({0.75}, {2.0, 1.0}));
    EXPECT_EQ(step.atoms(), (std::vector<Atom>{{0.75, 1.0}, {1.0, 1.0}}));
    EXPECT_EQ(reconstruct(step, 0.8), 1.0);
    EXPECT_EQ(reconstruct(step, 0.6), 2.0);

    const auto inner = make_step_profile({0.4}, {3.0, 1.0});
    const auto nu = layer_cake(inner);
    EXPECT_EQ(nu.atoms(), (std::vector<Atom>{{1.0, 1.0}}));
    for (double r = 0.51; r < 1.0; r += 0.01) EXPECT_EQ(reconstruct(nu, r), inner.at(r));
}

TEST(LayerCake, JumpAtHalfIsNotAnAtom) {
    const auto p = make_step_profile({0.5, 0.8}, {3.0, 2.0, 1.0});
    const auto nu = layer_cake(p);
    EXPECT_EQ(nu.atoms(), (std::vector<Atom>{{0.8, 1.0}, {1.0, 1.0}}));
    EXPECT_EQ(nu.total_mass(), p.at_half());
}

TEST(LayerCake, ReconstructRange) {
    const LayerCakeMeasure nu({{1.0, 1.0}});
    EXPECT_EQ(reconstruct(nu, 0.9), 1.0);
    EXPECT_THROW(reconstruct(nu, 0.5), std::invalid_argument);
    EXPECT_THROW(reconstruct(nu, 1.0), std::invalid_argument);
}

TEST(LayerCake, MeasureValidation) {
    EXPECT_THROW(LayerCakeMeasure({{0.5, 1.0}}), std::invalid_argument);
    EXPECT_THROW(LayerCakeMeasure({{0.9, 1.0}, {0.8, 1.0}}), std::invalid_argument);
    EXPECT_THROW(LayerCakeMeasure({{0.9, 0.0}}), std::invalid_argument);
    EXPECT_THROW(LayerCakeMeasure({{0.9, -1.0}, {1.0, 2.0}}), std::invalid_argument);
}

TEST(LayerCake, RoundTripProperty) {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> annulus(0.5, 1.0);
    for (int trial = 0; trial < 300; ++trial) {
        const auto p = random_profile(rng, 10);
        const auto nu = layer_cake(p);
        EXPECT_NEAR(nu.total_mass(), p.at_half(), 1e-15);
        double previous = std::numeric_limits<double>::infinity();
        for (int k = 0; k < 50; ++k) {
            const double r = annulus(rng);
            if (r <= 0.5) continue;
            EXPECT_NEAR(reconstruct(nu, r), eval_weight(p, r), 1e-15);
        }
        for (int k = 1; k < 100; ++k) {
            const double r = 0.5 + k * 0.005;
            const double x = reconstruct(nu, r);
            EXPECT_LE(x, previous);
            previous = x;
        }
    }
}

TEST(Truncate, Examples) {
    const auto p = make_step_profile({0.75}, {2.0, 1.0});
    EXPECT_EQ(truncate_profile(p), p);
    EXPECT_EQ(truncate_profile(make_step_profile({0.3, 0.75}, {4.0, 2.0, 1.0})), p);
    EXPECT_EQ(truncate_profile(constant_profile()), constant_profile());
}

TEST(Truncate, SandwichProperty) {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 200; ++trial) {
        const auto p = random_profile(rng, 10);
        const auto q = truncate_profile(p);
        const double factor = p.at_half() / p.at_center();
        for (int k = 0; k < 100; ++k) {
            const double r = k / 100.0;
            EXPECT_LE(factor * p.at(r), q.at(r) * (1.0 + 1e-15));
            EXPECT_LE(q.at(r), p.at(r));
        }
        EXPECT_EQ(q.at(0.0), q.at(0.5));
    }
}
