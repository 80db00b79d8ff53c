#include "geosynth/generator.hpp"

#include <gtest/gtest.h>

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>

using namespace geosynth;

namespace {

bool on_grid(const Rational& a, double grid, double lo, double hi)
{
    const double v = a.to_double();
    return v >= lo && v <= hi && std::abs(std::remainder(v, grid)) < 1e-12;
}

void check_params(const DslSequence& seq, const GeneratorConfig& c)
{
    for (const auto& st : seq.statements) {
        const auto& kinds = st.entry()->params;
        for (std::size_t i = 0; i < st.params.size(); ++i) {
            const double v = st.params[i].to_double();
            if (kinds[i] == ParamKind::Angle) {
                EXPECT_TRUE(on_grid(st.params[i], c.angle_grid, c.angle_min, c.angle_max)) << print(st);
            } else {
                EXPECT_GE(v, c.scale_factor * c.length_min - 1e-12) << print(st);
                EXPECT_LE(v, c.scale_factor * c.length_max + 1e-12) << print(st);
            }
        }
    }
}

} // namespace

TEST(Initialize, SingleSeedShapeInRange)
{
    auto c = GeneratorConfig::defaults();
    c.seed = 7;
    auto [seq, state] = initialize(c);
    ASSERT_EQ(seq.size(), 1u);
    EXPECT_EQ(seq.statements[0].kind(), Category::Shape);
    EXPECT_TRUE(validate(seq).empty());
    check_params(seq, c);
    for (const auto& l : seq.statements[0].labels()) {
        EXPECT_TRUE(state.registry.has_point(l));
    }
}

TEST(Initialize, OnlyCircleWeighted)
{
    auto c = GeneratorConfig::defaults();
    for (auto& [k, w] : c.action_weights["seed"]) {
        w = k == "Circle" ? 1.0 : 0.0;
    }
    for (std::uint64_t s = 0; s < 50; ++s) {
        c.seed = s;
        EXPECT_EQ(initialize(c).first.statements[0].constructor, "Circle");
    }
}

TEST(Initialize, CollapsedLengthRange)
{
    auto c = GeneratorConfig::defaults();
    c.length_min = c.length_max = 2;
    c.step_count = 3;
    for (std::uint64_t s = 0; s < 100; ++s) {
        c.seed = s;
        for (const auto& st : generate(c).statements) {
            for (std::size_t i = 0; i < st.params.size(); ++i) {
                if (st.entry()->params[i] == ParamKind::Length) {
                    EXPECT_EQ(st.params[i], Rational(2)) << print(st);
                }
            }
        }
    }
}

TEST(Initialize, EmptyActionSpace)
{
    auto c = GeneratorConfig::defaults();
    for (auto& [k, w] : c.action_weights["seed"]) {
        w = 0.0;
    }
    try {
        initialize(c);
        FAIL();
    } catch (const GeneratorError& e) {
        EXPECT_EQ(e.code(), GeneratorErrorCode::EmptyActionSpace);
    }
}

TEST(Step, ActionComesFromSelectedCategory)
{
    auto c = GeneratorConfig::defaults();
    for (std::uint64_t s = 0; s < 300; ++s) {
        c.seed = s;
        Rng rng(s);
        auto [seq, state] = initialize(c, rng);
        const auto info = step(seq, state, c, rng);
        ASSERT_EQ(seq.size(), 2u);
        const auto actions = GeneratorConfig::actions(info.category);
        EXPECT_NE(std::find(actions.begin(), actions.end(), info.action), actions.end());
        EXPECT_EQ(seq.statements[1].constructor, info.action);
        EXPECT_TRUE(validate(seq).empty()) << print(seq);
    }
}

TEST(Step, MidpointOnTriangleSide)
{
    auto c = GeneratorConfig::defaults();
    for (auto& [k, w] : c.action_weights["seed"]) {
        w = k == "Triangle" ? 1.0 : 0.0;
    }
    for (auto& [cat, w] : c.element_weights) {
        w = cat == "line" ? 1.0 : 0.0;
    }
    for (auto& [k, w] : c.action_weights["line"]) {
        w = k == "Midpoint" ? 1.0 : 0.0;
    }
    Rng rng(3);
    auto [seq, state] = initialize(c, rng);
    step(seq, state, c, rng);
    const auto& st = seq.statements[1];
    EXPECT_EQ(st.constructor, "Midpoint");
    EXPECT_EQ(std::get<Label>(st.args[0]).name, "D");
}

TEST(Step, TangentOnCircle)
{
    auto c = GeneratorConfig::defaults();
    for (auto& [k, w] : c.action_weights["seed"]) {
        w = k == "Circle" ? 1.0 : 0.0;
    }
    for (auto& [cat, w] : c.element_weights) {
        w = cat == "shape" ? 1.0 : 0.0;
    }
    for (auto& [k, w] : c.action_weights["shape"]) {
        w = k == "Tangent" ? 1.0 : 0.0;
    }
    c.step_count = 1;
    c.seed = 11;
    const auto seq = generate(c);
    ASSERT_EQ(seq.size(), 2u);
    EXPECT_EQ(seq.statements[1].constructor, "Tangent");
}

TEST(Step, NoLegalActionSurfaces)
{
    auto c = GeneratorConfig::defaults();
    for (auto& [cat, w] : c.element_weights) {
        w = cat == "angle" ? 1.0 : 0.0;
    }
    for (auto& [k, w] : c.action_weights["seed"]) {
        w = k == "Square" ? 1.0 : 0.0;
    }
    // Squares register angles, but every angle action is switched off.
    for (auto& [k, w] : c.action_weights["angle"]) {
        w = 0.0;
    }
    Rng rng(1);
    auto [seq, state] = initialize(c, rng);
    try {
        step(seq, state, c, rng);
        FAIL();
    } catch (const GeneratorError& e) {
        EXPECT_EQ(e.code(), GeneratorErrorCode::NoLegalAction);
    }
}

TEST(Generate, StatementCountAndDeterminism)
{
    auto c = GeneratorConfig::defaults();
    c.seed = 42;
    c.step_count = 1;
    EXPECT_EQ(generate(c).size(), 2u);
    c.step_count = 0;
    EXPECT_EQ(generate(c).size(), 1u);
    c.step_count = 4;
    EXPECT_EQ(print(generate(c)), print(generate(c)));
}

TEST(Generate, HistogramSpansTwoToFive)
{
    auto c = GeneratorConfig::defaults();
    std::map<std::size_t, int> hist;
    Rng pick(99);
    for (std::uint64_t s = 0; s < 1000; ++s) {
        c.seed = s;
        c.step_count = 1 + static_cast<int>(pick.below(4));
        const auto seq = generate(c);
        EXPECT_TRUE(validate(seq).empty());
        check_params(seq, c);
        ++hist[seq.size()];
    }
    EXPECT_EQ(hist.size(), 4u);
    EXPECT_EQ(hist.begin()->first, 2u);
    EXPECT_EQ(hist.rbegin()->first, 5u);
}

TEST(Generate, ScaledLengthRange)
{
    auto c = GeneratorConfig::defaults();
    c.scale_factor = 2;
    c.step_count = 2;
    for (std::uint64_t s = 0; s < 200; ++s) {
        c.seed = s;
        check_params(generate(c), c);
    }
}

TEST(Generate, WeightFidelity)
{
    const double w = 0.3;
    auto c = GeneratorConfig::defaults();
    for (auto& [k, x] : c.action_weights["seed"]) {
        // Equilateral seeds never make either center degenerate, so the
        // emitted statement is the first selection.
        x = k == "EquilateralTriangle" ? 1.0 : 0.0;
    }
    for (auto& [cat, x] : c.element_weights) {
        x = cat == "shape" ? 1.0 : 0.0;
    }
    c.action_weights["shape"] = { { "Centroid", w }, { "Incenter", 1 - w } };
    c.step_count = 1;
    const int n = 10000;
    int hits = 0;
    for (int s = 0; s < n; ++s) {
        c.seed = static_cast<std::uint64_t>(s);
        hits += generate(c).statements[1].constructor == "Centroid";
    }
    const double sigma = std::sqrt(n * w * (1 - w));
    EXPECT_LE(std::abs(hits - n * w), 3 * sigma) << hits;
}

TEST(Config, JsonRoundTripAndUnknownKeys)
{
    auto c = GeneratorConfig::defaults();
    c.seed = 5;
    c.length_max = 7;
    GeneratorConfig d = GeneratorConfig::defaults();
    apply_json(d, to_json(c));
    EXPECT_EQ(to_json(d), to_json(c));
    EXPECT_THROW(apply_json(d, nlohmann::json { { "steps", 3 } }), std::invalid_argument);
    c.angle_min = 200;
    EXPECT_FALSE(c.problems().empty());
}
