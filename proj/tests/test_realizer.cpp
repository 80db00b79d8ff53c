#include "geosynth/generator.hpp"
#include "geosynth/measure.hpp"
#include "geosynth/realizer.hpp"

#include "support/reference.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace geosynth;

namespace {

Label L(const char* s) { return Label { s }; }

DslSequence seeded(std::uint64_t seed)
{
    auto c = GeneratorConfig::defaults();
    c.seed = seed;
    c.step_count = 1 + static_cast<int>(seed % 4);
    return generate(c);
}

void expect_error(const char* text, GeometryErrorCode code, int statement, const char* reason)
{
    try {
        realize(parse(text));
        FAIL() << text;
    } catch (const GeometryError& e) {
        EXPECT_EQ(e.code(), code) << e.what();
        EXPECT_EQ(e.statement(), statement) << e.what();
        EXPECT_EQ(e.reason(), reason);
    }
}

} // namespace

TEST(Realize, RightTriangleCanonicalFrame)
{
    const auto s = realize(parse("Triangle(A,B,C)=(3,4,90)"));
    EXPECT_NEAR(s.at(L("B")).x, 0, 1e-12);
    EXPECT_NEAR(s.at(L("B")).y, 0, 1e-12);
    EXPECT_NEAR(s.at(L("A")).x, 0, 1e-12);
    EXPECT_NEAR(s.at(L("A")).y, 3, 1e-12);
    EXPECT_NEAR(s.at(L("C")).x, 4, 1e-12);
    EXPECT_NEAR(s.at(L("C")).y, 0, 1e-12);
    EXPECT_NEAR(dist(s.at(L("A")), s.at(L("C"))), 5, 1e-9);
}

TEST(Realize, OnCircleDistance)
{
    const auto s = realize(parse("Circle(O)=(2)\nOnCircle(P,O)"));
    EXPECT_NEAR(dist(s.at(L("P")), s.at(L("O"))), 2, 1e-9);
}

TEST(Realize, DegenerateAndInfeasibleCases)
{
    expect_error("Triangle(A,B,C)=(1,1,60)\nFree(D,A,B)=(5,1)", GeometryErrorCode::Degenerate, 2, "triangle inequality");
    expect_error("Square(A,B,C,D)=(2)\nIntersection(E,Line(A,B),Line(D,C))", GeometryErrorCode::Degenerate, 2,
        "intersection of parallel lines");
    expect_error("Square(A,B,C,D)=(2)\nCircle(A)=(3)\nTangentPoint(E,B,A)", GeometryErrorCode::Degenerate, 3,
        "tangent from interior point");
    expect_error("Circle(O)=(1)\nChord(Line(A,B),O)=(3)", GeometryErrorCode::Infeasible, 2, "chord longer than diameter");
}

TEST(Realize, MultiSolutionPicksGreaterY)
{
    // Both tangent points from E are valid; the upper one is chosen.
    const auto s = realize(parse("Circle(O)=(1)\nDiameter(Line(A,B),O)\nExtension(E,Line(A,B))=(2)\nTangentPoint(T,E,O)"));
    const Vec2 o = s.at(L("O"));
    const Vec2 e = s.at(L("E"));
    const Vec2 t = s.at(L("T"));
    const Vec2 mirror = 2.0 * (o + dot(t - o, (e - o).unit()) * (e - o).unit()) - t;
    EXPECT_GE(t.y, mirror.y);
}

TEST(Realize, SweepSatisfiesConstraintsAndReferenceOracle)
{
    for (std::uint64_t seed = 0; seed < 2000; ++seed) {
        const auto seq = seeded(seed);
        const auto scene = realize(seq);
        const auto bad = check_constraints(seq, scene);
        EXPECT_TRUE(bad.empty()) << print(seq) << bad.front().constraint;

        const auto rec = ref::reconstruct(seq, scene);
        for (const auto& m : rec.mismatches) {
            ADD_FAILURE() << print(seq) << "statement " << m.statement << ": " << m.what << " off by " << m.error;
        }
        const auto pts = scene.registry.points();
        for (std::size_t i = 0; i < pts.size(); ++i) {
            for (std::size_t j = i + 1; j < pts.size(); ++j) {
                const double want = ref::distance(rec.points.at(pts[i].name), rec.points.at(pts[j].name));
                const double got = measure(scene, MeasureQuery::length(pts[i], pts[j])).value;
                EXPECT_LE(std::abs(got - want), 1e-9 * std::max(1.0, want)) << print(seq);
            }
        }
    }
}

TEST(Realize, EveryParameterIsAnnotatedOnce)
{
    for (std::uint64_t seed = 0; seed < 1000; ++seed) {
        const auto seq = seeded(seed);
        const auto scene = realize(seq);
        for (std::size_t i = 0; i < seq.size(); ++i) {
            std::size_t valued = 0;
            for (const auto& a : scene.annotations) {
                valued += a.valued() && a.statement == static_cast<int>(i) + 1;
            }
            EXPECT_EQ(valued, seq.statements[i].params.size()) << print(seq.statements[i]);
        }
    }
}

TEST(Realize, IdempotentAndRotationInvariant)
{
    for (std::uint64_t seed = 0; seed < 300; ++seed) {
        const auto seq = seeded(seed);
        const auto a = realize(seq, 1.0, 37.0);
        const auto b = realize(seq, 1.0, 37.0);
        ASSERT_EQ(a.points.size(), b.points.size());
        for (std::size_t i = 0; i < a.points.size(); ++i) {
            EXPECT_EQ(a.points[i].second.x, b.points[i].second.x);
            EXPECT_EQ(a.points[i].second.y, b.points[i].second.y);
        }
        const auto base = realize(seq);
        const auto pts = base.registry.points();
        auto rel = [](double x, double y) { return std::abs(x - y) / std::max(1.0, std::abs(y)); };
        for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
            const auto q = MeasureQuery::length(pts[i], pts[i + 1]);
            EXPECT_LE(rel(measure(a, q).value, measure(base, q).value), 1e-9);
        }
        for (const auto& ang : base.registry.angles()) {
            const auto q = MeasureQuery::angle(ang[0], ang[1], ang[2]);
            EXPECT_LE(rel(measure(a, q).value, measure(base, q).value), 1e-9);
        }
        for (const auto& sh : base.registry.shapes()) {
            if (sh.kind == "Arc") {
                continue;
            }
            const auto q = MeasureQuery::of_shape(MeasureKind::Area, sh);
            EXPECT_LE(rel(measure(a, q).value, measure(base, q).value), 1e-9);
        }
    }
}

TEST(Measure, ClosedForms)
{
    const auto t = realize(parse("Triangle(A,B,C)=(3,4,90)"));
    EXPECT_NEAR(measure(t, MeasureQuery::angle(L("A"), L("B"), L("C"))).value, 90, 1e-9);
    EXPECT_EQ(measure(t, MeasureQuery::angle(L("A"), L("B"), L("C"))).unit, "°");
    const auto c = realize(parse("Circle(O)=(2)"));
    const auto area = measure(c, MeasureQuery::of_shape(MeasureKind::Area, ShapeRef { "Circle", { L("O") } }));
    EXPECT_NEAR(area.value, 4 * std::numbers::pi, 1e-12);
    EXPECT_NEAR(area.value, 12.566370614, 1e-9);
}

TEST(Measure, Errors)
{
    const auto s = realize(parse("Triangle(A,B,C)=(3,4,90)\nArc(O,P,Q)=(2,60)"));
    try {
        measure(s, MeasureQuery::of_shape(MeasureKind::Area, ShapeRef { "Arc", { L("O"), L("P"), L("Q") } }));
        FAIL();
    } catch (const GeometryError& e) {
        EXPECT_EQ(e.code(), GeometryErrorCode::UndefinedMeasure);
    }
    try {
        measure(s, MeasureQuery::length(L("A"), L("Z")));
        FAIL();
    } catch (const GeometryError& e) {
        EXPECT_EQ(e.code(), GeometryErrorCode::UnknownElement);
    }
    try {
        measure(s, MeasureQuery::of_shape(MeasureKind::Area, ShapeRef { "Square", { L("A"), L("B"), L("C"), L("O") } }));
        FAIL();
    } catch (const GeometryError& e) {
        EXPECT_EQ(e.code(), GeometryErrorCode::UnknownElement);
    }
}

TEST(Measure, QueryText)
{
    for (const char* text : { "length(A,C)", "angle(A,B,C)", "area(Circle(O))", "perimeter(Square(A,B,C,D))",
             "arc_length(Arc(O,A,B))" }) {
        const auto q = MeasureQuery::parse(text);
        ASSERT_TRUE(q) << text;
        EXPECT_EQ(q->to_string(), text);
    }
    EXPECT_FALSE(MeasureQuery::parse("volume(A)"));
}
