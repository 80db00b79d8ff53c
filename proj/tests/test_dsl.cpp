#include "geosynth/dsl.hpp"
#include "geosynth/generator.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>

using namespace geosynth;

namespace {

Label L(const char* s) { return Label { s }; }

bool has(const std::vector<Diagnostic>& d, DiagCode code, int statement)
{
    return std::any_of(d.begin(), d.end(), [&](const Diagnostic& x) { return x.code == code && x.statement == statement; });
}

} // namespace

TEST(Catalog, CategoryCounts)
{
    const auto& cat = ElementCatalog::instance();
    EXPECT_EQ(cat.in_category(Category::Point).size(), 13u);
    EXPECT_EQ(cat.in_category(Category::Line).size(), 7u);
    EXPECT_EQ(cat.in_category(Category::Angle).size(), 3u);
    EXPECT_EQ(cat.in_category(Category::Shape).size(), 14u);
    for (const auto& e : cat.entries()) {
        EXPECT_GE(e.template_ids.size(), 2u) << e.name;
    }
}

TEST(Parse, TriangleStatement)
{
    const auto seq = parse("Triangle(A,B,C)=(3,4,60)\n");
    ASSERT_EQ(seq.size(), 1u);
    const auto& st = seq.statements[0];
    EXPECT_EQ(st.constructor, "Triangle");
    EXPECT_EQ(st.kind(), Category::Shape);
    EXPECT_EQ(st.labels(), (std::vector<Label> { L("A"), L("B"), L("C") }));
    EXPECT_EQ(st.params, (std::vector<Rational> { 3, 4, 60 }));
}

TEST(Parse, CircleStatement)
{
    const auto seq = parse("Circle(O)=(2)");
    ASSERT_EQ(seq.size(), 1u);
    EXPECT_EQ(seq.statements[0].labels(), std::vector<Label> { L("O") });
    EXPECT_EQ(seq.statements[0].params, std::vector<Rational> { 2 });
}

TEST(Parse, UseBeforeDefine)
{
    try {
        parse("Foot(D,A,Line(B,C))\n");
        FAIL() << "expected DslError";
    } catch (const DslError& e) {
        EXPECT_EQ(e.code(), DslErrorCode::UndefinedReference);
        EXPECT_EQ(e.label(), "A");
        EXPECT_EQ(e.line(), 1);
    }
}

TEST(Parse, SyntaxErrorsCarryPosition)
{
    try {
        parse("Triangle(A,B,C)=(3,4,60)\nMidpoint(D,Line(A,B)\n");
        FAIL();
    } catch (const DslError& e) {
        EXPECT_EQ(e.code(), DslErrorCode::Syntax);
        EXPECT_EQ(e.line(), 2);
        EXPECT_GT(e.column(), 0);
    }
    EXPECT_THROW(parse("Line(A,B)\n"), DslError);
    EXPECT_THROW(parse("Hexagon(A,B,C)=(1)\n"), DslError);
}

TEST(Parse, ArityAndDuplicates)
{
    try {
        parse("Triangle(A,B,C)=(3,4)\n");
        FAIL();
    } catch (const DslError& e) {
        EXPECT_EQ(e.code(), DslErrorCode::ArityMismatch);
    }
    try {
        parse("Triangle(A,B,C)=(3,4,60)\nMidpoint(A,Line(B,C))\n");
        FAIL();
    } catch (const DslError& e) {
        EXPECT_EQ(e.code(), DslErrorCode::DuplicateDefinition);
        EXPECT_EQ(e.label(), "A");
    }
}

TEST(Print, Canonical)
{
    EXPECT_EQ(print(parse("Circle(O)=(2)")), "Circle(O)=(2)\n");
    EXPECT_EQ(print(DslSequence {}), "");
    const std::string text = "Triangle(A,B,C)=(3,4,60)\nPara(Line(A,D),Line(B,C),2.5)\nPara(Line(C,E),Line(A,B),7/3)\nAngle(D,A,F)=45\n";
    EXPECT_EQ(print(parse(text)), text);
}

TEST(Validate, WellFormed)
{
    const auto seq = parse_syntax("Triangle(A,B,C)=(3,4,60)\nMidpoint(D,Line(A,B))\nSegment(C,D)\n");
    EXPECT_TRUE(validate(seq).empty());
}

TEST(Validate, AngleOutOfRange)
{
    const auto seq = parse_syntax("Angle(P,Q,R)=190\n");
    EXPECT_TRUE(has(validate(seq), DiagCode::AngleOutOfRange, 1));
}

TEST(Validate, DuplicateDefinitionAtSecondStatement)
{
    const auto seq = parse_syntax("Triangle(A,B,C)=(3,4,60)\nMidpoint(A,Line(B,C))\n");
    const auto d = validate(seq);
    EXPECT_TRUE(has(d, DiagCode::DuplicateDefinition, 2));
}

TEST(Validate, NonPositiveLengthAndFirstStatement)
{
    EXPECT_TRUE(has(validate(parse_syntax("Circle(O)=(0)\n")), DiagCode::NonPositiveLength, 1));
    const auto d = validate(parse_syntax("Triangle(A,B,C)=(3,4,60)\nSegment(A,A)\n"));
    EXPECT_TRUE(has(d, DiagCode::RepeatedReference, 2));
}

namespace {

/// A valid statement for `e` on top of a prefix that defines A, B, C and circle O.
Statement sample_statement(const CatalogEntry& e)
{
    Statement st;
    st.constructor = e.name;
    const char* fresh[] = { "P", "Q", "R", "S", "T", "U", "V", "W" };
    int next = 0;
    auto nf = [&] { return Label { fresh[next++] }; };
    int used = 0;
    // O is only free to reuse as a plain point when no slot names the circle.
    const bool circle = std::find(e.slots.begin(), e.slots.end(), Slot::Circle) != e.slots.end();
    const char* old[] = { "A", "B", "C", "O" };
    auto od = [&] { return Label { old[used++ % (circle ? 3 : 4)] }; };
    for (Slot s : e.slots) {
        switch (s) {
        case Slot::NewPoint:
        case Slot::CenterOrNew:
            st.args.emplace_back(nf());
            break;
        case Slot::Point:
            st.args.emplace_back(od());
            break;
        case Slot::Circle:
            st.args.emplace_back(Label { "O" });
            break;
        case Slot::Line: {
            Label a = od();
            Label b = od();
            st.args.emplace_back(LineRef { a, b });
            break;
        }
        case Slot::LineFromNew:
            st.args.emplace_back(LineRef { od(), nf() });
            break;
        case Slot::LineNewNew: {
            Label a = nf();
            Label b = nf();
            st.args.emplace_back(LineRef { a, b });
            break;
        }
        case Slot::Vertices:
            for (int i = 0; i < e.min_vertices; ++i) {
                st.args.emplace_back(nf());
            }
            break;
        }
    }
    for (ParamKind k : e.params) {
        st.params.push_back(k == ParamKind::Length ? Rational(2) : Rational(60));
    }
    return st;
}

} // namespace

TEST(Validate, CatalogClosureValidAndInvalidArities)
{
    const auto prefix = parse("Triangle(A,B,C)=(3,4,60)\nCircle(O)=(2)\n");
    for (const auto& e : ElementCatalog::instance().entries()) {
        DslSequence seq = prefix;
        seq.statements.push_back(sample_statement(e));
        EXPECT_TRUE(validate(seq).empty()) << print(seq);
        EXPECT_EQ(parse(print(seq)), seq) << e.name;

        DslSequence extra = seq;
        const char* extras[] = { "Z", "Y", "X", "W1", "V1" };
        const std::size_t add = e.variadic() ? static_cast<std::size_t>(e.max_vertices - e.min_vertices + 1) : 1;
        for (std::size_t i = 0; i < add; ++i) {
            extra.statements.back().args.emplace_back(Label { extras[i] });
        }
        EXPECT_TRUE(has(validate(extra), DiagCode::ArityMismatch, 3)) << e.name;

        DslSequence fewer = seq;
        if (!e.params.empty()) {
            fewer.statements.back().params.pop_back();
        } else {
            fewer.statements.back().params.push_back(Rational(1));
        }
        EXPECT_TRUE(has(validate(fewer), DiagCode::ArityMismatch, 3)) << e.name;
    }
    DslSequence unknown = prefix;
    unknown.statements.push_back(Statement { "Hexagon", { Label { "Z" } }, { 1 } });
    EXPECT_TRUE(has(validate(unknown), DiagCode::UnknownConstructor, 3));
}

TEST(Validate, EveryReorderingThatBreaksDefinitionOrderIsRejected)
{
    const auto seq = parse(
        "Triangle(A,B,C)=(3,4,60)\nMidpoint(D,Line(A,B))\nFoot(E,D,Line(B,C))\nSegment(C,D)\n");
    std::vector<int> order(seq.size());
    std::iota(order.begin(), order.end(), 0);
    int rejected = 0;
    do {
        DslSequence perm;
        for (int i : order) {
            perm.statements.push_back(seq.statements[static_cast<std::size_t>(i)]);
        }
        // Valid orders keep the shape first, D before its users and E after D.
        auto pos = [&](int s) { return std::find(order.begin(), order.end(), s) - order.begin(); };
        const bool topo = pos(0) == 0 && pos(1) < pos(2) && pos(1) < pos(3);
        EXPECT_EQ(validate(perm).empty(), topo);
        rejected += !topo;
    } while (std::next_permutation(order.begin(), order.end()));
    EXPECT_GT(rejected, 0);
}

TEST(RoundTrip, GeneratedSequences)
{
    auto config = GeneratorConfig::defaults();
    for (std::uint64_t seed = 0; seed < 1000; ++seed) {
        config.seed = seed;
        config.step_count = 1 + static_cast<int>(seed % 4);
        const auto seq = generate(config);
        const auto text = print(seq);
        EXPECT_EQ(parse(text), seq) << text;
    }
}

TEST(RationalParam, Canonical)
{
    EXPECT_EQ(Rational::parse("2.5"), Rational(5, 2));
    EXPECT_EQ(Rational(5, 2).to_string(), "2.5");
    EXPECT_EQ(Rational(1, 3).to_string(), "1/3");
    EXPECT_EQ(Rational(60).to_string(), "60");
    EXPECT_FALSE(Rational::parse("abc"));
}
