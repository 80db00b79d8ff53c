#include "geosynth/catalog.hpp"

#include <algorithm>
#include <cctype>

namespace geosynth {

std::string_view to_string(Category c)
{
    switch (c) {
    case Category::Point:
        return "point";
    case Category::Line:
        return "line";
    case Category::Angle:
        return "angle";
    case Category::Shape:
        return "shape";
    }
    return "?";
}

std::optional<Category> category_from_string(std::string_view s)
{
    for (auto c : { Category::Point, Category::Line, Category::Angle, Category::Shape }) {
        if (to_string(c) == s) {
            return c;
        }
    }
    return std::nullopt;
}

namespace {

    std::vector<std::string> ids_for(const std::string& name)
    {
        std::string base;
        for (char c : name) {
            base += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        }
        return { base + ".a", base + ".b" };
    }

    CatalogEntry entry(std::string name, Category cat, std::vector<Slot> slots,
        std::vector<ParamKind> params, ParamStyle style, Rule rule)
    {
        auto ids = ids_for(name);
        return CatalogEntry { std::move(name), cat, std::move(slots), std::move(params), style, rule,
            std::move(ids) };
    }

} // namespace

ElementCatalog::ElementCatalog()
{
    using enum Slot;
    constexpr auto L = ParamKind::Length;
    constexpr auto A = ParamKind::Angle;
    constexpr auto P = Category::Point;
    constexpr auto Ln = Category::Line;
    constexpr auto An = Category::Angle;
    constexpr auto S = Category::Shape;
    constexpr auto Tup = ParamStyle::Tuple;
    constexpr auto Sca = ParamStyle::Scalar;
    constexpr auto Inl = ParamStyle::Inline;

    entries_ = {
        entry("Free", P, { NewPoint, Point, Point }, { L, L }, Tup, Rule::Free),
        entry("Midpoint", P, { NewPoint, Line }, {}, Tup, Rule::Midpoint),
        entry("Foot", P, { NewPoint, Point, Line }, {}, Tup, Rule::Foot),
        entry("Intersection", P, { NewPoint, Line, Line }, {}, Tup, Rule::Intersection),
        entry("OnLine", P, { NewPoint, Line }, { L }, Tup, Rule::OnLine),
        entry("OnCircle", P, { NewPoint, Circle }, {}, Tup, Rule::OnCircle),
        entry("Extension", P, { NewPoint, Line }, { L }, Tup, Rule::Extension),
        entry("Reflection", P, { NewPoint, Point, Line }, {}, Tup, Rule::Reflection),
        entry("Rotation", P, { NewPoint, Point, Point }, { A }, Tup, Rule::Rotation),
        entry("Centroid", P, { NewPoint, Point, Point, Point }, {}, Tup, Rule::Centroid),
        entry("Circumcenter", P, { NewPoint, Point, Point, Point }, {}, Tup, Rule::Circumcenter),
        entry("Incenter", P, { NewPoint, Point, Point, Point }, {}, Tup, Rule::Incenter),
        entry("TangentPoint", P, { NewPoint, Point, Circle }, {}, Tup, Rule::TangentPoint),

        entry("Segment", Ln, { Point, Point }, {}, Tup, Rule::Segment),
        entry("Para", Ln, { LineFromNew, Line }, { L }, Inl, Rule::Para),
        entry("Perp", Ln, { LineFromNew, Line }, { L }, Inl, Rule::Perp),
        entry("Tangent", Ln, { LineNewNew, Circle }, { L }, Tup, Rule::Tangent),
        entry("Chord", Ln, { LineNewNew, Circle }, { L }, Tup, Rule::Chord),
        entry("Diameter", Ln, { LineNewNew, Circle }, {}, Tup, Rule::Diameter),
        entry("AngleBisector", Ln, { LineFromNew, Line }, {}, Tup, Rule::AngleBisector),

        entry("Angle", An, { Point, Point, NewPoint }, { A }, Sca, Rule::Angle),
        entry("InscribedAngle", An, { NewPoint, NewPoint, NewPoint, Circle }, { A }, Sca,
            Rule::InscribedAngle),
        entry("CentralAngle", An, { NewPoint, Circle, NewPoint }, { A }, Sca, Rule::CentralAngle),

        entry("Triangle", S, { NewPoint, NewPoint, NewPoint }, { L, L, A }, Tup, Rule::Triangle),
        entry("RightTriangle", S, { NewPoint, NewPoint, NewPoint }, { L, L }, Tup,
            Rule::RightTriangle),
        entry("IsoscelesTriangle", S, { NewPoint, NewPoint, NewPoint }, { L, A }, Tup,
            Rule::IsoscelesTriangle),
        entry("EquilateralTriangle", S, { NewPoint, NewPoint, NewPoint }, { L }, Tup,
            Rule::EquilateralTriangle),
        entry("Square", S, { NewPoint, NewPoint, NewPoint, NewPoint }, { L }, Tup, Rule::Square),
        entry("Rectangle", S, { NewPoint, NewPoint, NewPoint, NewPoint }, { L, L }, Tup,
            Rule::Rectangle),
        entry("Parallelogram", S, { NewPoint, NewPoint, NewPoint, NewPoint }, { L, L, A }, Tup,
            Rule::Parallelogram),
        entry("Rhombus", S, { NewPoint, NewPoint, NewPoint, NewPoint }, { L, A }, Tup, Rule::Rhombus),
        entry("Trapezoid", S, { NewPoint, NewPoint, NewPoint, NewPoint }, { L, L, L, A }, Tup,
            Rule::Trapezoid),
        entry("RegularPolygon", S, { Vertices }, { L }, Tup, Rule::RegularPolygon),
        entry("Circle", S, { CenterOrNew }, { L }, Tup, Rule::Circle),
        entry("Semicircle", S, { NewPoint, NewPoint }, { L }, Tup, Rule::Semicircle),
        entry("Sector", S, { NewPoint, NewPoint, NewPoint }, { L, A }, Tup, Rule::Sector),
        entry("Arc", S, { NewPoint, NewPoint, NewPoint }, { L, A }, Tup, Rule::Arc),
    };
    auto poly = std::find_if(entries_.begin(), entries_.end(),
        [](const CatalogEntry& e) { return e.rule == Rule::RegularPolygon; });
    poly->min_vertices = 5;
    poly->max_vertices = 8;
}

const ElementCatalog& ElementCatalog::instance()
{
    static const ElementCatalog catalog;
    return catalog;
}

const CatalogEntry* ElementCatalog::find(std::string_view name) const
{
    auto it = std::find_if(
        entries_.begin(), entries_.end(), [&](const CatalogEntry& e) { return e.name == name; });
    return it == entries_.end() ? nullptr : &*it;
}

std::vector<const CatalogEntry*> ElementCatalog::in_category(Category c) const
{
    std::vector<const CatalogEntry*> out;
    for (const auto& e : entries_) {
        if (e.category == c) {
            out.push_back(&e);
        }
    }
    return out;
}

} // namespace geosynth
