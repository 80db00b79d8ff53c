#pragma once

#include "geosynth/scene.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace geosynth {

enum class MeasureKind { Length, Angle, Area, Perimeter, ArcLength };

/// Text forms: `length(A,C)`, `angle(A,B,C)`, `area(Circle(O))`,
/// `perimeter(Square(A,B,C,D))`, `arc_length(Arc(O,A,B))`.
struct MeasureQuery {
    MeasureKind kind;
    std::vector<Label> points;
    std::optional<ShapeRef> shape;

    static MeasureQuery length(Label a, Label b) { return { MeasureKind::Length, { std::move(a), std::move(b) }, {} }; }
    static MeasureQuery angle(Label a, Label v, Label b)
    {
        return { MeasureKind::Angle, { std::move(a), std::move(v), std::move(b) }, {} };
    }
    static MeasureQuery of_shape(MeasureKind kind, ShapeRef shape) { return { kind, {}, std::move(shape) }; }

    static std::optional<MeasureQuery> parse(std::string_view text);
    std::string to_string() const;

    friend bool operator==(const MeasureQuery&, const MeasureQuery&) = default;
};

struct Measurement {
    double value;
    /// "" for lengths, "°" for angles, "²" for areas.
    std::string unit;
};

/// Analytic measurement from realized coordinates, in abstract units.
/// Throws GeometryError(UnknownElement | UndefinedMeasure).
Measurement measure(const Scene& scene, const MeasureQuery& query);

} // namespace geosynth
