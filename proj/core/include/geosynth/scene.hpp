#pragma once

#include "geosynth/dsl.hpp"
#include "geosynth/elements.hpp"
#include "geosynth/geometry.hpp"

#include <limits>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace geosynth {

/// Geometric tolerance for declared constraints, in abstract units (degrees for angles).
inline constexpr double kEpsGeo = 1e-9;
/// Minimum distance between two distinct points.
inline constexpr double kDeltaMin = 1e-6;

enum class AnnotationKind { LengthLabel, AngleLabel, RadiusLabel, RightAngleMark, TickMark };

std::string_view to_string(AnnotationKind kind);

struct AnnotationItem {
    AnnotationKind kind;
    /// Two labels for segments, three (arm, vertex, arm) for angles, the
    /// center followed by a point on the circle (if any) for radii.
    std::vector<Label> target;
    /// Sampled parameter; absent for marks.
    std::optional<Rational> value;
    int statement = 0;
    std::string placement_hint;

    bool valued() const { return value.has_value(); }
    /// "3", "60°"
    std::string text() const;
};

struct CircleGeom {
    Label center;
    double radius;
    int statement;
};

/// Circular arc drawn counterclockwise from `start_deg` through `sweep_deg`.
struct ArcGeom {
    Label center;
    Vec2 center_pos;
    double radius;
    double start_deg;
    double sweep_deg;
    int statement;
};

struct Scene {
    /// Realized points in definition order, abstract units.
    std::vector<std::pair<Label, Vec2>> points;
    std::vector<std::pair<Label, Label>> segments;
    std::vector<CircleGeom> circles;
    std::vector<ArcGeom> arcs;
    std::vector<AnnotationItem> annotations;
    ElementRegistry registry;
    /// Pixels per abstract unit.
    double unit_length = 1.0;
    /// Degrees, counterclockwise about the centroid of all points.
    double rotation = 0.0;

    const Vec2* find(const Label& label) const;
    /// Throws GeometryError(UnknownElement).
    Vec2 at(const Label& label) const;
    const CircleGeom* circle(const Label& center) const;
    Vec2 centroid() const;

private:
    friend class Construction;
    std::map<Label, std::size_t> index_;
};

enum class GeometryErrorCode { Degenerate, Infeasible, UnknownElement, UndefinedMeasure };

std::string_view to_string(GeometryErrorCode code);

class GeometryError : public std::runtime_error {
public:
    GeometryError(GeometryErrorCode code, int statement, std::string reason);

    GeometryErrorCode code() const { return code_; }
    /// 1-based statement index, 0 when not tied to a statement.
    int statement() const { return statement_; }
    const std::string& reason() const { return reason_; }

private:
    GeometryErrorCode code_;
    int statement_;
    std::string reason_;
};

} // namespace geosynth
