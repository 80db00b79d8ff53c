#include "geosynth/scene.hpp"

namespace geosynth {

std::string_view to_string(AnnotationKind kind)
{
    switch (kind) {
    case AnnotationKind::LengthLabel:
        return "length_label";
    case AnnotationKind::AngleLabel:
        return "angle_label";
    case AnnotationKind::RadiusLabel:
        return "radius_label";
    case AnnotationKind::RightAngleMark:
        return "right_angle_mark";
    case AnnotationKind::TickMark:
        return "tick_mark";
    }
    return "?";
}

std::string AnnotationItem::text() const
{
    if (!value) {
        return {};
    }
    std::string s = value->to_string();
    if (kind == AnnotationKind::AngleLabel) {
        s += "°";
    }
    return s;
}

const Vec2* Scene::find(const Label& label) const
{
    auto it = index_.find(label);
    return it == index_.end() ? nullptr : &points[it->second].second;
}

Vec2 Scene::at(const Label& label) const
{
    if (const Vec2* p = find(label)) {
        return *p;
    }
    throw GeometryError(GeometryErrorCode::UnknownElement, 0, "unknown point " + label.name);
}

const CircleGeom* Scene::circle(const Label& center) const
{
    for (const auto& c : circles) {
        if (c.center == center) {
            return &c;
        }
    }
    return nullptr;
}

Vec2 Scene::centroid() const
{
    Vec2 sum;
    for (const auto& [label, p] : points) {
        sum = sum + p;
    }
    return points.empty() ? sum : sum / static_cast<double>(points.size());
}

std::string_view to_string(GeometryErrorCode code)
{
    switch (code) {
    case GeometryErrorCode::Degenerate:
        return "Degenerate";
    case GeometryErrorCode::Infeasible:
        return "Infeasible";
    case GeometryErrorCode::UnknownElement:
        return "UnknownElement";
    case GeometryErrorCode::UndefinedMeasure:
        return "UndefinedMeasure";
    }
    return "?";
}

GeometryError::GeometryError(GeometryErrorCode code, int statement, std::string reason)
    : std::runtime_error(std::string(to_string(code)) + "(" + std::to_string(statement) + ", " + reason + ")")
    , code_(code)
    , statement_(statement)
    , reason_(std::move(reason))
{
}

} // namespace geosynth
