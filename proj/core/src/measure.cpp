#include "geosynth/measure.hpp"

#include <cmath>
#include <numbers>

namespace geosynth {

namespace {

    constexpr std::pair<MeasureKind, std::string_view> kNames[] = {
        { MeasureKind::Length, "length" },
        { MeasureKind::Angle, "angle" },
        { MeasureKind::Area, "area" },
        { MeasureKind::Perimeter, "perimeter" },
        { MeasureKind::ArcLength, "arc_length" },
    };

    bool is_polygon(std::string_view kind)
    {
        return kind != "Circle" && kind != "Semicircle" && kind != "Sector" && kind != "Arc";
    }

    [[noreturn]] void undefined(const MeasureQuery& q)
    {
        throw GeometryError(GeometryErrorCode::UndefinedMeasure, 0, q.to_string());
    }

} // namespace

std::optional<MeasureQuery> MeasureQuery::parse(std::string_view text)
{
    auto open = text.find('(');
    if (open == std::string_view::npos || text.back() != ')') {
        return std::nullopt;
    }
    const std::string_view head = text.substr(0, open);
    const std::string_view body = text.substr(open + 1, text.size() - open - 2);
    for (auto [kind, name] : kNames) {
        if (name != head) {
            continue;
        }
        MeasureQuery q { kind, {}, {} };
        if (kind == MeasureKind::Length || kind == MeasureKind::Angle) {
            auto labels = ShapeRef::parse("X(" + std::string(body) + ")");
            const std::size_t want = kind == MeasureKind::Length ? 2 : 3;
            if (!labels || labels->labels.size() != want) {
                return std::nullopt;
            }
            q.points = labels->labels;
        } else {
            q.shape = ShapeRef::parse(body);
            if (!q.shape) {
                return std::nullopt;
            }
        }
        return q;
    }
    return std::nullopt;
}

std::string MeasureQuery::to_string() const
{
    std::string out;
    for (auto [k, name] : kNames) {
        if (k == kind) {
            out = std::string(name);
        }
    }
    out += "(";
    if (shape) {
        out += shape->to_string();
    } else {
        for (std::size_t i = 0; i < points.size(); ++i) {
            out += (i ? "," : "") + points[i].name;
        }
    }
    return out + ")";
}

Measurement measure(const Scene& scene, const MeasureQuery& q)
{
    using std::numbers::pi;
    switch (q.kind) {
    case MeasureKind::Length:
        if (q.points.size() != 2) {
            undefined(q);
        }
        return { dist(scene.at(q.points[0]), scene.at(q.points[1])), "" };
    case MeasureKind::Angle: {
        if (q.points.size() != 3) {
            undefined(q);
        }
        const Vec2 a = scene.at(q.points[0]);
        const Vec2 v = scene.at(q.points[1]);
        const Vec2 b = scene.at(q.points[2]);
        if (dist(a, v) < kDeltaMin || dist(b, v) < kDeltaMin) {
            undefined(q);
        }
        return { angle_deg(a, v, b), "°" };
    }
    default:
        break;
    }

    if (!q.shape) {
        undefined(q);
    }
    const ShapeRef& s = *q.shape;
    if (!scene.registry.find_shape(s)) {
        throw GeometryError(GeometryErrorCode::UnknownElement, 0, s.to_string());
    }
    std::vector<Vec2> v;
    for (const auto& l : s.labels) {
        v.push_back(scene.at(l));
    }

    if (is_polygon(s.kind)) {
        if (q.kind == MeasureKind::Area) {
            double twice = 0;
            for (std::size_t i = 0; i < v.size(); ++i) {
                twice += cross(v[i], v[(i + 1) % v.size()]);
            }
            return { std::abs(twice) / 2, "²" };
        }
        if (q.kind == MeasureKind::Perimeter) {
            double sum = 0;
            for (std::size_t i = 0; i < v.size(); ++i) {
                sum += dist(v[i], v[(i + 1) % v.size()]);
            }
            return { sum, "" };
        }
        undefined(q);
    }

    if (s.kind == "Circle") {
        const CircleGeom* c = scene.circle(s.labels[0]);
        if (!c) {
            throw GeometryError(GeometryErrorCode::UnknownElement, 0, s.to_string());
        }
        if (q.kind == MeasureKind::Area) {
            return { pi * c->radius * c->radius, "²" };
        }
        if (q.kind == MeasureKind::Perimeter) {
            return { 2 * pi * c->radius, "" };
        }
        undefined(q);
    }
    if (s.kind == "Semicircle") {
        const double r = dist(v[0], v[1]) / 2;
        switch (q.kind) {
        case MeasureKind::Area:
            return { pi * r * r / 2, "²" };
        case MeasureKind::Perimeter:
            return { pi * r + 2 * r, "" };
        case MeasureKind::ArcLength:
            return { pi * r, "" };
        default:
            undefined(q);
        }
    }
    // Sector and Arc: center first, then the two arc endpoints.
    const double r = dist(v[0], v[1]);
    const double theta = deg2rad(angle_deg(v[1], v[0], v[2]));
    switch (q.kind) {
    case MeasureKind::Area:
        if (s.kind == "Sector") {
            return { r * r * theta / 2, "²" };
        }
        break;
    case MeasureKind::Perimeter:
        if (s.kind == "Sector") {
            return { 2 * r + r * theta, "" };
        }
        break;
    case MeasureKind::ArcLength:
        return { r * theta, "" };
    default:
        break;
    }
    undefined(q);
}

} // namespace geosynth
