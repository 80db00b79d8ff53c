#include "geosynth/realizer.hpp"

#include <algorithm>
#include <cmath>

namespace geosynth {

namespace {

    constexpr double kOnCircleTol = 1e-7;

    /// Greater y wins; ties broken by greater x.
    Vec2 pick(Vec2 a, Vec2 b)
    {
        if (std::abs(a.y - b.y) > 1e-12) {
            return a.y > b.y ? a : b;
        }
        return a.x >= b.x ? a : b;
    }

    double wrap360(double d)
    {
        d = std::fmod(d, 360.0);
        return d < 0 ? d + 360.0 : d;
    }

    /// Heading (degrees) for the next point placed on a circle: the middle
    /// of the largest empty arc between points already on it.
    double gap_heading(const Scene& s, const CircleGeom& c)
    {
        const Vec2 o = s.at(c.center);
        std::vector<double> hs;
        for (const auto& [l, p] : s.points) {
            if (l != c.center && std::abs(dist(p, o) - c.radius) <= kOnCircleTol * std::max(1.0, c.radius)) {
                hs.push_back(heading_deg(p - o));
            }
        }
        if (hs.empty()) {
            return 90.0;
        }
        if (hs.size() == 1) {
            return wrap360(hs[0] + 180.0);
        }
        std::sort(hs.begin(), hs.end());
        double best = -1;
        double mid = 0;
        for (std::size_t i = 0; i < hs.size(); ++i) {
            const double next = i + 1 < hs.size() ? hs[i + 1] : hs[0] + 360.0;
            const double g = next - hs[i];
            if (g > best + 1e-12) {
                best = g;
                mid = hs[i] + g / 2;
            }
        }
        return wrap360(mid);
    }

    struct Staged {
        std::vector<std::pair<Label, Vec2>> points;
        std::vector<CircleGeom> circles;
        std::vector<ArcGeom> arcs;
        std::vector<AnnotationItem> annotations;
    };

    class Builder {
    public:
        Builder(const Scene& scene, const Statement& st, int index, const RealizeOptions& opt)
            : s_(scene)
            , st_(st)
            , idx_(index)
            , opt_(opt)
        {
        }

        Staged run();

    private:
        const Scene& s_;
        const Statement& st_;
        int idx_;
        const RealizeOptions& opt_;
        Staged out_;

        const Label& lbl(std::size_t i) const { return std::get<Label>(st_.args[i]); }
        const LineRef& line(std::size_t i) const { return std::get<LineRef>(st_.args[i]); }
        double p(std::size_t i) const { return st_.params[i].to_double(); }
        Vec2 at(const Label& l) const
        {
            for (const auto& [k, v] : out_.points) {
                if (k == l) {
                    return v;
                }
            }
            return s_.at(l);
        }
        Vec2 at(std::size_t i) const { return at(lbl(i)); }

        [[noreturn]] void fail(std::string reason, GeometryErrorCode code = GeometryErrorCode::Degenerate) const
        {
            throw GeometryError(code, idx_, std::move(reason));
        }

        const CircleGeom& circle(const Label& center) const
        {
            const CircleGeom* c = s_.circle(center);
            if (!c) {
                throw GeometryError(GeometryErrorCode::UnknownElement, idx_, "no circle centered at " + center.name);
            }
            return *c;
        }

        void put(const Label& l, Vec2 v) { out_.points.emplace_back(l, v); }

        void note(AnnotationKind kind, std::vector<Label> target, std::optional<std::size_t> param, std::string hint)
        {
            std::optional<Rational> value;
            if (param) {
                value = st_.params[*param];
            }
            out_.annotations.push_back({ kind, std::move(target), value, idx_, std::move(hint) });
        }
        void length(const Label& a, const Label& b, std::size_t param)
        {
            note(AnnotationKind::LengthLabel, { a, b }, param, "side");
        }
        void angle(const Label& a, const Label& v, const Label& b, std::size_t param)
        {
            note(AnnotationKind::AngleLabel, { a, v, b }, param, "vertex");
        }
        void right(const Label& a, const Label& v, const Label& b)
        {
            note(AnnotationKind::RightAngleMark, { a, v, b }, std::nullopt, "vertex");
        }
        void tick(std::vector<Label> target) { note(AnnotationKind::TickMark, std::move(target), std::nullopt, "side"); }

        Vec2 foot_on(Vec2 a, Vec2 b, Vec2 c) const
        {
            const Vec2 d = c - b;
            const double dd = dot(d, d);
            if (dd < opt_.min_separation * opt_.min_separation) {
                fail("zero-length line");
            }
            return b + (dot(a - b, d) / dd) * d;
        }

        void require_noncollinear(Vec2 a, Vec2 b, Vec2 c) const
        {
            const double scale = std::max({ dist(a, b), dist(b, c), dist(a, c), 1.0 });
            if (std::abs(cross(b - a, c - a)) <= 1e-9 * scale * scale) {
                fail("collinear points");
            }
        }

        void place_shape(std::vector<Vec2> local);
        void polygon_marks();

        void free_point();
        void tangent_point();
        void shape();
    };

    void Builder::place_shape(std::vector<Vec2> local)
    {
        // A later shape with fresh vertices is set beside the existing figure.
        if (!s_.points.empty()) {
            double max_x = -1e300;
            double min_y = 1e300;
            for (const auto& [l, v] : s_.points) {
                max_x = std::max(max_x, v.x);
                min_y = std::min(min_y, v.y);
            }
            for (const auto& c : s_.circles) {
                max_x = std::max(max_x, s_.at(c.center).x + c.radius);
            }
            double lx = 1e300;
            double ly = 1e300;
            for (auto v : local) {
                lx = std::min(lx, v.x);
                ly = std::min(ly, v.y);
            }
            const Vec2 shift { max_x + std::max(1.0, 4 * opt_.min_separation) - lx, min_y - ly };
            for (auto& v : local) {
                v = v + shift;
            }
        }
        const auto labels = st_.labels();
        for (std::size_t i = 0; i < labels.size(); ++i) {
            put(labels[i], local[i]);
        }
    }

    void Builder::free_point()
    {
        const Vec2 a = at(1);
        const Vec2 b = at(2);
        const double x = p(0);
        const double y = p(1);
        const double d = dist(a, b);
        const double slack = 1e-9 * std::max(1.0, x + y);
        if (d >= x + y - slack || d <= std::abs(x - y) + slack) {
            fail("triangle inequality");
        }
        const Vec2 u = (b - a) / d;
        const double along = (x * x - y * y + d * d) / (2 * d);
        const double h = std::sqrt(std::max(0.0, x * x - along * along));
        const Vec2 base = a + along * u;
        put(lbl(0), pick(base + h * u.perp(), base - h * u.perp()));
        length(lbl(1), lbl(0), 0);
        length(lbl(2), lbl(0), 1);
    }

    void Builder::tangent_point()
    {
        const Vec2 ext = at(1);
        const CircleGeom& c = circle(lbl(2));
        const Vec2 o = at(c.center);
        const double d = dist(ext, o);
        if (d <= c.radius + opt_.min_separation) {
            fail("tangent from interior point");
        }
        const double beta = rad2deg(std::acos(c.radius / d));
        const double h = heading_deg(ext - o);
        put(lbl(0), pick(o + c.radius * dir(h + beta), o + c.radius * dir(h - beta)));
        right(c.center, lbl(0), lbl(1));
    }

    void Builder::polygon_marks()
    {
        const auto l = st_.labels();
        switch (st_.entry()->rule) {
        case Rule::Triangle:
            length(l[0], l[1], 0);
            length(l[1], l[2], 1);
            angle(l[0], l[1], l[2], 2);
            break;
        case Rule::RightTriangle:
            length(l[0], l[1], 0);
            length(l[1], l[2], 1);
            right(l[0], l[1], l[2]);
            break;
        case Rule::IsoscelesTriangle:
            length(l[0], l[1], 0);
            angle(l[0], l[1], l[2], 1);
            tick({ l[0], l[1] });
            tick({ l[1], l[2] });
            break;
        case Rule::EquilateralTriangle:
            length(l[0], l[1], 0);
            tick({ l[0], l[1] });
            tick({ l[1], l[2] });
            tick({ l[2], l[0] });
            break;
        case Rule::Square:
        case Rule::RegularPolygon:
            length(l[0], l[1], 0);
            break;
        case Rule::Rectangle:
            length(l[0], l[1], 0);
            length(l[1], l[2], 1);
            break;
        case Rule::Parallelogram:
            length(l[0], l[1], 0);
            length(l[1], l[2], 1);
            angle(l[0], l[1], l[2], 2);
            break;
        case Rule::Rhombus:
            length(l[0], l[1], 0);
            angle(l[0], l[1], l[2], 1);
            break;
        case Rule::Trapezoid:
            length(l[0], l[1], 0);
            length(l[3], l[2], 1);
            length(l[0], l[3], 2);
            angle(l[3], l[0], l[1], 3);
            break;
        default:
            break;
        }
    }

    void Builder::shape()
    {
        const Rule rule = st_.entry()->rule;
        auto triangle = [&](double x, double y, double alpha) {
            // B at the origin, BC along +x, A at angle alpha above BC.
            place_shape({ x * dir(alpha), Vec2 { 0, 0 }, Vec2 { y, 0 } });
        };
        auto parallelogram = [&](double x, double y, double alpha) {
            const Vec2 a { 0, 0 };
            const Vec2 b { x, 0 };
            const Vec2 c = b + y * dir(180.0 - alpha);
            place_shape({ a, b, c, a + (c - b) });
        };
        switch (rule) {
        case Rule::Triangle:
            triangle(p(0), p(1), p(2));
            break;
        case Rule::RightTriangle:
            triangle(p(0), p(1), 90.0);
            break;
        case Rule::IsoscelesTriangle:
            triangle(p(0), p(0), p(1));
            break;
        case Rule::EquilateralTriangle:
            triangle(p(0), p(0), 60.0);
            break;
        case Rule::Square:
            place_shape({ { 0, 0 }, { p(0), 0 }, { p(0), p(0) }, { 0, p(0) } });
            break;
        case Rule::Rectangle:
            place_shape({ { 0, 0 }, { p(0), 0 }, { p(0), p(1) }, { 0, p(1) } });
            break;
        case Rule::Parallelogram:
            parallelogram(p(0), p(1), p(2));
            break;
        case Rule::Rhombus:
            parallelogram(p(0), p(0), p(1));
            break;
        case Rule::Trapezoid: {
            const Vec2 d = p(2) * dir(p(3));
            place_shape({ { 0, 0 }, { p(0), 0 }, d + Vec2 { p(1), 0 }, d });
            break;
        }
        case Rule::RegularPolygon: {
            const std::size_t n = st_.args.size();
            std::vector<Vec2> v { { 0, 0 } };
            for (std::size_t k = 1; k < n; ++k) {
                v.push_back(v.back() + p(0) * dir(static_cast<double>(k - 1) * 360.0 / static_cast<double>(n)));
            }
            place_shape(std::move(v));
            break;
        }
        case Rule::Circle: {
            const Label& o = lbl(0);
            const double r = p(0);
            if (!s_.find(o)) {
                if (s_.points.empty()) {
                    put(o, { 0, 0 });
                } else {
                    // Place the circle to the right of the figure, tangent-free.
                    double max_x = -1e300;
                    double sum_y = 0;
                    for (const auto& [l, v] : s_.points) {
                        max_x = std::max(max_x, v.x);
                        sum_y += v.y;
                    }
                    put(o, { max_x + std::max(1.0, 4 * opt_.min_separation) + r, sum_y / static_cast<double>(s_.points.size()) });
                }
            }
            out_.circles.push_back({ o, r, idx_ });
            note(AnnotationKind::RadiusLabel, { o }, 0, "radius");
            return;
        }
        case Rule::Semicircle: {
            place_shape({ { 0, 0 }, { p(0), 0 } });
            const Vec2 a = at(lbl(0));
            const Vec2 b = at(lbl(1));
            const Vec2 c = (a + b) / 2;
            out_.arcs.push_back({ Label {}, c, p(0) / 2, heading_deg(b - c), 180.0, idx_ });
            length(lbl(0), lbl(1), 0);
            return;
        }
        case Rule::Sector:
        case Rule::Arc: {
            place_shape({ { 0, 0 }, { p(0), 0 }, p(0) * dir(p(1)) });
            const Vec2 o = at(lbl(0));
            out_.arcs.push_back({ lbl(0), o, p(0), heading_deg(at(lbl(1)) - o), p(1), idx_ });
            note(AnnotationKind::RadiusLabel, { lbl(0), lbl(1) }, 0, "radius");
            angle(lbl(1), lbl(0), lbl(2), 1);
            return;
        }
        default:
            return;
        }
        polygon_marks();
    }

    Staged Builder::run()
    {
        const CatalogEntry* e = st_.entry();
        if (!e) {
            fail("unknown constructor " + st_.constructor, GeometryErrorCode::UnknownElement);
        }
        switch (e->rule) {
        case Rule::Free:
            free_point();
            break;
        case Rule::Midpoint:
            put(lbl(0), (at(line(1).from) + at(line(1).to)) / 2);
            tick({ line(1).from, lbl(0) });
            tick({ lbl(0), line(1).to });
            break;
        case Rule::Foot: {
            const Vec2 d = foot_on(at(1), at(line(2).from), at(line(2).to));
            put(lbl(0), d);
            // The square sits at the foot between the dropped segment and the base.
            const Label& base = dist(d, at(line(2).from)) > dist(d, at(line(2).to)) ? line(2).from : line(2).to;
            right(lbl(1), lbl(0), base);
            break;
        }
        case Rule::Intersection: {
            const Vec2 a = at(line(1).from);
            const Vec2 b = at(line(1).to);
            const Vec2 c = at(line(2).from);
            const Vec2 d = at(line(2).to);
            const Vec2 u = b - a;
            const Vec2 v = d - c;
            const double den = cross(u, v);
            if (std::abs(den) <= 1e-6 * u.norm() * v.norm()) {
                fail("intersection of parallel lines");
            }
            put(lbl(0), a + (cross(c - a, v) / den) * u);
            break;
        }
        case Rule::OnLine: {
            const Vec2 a = at(line(1).from);
            const Vec2 b = at(line(1).to);
            const double x = p(0);
            if (x >= dist(a, b) - opt_.min_separation) {
                fail("point beyond segment");
            }
            put(lbl(0), a + x * (b - a).unit());
            length(line(1).from, lbl(0), 0);
            break;
        }
        case Rule::OnCircle: {
            const CircleGeom& c = circle(lbl(1));
            put(lbl(0), at(c.center) + c.radius * dir(gap_heading(s_, c)));
            break;
        }
        case Rule::Extension: {
            const Vec2 a = at(line(1).from);
            const Vec2 b = at(line(1).to);
            put(lbl(0), b + p(0) * (b - a).unit());
            length(line(1).to, lbl(0), 0);
            break;
        }
        case Rule::Reflection: {
            const Vec2 a = at(1);
            const Vec2 f = foot_on(a, at(line(2).from), at(line(2).to));
            put(lbl(0), 2.0 * f - a);
            break;
        }
        case Rule::Rotation: {
            const Vec2 o = at(2);
            put(lbl(0), o + rotate(at(1) - o, p(0)));
            angle(lbl(1), lbl(2), lbl(0), 0);
            break;
        }
        case Rule::Centroid:
        case Rule::Circumcenter:
        case Rule::Incenter: {
            const Vec2 a = at(1);
            const Vec2 b = at(2);
            const Vec2 c = at(3);
            require_noncollinear(a, b, c);
            Vec2 g;
            if (e->rule == Rule::Centroid) {
                g = (a + b + c) / 3.0;
            } else if (e->rule == Rule::Incenter) {
                const double la = dist(b, c);
                const double lb = dist(a, c);
                const double lc = dist(a, b);
                g = (la * a + lb * b + lc * c) / (la + lb + lc);
            } else {
                const Vec2 ab = b - a;
                const Vec2 ac = c - a;
                const double den = 2 * cross(ab, ac);
                const double b2 = dot(ab, ab);
                const double c2 = dot(ac, ac);
                g = a + Vec2 { ac.y * b2 - ab.y * c2, ab.x * c2 - ac.x * b2 } / den;
            }
            put(lbl(0), g);
            break;
        }
        case Rule::TangentPoint:
            tangent_point();
            break;
        case Rule::Segment:
            if (dist(at(0), at(1)) < opt_.min_separation) {
                fail("zero-length segment");
            }
            break;
        case Rule::Para:
        case Rule::Perp: {
            const Vec2 a = at(line(0).from);
            const Vec2 d = (at(line(1).to) - at(line(1).from)).unit();
            put(line(0).to, a + p(0) * (e->rule == Rule::Para ? d : d.perp()));
            length(line(0).from, line(0).to, 0);
            break;
        }
        case Rule::Tangent: {
            const CircleGeom& c = circle(lbl(1));
            const Vec2 o = at(c.center);
            const Vec2 t = o + c.radius * dir(gap_heading(s_, c));
            put(line(0).from, t);
            put(line(0).to, t + p(0) * (t - o).unit().perp());
            length(line(0).from, line(0).to, 0);
            right(c.center, line(0).from, line(0).to);
            break;
        }
        case Rule::Chord:
        case Rule::Diameter: {
            const CircleGeom& c = circle(lbl(1));
            double half = 90.0;
            if (e->rule == Rule::Chord) {
                if (p(0) >= 2 * c.radius) {
                    fail("chord longer than diameter", GeometryErrorCode::Infeasible);
                }
                half = rad2deg(std::asin(p(0) / (2 * c.radius)));
            }
            const Vec2 o = at(c.center);
            const double m = gap_heading(s_, c);
            put(line(0).from, o + c.radius * dir(m - half));
            put(line(0).to, o + c.radius * dir(m + half));
            if (e->rule == Rule::Chord) {
                length(line(0).from, line(0).to, 0);
            }
            break;
        }
        case Rule::AngleBisector: {
            const Label& bl = line(0).from;
            const Vec2 a = at(line(1).from);
            const Vec2 b = at(bl);
            const Vec2 c = at(line(1).to);
            require_noncollinear(a, b, c);
            const double ba = dist(b, a);
            const double bc = dist(b, c);
            put(line(0).to, (bc * a + ba * c) / (ba + bc));
            note(AnnotationKind::TickMark, { line(1).from, bl, line(0).to }, std::nullopt, "vertex");
            note(AnnotationKind::TickMark, { line(0).to, bl, line(1).to }, std::nullopt, "vertex");
            break;
        }
        case Rule::Angle: {
            const Vec2 pp = at(0);
            const Vec2 q = at(1);
            put(lbl(2), pick(q + rotate(pp - q, p(0)), q + rotate(pp - q, -p(0))));
            angle(lbl(0), lbl(1), lbl(2), 0);
            tick({ lbl(1), lbl(0) });
            tick({ lbl(1), lbl(2) });
            break;
        }
        case Rule::InscribedAngle: {
            const CircleGeom& c = circle(lbl(3));
            const Vec2 o = at(c.center);
            const double m = gap_heading(s_, c);
            const double alpha = p(0);
            put(lbl(0), o + c.radius * dir(m + 180.0 - alpha));
            put(lbl(1), o + c.radius * dir(m));
            put(lbl(2), o + c.radius * dir(m + 180.0 + alpha));
            angle(lbl(0), lbl(1), lbl(2), 0);
            break;
        }
        case Rule::CentralAngle: {
            const CircleGeom& c = circle(lbl(1));
            const Vec2 o = at(c.center);
            const double m = gap_heading(s_, c);
            put(lbl(0), o + c.radius * dir(m - p(0) / 2));
            put(lbl(2), o + c.radius * dir(m + p(0) / 2));
            angle(lbl(0), lbl(1), lbl(2), 0);
            break;
        }
        default:
            shape();
            break;
        }
        return std::move(out_);
    }

} // namespace

Construction::Construction(RealizeOptions options)
    : options_(options)
{
}

void Construction::apply(const Statement& st, int index)
{
    Staged staged = Builder(scene_, st, index, options_).run();

    for (std::size_t i = 0; i < staged.points.size(); ++i) {
        const auto& [label, v] = staged.points[i];
        if (!std::isfinite(v.x) || !std::isfinite(v.y)) {
            throw GeometryError(GeometryErrorCode::Degenerate, index, "non-finite coordinate for " + label.name);
        }
        for (const auto& [other, w] : scene_.points) {
            if (dist(v, w) < options_.min_separation) {
                throw GeometryError(GeometryErrorCode::Degenerate, index,
                    "coincident points " + other.name + " and " + label.name);
            }
        }
        for (std::size_t j = 0; j < i; ++j) {
            if (dist(v, staged.points[j].second) < options_.min_separation) {
                throw GeometryError(GeometryErrorCode::Degenerate, index,
                    "coincident points " + staged.points[j].first.name + " and " + label.name);
            }
        }
    }

    if (std::isfinite(options_.max_extent)) {
        double lo_x = 1e300, lo_y = 1e300, hi_x = -1e300, hi_y = -1e300;
        auto grow = [&](Vec2 v, double r) {
            lo_x = std::min(lo_x, v.x - r);
            lo_y = std::min(lo_y, v.y - r);
            hi_x = std::max(hi_x, v.x + r);
            hi_y = std::max(hi_y, v.y + r);
        };
        for (const auto& [l, v] : scene_.points) {
            grow(v, 0);
        }
        for (const auto& [l, v] : staged.points) {
            grow(v, 0);
        }
        for (const auto* list : { &scene_.circles, &staged.circles }) {
            for (const auto& c : *list) {
                const Vec2* center = scene_.find(c.center);
                for (const auto& [l, v] : staged.points) {
                    if (l == c.center) {
                        center = &v;
                    }
                }
                grow(*center, c.radius);
            }
        }
        if (std::hypot(hi_x - lo_x, hi_y - lo_y) > options_.max_extent) {
            throw GeometryError(GeometryErrorCode::Degenerate, index, "figure exceeds extent bound");
        }
    }

    for (auto& [label, v] : staged.points) {
        scene_.index_[label] = scene_.points.size();
        scene_.points.emplace_back(label, v);
    }
    for (auto& c : staged.circles) {
        scene_.circles.push_back(c);
    }
    for (auto& a : staged.arcs) {
        scene_.arcs.push_back(a);
    }
    for (auto& a : staged.annotations) {
        scene_.annotations.push_back(std::move(a));
    }
    scene_.registry.add(st, index);
    scene_.segments = scene_.registry.lines();
}

Scene Construction::finish(double unit_length, double rotation_deg) const
{
    Scene out = scene_;
    out.unit_length = unit_length;
    out.rotation = rotation_deg;
    if (rotation_deg != 0.0) {
        const Vec2 c = scene_.centroid();
        for (auto& [label, v] : out.points) {
            v = c + rotate(v - c, rotation_deg);
        }
        for (auto& a : out.arcs) {
            a.center_pos = c + rotate(a.center_pos - c, rotation_deg);
            a.start_deg = wrap360(a.start_deg + rotation_deg);
        }
    }
    return out;
}

Scene realize(const DslSequence& sequence, double unit_length, double rotation_deg, const RealizeOptions& options)
{
    Construction c(options);
    for (std::size_t i = 0; i < sequence.statements.size(); ++i) {
        c.apply(sequence.statements[i], static_cast<int>(i) + 1);
    }
    return c.finish(unit_length, rotation_deg);
}

namespace {

    class Checker {
    public:
        Checker(const Scene& s, const Statement& st, int idx, std::vector<ConstraintResidual>& out)
            : s_(s)
            , st_(st)
            , idx_(idx)
            , out_(out)
        {
        }

        void run();

    private:
        const Scene& s_;
        const Statement& st_;
        int idx_;
        std::vector<ConstraintResidual>& out_;

        Vec2 at(const Label& l) const { return s_.at(l); }
        const Label& lbl(std::size_t i) const { return std::get<Label>(st_.args[i]); }
        const LineRef& line(std::size_t i) const { return std::get<LineRef>(st_.args[i]); }
        double p(std::size_t i) const { return st_.params[i].to_double(); }

        void add(std::string what, double r) { out_.push_back({ idx_, std::move(what), std::abs(r) }); }

        void len(const Label& a, const Label& b, double x)
        {
            add("|" + a.name + b.name + "|=" + std::to_string(x), dist(at(a), at(b)) - x);
        }
        void ang(const Label& a, const Label& v, const Label& b, double alpha)
        {
            add("angle " + a.name + v.name + b.name, angle_deg(at(a), at(v), at(b)) - alpha);
        }
        void on_line(const Label& pt, const Label& a, const Label& b)
        {
            const Vec2 u = at(b) - at(a);
            add(pt.name + " on " + a.name + b.name, cross(at(pt) - at(a), u) / u.norm());
        }
        void on_circle(const Label& pt, const Label& center)
        {
            const CircleGeom* c = s_.circle(center);
            const double r = c ? c->radius : 0.0;
            add(pt.name + " on circle " + center.name, dist(at(pt), at(center)) - r);
        }
        /// Zero when t lies strictly within (lo, hi), otherwise the overshoot.
        void inside(const std::string& what, double t, double lo, double hi)
        {
            add(what, t > lo && t < hi ? 0.0 : std::min(std::abs(t - lo), std::abs(t - hi)) + 1.0);
        }
        void sides(const std::vector<Label>& l, const std::vector<double>& x)
        {
            for (std::size_t i = 0; i < l.size(); ++i) {
                len(l[i], l[(i + 1) % l.size()], x[i % x.size()]);
            }
        }
    };

    void Checker::run()
    {
        const Rule rule = st_.entry()->rule;
        const auto l = st_.labels();
        switch (rule) {
        case Rule::Free:
            len(lbl(1), lbl(0), p(0));
            len(lbl(2), lbl(0), p(1));
            break;
        case Rule::Midpoint:
            add("midpoint", dist(at(lbl(0)), (at(line(1).from) + at(line(1).to)) / 2));
            break;
        case Rule::Foot: {
            const Vec2 u = at(line(2).to) - at(line(2).from);
            add("foot perpendicular", dot(at(lbl(0)) - at(lbl(1)), u) / u.norm());
            on_line(lbl(0), line(2).from, line(2).to);
            break;
        }
        case Rule::Intersection:
            on_line(lbl(0), line(1).from, line(1).to);
            on_line(lbl(0), line(2).from, line(2).to);
            break;
        case Rule::OnLine: {
            const Vec2 a = at(line(1).from);
            const Vec2 b = at(line(1).to);
            len(line(1).from, lbl(0), p(0));
            on_line(lbl(0), line(1).from, line(1).to);
            inside("within segment", dot(at(lbl(0)) - a, b - a) / dot(b - a, b - a), 0.0, 1.0);
            break;
        }
        case Rule::OnCircle:
            on_circle(lbl(0), lbl(1));
            break;
        case Rule::Extension: {
            const Vec2 a = at(line(1).from);
            const Vec2 b = at(line(1).to);
            len(line(1).to, lbl(0), p(0));
            on_line(lbl(0), line(1).from, line(1).to);
            inside("beyond endpoint", dot(at(lbl(0)) - b, b - a), 0.0, 1e300);
            break;
        }
        case Rule::Reflection: {
            const Vec2 u = at(line(2).to) - at(line(2).from);
            const Vec2 mid = (at(lbl(0)) + at(lbl(1))) / 2;
            add("mirror perpendicular", dot(at(lbl(0)) - at(lbl(1)), u) / u.norm());
            add("midpoint on mirror", cross(mid - at(line(2).from), u) / u.norm());
            break;
        }
        case Rule::Rotation: {
            const Vec2 o = at(lbl(2));
            const Vec2 a = at(lbl(1));
            const Vec2 d = at(lbl(0));
            add("rotation radius", dist(o, d) - dist(o, a));
            double turn = heading_deg(d - o) - heading_deg(a - o);
            turn = turn < 0 ? turn + 360.0 : turn;
            add("rotation angle", turn - p(0));
            break;
        }
        case Rule::Centroid:
            add("centroid", dist(at(lbl(0)), (at(lbl(1)) + at(lbl(2)) + at(lbl(3))) / 3.0));
            break;
        case Rule::Circumcenter: {
            const Vec2 g = at(lbl(0));
            add("equidistant", dist(g, at(lbl(1))) - dist(g, at(lbl(2))));
            add("equidistant", dist(g, at(lbl(1))) - dist(g, at(lbl(3))));
            break;
        }
        case Rule::Incenter: {
            const Label& g = lbl(0);
            const Label& a = lbl(1);
            const Label& b = lbl(2);
            const Label& c = lbl(3);
            add("bisects A", angle_deg(at(b), at(a), at(g)) - angle_deg(at(g), at(a), at(c)));
            add("bisects B", angle_deg(at(a), at(b), at(g)) - angle_deg(at(g), at(b), at(c)));
            break;
        }
        case Rule::TangentPoint: {
            const Label& t = lbl(0);
            on_circle(t, lbl(2));
            const Vec2 r = at(t) - at(lbl(2));
            add("tangency", dot(r.unit(), (at(lbl(1)) - at(t)).unit()));
            break;
        }
        case Rule::Segment:
            inside("segment length", dist(at(lbl(0)), at(lbl(1))), kDeltaMin, 1e300);
            break;
        case Rule::Para:
        case Rule::Perp: {
            const Vec2 u = (at(line(0).to) - at(line(0).from)).unit();
            const Vec2 v = (at(line(1).to) - at(line(1).from)).unit();
            len(line(0).from, line(0).to, p(0));
            add(rule == Rule::Para ? "parallel" : "perpendicular", rule == Rule::Para ? cross(u, v) : dot(u, v));
            break;
        }
        case Rule::Tangent: {
            const Label& t = line(0).from;
            on_circle(t, lbl(1));
            len(t, line(0).to, p(0));
            add("tangency", dot((at(t) - at(lbl(1))).unit(), (at(line(0).to) - at(t)).unit()));
            break;
        }
        case Rule::Chord:
            on_circle(line(0).from, lbl(1));
            on_circle(line(0).to, lbl(1));
            len(line(0).from, line(0).to, p(0));
            break;
        case Rule::Diameter:
            on_circle(line(0).from, lbl(1));
            on_circle(line(0).to, lbl(1));
            add("through center", dist(at(lbl(1)), (at(line(0).from) + at(line(0).to)) / 2));
            break;
        case Rule::AngleBisector: {
            const Label& b = line(0).from;
            const Label& d = line(0).to;
            const Label& a = line(1).from;
            const Label& c = line(1).to;
            add("bisects", angle_deg(at(a), at(b), at(d)) - angle_deg(at(d), at(b), at(c)));
            on_line(d, a, c);
            break;
        }
        case Rule::Angle:
            ang(lbl(0), lbl(1), lbl(2), p(0));
            add("equal arms", dist(at(lbl(1)), at(lbl(0))) - dist(at(lbl(1)), at(lbl(2))));
            break;
        case Rule::InscribedAngle:
            for (std::size_t i = 0; i < 3; ++i) {
                on_circle(lbl(i), lbl(3));
            }
            ang(lbl(0), lbl(1), lbl(2), p(0));
            break;
        case Rule::CentralAngle:
            on_circle(lbl(0), lbl(1));
            on_circle(lbl(2), lbl(1));
            ang(lbl(0), lbl(1), lbl(2), p(0));
            break;
        case Rule::Triangle:
            len(l[0], l[1], p(0));
            len(l[1], l[2], p(1));
            ang(l[0], l[1], l[2], p(2));
            break;
        case Rule::RightTriangle:
            len(l[0], l[1], p(0));
            len(l[1], l[2], p(1));
            ang(l[0], l[1], l[2], 90.0);
            break;
        case Rule::IsoscelesTriangle:
            len(l[0], l[1], p(0));
            len(l[1], l[2], p(0));
            ang(l[0], l[1], l[2], p(1));
            break;
        case Rule::EquilateralTriangle:
            sides(l, { p(0) });
            break;
        case Rule::Square:
            sides(l, { p(0) });
            for (std::size_t i = 0; i < 4; ++i) {
                ang(l[i], l[(i + 1) % 4], l[(i + 2) % 4], 90.0);
            }
            break;
        case Rule::Rectangle:
            sides(l, { p(0), p(1) });
            for (std::size_t i = 0; i < 4; ++i) {
                ang(l[i], l[(i + 1) % 4], l[(i + 2) % 4], 90.0);
            }
            break;
        case Rule::Parallelogram:
            sides(l, { p(0), p(1) });
            ang(l[0], l[1], l[2], p(2));
            break;
        case Rule::Rhombus:
            sides(l, { p(0) });
            ang(l[0], l[1], l[2], p(1));
            break;
        case Rule::Trapezoid: {
            len(l[0], l[1], p(0));
            len(l[3], l[2], p(1));
            len(l[0], l[3], p(2));
            ang(l[3], l[0], l[1], p(3));
            const Vec2 u = (at(l[1]) - at(l[0])).unit();
            const Vec2 v = (at(l[2]) - at(l[3])).unit();
            add("bases parallel", dist(u, v));
            break;
        }
        case Rule::RegularPolygon: {
            const double n = static_cast<double>(l.size());
            sides(l, { p(0) });
            for (std::size_t i = 0; i < l.size(); ++i) {
                ang(l[i], l[(i + 1) % l.size()], l[(i + 2) % l.size()], (n - 2) * 180.0 / n);
            }
            break;
        }
        case Rule::Circle: {
            const CircleGeom* c = s_.circle(lbl(0));
            add("circle radius", c ? c->radius - p(0) : p(0));
            break;
        }
        case Rule::Semicircle:
            len(l[0], l[1], p(0));
            break;
        case Rule::Sector:
        case Rule::Arc:
            len(l[0], l[1], p(0));
            len(l[0], l[2], p(0));
            ang(l[1], l[0], l[2], p(1));
            break;
        }
    }

} // namespace

std::vector<ConstraintResidual> constraint_residuals(const DslSequence& sequence, const Scene& scene)
{
    std::vector<ConstraintResidual> out;
    for (std::size_t i = 0; i < sequence.statements.size(); ++i) {
        Checker(scene, sequence.statements[i], static_cast<int>(i) + 1, out).run();
    }
    return out;
}

std::vector<ConstraintResidual> check_constraints(const DslSequence& sequence, const Scene& scene, double eps)
{
    std::vector<ConstraintResidual> bad;
    for (auto& r : constraint_residuals(sequence, scene)) {
        if (!(r.residual <= eps)) {
            bad.push_back(std::move(r));
        }
    }
    for (std::size_t i = 0; i < scene.points.size(); ++i) {
        for (std::size_t j = 0; j < i; ++j) {
            const double d = dist(scene.points[i].second, scene.points[j].second);
            if (d < kDeltaMin) {
                bad.push_back({ 0, "separation " + scene.points[j].first.name + scene.points[i].first.name, kDeltaMin - d });
            }
        }
    }
    return bad;
}

} // namespace geosynth
