#include "geosynth/renderer.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <map>

namespace geosynth {

std::vector<std::string> RenderSpec::problems() const
{
    std::vector<std::string> out;
    if (width <= 0 || height <= 0) {
        out.push_back("canvas must be positive");
    }
    if (!(margin_frac >= 0 && margin_frac <= 0.3)) {
        out.push_back("margin_frac must lie in [0, 0.3]");
    }
    if (stroke_width_px <= 0 || font_size_px <= 0) {
        out.push_back("stroke width and font size must be positive");
    }
    return out;
}

std::size_t Drawing::count(std::string_view cls) const
{
    return static_cast<std::size_t>(
        std::count_if(groups.begin(), groups.end(), [&](const Group& g) { return g.cls == cls; }));
}

Box figure_bounds(const Scene& scene)
{
    Box b { 1e300, 1e300, -1e300, -1e300 };
    auto grow = [&](Vec2 v) {
        b.x0 = std::min(b.x0, v.x);
        b.y0 = std::min(b.y0, v.y);
        b.x1 = std::max(b.x1, v.x);
        b.y1 = std::max(b.y1, v.y);
    };
    for (const auto& [l, v] : scene.points) {
        grow(v);
    }
    for (const auto& c : scene.circles) {
        const Vec2 o = scene.at(c.center);
        grow(o - Vec2 { c.radius, c.radius });
        grow(o + Vec2 { c.radius, c.radius });
    }
    for (const auto& a : scene.arcs) {
        for (int k = 0; k <= 64; ++k) {
            grow(a.center_pos + a.radius * dir(a.start_deg + a.sweep_deg * k / 64.0));
        }
    }
    if (b.x0 > b.x1) {
        b = { 0, 0, 0, 0 };
    }
    return b;
}

double fit_unit_length(const Scene& scene, const RenderSpec& spec)
{
    const Box b = figure_bounds(scene);
    const double aw = spec.width * (1 - 2 * spec.margin_frac);
    const double ah = spec.height * (1 - 2 * spec.margin_frac);
    const double w = std::max(b.x1 - b.x0, 1e-9);
    const double h = std::max(b.y1 - b.y0, 1e-9);
    return std::min(aw / w, ah / h);
}

namespace {

    std::size_t glyphs(const std::string& s)
    {
        std::size_t n = 0;
        for (unsigned char c : s) {
            n += (c & 0xC0) != 0x80;
        }
        return n;
    }

    double math_heading(Vec2 screen_vec) { return heading_deg({ screen_vec.x, -screen_vec.y }); }
    Vec2 screen_dir(double deg) { return { std::cos(deg2rad(deg)), -std::sin(deg2rad(deg)) }; }

    class Layout {
    public:
        Layout(const Scene& scene, const RenderSpec& spec)
            : s_(scene)
            , spec_(spec)
        {
        }

        Drawing run();

    private:
        const Scene& s_;
        const RenderSpec& spec_;
        Drawing d_;
        Vec2 center_units_;
        Vec2 centroid_px_;
        std::vector<Box> occupied_;
        std::map<Label, std::vector<Vec2>> incident_;

        Vec2 px(Vec2 u) const
        {
            return { spec_.width / 2.0 + s_.unit_length * (u.x - center_units_.x),
                spec_.height / 2.0 - s_.unit_length * (u.y - center_units_.y) };
        }
        Vec2 px(const Label& l) const { return px(s_.at(l)); }

        Box box_at(Vec2 c, const std::string& text) const
        {
            const double w = 0.6 * spec_.font_size_px * static_cast<double>(glyphs(text));
            const double h = spec_.font_size_px;
            return { c.x - w / 2, c.y - h / 2, c.x + w / 2, c.y + h / 2 };
        }

        bool free(const Box& b) const
        {
            if (b.x0 < 0 || b.y0 < 0 || b.x1 > spec_.width || b.y1 > spec_.height) {
                return false;
            }
            return std::none_of(occupied_.begin(), occupied_.end(), [&](const Box& o) { return o.overlaps(b); });
        }

        /// Greedy placement: walk outward along `dir`, then try directions
        /// rotated alternately to either side, until the box is free.
        Vec2 place(Vec2 anchor, Vec2 direction, double offset, const std::string& text)
        {
            if (direction.norm() < 1e-9) {
                direction = { 0, -1 };
            }
            direction = direction.unit();
            const Vec2 base = anchor + offset * direction;
            for (int ring = 0; ring < 6; ++ring) {
                for (int k = 0; k < 15; ++k) {
                    const double turn = (k % 2 ? 1 : -1) * 25.0 * ((k + 1) / 2);
                    const Vec2 v = rotate(direction, turn);
                    const Vec2 c = anchor + offset * (1 + 0.6 * ring) * v;
                    const Box b = box_at(c, text);
                    if (free(b)) {
                        commit(b);
                        return c;
                    }
                }
            }
            commit(box_at(base, text));
            return base;
        }

        void commit(const Box& b)
        {
            occupied_.push_back(b);
            d_.label_boxes.push_back(b);
        }

        Primitive text(Vec2 c, std::string t) const
        {
            Primitive p { PrimitiveKind::Text, { c } };
            p.text = std::move(t);
            p.annotation = true;
            return p;
        }
        static Primitive line(Vec2 a, Vec2 b, bool annotation = false, bool dashed = false)
        {
            Primitive p { PrimitiveKind::Line, { a, b } };
            p.annotation = annotation;
            p.dashed = dashed;
            return p;
        }
        static Primitive arc(Vec2 c, double r, double start, double sweep, bool annotation)
        {
            Primitive p { PrimitiveKind::Arc, { c } };
            p.radius = r;
            p.start_deg = start;
            p.sweep_deg = sweep;
            p.annotation = annotation;
            return p;
        }

        /// Start heading and sweep of the interior angle at `v` between arms to `a` and `b`.
        static std::pair<double, double> interior(Vec2 a, Vec2 v, Vec2 b)
        {
            const double h1 = math_heading(a - v);
            const double h2 = math_heading(b - v);
            double sweep = h2 - h1;
            sweep = sweep < 0 ? sweep + 360 : sweep;
            if (sweep > 180) {
                return { h2, 360 - sweep };
            }
            return { h1, sweep };
        }

        double mark_radius(Vec2 a, Vec2 v, Vec2 b) const
        {
            return std::clamp(0.22 * std::min(dist(a, v), dist(b, v)), 14.0, 34.0);
        }

        Vec2 away_from_centroid(Vec2 at, Vec2 normal) const
        {
            return dot(normal, at - centroid_px_) < 0 ? normal * -1.0 : normal;
        }

        void figure();
        void point_labels();
        void annotation(const AnnotationItem& a);
    };

    void Layout::figure()
    {
        Group g { "figure", "figure" };
        for (const auto& [a, b] : s_.segments) {
            g.items.push_back(line(px(a), px(b)));
            incident_[a].push_back((px(b) - px(a)).unit());
            incident_[b].push_back((px(a) - px(b)).unit());
        }
        for (const auto& c : s_.circles) {
            Primitive p { PrimitiveKind::Circle, { px(c.center) } };
            p.radius = c.radius * s_.unit_length;
            g.items.push_back(p);
        }
        for (const auto& a : s_.arcs) {
            g.items.push_back(arc(px(a.center_pos), a.radius * s_.unit_length, a.start_deg, a.sweep_deg, false));
        }
        d_.groups.push_back(std::move(g));
    }

    void Layout::point_labels()
    {
        for (const auto& [l, v] : s_.points) {
            occupied_.push_back({ px(v).x - 3, px(v).y - 3, px(v).x + 3, px(v).y + 3 });
        }
        for (const auto& [l, v] : s_.points) {
            const Vec2 p = px(v);
            Vec2 sum;
            for (auto u : incident_[l]) {
                sum = sum + u;
            }
            Vec2 out = sum.norm() > 1e-6 ? sum * -1.0 : p - centroid_px_;
            if (sum.norm() <= 1e-6 && !incident_[l].empty()) {
                out = incident_[l].front().perp();
                out = away_from_centroid(p, out);
            }
            Group g { "point", l.name };
            Primitive dot { PrimitiveKind::Dot, { p } };
            dot.radius = 2.5;
            g.items.push_back(dot);
            auto t = text(place(p, out, 0.9 * spec_.font_size_px, l.name), l.name);
            t.annotation = false;
            g.items.push_back(t);
            d_.groups.push_back(std::move(g));
        }
    }

    void Layout::annotation(const AnnotationItem& a)
    {
        const double fs = spec_.font_size_px;
        switch (a.kind) {
        case AnnotationKind::LengthLabel: {
            const Vec2 p = px(a.target[0]);
            const Vec2 q = px(a.target[1]);
            const Vec2 mid = (p + q) / 2;
            const Vec2 n = away_from_centroid(mid, (q - p).unit().perp());
            Group g { "length-label", a.target[0].name + a.target[1].name };
            g.items.push_back(text(place(mid, n, 0.8 * fs, a.text()), a.text()));
            d_.groups.push_back(std::move(g));
            break;
        }
        case AnnotationKind::AngleLabel:
        case AnnotationKind::RightAngleMark: {
            const Vec2 pa = px(a.target[0]);
            const Vec2 v = px(a.target[1]);
            const Vec2 pb = px(a.target[2]);
            const Vec2 u1 = (pa - v).unit();
            const Vec2 u2 = (pb - v).unit();
            Vec2 bis = u1 + u2;
            bis = bis.norm() < 1e-9 ? u1.perp() : bis.unit();
            const bool square = a.kind == AnnotationKind::RightAngleMark
                || (a.value && *a.value == Rational(90));
            const double r = square ? 12.0 : mark_radius(pa, v, pb);
            Group g { a.kind == AnnotationKind::AngleLabel ? "angle-label" : "right-angle-mark",
                a.target[0].name + a.target[1].name + a.target[2].name };
            if (square) {
                Primitive sq { PrimitiveKind::Polyline, { v + r * u1, v + r * (u1 + u2), v + r * u2 } };
                sq.annotation = true;
                g.items.push_back(sq);
            } else {
                auto [start, sweep] = interior(pa, v, pb);
                g.items.push_back(arc(v, r, start, sweep, true));
            }
            if (a.kind == AnnotationKind::AngleLabel) {
                g.items.push_back(text(place(v, bis, r + 0.9 * fs, a.text()), a.text()));
            }
            d_.groups.push_back(std::move(g));
            break;
        }
        case AnnotationKind::RadiusLabel: {
            const Vec2 o = px(a.target[0]);
            Vec2 end;
            bool draw_radius = true;
            if (a.target.size() > 1) {
                end = px(a.target[1]);
                draw_radius = !s_.registry.connected(a.target[0], a.target[1]);
            } else {
                const CircleGeom* c = s_.circle(a.target[0]);
                const double r = c ? c->radius * s_.unit_length : 0.0;
                // Radius drawn toward the emptiest of 16 headings.
                std::vector<double> taken;
                for (auto u : incident_[a.target[0]]) {
                    taken.push_back(math_heading(u));
                }
                for (const auto& [l, v] : s_.points) {
                    if (l != a.target[0] && std::abs(dist(px(v), o) - r) < 1e-6 * std::max(1.0, r)) {
                        taken.push_back(math_heading(px(v) - o));
                    }
                }
                double best = 45.0;
                double best_gap = -1;
                for (int k = 0; k < 16; ++k) {
                    const double h = 45.0 + 22.5 * k;
                    double gap = 360;
                    for (double t : taken) {
                        double diff = std::fmod(std::abs(h - t), 360.0);
                        gap = std::min(gap, std::min(diff, 360 - diff));
                    }
                    if (gap > best_gap + 1e-9) {
                        best_gap = gap;
                        best = h;
                    }
                }
                end = o + r * screen_dir(best);
            }
            Group g { "radius-label", a.target[0].name };
            if (draw_radius) {
                g.items.push_back(line(o, end, true, true));
            }
            const Vec2 mid = (o + end) / 2;
            const Vec2 n = away_from_centroid(mid, (end - o).unit().perp());
            g.items.push_back(text(place(mid, n, 0.8 * fs, a.text()), a.text()));
            d_.groups.push_back(std::move(g));
            break;
        }
        case AnnotationKind::TickMark: {
            Group g { "tick-mark", "" };
            for (const auto& l : a.target) {
                g.key += l.name;
            }
            if (a.target.size() == 2) {
                const Vec2 p = px(a.target[0]);
                const Vec2 q = px(a.target[1]);
                const Vec2 mid = (p + q) / 2;
                const Vec2 n = (q - p).unit().perp();
                g.items.push_back(line(mid - 6.0 * n, mid + 6.0 * n, true));
            } else {
                const Vec2 pa = px(a.target[0]);
                const Vec2 v = px(a.target[1]);
                const Vec2 pb = px(a.target[2]);
                const double r = mark_radius(pa, v, pb) + 6;
                auto [start, sweep] = interior(pa, v, pb);
                g.items.push_back(arc(v, r, start, sweep, true));
                const Vec2 m = screen_dir(start + sweep / 2);
                g.items.push_back(line(v + (r - 5) * m, v + (r + 5) * m, true));
            }
            d_.groups.push_back(std::move(g));
            break;
        }
        }
    }

    Drawing Layout::run()
    {
        d_.width = spec_.width;
        d_.height = spec_.height;
        d_.stroke_width = spec_.stroke_width_px;
        d_.font_size = spec_.font_size_px;
        d_.palette = spec_.palette;

        const Box b = figure_bounds(s_);
        const double aw = spec_.width * (1 - 2 * spec_.margin_frac);
        const double ah = spec_.height * (1 - 2 * spec_.margin_frac);
        const double slack = 1e-6 * std::max(aw, ah);
        if ((b.x1 - b.x0) * s_.unit_length > aw + slack || (b.y1 - b.y0) * s_.unit_length > ah + slack) {
            throw RenderError(RenderErrorCode::CanvasOverflow,
                fmt::format("figure {:.1f}x{:.1f}px exceeds {:.1f}x{:.1f}px", (b.x1 - b.x0) * s_.unit_length,
                    (b.y1 - b.y0) * s_.unit_length, aw, ah));
        }
        center_units_ = { (b.x0 + b.x1) / 2, (b.y0 + b.y1) / 2 };
        centroid_px_ = px(s_.centroid());

        figure();
        point_labels();
        for (const auto& a : s_.annotations) {
            annotation(a);
        }
        return std::move(d_);
    }

    std::string escape(const std::string& s)
    {
        std::string out;
        for (char c : s) {
            switch (c) {
            case '&':
                out += "&amp;";
                break;
            case '<':
                out += "&lt;";
                break;
            case '>':
                out += "&gt;";
                break;
            default:
                out += c;
            }
        }
        return out;
    }

    void emit(std::string& out, const Primitive& p, const Palette& pal)
    {
        const std::string& color = p.annotation ? pal.annotation : pal.figure;
        switch (p.kind) {
        case PrimitiveKind::Line:
            out += fmt::format(R"(<line x1="{:.2f}" y1="{:.2f}" x2="{:.2f}" y2="{:.2f}" stroke="{}"{}/>)", p.pts[0].x,
                p.pts[0].y, p.pts[1].x, p.pts[1].y, color, p.dashed ? R"( stroke-dasharray="6 4")" : "");
            break;
        case PrimitiveKind::Circle:
            out += fmt::format(R"(<circle cx="{:.2f}" cy="{:.2f}" r="{:.2f}" fill="none" stroke="{}"/>)", p.pts[0].x,
                p.pts[0].y, p.radius, color);
            break;
        case PrimitiveKind::Dot:
            out += fmt::format(R"(<circle cx="{:.2f}" cy="{:.2f}" r="{:.2f}" fill="{}" stroke="none"/>)", p.pts[0].x,
                p.pts[0].y, p.radius, color);
            break;
        case PrimitiveKind::Arc: {
            const Vec2 c = p.pts[0];
            const Vec2 a = c + p.radius * screen_dir(p.start_deg);
            const Vec2 b = c + p.radius * screen_dir(p.start_deg + p.sweep_deg);
            out += fmt::format(R"(<path d="M {:.2f} {:.2f} A {:.2f} {:.2f} 0 {} 0 {:.2f} {:.2f}" fill="none" stroke="{}"/>)",
                a.x, a.y, p.radius, p.radius, p.sweep_deg > 180 ? 1 : 0, b.x, b.y, color);
            break;
        }
        case PrimitiveKind::Polyline: {
            std::string pts;
            for (std::size_t i = 0; i < p.pts.size(); ++i) {
                pts += fmt::format("{}{:.2f},{:.2f}", i ? " " : "", p.pts[i].x, p.pts[i].y);
            }
            out += fmt::format(R"(<polyline points="{}" fill="none" stroke="{}"/>)", pts, color);
            break;
        }
        case PrimitiveKind::Text:
            out += fmt::format(R"(<text x="{:.2f}" y="{:.2f}" fill="{}">{}</text>)", p.pts[0].x, p.pts[0].y, color,
                escape(p.text));
            break;
        }
    }

} // namespace

Drawing layout(const Scene& scene, const RenderSpec& spec)
{
    if (auto issues = spec.problems(); !issues.empty()) {
        throw RenderError(RenderErrorCode::InvalidSpec, issues.front());
    }
    return Layout(scene, spec).run();
}

std::string to_svg(const Drawing& d)
{
    std::string out = fmt::format(
        R"(<svg xmlns="http://www.w3.org/2000/svg" width="{0}" height="{1}" viewBox="0 0 {0} {1}">)", d.width,
        d.height);
    out += "\n";
    out += fmt::format(R"(<rect x="0" y="0" width="{}" height="{}" fill="{}"/>)", d.width, d.height, d.palette.background);
    out += "\n";
    for (const auto& g : d.groups) {
        out += fmt::format(
            R"(<g class="{}" data-key="{}" stroke-width="{}" font-family="sans-serif" font-size="{}" text-anchor="middle" dominant-baseline="central">)",
            g.cls, escape(g.key), d.stroke_width, d.font_size);
        for (const auto& p : g.items) {
            emit(out, p, d.palette);
        }
        out += "</g>\n";
    }
    out += "</svg>\n";
    return out;
}

RenderOutput render(const Scene& scene, const RenderSpec& spec, const Rasterizer* rasterizer)
{
    if (spec.raster && !rasterizer) {
        throw RenderError(RenderErrorCode::RasterBackendUnavailable, "raster output requested without a rasterizer");
    }
    const Drawing d = layout(scene, spec);
    RenderOutput out { to_svg(d), std::nullopt };
    if (spec.raster) {
        out.png = rasterizer->png(d);
    }
    return out;
}

std::optional<std::pair<int, int>> png_dimensions(const std::vector<std::uint8_t>& b)
{
    static constexpr std::uint8_t sig[] = { 0x89, 'P', 'N', 'G', '\r', '\n', 0x1A, '\n' };
    if (b.size() < 24 || !std::equal(std::begin(sig), std::end(sig), b.begin())
        || std::string(b.begin() + 12, b.begin() + 16) != "IHDR") {
        return std::nullopt;
    }
    auto be32 = [&](std::size_t i) {
        return static_cast<int>((std::uint32_t(b[i]) << 24) | (std::uint32_t(b[i + 1]) << 16)
            | (std::uint32_t(b[i + 2]) << 8) | std::uint32_t(b[i + 3]));
    };
    return std::pair { be32(16), be32(20) };
}

} // namespace geosynth
