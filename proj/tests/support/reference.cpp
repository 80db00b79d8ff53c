#include "reference.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace ref {

using geosynth::Label;
using geosynth::LineRef;
using geosynth::Statement;

double distance(Pt a, Pt b) { return std::hypot(a.x - b.x, a.y - b.y); }

double angle_at(Pt p, Pt v, Pt r)
{
    const double a = distance(v, p);
    const double b = distance(v, r);
    const double c = distance(p, r);
    const double cosv = std::clamp((a * a + b * b - c * c) / (2 * a * b), -1.0, 1.0);
    return std::acos(cosv) * 180.0 / std::numbers::pi;
}

double convex_area(const std::vector<Pt>& poly)
{
    double total = 0;
    for (std::size_t i = 1; i + 1 < poly.size(); ++i) {
        const double a = distance(poly[0], poly[i]);
        const double b = distance(poly[i], poly[i + 1]);
        const double c = distance(poly[i + 1], poly[0]);
        const double s = (a + b + c) / 2;
        total += std::sqrt(std::max(0.0, s * (s - a) * (s - b) * (s - c)));
    }
    return total;
}

namespace {

    double rad(double deg) { return deg * std::numbers::pi / 180.0; }

    /// Line through a and b as (A, B, C) with A x + B y = C.
    struct Eq {
        double a, b, c;
    };
    Eq through(Pt p, Pt q) { return { q.y - p.y, p.x - q.x, (q.y - p.y) * p.x + (p.x - q.x) * p.y }; }
    Pt solve(Eq l, Eq m)
    {
        const double det = l.a * m.b - m.a * l.b;
        return { (l.c * m.b - m.c * l.b) / det, (l.a * m.c - m.a * l.c) / det };
    }
    /// Perpendicular bisector of pq.
    Eq bisector(Pt p, Pt q)
    {
        const double a = q.x - p.x;
        const double b = q.y - p.y;
        return { a, b, a * (p.x + q.x) / 2 + b * (p.y + q.y) / 2 };
    }

    class Walker {
    public:
        Walker(const geosynth::Scene& scene, double tol)
            : scene_(scene)
            , tol_(tol)
        {
        }

        Reconstruction run(const geosynth::DslSequence& seq)
        {
            for (std::size_t i = 0; i < seq.size(); ++i) {
                idx_ = static_cast<int>(i) + 1;
                statement(seq.statements[i]);
            }
            return std::move(out_);
        }

    private:
        const geosynth::Scene& scene_;
        double tol_;
        int idx_ = 0;
        Reconstruction out_;
        std::map<std::string, double> radius_;

        Pt P(const Label& l) const { return out_.points.at(l.name); }
        Pt scene_pt(const Label& l) const
        {
            const auto v = scene_.at(l);
            return { v.x, v.y };
        }
        void expect(const std::string& what, double got, double want)
        {
            const double err = std::abs(got - want);
            if (!(err <= tol_ * std::max(1.0, std::abs(want)))) {
                out_.mismatches.push_back({ idx_, what, err });
            }
        }
        /// Recomputed point: compare with the scene, keep the reference value.
        void derive(const Label& l, Pt p)
        {
            const Pt s = scene_pt(l);
            expect(l.name + ".x", s.x, p.x);
            expect(l.name + ".y", s.y, p.y);
            out_.points[l.name] = p;
        }
        /// Free choice: adopt the scene's value.
        Pt adopt(const Label& l)
        {
            out_.points[l.name] = scene_pt(l);
            return out_.points[l.name];
        }

        static const Label& L(const Statement& st, std::size_t i) { return std::get<Label>(st.args[i]); }
        static const LineRef& Ln(const Statement& st, std::size_t i) { return std::get<LineRef>(st.args[i]); }

        void circle_center(const Label& o, double r)
        {
            if (!out_.points.contains(o.name)) {
                adopt(o);
            }
            radius_[o.name] = r;
        }

        void statement(const Statement& st)
        {
            std::vector<double> p;
            for (const auto& q : st.params) {
                p.push_back(q.to_double());
            }
            const std::string& c = st.constructor;
            if (c == "Free") {
                Pt x = adopt(L(st, 0));
                expect("Free dist 1", distance(x, P(L(st, 1))), p[0]);
                expect("Free dist 2", distance(x, P(L(st, 2))), p[1]);
            } else if (c == "Midpoint") {
                const Pt a = P(Ln(st, 1).from), b = P(Ln(st, 1).to);
                derive(L(st, 0), { (a.x + b.x) / 2, (a.y + b.y) / 2 });
            } else if (c == "Foot") {
                const Pt a = P(L(st, 1)), b = P(Ln(st, 2).from), d = P(Ln(st, 2).to);
                const double t = ((a.x - b.x) * (d.x - b.x) + (a.y - b.y) * (d.y - b.y))
                    / ((d.x - b.x) * (d.x - b.x) + (d.y - b.y) * (d.y - b.y));
                derive(L(st, 0), { b.x + t * (d.x - b.x), b.y + t * (d.y - b.y) });
            } else if (c == "Intersection") {
                derive(L(st, 0),
                    solve(through(P(Ln(st, 1).from), P(Ln(st, 1).to)), through(P(Ln(st, 2).from), P(Ln(st, 2).to))));
            } else if (c == "OnLine" || c == "Extension") {
                const Pt a = P(Ln(st, 1).from), b = P(Ln(st, 1).to);
                const double len = distance(a, b);
                const Pt base = c == "OnLine" ? a : b;
                derive(L(st, 0), { base.x + p[0] * (b.x - a.x) / len, base.y + p[0] * (b.y - a.y) / len });
            } else if (c == "Reflection") {
                const Pt x = P(L(st, 1));
                const Eq l = through(P(Ln(st, 2).from), P(Ln(st, 2).to));
                const double k = 2 * (l.a * x.x + l.b * x.y - l.c) / (l.a * l.a + l.b * l.b);
                derive(L(st, 0), { x.x - k * l.a, x.y - k * l.b });
            } else if (c == "Rotation") {
                const Pt x = P(L(st, 1)), o = P(L(st, 2));
                const double cs = std::cos(rad(p[0])), sn = std::sin(rad(p[0]));
                const double dx = x.x - o.x, dy = x.y - o.y;
                derive(L(st, 0), { o.x + cs * dx - sn * dy, o.y + sn * dx + cs * dy });
            } else if (c == "Centroid") {
                const Pt a = P(L(st, 1)), b = P(L(st, 2)), d = P(L(st, 3));
                derive(L(st, 0), { (a.x + b.x + d.x) / 3, (a.y + b.y + d.y) / 3 });
            } else if (c == "Circumcenter") {
                const Pt a = P(L(st, 1)), b = P(L(st, 2)), d = P(L(st, 3));
                derive(L(st, 0), solve(bisector(a, b), bisector(b, d)));
            } else if (c == "Incenter") {
                // Intersection of the internal bisectors at the first two vertices.
                const Pt a = P(L(st, 1)), b = P(L(st, 2)), d = P(L(st, 3));
                auto bis = [](Pt v, Pt s, Pt t) {
                    const double ls = distance(v, s), lt = distance(v, t);
                    const Pt w { v.x + (s.x - v.x) / ls + (t.x - v.x) / lt, v.y + (s.y - v.y) / ls + (t.y - v.y) / lt };
                    return through(v, w);
                };
                derive(L(st, 0), solve(bis(a, b, d), bis(b, a, d)));
            } else if (c == "OnCircle") {
                const Pt x = adopt(L(st, 0));
                expect("on circle", distance(x, P(L(st, 1))), radius_.at(L(st, 1).name));
            } else if (c == "TangentPoint") {
                const Pt t = adopt(L(st, 0)), e = P(L(st, 1)), o = P(L(st, 2));
                expect("on circle", distance(t, o), radius_.at(L(st, 2).name));
                expect("tangency", angle_at(e, t, o), 90);
            } else if (c == "Segment") {
                // Nothing new.
            } else if (c == "Para" || c == "Perp") {
                const Pt a = P(Ln(st, 0).from), b = adopt(Ln(st, 0).to);
                const Pt u = P(Ln(st, 1).from), v = P(Ln(st, 1).to);
                expect("length", distance(a, b), p[0]);
                const double cr = ((b.x - a.x) * (v.y - u.y) - (b.y - a.y) * (v.x - u.x)) / (p[0] * distance(u, v));
                const double dt = ((b.x - a.x) * (v.x - u.x) + (b.y - a.y) * (v.y - u.y)) / (p[0] * distance(u, v));
                expect(c == "Para" ? "parallel" : "perpendicular", c == "Para" ? cr : dt, 0);
            } else if (c == "Tangent") {
                const Pt t = adopt(Ln(st, 0).from), e = adopt(Ln(st, 0).to), o = P(L(st, 1));
                expect("on circle", distance(t, o), radius_.at(L(st, 1).name));
                expect("length", distance(t, e), p[0]);
                expect("tangency", angle_at(o, t, e), 90);
            } else if (c == "Chord" || c == "Diameter") {
                const Pt a = adopt(Ln(st, 0).from), b = adopt(Ln(st, 0).to), o = P(L(st, 1));
                const double r = radius_.at(L(st, 1).name);
                expect("on circle", distance(a, o), r);
                expect("on circle", distance(b, o), r);
                expect("chord length", distance(a, b), c == "Chord" ? p[0] : 2 * r);
            } else if (c == "AngleBisector") {
                const Pt b = P(Ln(st, 0).from), a = P(Ln(st, 1).from), d = P(Ln(st, 1).to);
                const double k = distance(b, a) / (distance(b, a) + distance(b, d));
                derive(Ln(st, 0).to, { a.x + k * (d.x - a.x), a.y + k * (d.y - a.y) });
            } else if (c == "Angle") {
                const Pt x = P(L(st, 0)), v = P(L(st, 1)), r = adopt(L(st, 2));
                expect("angle", angle_at(x, v, r), p[0]);
                expect("equal arms", distance(v, r), distance(v, x));
            } else if (c == "InscribedAngle") {
                const Pt a = adopt(L(st, 0)), v = adopt(L(st, 1)), b = adopt(L(st, 2)), o = P(L(st, 3));
                const double r = radius_.at(L(st, 3).name);
                for (Pt q : { a, v, b }) {
                    expect("on circle", distance(q, o), r);
                }
                expect("angle", angle_at(a, v, b), p[0]);
            } else if (c == "CentralAngle") {
                const Pt a = adopt(L(st, 0)), o = P(L(st, 1)), b = adopt(L(st, 2));
                const double r = radius_.at(L(st, 1).name);
                expect("on circle", distance(a, o), r);
                expect("on circle", distance(b, o), r);
                expect("angle", angle_at(a, o, b), p[0]);
            } else if (c == "Circle") {
                circle_center(L(st, 0), p[0]);
            } else if (c == "Semicircle") {
                const Pt a = adopt(L(st, 0)), b = adopt(L(st, 1));
                expect("diameter", distance(a, b), p[0]);
            } else if (c == "Sector" || c == "Arc") {
                const Pt o = adopt(L(st, 0)), a = adopt(L(st, 1)), b = adopt(L(st, 2));
                expect("radius", distance(o, a), p[0]);
                expect("radius", distance(o, b), p[0]);
                if (p[1] <= 180) {
                    expect("central angle", angle_at(a, o, b), p[1]);
                }
            } else {
                shape(st, p);
            }
        }

        void shape(const Statement& st, const std::vector<double>& p)
        {
            std::vector<Pt> v;
            for (const auto& a : st.args) {
                v.push_back(adopt(std::get<Label>(a)));
            }
            const std::string& c = st.constructor;
            auto side = [&](std::size_t i, std::size_t j, double want) {
                expect("side", distance(v[i], v[j]), want);
            };
            auto ang = [&](std::size_t i, std::size_t j, std::size_t k, double want) {
                expect("angle", angle_at(v[i], v[j], v[k]), want);
            };
            if (c == "Triangle") {
                side(0, 1, p[0]);
                side(1, 2, p[1]);
                ang(0, 1, 2, p[2]);
            } else if (c == "RightTriangle") {
                side(0, 1, p[0]);
                side(1, 2, p[1]);
                ang(0, 1, 2, 90);
            } else if (c == "IsoscelesTriangle") {
                side(0, 1, p[0]);
                side(1, 2, p[0]);
                ang(0, 1, 2, p[1]);
            } else if (c == "EquilateralTriangle") {
                side(0, 1, p[0]);
                side(1, 2, p[0]);
                side(2, 0, p[0]);
            } else if (c == "Square" || c == "RegularPolygon") {
                const std::size_t n = v.size();
                const double interior = 180.0 * static_cast<double>(n - 2) / static_cast<double>(n);
                for (std::size_t i = 0; i < n; ++i) {
                    side(i, (i + 1) % n, p[0]);
                    ang((i + n - 1) % n, i, (i + 1) % n, interior);
                }
            } else if (c == "Rectangle") {
                side(0, 1, p[0]);
                side(1, 2, p[1]);
                side(2, 3, p[0]);
                side(3, 0, p[1]);
                ang(0, 1, 2, 90);
                ang(1, 2, 3, 90);
            } else if (c == "Parallelogram" || c == "Rhombus") {
                const double a = p[0];
                const double b = c == "Rhombus" ? p[0] : p[1];
                const double alpha = c == "Rhombus" ? p[1] : p[2];
                side(0, 1, a);
                side(1, 2, b);
                side(2, 3, a);
                side(3, 0, b);
                ang(0, 1, 2, alpha);
            } else if (c == "Trapezoid") {
                side(0, 1, p[0]);
                side(3, 2, p[1]);
                side(0, 3, p[2]);
                ang(3, 0, 1, p[3]);
                const double cr = (v[1].x - v[0].x) * (v[2].y - v[3].y) - (v[1].y - v[0].y) * (v[2].x - v[3].x);
                expect("parallel bases", cr / (p[0] * p[1]), 0);
            }
        }
    };

} // namespace

Reconstruction reconstruct(const geosynth::DslSequence& seq, const geosynth::Scene& scene, double tol)
{
    return Walker(scene, tol).run(seq);
}

} // namespace ref
