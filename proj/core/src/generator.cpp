#include "geosynth/generator.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>

namespace geosynth {

namespace {

    constexpr std::string_view kPointActions[] = { "Circle", "Foot", "Reflection", "Rotation", "TangentPoint", "Segment" };
    constexpr std::string_view kLineActions[] = { "Midpoint", "OnLine", "Extension", "Intersection", "Para", "Perp",
        "Free", "Angle" };
    constexpr std::string_view kAngleActions[] = { "AngleBisector", "Foot", "Segment" };
    constexpr std::string_view kShapeActions[] = { "Centroid", "Circumcenter", "Incenter", "OnCircle", "Tangent",
        "Chord", "Diameter", "InscribedAngle", "CentralAngle", "Intersection", "Segment", "Midpoint" };

    constexpr int kReselectBound = 32;
    constexpr int kStepRetries = 20;
    constexpr int kSequenceRestarts = 5;
    constexpr double kSpecialAngles[] = { 30, 45, 60, 90, 120 };

    /// Nearest rational with denominator 10^6; exact for decimal config values.
    Rational approx(double v) { return Rational(static_cast<std::int64_t>(std::llround(v * 1e6)), 1000000); }

    bool is_triangle(std::string_view kind)
    {
        return kind == "Triangle" || kind == "RightTriangle" || kind == "IsoscelesTriangle"
            || kind == "EquilateralTriangle";
    }

} // namespace

GeneratorConfig GeneratorConfig::defaults()
{
    GeneratorConfig c;
    for (auto cat : { Category::Point, Category::Line, Category::Angle, Category::Shape }) {
        auto& m = c.action_weights[std::string(to_string(cat))];
        for (auto a : actions(cat)) {
            m[std::string(a)] = 1.0;
        }
        c.element_weights[std::string(to_string(cat))] = 1.0;
    }
    auto& seed = c.action_weights[std::string(kSeedKey)];
    for (const auto* e : ElementCatalog::instance().in_category(Category::Shape)) {
        seed[e->name] = 1.0;
    }
    return c;
}

std::span<const std::string_view> GeneratorConfig::actions(Category category)
{
    switch (category) {
    case Category::Point:
        return kPointActions;
    case Category::Line:
        return kLineActions;
    case Category::Angle:
        return kAngleActions;
    case Category::Shape:
        return kShapeActions;
    }
    return {};
}

double GeneratorConfig::action_weight(std::string_view category, std::string_view action) const
{
    auto c = action_weights.find(std::string(category));
    if (c == action_weights.end()) {
        return 0.0;
    }
    auto a = c->second.find(std::string(action));
    return a == c->second.end() ? 0.0 : a->second;
}

double GeneratorConfig::element_weight(Category category) const
{
    auto it = element_weights.find(std::string(to_string(category)));
    return it == element_weights.end() ? 0.0 : it->second;
}

std::vector<std::string> GeneratorConfig::problems() const
{
    std::vector<std::string> out;
    auto finite_pos = [](double v) { return std::isfinite(v) && v > 0; };
    if (step_count < 0) {
        out.push_back("step_count must be >= 0");
    }
    if (!finite_pos(length_min) || !finite_pos(length_max) || length_min > length_max) {
        out.push_back("length_range must satisfy 0 < l_min <= l_max");
    }
    if (!finite_pos(length_step)) {
        out.push_back("length_step must be positive");
    }
    if (!finite_pos(scale_factor)) {
        out.push_back("scale_factor must be positive");
    }
    if (!finite_pos(angle_grid)) {
        out.push_back("angle_grid must be positive");
    }
    if (!(angle_min > 0 && angle_max < 180 && angle_min <= angle_max)) {
        out.push_back("angle_range must lie in (0, 180)");
    } else if (finite_pos(angle_grid) && angle_values().empty()) {
        out.push_back("angle_range contains no grid angle");
    }
    if (!(special_angle_boost >= 1)) {
        out.push_back("special_angle_boost must be >= 1");
    }
    for (const auto& [cat, m] : action_weights) {
        if (cat != kSeedKey && !category_from_string(cat)) {
            out.push_back("unknown action category " + cat);
            continue;
        }
        for (const auto& [action, w] : m) {
            if (!(w >= 0) || !std::isfinite(w)) {
                out.push_back("negative weight for " + cat + "." + action);
            }
            bool known = false;
            if (cat == kSeedKey) {
                const auto* e = ElementCatalog::instance().find(action);
                known = e && e->category == Category::Shape;
            } else {
                auto list = actions(*category_from_string(cat));
                known = std::find(list.begin(), list.end(), action) != list.end();
            }
            if (!known) {
                out.push_back("unknown action " + cat + "." + action);
            }
        }
    }
    bool any_element = false;
    for (const auto& [cat, w] : element_weights) {
        if (!category_from_string(cat)) {
            out.push_back("unknown element category " + cat);
        }
        if (!(w >= 0) || !std::isfinite(w)) {
            out.push_back("negative element weight for " + cat);
        }
        any_element = any_element || w > 0;
    }
    if (step_count > 0 && !any_element) {
        out.push_back("no element category has positive weight");
    }
    bool any_action = false;
    for (const auto& [cat, m] : action_weights) {
        for (const auto& [action, w] : m) {
            any_action = any_action || (cat != kSeedKey && w > 0);
        }
    }
    if (step_count > 0 && !any_action) {
        out.push_back("no action has positive weight");
    }
    return out;
}

std::vector<Rational> GeneratorConfig::length_values() const
{
    const Rational lo = approx(scale_factor * length_min);
    const Rational hi = approx(scale_factor * length_max);
    const Rational step = approx(length_step);
    std::vector<Rational> out;
    for (Rational v = lo; v <= hi && out.size() < 100000; v = v + step) {
        out.push_back(v);
    }
    return out;
}

std::vector<Rational> GeneratorConfig::angle_values() const
{
    const Rational grid = approx(angle_grid);
    std::vector<Rational> out;
    for (Rational v = grid; v < Rational(180); v = v + grid) {
        if (v.to_double() >= angle_min - 1e-9 && v.to_double() <= angle_max + 1e-9) {
            out.push_back(v);
        }
    }
    return out;
}

std::vector<double> GeneratorConfig::angle_weights() const
{
    std::vector<double> w;
    for (const auto& a : angle_values()) {
        const bool special = std::find(std::begin(kSpecialAngles), std::end(kSpecialAngles), a.to_double())
            != std::end(kSpecialAngles);
        w.push_back(special ? special_angle_boost : 1.0);
    }
    return w;
}

RealizeOptions GeneratorConfig::realize_options() const
{
    return { 0.25 * scale_factor * length_min, 8.0 * scale_factor * length_max };
}

void apply_json(GeneratorConfig& c, const nlohmann::json& j)
{
    if (!j.is_object()) {
        throw std::invalid_argument("generator config must be an object");
    }
    for (const auto& [key, v] : j.items()) {
        if (key == "step_count") {
            c.step_count = v.get<int>();
        } else if (key == "length_range") {
            c.length_min = v.at(0).get<double>();
            c.length_max = v.at(1).get<double>();
        } else if (key == "length_step") {
            c.length_step = v.get<double>();
        } else if (key == "angle_range") {
            c.angle_min = v.at(0).get<double>();
            c.angle_max = v.at(1).get<double>();
        } else if (key == "angle_grid") {
            c.angle_grid = v.get<double>();
        } else if (key == "special_angle_boost") {
            c.special_angle_boost = v.get<double>();
        } else if (key == "scale_factor") {
            c.scale_factor = v.get<double>();
        } else if (key == "seed") {
            c.seed = v.get<std::uint64_t>();
        } else if (key == "element_weights") {
            for (const auto& [cat, w] : v.items()) {
                c.element_weights[cat] = w.get<double>();
            }
        } else if (key == "action_weights") {
            for (const auto& [cat, m] : v.items()) {
                auto& dst = c.action_weights[cat];
                dst.clear();
                for (const auto& [action, w] : m.items()) {
                    dst[action] = w.get<double>();
                }
            }
        } else {
            throw std::invalid_argument("unknown generator config key: " + key);
        }
    }
}

nlohmann::json to_json(const GeneratorConfig& c)
{
    return nlohmann::json {
        { "step_count", c.step_count },
        { "length_range", { c.length_min, c.length_max } },
        { "length_step", c.length_step },
        { "angle_range", { c.angle_min, c.angle_max } },
        { "angle_grid", c.angle_grid },
        { "special_angle_boost", c.special_angle_boost },
        { "scale_factor", c.scale_factor },
        { "seed", c.seed },
        { "element_weights", c.element_weights },
        { "action_weights", c.action_weights },
    };
}

std::string_view to_string(GeneratorErrorCode code)
{
    switch (code) {
    case GeneratorErrorCode::InvalidConfig:
        return "InvalidConfig";
    case GeneratorErrorCode::EmptyActionSpace:
        return "EmptyActionSpace";
    case GeneratorErrorCode::NoLegalAction:
        return "NoLegalAction";
    case GeneratorErrorCode::StepExhausted:
        return "StepExhausted";
    case GeneratorErrorCode::GenerationExhausted:
        return "GenerationExhausted";
    }
    return "?";
}

GeneratorError::GeneratorError(GeneratorErrorCode code, std::string detail)
    : std::runtime_error(std::string(to_string(code)) + ": " + detail)
    , code_(code)
    , detail_(std::move(detail))
{
}

std::vector<Label> SymbolicState::fresh_labels(std::size_t count) const
{
    std::vector<Label> out;
    for (int round = 0; out.size() < count; ++round) {
        for (char ch = 'A'; ch <= 'Z' && out.size() < count; ++ch) {
            Label l { std::string(1, ch) + (round ? std::to_string(round) : "") };
            if (!registry.has_point(l)) {
                out.push_back(std::move(l));
            }
        }
    }
    return out;
}

namespace {

    struct Params {
        Rational x, y, z, alpha;
    };

    Params sample_params(const GeneratorConfig& c, Rng& rng)
    {
        const auto lengths = c.length_values();
        const auto angles = c.angle_values();
        const auto weights = c.angle_weights();
        Params p;
        p.x = lengths[rng.below(lengths.size())];
        p.y = lengths[rng.below(lengths.size())];
        p.z = lengths[rng.below(lengths.size())];
        p.alpha = angles[rng.weighted(weights)];
        return p;
    }

    Statement make(std::string ctor, std::vector<Arg> args, std::vector<Rational> params = {})
    {
        return Statement { std::move(ctor), std::move(args), std::move(params) };
    }

    Arg ln(const Label& a, const Label& b) { return LineRef { a, b }; }

    /// Every concrete statement `action` can produce from element `e`.
    std::vector<Statement> options(std::string_view action, const ElementRecord& e, const SymbolicState& s,
        const Params& p)
    {
        std::vector<Statement> out;
        const auto& reg = s.registry;
        const auto fresh = s.fresh_labels(3);
        const Label& n0 = fresh[0];
        const Label& n1 = fresh[1];
        const Label& n2 = fresh[2];
        const std::string a(action);

        switch (e.category) {
        case Category::Point: {
            const Label& pt = e.labels[0];
            if (a == "Circle") {
                if (!reg.has_circle(pt)) {
                    out.push_back(make(a, { pt }, { p.x }));
                }
            } else if (a == "Foot" || a == "Reflection") {
                for (const auto& [u, v] : reg.lines()) {
                    if (u != pt && v != pt) {
                        out.push_back(make(a, { n0, pt, ln(u, v) }));
                    }
                }
            } else if (a == "Rotation") {
                for (const auto& o : reg.points()) {
                    if (o != pt) {
                        out.push_back(make(a, { n0, pt, o }, { p.alpha }));
                    }
                }
            } else if (a == "TangentPoint") {
                for (const auto& sh : reg.shapes()) {
                    if (sh.kind == "Circle" && sh.labels[0] != pt) {
                        out.push_back(make(a, { n0, pt, sh.labels[0] }));
                    }
                }
            } else if (a == "Segment") {
                for (const auto& q : reg.points()) {
                    if (q != pt && !reg.connected(pt, q)) {
                        out.push_back(make(a, { pt, q }));
                    }
                }
            }
            break;
        }
        case Category::Line: {
            const Label& u = e.labels[0];
            const Label& v = e.labels[1];
            if (a == "Midpoint") {
                out.push_back(make(a, { n0, ln(u, v) }));
            } else if (a == "OnLine") {
                out.push_back(make(a, { n0, ln(u, v) }, { p.x }));
                out.push_back(make(a, { n0, ln(v, u) }, { p.x }));
            } else if (a == "Extension") {
                out.push_back(make(a, { n0, ln(u, v) }, { p.x }));
                out.push_back(make(a, { n0, ln(v, u) }, { p.x }));
            } else if (a == "Intersection") {
                for (const auto& [c, d] : reg.lines()) {
                    if (c != u && c != v && d != u && d != v) {
                        out.push_back(make(a, { n0, ln(u, v), ln(c, d) }));
                    }
                }
            } else if (a == "Para" || a == "Perp") {
                for (const auto& q : reg.points()) {
                    if (q != u && q != v) {
                        out.push_back(make(a, { ln(q, n0), ln(u, v) }, { p.x }));
                    }
                }
            } else if (a == "Free") {
                out.push_back(make(a, { n0, u, v }, { p.x, p.y }));
            } else if (a == "Angle") {
                out.push_back(make(a, { u, v, n0 }, { p.alpha }));
                out.push_back(make(a, { v, u, n0 }, { p.alpha }));
            }
            break;
        }
        case Category::Angle: {
            const Label& pa = e.labels[0];
            const Label& q = e.labels[1];
            const Label& r = e.labels[2];
            if (a == "AngleBisector") {
                out.push_back(make(a, { ln(q, n0), ln(pa, r) }));
            } else if (a == "Foot") {
                out.push_back(make(a, { n0, q, ln(pa, r) }));
            } else if (a == "Segment") {
                if (!reg.connected(pa, r)) {
                    out.push_back(make(a, { pa, r }));
                }
            }
            break;
        }
        case Category::Shape: {
            const auto& l = e.labels;
            const std::string& kind = e.shape_kind;
            if (a == "Centroid" || a == "Circumcenter" || a == "Incenter") {
                if (is_triangle(kind)) {
                    out.push_back(make(a, { n0, l[0], l[1], l[2] }));
                }
            } else if (kind == "Circle") {
                const Label& o = l[0];
                if (a == "OnCircle") {
                    out.push_back(make(a, { n0, o }));
                } else if (a == "Tangent" || a == "Chord") {
                    out.push_back(make(a, { ln(n0, n1), o }, { p.x }));
                } else if (a == "Diameter") {
                    out.push_back(make(a, { ln(n0, n1), o }));
                } else if (a == "InscribedAngle") {
                    out.push_back(make(a, { n0, n1, n2, o }, { p.alpha }));
                } else if (a == "CentralAngle") {
                    out.push_back(make(a, { n0, o, n1 }, { p.alpha }));
                }
            } else if (l.size() >= 4 && (a == "Intersection" || a == "Segment")) {
                const std::size_t n = l.size();
                for (std::size_t i = 0; i < n; ++i) {
                    if (a == "Intersection") {
                        // Diagonals from consecutive vertices always cross inside a convex polygon.
                        out.push_back(make(a, { n0, ln(l[i], l[(i + 2) % n]), ln(l[(i + 1) % n], l[(i + 3) % n]) }));
                        if (n == 4 && i == 0) {
                            break;
                        }
                    } else {
                        for (std::size_t j = i + 2; j < n; ++j) {
                            if (!(i == 0 && j == n - 1) && !reg.connected(l[i], l[j])) {
                                out.push_back(make(a, { l[i], l[j] }));
                            }
                        }
                    }
                }
            } else if ((kind == "Sector" || kind == "Arc") && a == "Segment") {
                if (!reg.connected(l[1], l[2])) {
                    out.push_back(make(a, { l[1], l[2] }));
                }
            } else if (kind == "Semicircle" && a == "Midpoint") {
                out.push_back(make(a, { n0, ln(l[0], l[1]) }));
            }
            break;
        }
        }
        return out;
    }

    Statement seed_statement(const GeneratorConfig& c, const SymbolicState& s, Rng& rng)
    {
        std::vector<const CatalogEntry*> kinds;
        std::vector<double> w;
        for (const auto* e : ElementCatalog::instance().in_category(Category::Shape)) {
            const double weight = c.action_weight(GeneratorConfig::kSeedKey, e->name);
            if (weight > 0) {
                kinds.push_back(e);
                w.push_back(weight);
            }
        }
        if (kinds.empty()) {
            throw GeneratorError(GeneratorErrorCode::EmptyActionSpace, "no shape kind has positive weight");
        }
        const Params p = sample_params(c, rng);
        const CatalogEntry* e = kinds[rng.weighted(w)];
        std::size_t n = e->slots.size();
        if (e->variadic()) {
            n = static_cast<std::size_t>(e->min_vertices)
                + rng.below(static_cast<std::uint64_t>(e->max_vertices - e->min_vertices + 1));
        }
        Statement st { e->name, {}, {} };
        for (const auto& l : s.fresh_labels(n)) {
            st.args.emplace_back(l);
        }
        const Rational lengths[] = { p.x, p.y, p.z };
        std::size_t li = 0;
        for (auto kind : e->params) {
            st.params.push_back(kind == ParamKind::Length ? lengths[li++] : p.alpha);
        }
        return st;
    }

    void commit(DslSequence& seq, SymbolicState& s, Statement st, Construction next)
    {
        const int index = static_cast<int>(seq.statements.size()) + 1;
        s.registry.add(st, index);
        s.construction = std::move(next);
        seq.statements.push_back(std::move(st));
    }

} // namespace

std::pair<DslSequence, SymbolicState> initialize(const GeneratorConfig& config, Rng& rng)
{
    if (auto issues = config.problems(); !issues.empty()) {
        throw GeneratorError(GeneratorErrorCode::InvalidConfig, issues.front());
    }
    DslSequence seq;
    SymbolicState state { {}, Construction(config.realize_options()) };
    for (int attempt = 0; attempt < kStepRetries; ++attempt) {
        Statement st = seed_statement(config, state, rng);
        Construction next = state.construction;
        try {
            next.apply(st, 1);
        } catch (const GeometryError&) {
            continue;
        }
        commit(seq, state, std::move(st), std::move(next));
        return { std::move(seq), std::move(state) };
    }
    throw GeneratorError(GeneratorErrorCode::StepExhausted, "seed shape");
}

std::pair<DslSequence, SymbolicState> initialize(const GeneratorConfig& config)
{
    Rng rng(config.seed);
    return initialize(config, rng);
}

StepInfo step(DslSequence& seq, SymbolicState& state, const GeneratorConfig& config, Rng& rng)
{
    const int index = static_cast<int>(seq.statements.size()) + 1;
    StepInfo info {};
    for (int attempt = 1; attempt <= kStepRetries; ++attempt) {
        const Params p = sample_params(config, rng);

        std::optional<Statement> chosen;
        std::string last_element;
        for (int pick = 0; pick < kReselectBound && !chosen; ++pick) {
            std::vector<Category> cats;
            std::vector<double> cw;
            for (auto c : { Category::Point, Category::Line, Category::Angle, Category::Shape }) {
                if (!state.registry.in(c).empty() && config.element_weight(c) > 0) {
                    cats.push_back(c);
                    cw.push_back(config.element_weight(c));
                }
            }
            if (cats.empty()) {
                throw GeneratorError(GeneratorErrorCode::NoLegalAction, "no selectable element");
            }
            const Category cat = cats[rng.weighted(cw)];
            const auto elems = state.registry.in(cat);
            const ElementRecord& e = *elems[rng.below(elems.size())];
            last_element = e.id();

            std::vector<std::string_view> acts;
            std::vector<double> aw;
            std::vector<std::vector<Statement>> opts;
            for (auto a : GeneratorConfig::actions(cat)) {
                const double w = config.action_weight(to_string(cat), a);
                if (w <= 0) {
                    continue;
                }
                auto o = options(a, e, state, p);
                if (!o.empty()) {
                    acts.push_back(a);
                    aw.push_back(w);
                    opts.push_back(std::move(o));
                }
            }
            if (acts.empty()) {
                continue;
            }
            const std::size_t k = rng.weighted(aw);
            chosen = opts[k][rng.below(opts[k].size())];
            info = { cat, e.id(), std::string(acts[k]), attempt };
        }
        if (!chosen) {
            throw GeneratorError(GeneratorErrorCode::NoLegalAction, last_element);
        }

        Construction next = state.construction;
        try {
            next.apply(*chosen, index);
        } catch (const GeometryError&) {
            continue;
        }
        commit(seq, state, std::move(*chosen), std::move(next));
        return info;
    }
    throw GeneratorError(GeneratorErrorCode::StepExhausted, "statement " + std::to_string(index));
}

DslSequence generate(const GeneratorConfig& config)
{
    for (int restart = 0; restart <= kSequenceRestarts; ++restart) {
        Rng rng(restart == 0 ? config.seed : Rng::derive(config.seed, static_cast<std::uint64_t>(restart)));
        try {
            auto [seq, state] = initialize(config, rng);
            for (int i = 0; i < config.step_count; ++i) {
                step(seq, state, config, rng);
            }
            return seq;
        } catch (const GeneratorError& e) {
            if (e.code() != GeneratorErrorCode::StepExhausted) {
                throw;
            }
        }
    }
    throw GeneratorError(GeneratorErrorCode::GenerationExhausted, "seed " + std::to_string(config.seed));
}

} // namespace geosynth
