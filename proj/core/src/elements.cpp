#include "geosynth/elements.hpp"

#include <algorithm>

namespace geosynth {

std::string ShapeRef::to_string() const
{
    std::string out = kind + "(";
    for (std::size_t i = 0; i < labels.size(); ++i) {
        out += (i ? "," : "") + labels[i].name;
    }
    return out + ")";
}

std::string ShapeRef::joined() const
{
    std::string out;
    for (const auto& l : labels) {
        out += l.name;
    }
    return out;
}

std::optional<ShapeRef> ShapeRef::parse(std::string_view text)
{
    auto open = text.find('(');
    if (open == std::string_view::npos || text.empty() || text.back() != ')') {
        return std::nullopt;
    }
    ShapeRef ref;
    ref.kind = std::string(text.substr(0, open));
    std::string_view body = text.substr(open + 1, text.size() - open - 2);
    while (!body.empty()) {
        auto comma = body.find(',');
        std::string_view item = body.substr(0, comma);
        if (!Label::is_valid(item)) {
            return std::nullopt;
        }
        ref.labels.push_back(Label { std::string(item) });
        if (comma == std::string_view::npos) {
            break;
        }
        body.remove_prefix(comma + 1);
    }
    if (ref.kind.empty() || ref.labels.empty()) {
        return std::nullopt;
    }
    return ref;
}

std::string ElementRecord::id() const
{
    switch (category) {
    case Category::Point:
        return labels.front().name;
    case Category::Line:
        return labels[0].name + labels[1].name;
    case Category::Angle:
        return "∠" + labels[0].name + labels[1].name + labels[2].name;
    case Category::Shape:
        return ShapeRef { shape_kind, labels }.to_string();
    }
    return {};
}

namespace {

    const Label& lbl(const Statement& st, std::size_t i) { return std::get<Label>(st.args[i]); }
    const LineRef& line(const Statement& st, std::size_t i) { return std::get<LineRef>(st.args[i]); }

    void polygon(Introduced& out, const Statement& st)
    {
        const auto labels = st.labels();
        const std::size_t n = labels.size();
        out.points = labels;
        for (std::size_t i = 0; i < n; ++i) {
            out.lines.emplace_back(labels[i], labels[(i + 1) % n]);
        }
        // Interior angle at every vertex; for triangles this yields ABC, BCA, CAB.
        for (std::size_t i = 0; i < n; ++i) {
            out.angles.push_back({ labels[i], labels[(i + 1) % n], labels[(i + 2) % n] });
        }
        out.shapes.push_back(ShapeRef { st.constructor, labels });
    }

} // namespace

Introduced introduced_elements(const Statement& st, const std::set<Label>& defined)
{
    Introduced out;
    const CatalogEntry* e = st.entry();
    if (!e) {
        return out;
    }
    switch (e->rule) {
    case Rule::Free:
        out.points = { lbl(st, 0) };
        out.lines = { { lbl(st, 1), lbl(st, 0) }, { lbl(st, 2), lbl(st, 0) } };
        break;
    case Rule::Midpoint:
    case Rule::OnLine:
        out.points = { lbl(st, 0) };
        out.lines = { { line(st, 1).from, line(st, 1).to } };
        break;
    case Rule::Foot:
    case Rule::Reflection:
        out.points = { lbl(st, 0) };
        out.lines = { { line(st, 2).from, line(st, 2).to }, { lbl(st, 1), lbl(st, 0) } };
        break;
    case Rule::Intersection:
        out.points = { lbl(st, 0) };
        out.lines = { { line(st, 1).from, line(st, 1).to }, { line(st, 2).from, line(st, 2).to } };
        break;
    case Rule::OnCircle:
    case Rule::Centroid:
    case Rule::Circumcenter:
    case Rule::Incenter:
        out.points = { lbl(st, 0) };
        break;
    case Rule::Extension:
        out.points = { lbl(st, 0) };
        out.lines = { { line(st, 1).from, line(st, 1).to }, { line(st, 1).to, lbl(st, 0) } };
        break;
    case Rule::Rotation:
        out.points = { lbl(st, 0) };
        out.lines = { { lbl(st, 2), lbl(st, 1) }, { lbl(st, 2), lbl(st, 0) } };
        out.angles = { { lbl(st, 1), lbl(st, 2), lbl(st, 0) } };
        break;
    case Rule::TangentPoint:
        out.points = { lbl(st, 0) };
        out.lines = { { lbl(st, 1), lbl(st, 0) }, { lbl(st, 2), lbl(st, 0) } };
        out.angles = { { lbl(st, 2), lbl(st, 0), lbl(st, 1) } };
        break;
    case Rule::Segment:
        out.lines = { { lbl(st, 0), lbl(st, 1) } };
        break;
    case Rule::Para:
    case Rule::Perp:
        out.points = { line(st, 0).to };
        out.lines = { { line(st, 1).from, line(st, 1).to }, { line(st, 0).from, line(st, 0).to } };
        break;
    case Rule::Tangent:
        out.points = { line(st, 0).from, line(st, 0).to };
        out.lines = { { lbl(st, 1), line(st, 0).from }, { line(st, 0).from, line(st, 0).to } };
        out.angles = { { lbl(st, 1), line(st, 0).from, line(st, 0).to } };
        break;
    case Rule::Chord:
    case Rule::Diameter:
        out.points = { line(st, 0).from, line(st, 0).to };
        out.lines = { { line(st, 0).from, line(st, 0).to } };
        break;
    case Rule::AngleBisector: {
        const auto& a = line(st, 1).from;
        const auto& c = line(st, 1).to;
        const auto& b = line(st, 0).from;
        const auto& d = line(st, 0).to;
        out.points = { d };
        out.lines = { { a, c }, { b, d } };
        out.angles = { { a, b, d }, { d, b, c } };
        break;
    }
    case Rule::Angle:
        out.points = { lbl(st, 2) };
        out.lines = { { lbl(st, 1), lbl(st, 0) }, { lbl(st, 1), lbl(st, 2) } };
        out.angles = { { lbl(st, 0), lbl(st, 1), lbl(st, 2) } };
        break;
    case Rule::InscribedAngle:
        out.points = { lbl(st, 0), lbl(st, 1), lbl(st, 2) };
        out.lines = { { lbl(st, 1), lbl(st, 0) }, { lbl(st, 1), lbl(st, 2) } };
        out.angles = { { lbl(st, 0), lbl(st, 1), lbl(st, 2) } };
        break;
    case Rule::CentralAngle:
        out.points = { lbl(st, 0), lbl(st, 2) };
        out.lines = { { lbl(st, 1), lbl(st, 0) }, { lbl(st, 1), lbl(st, 2) } };
        out.angles = { { lbl(st, 0), lbl(st, 1), lbl(st, 2) } };
        break;
    case Rule::Triangle:
    case Rule::RightTriangle:
    case Rule::IsoscelesTriangle:
    case Rule::EquilateralTriangle:
    case Rule::Square:
    case Rule::Rectangle:
    case Rule::Parallelogram:
    case Rule::Rhombus:
    case Rule::Trapezoid:
    case Rule::RegularPolygon:
        polygon(out, st);
        break;
    case Rule::Circle:
        if (!defined.contains(lbl(st, 0))) {
            out.points = { lbl(st, 0) };
        }
        out.shapes = { ShapeRef { "Circle", { lbl(st, 0) } } };
        break;
    case Rule::Semicircle:
        out.points = { lbl(st, 0), lbl(st, 1) };
        out.lines = { { lbl(st, 0), lbl(st, 1) } };
        out.shapes = { ShapeRef { "Semicircle", st.labels() } };
        break;
    case Rule::Sector:
        out.points = st.labels();
        out.lines = { { lbl(st, 0), lbl(st, 1) }, { lbl(st, 0), lbl(st, 2) } };
        out.angles = { { lbl(st, 1), lbl(st, 0), lbl(st, 2) } };
        out.shapes = { ShapeRef { "Sector", st.labels() } };
        break;
    case Rule::Arc:
        out.points = st.labels();
        out.angles = { { lbl(st, 1), lbl(st, 0), lbl(st, 2) } };
        out.shapes = { ShapeRef { "Arc", st.labels() } };
        break;
    }
    return out;
}

namespace {

    std::pair<Label, Label> line_key(const Label& a, const Label& b)
    {
        return a < b ? std::pair { a, b } : std::pair { b, a };
    }

    std::array<Label, 3> angle_key(const Label& p, const Label& v, const Label& r)
    {
        return p < r ? std::array { p, v, r } : std::array { r, v, p };
    }

} // namespace

ElementRegistry::ElementRegistry(const DslSequence& sequence)
{
    for (std::size_t i = 0; i < sequence.statements.size(); ++i) {
        add(sequence.statements[i], static_cast<int>(i) + 1);
    }
}

void ElementRegistry::add(const Statement& st, int index)
{
    Introduced intro = introduced_elements(st, point_set_);
    for (auto& p : intro.points) {
        if (point_set_.insert(p).second) {
            elements_.push_back({ Category::Point, { p }, "", index });
        }
    }
    for (auto& [a, b] : intro.lines) {
        if (a != b && line_set_.insert(line_key(a, b)).second) {
            elements_.push_back({ Category::Line, { a, b }, "", index });
        }
    }
    for (auto& ang : intro.angles) {
        if (angle_set_.insert(angle_key(ang[0], ang[1], ang[2])).second) {
            elements_.push_back({ Category::Angle, { ang[0], ang[1], ang[2] }, "", index });
        }
    }
    for (auto& s : intro.shapes) {
        elements_.push_back({ Category::Shape, s.labels, s.kind, index });
    }
}

std::vector<const ElementRecord*> ElementRegistry::in(Category category) const
{
    std::vector<const ElementRecord*> out;
    for (const auto& e : elements_) {
        if (e.category == category) {
            out.push_back(&e);
        }
    }
    return out;
}

bool ElementRegistry::has_circle(const Label& center) const
{
    return std::any_of(elements_.begin(), elements_.end(), [&](const ElementRecord& e) {
        return e.category == Category::Shape && e.shape_kind == "Circle" && e.labels.front() == center;
    });
}

bool ElementRegistry::connected(const Label& a, const Label& b) const
{
    return line_set_.contains(line_key(a, b));
}

bool ElementRegistry::has_angle(const Label& p, const Label& v, const Label& r) const
{
    return angle_set_.contains(angle_key(p, v, r));
}

const ElementRecord* ElementRegistry::find_shape(const ShapeRef& shape) const
{
    for (const auto& e : elements_) {
        if (e.category == Category::Shape && e.shape_kind == shape.kind && e.labels == shape.labels) {
            return &e;
        }
    }
    return nullptr;
}

std::vector<Label> ElementRegistry::points() const
{
    std::vector<Label> out;
    for (const auto* e : in(Category::Point)) {
        out.push_back(e->labels.front());
    }
    return out;
}

std::vector<std::pair<Label, Label>> ElementRegistry::lines() const
{
    std::vector<std::pair<Label, Label>> out;
    for (const auto* e : in(Category::Line)) {
        out.emplace_back(e->labels[0], e->labels[1]);
    }
    return out;
}

std::vector<std::array<Label, 3>> ElementRegistry::angles() const
{
    std::vector<std::array<Label, 3>> out;
    for (const auto* e : in(Category::Angle)) {
        out.push_back({ e->labels[0], e->labels[1], e->labels[2] });
    }
    return out;
}

std::vector<ShapeRef> ElementRegistry::shapes() const
{
    std::vector<ShapeRef> out;
    for (const auto* e : in(Category::Shape)) {
        out.push_back(ShapeRef { e->shape_kind, e->labels });
    }
    return out;
}

std::string shape_noun(const ShapeRef& shape)
{
    const std::string& k = shape.kind;
    if (k == "Triangle" || k == "RightTriangle" || k == "IsoscelesTriangle" || k == "EquilateralTriangle") {
        return "triangle";
    }
    if (k == "Square") {
        return "square";
    }
    if (k == "Rectangle") {
        return "rectangle";
    }
    if (k == "Parallelogram") {
        return "parallelogram";
    }
    if (k == "Rhombus") {
        return "rhombus";
    }
    if (k == "Trapezoid") {
        return "trapezoid";
    }
    if (k == "RegularPolygon") {
        switch (shape.labels.size()) {
        case 5:
            return "regular pentagon";
        case 6:
            return "regular hexagon";
        case 7:
            return "regular heptagon";
        case 8:
            return "regular octagon";
        default:
            return "regular polygon";
        }
    }
    if (k == "Circle") {
        return "circle";
    }
    if (k == "Semicircle") {
        return "semicircle";
    }
    if (k == "Sector") {
        return "sector";
    }
    if (k == "Arc") {
        return "arc";
    }
    return "shape";
}

} // namespace geosynth
