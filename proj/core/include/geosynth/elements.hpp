#pragma once

#include "geosynth/dsl.hpp"

#include <array>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace geosynth {

/// Shape identity: constructor plus labels, e.g. `Triangle(A,B,C)` or `Circle(O)`.
struct ShapeRef {
    std::string kind;
    std::vector<Label> labels;

    std::string to_string() const;
    /// Concatenated labels, as used in prose ("ABC").
    std::string joined() const;
    static std::optional<ShapeRef> parse(std::string_view text);
    friend auto operator<=>(const ShapeRef&, const ShapeRef&) = default;
};

/// Registered element: a point, a drawn segment, a declared angle or a shape.
struct ElementRecord {
    Category category;
    /// 1 label for points, 2 for segments, 3 (arm, vertex, arm) for angles,
    /// the shape's labels for shapes.
    std::vector<Label> labels;
    std::string shape_kind;
    /// 1-based index of the defining statement.
    int statement = 0;

    std::string id() const;
};

/// Elements introduced by a statement, given the elements already defined.
struct Introduced {
    std::vector<Label> points;
    std::vector<std::pair<Label, Label>> lines;
    std::vector<std::array<Label, 3>> angles;
    std::vector<ShapeRef> shapes;
};

Introduced introduced_elements(const Statement& statement, const std::set<Label>& defined_points);

/// Insertion-ordered registry of every element defined so far.
class ElementRegistry {
public:
    ElementRegistry() = default;
    explicit ElementRegistry(const DslSequence& sequence);

    /// Registers what `statement` introduces. Segments and angles that are
    /// already registered are not duplicated.
    void add(const Statement& statement, int statement_index);

    const std::vector<ElementRecord>& elements() const { return elements_; }
    std::vector<const ElementRecord*> in(Category category) const;

    const std::set<Label>& point_set() const { return point_set_; }
    bool has_point(const Label& l) const { return point_set_.contains(l); }
    bool has_circle(const Label& center) const;
    bool connected(const Label& a, const Label& b) const;
    bool has_angle(const Label& p, const Label& vertex, const Label& r) const;
    const ElementRecord* find_shape(const ShapeRef& shape) const;

    std::vector<Label> points() const;
    std::vector<std::pair<Label, Label>> lines() const;
    std::vector<std::array<Label, 3>> angles() const;
    std::vector<ShapeRef> shapes() const;

private:
    std::vector<ElementRecord> elements_;
    std::set<Label> point_set_;
    std::set<std::pair<Label, Label>> line_set_;
    std::set<std::array<Label, 3>> angle_set_;
};

/// Human name of a shape kind for prose ("triangle", "regular hexagon").
std::string shape_noun(const ShapeRef& shape);

} // namespace geosynth
