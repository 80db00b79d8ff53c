#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace geosynth {

enum class Category { Point, Line, Angle, Shape };

std::string_view to_string(Category c);
std::optional<Category> category_from_string(std::string_view s);

/// Role of one argument position of a constructor.
enum class Slot {
    NewPoint,    ///< label introduced by this statement
    Point,       ///< previously defined point
    CenterOrNew, ///< circle center: fresh or previously defined point
    Circle,      ///< defined point that is the center of a defined circle
    Line,        ///< `Line(X,Y)` over two defined points
    LineFromNew, ///< `Line(X,Y)`: X defined, Y introduced
    LineNewNew,  ///< `Line(X,Y)`: both introduced
    Vertices,    ///< variadic run of introduced points (regular polygons)
};

enum class ParamKind { Length, Angle };

/// Where a statement's numbers are written in canonical text.
enum class ParamStyle {
    Tuple,  ///< `Name(args)=(p1,p2)`
    Scalar, ///< `Name(args)=p`
    Inline, ///< `Name(args,p)`
};

/// One realization rule per catalog entry.
enum class Rule {
    // points
    Free, Midpoint, Foot, Intersection, OnLine, OnCircle, Extension,
    Reflection, Rotation, Centroid, Circumcenter, Incenter, TangentPoint,
    // lines
    Segment, Para, Perp, Tangent, Chord, Diameter, AngleBisector,
    // angles
    Angle, InscribedAngle, CentralAngle,
    // shapes
    Triangle, RightTriangle, IsoscelesTriangle, EquilateralTriangle, Square,
    Rectangle, Parallelogram, Rhombus, Trapezoid, RegularPolygon, Circle,
    Semicircle, Sector, Arc,
};

struct CatalogEntry {
    std::string name;
    Category category;
    std::vector<Slot> slots;
    std::vector<ParamKind> params;
    ParamStyle style;
    Rule rule;
    /// Template ids the template bank must provide (at least two).
    std::vector<std::string> template_ids;
    /// Vertex count bounds for a `Vertices` slot.
    int min_vertices = 0;
    int max_vertices = 0;

    bool variadic() const { return min_vertices > 0; }
};

/// The fixed Geo-DSL constructor catalog: 13 point, 7 line, 3 angle and
/// 14 shape constructors.
class ElementCatalog {
public:
    static const ElementCatalog& instance();

    const CatalogEntry* find(std::string_view name) const;
    std::span<const CatalogEntry> entries() const { return entries_; }
    std::vector<const CatalogEntry*> in_category(Category c) const;

private:
    ElementCatalog();
    std::vector<CatalogEntry> entries_;
};

} // namespace geosynth
