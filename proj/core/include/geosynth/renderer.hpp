#pragma once

#include "geosynth/scene.hpp"

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace geosynth {

struct Palette {
    std::string figure = "#000000";
    std::string annotation = "#000000";
    std::string background = "#ffffff";
};

struct RenderSpec {
    int width = 724;
    int height = 724;
    double margin_frac = 0.08;
    int stroke_width_px = 2;
    int font_size_px = 18;
    Palette palette;
    bool raster = false;

    /// Empty iff usable.
    std::vector<std::string> problems() const;
};

/// Axis-aligned box in pixel space (y down).
struct Box {
    double x0, y0, x1, y1;
    bool overlaps(const Box& o) const { return x0 < o.x1 && o.x0 < x1 && y0 < o.y1 && o.y0 < y1; }
};

enum class PrimitiveKind { Line, Circle, Arc, Polyline, Text, Dot };

/// Drawing primitive in pixel space. Arcs run counterclockwise as seen on
/// screen from `start_deg` through `sweep_deg`, angles measured with y up.
struct Primitive {
    PrimitiveKind kind;
    std::vector<Vec2> pts;
    double radius = 0;
    double start_deg = 0;
    double sweep_deg = 0;
    std::string text;
    bool dashed = false;
    bool annotation = false;
};

/// One semantic group; `cls` is one of figure, point, length-label,
/// angle-label, radius-label, right-angle-mark, tick-mark.
struct Group {
    std::string cls;
    std::string key;
    std::vector<Primitive> items;
};

struct Drawing {
    int width = 0;
    int height = 0;
    int stroke_width = 2;
    int font_size = 18;
    Palette palette;
    std::vector<Group> groups;
    /// Bounding boxes of every text label, in placement order.
    std::vector<Box> label_boxes;

    std::size_t count(std::string_view cls) const;
};

/// Rasterizes a drawing to PNG bytes of exactly width x height pixels.
class Rasterizer {
public:
    virtual ~Rasterizer() = default;
    virtual std::vector<std::uint8_t> png(const Drawing& drawing) const = 0;
};

struct RenderOutput {
    std::string svg;
    std::optional<std::vector<std::uint8_t>> png;
};

enum class RenderErrorCode { CanvasOverflow, RasterBackendUnavailable, InvalidSpec };

class RenderError : public std::runtime_error {
public:
    RenderError(RenderErrorCode code, const std::string& what)
        : std::runtime_error(what)
        , code_(code)
    {
    }
    RenderErrorCode code() const { return code_; }

private:
    RenderErrorCode code_;
};

/// Figure extent in abstract units (points, circles, arcs).
Box figure_bounds(const Scene& scene);

/// Largest unit length at which the figure fits the canvas minus margins.
double fit_unit_length(const Scene& scene, const RenderSpec& spec);

/// Lays out the scene at `scene.unit_length`. Throws RenderError(CanvasOverflow).
Drawing layout(const Scene& scene, const RenderSpec& spec);

std::string to_svg(const Drawing& drawing);

/// Throws RenderError(RasterBackendUnavailable) when spec.raster is set and
/// no rasterizer is given.
RenderOutput render(const Scene& scene, const RenderSpec& spec, const Rasterizer* rasterizer = nullptr);

/// Width and height from a PNG header, or nullopt.
std::optional<std::pair<int, int>> png_dimensions(const std::vector<std::uint8_t>& bytes);

} // namespace geosynth
