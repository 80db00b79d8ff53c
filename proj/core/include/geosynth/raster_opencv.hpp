#pragma once

#include "geosynth/renderer.hpp"

namespace geosynth {

/// Raster backend drawing with OpenCV's anti-aliased primitives.
/// Hershey fonts lack a degree glyph, so "°" is drawn as a small ring.
class OpenCvRasterizer : public Rasterizer {
public:
    std::vector<std::uint8_t> png(const Drawing& drawing) const override;
};

} // namespace geosynth
