#pragma once

#include "geosynth/scene.hpp"

namespace geosynth {

struct RealizeOptions {
    /// Points closer than this are rejected as coincident.
    double min_separation = kDeltaMin;
    /// Largest allowed bounding-box diagonal, in abstract units.
    double max_extent = std::numeric_limits<double>::infinity();
};

/// Statement-by-statement realization in the canonical (unrotated) frame.
/// The generator uses this to test candidate statements one at a time.
class Construction {
public:
    explicit Construction(RealizeOptions options = {});

    /// Realizes one statement. On GeometryError the construction is unchanged.
    void apply(const Statement& statement, int statement_index);

    const Scene& scene() const { return scene_; }

    /// Copy of the scene rotated about its centroid.
    Scene finish(double unit_length, double rotation_deg) const;

private:
    RealizeOptions options_;
    Scene scene_;
};

/// Realizes a validated sequence. Throws GeometryError(Degenerate|Infeasible).
Scene realize(const DslSequence& sequence, double unit_length = 1.0, double rotation_deg = 0.0,
    const RealizeOptions& options = {});

struct ConstraintResidual {
    int statement;
    std::string constraint;
    double residual;
};

/// Every declared constraint of every statement, re-evaluated from the scene's
/// coordinates. Residuals are absolute (units or degrees).
std::vector<ConstraintResidual> constraint_residuals(const DslSequence& sequence, const Scene& scene);

/// Residuals above `eps`, plus any pair of points closer than kDeltaMin.
std::vector<ConstraintResidual> check_constraints(
    const DslSequence& sequence, const Scene& scene, double eps = kEpsGeo);

} // namespace geosynth
