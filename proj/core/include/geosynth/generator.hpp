#pragma once

#include "geosynth/dsl.hpp"
#include "geosynth/elements.hpp"
#include "geosynth/realizer.hpp"
#include "geosynth/rng.hpp"

#include <nlohmann/json_fwd.hpp>

#include <cstdint>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace geosynth {

struct GeneratorConfig {
    int step_count = 2;
    /// category ("point", "line", "angle", "shape") -> action id -> weight.
    /// The extra key "seed" weights the shape kinds of the first statement.
    std::map<std::string, std::map<std::string, double>> action_weights;
    /// category -> weight.
    std::map<std::string, double> element_weights;
    double length_min = 1;
    double length_max = 5;
    double length_step = 1;
    double angle_min = 15;
    double angle_max = 165;
    double angle_grid = 15;
    double special_angle_boost = 3;
    double scale_factor = 1;
    std::uint64_t seed = 0;

    /// Every action and every category at weight 1.
    static GeneratorConfig defaults();

    /// Action ids available to elements of a category, in fixed order.
    static std::span<const std::string_view> actions(Category category);
    static constexpr std::string_view kSeedKey = "seed";

    double action_weight(std::string_view category, std::string_view action) const;
    double element_weight(Category category) const;

    /// Empty iff the config is usable.
    std::vector<std::string> problems() const;

    /// Sampling grids implied by the ranges.
    std::vector<Rational> length_values() const;
    std::vector<Rational> angle_values() const;
    std::vector<double> angle_weights() const;

    /// Options the generator realizes with: minimum separation
    /// 0.25 * scale * l_min, extent at most 8 * scale * l_max.
    RealizeOptions realize_options() const;
};

/// Replaces fields present in `j`; a category map under "action_weights"
/// replaces that category wholesale (absent actions get weight 0).
/// Throws std::invalid_argument on unknown keys or wrong types.
void apply_json(GeneratorConfig& config, const nlohmann::json& j);
nlohmann::json to_json(const GeneratorConfig& config);

enum class GeneratorErrorCode { InvalidConfig, EmptyActionSpace, NoLegalAction, StepExhausted, GenerationExhausted };

std::string_view to_string(GeneratorErrorCode code);

class GeneratorError : public std::runtime_error {
public:
    GeneratorError(GeneratorErrorCode code, std::string detail);
    GeneratorErrorCode code() const { return code_; }
    const std::string& detail() const { return detail_; }

private:
    GeneratorErrorCode code_;
    std::string detail_;
};

struct SymbolicState {
    /// Elements introduced so far, in insertion order.
    ElementRegistry registry;
    /// Realization of the sequence so far, used to reject degenerate steps.
    Construction construction;

    /// Next `count` unused labels: A..Z, then A1..Z1, A2...
    std::vector<Label> fresh_labels(std::size_t count) const;
};

/// Trace of one step, for tests and diagnostics.
struct StepInfo {
    Category category;
    std::string element;
    std::string action;
    int attempts = 0;
};

std::pair<DslSequence, SymbolicState> initialize(const GeneratorConfig& config, Rng& rng);
std::pair<DslSequence, SymbolicState> initialize(const GeneratorConfig& config);

/// Appends exactly one statement. Throws NoLegalAction after bounded
/// re-selection, StepExhausted after 20 degenerate resamples.
StepInfo step(DslSequence& sequence, SymbolicState& state, const GeneratorConfig& config, Rng& rng);

/// Seed statement plus `config.step_count` steps, restarting from derived
/// seeds up to 5 times.
DslSequence generate(const GeneratorConfig& config);

} // namespace geosynth
