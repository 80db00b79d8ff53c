#pragma once

#include "geosynth/dsl.hpp"
#include "geosynth/rng.hpp"
#include "geosynth/scene.hpp"

#include <nlohmann/json_fwd.hpp>

#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace geosynth {

class MissingTemplate : public std::runtime_error {
public:
    explicit MissingTemplate(const std::string& constructor)
        : std::runtime_error("MissingTemplate(" + constructor + ")")
        , constructor_(constructor)
    {
    }
    const std::string& constructor() const { return constructor_; }

private:
    std::string constructor_;
};

/// Sentence templates per constructor.
///
/// Slots: {a0}, {a1}, ... are the statement's labels with `Line(X,Y)`
/// flattened; {p0}, {p1}, ... its parameters (angles get a degree sign);
/// {all} is every label concatenated and {polygon} the shape noun
/// ("regular hexagon"). A template without "lite" uses "full" for both.
class TemplateBank {
public:
    struct Template {
        std::string id;
        std::string full;
        std::string lite;
    };

    static const TemplateBank& builtin();
    static TemplateBank from_json(const nlohmann::json& j);
    static TemplateBank from_file(const std::filesystem::path& path);

    /// Throws MissingTemplate.
    const std::vector<Template>& templates(const std::string& constructor) const;
    const std::string& figure_sentence() const { return figure_sentence_; }

    /// Coverage and slot problems; empty for a usable bank.
    std::vector<std::string> problems() const;

    std::string instantiate(const Statement& statement, const Template& t, bool lite) const;

private:
    std::map<std::string, std::vector<Template>> entries_;
    std::string figure_sentence_;
};

/// Template index used for statement `index` (1-based).
std::size_t template_choice(const Rng& rng, int index, std::size_t count);

std::string to_text_full(const DslSequence& sequence, const Scene& scene, const Rng& rng,
    const TemplateBank& bank = TemplateBank::builtin());

/// Statements whose parameters are annotated in the scene use their lite
/// sentence; a fixed figure-reference sentence closes the text.
std::string to_text_lite(const DslSequence& sequence, const Scene& scene, const Rng& rng,
    const TemplateBank& bank = TemplateBank::builtin());

/// Numeric tokens of `text`: digit runs (with an optional decimal part or
/// "/denominator") that are not glued to a letter, so the label A1 has none.
std::vector<double> numerals(std::string_view text);

} // namespace geosynth
