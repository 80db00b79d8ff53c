#pragma once

#include "geosynth/generator.hpp"
#include "geosynth/informalizer.hpp"
#include "geosynth/qa.hpp"
#include "geosynth/renderer.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace geosynth {

inline constexpr int kSchemaVersion = 1;

enum class Mode { Cot, Caption, Offline };

std::string_view to_string(Mode mode);
std::optional<Mode> mode_from_string(std::string_view s);

struct ExporterSettings {
    int steps_min = 1;
    int steps_max = 4;
    std::size_t qa_cap = 2;
    double eps_match = kEpsMatch;
    /// Exit code 2 when more than this fraction of samples fail.
    double failure_threshold = 0.1;
    /// Unit length is the fitted one times U(lo, hi).
    double unit_scale_min = 0.75;
    double unit_scale_max = 1.0;

    std::vector<std::string> problems() const;
};

/// Everything a run reads from its config file.
struct PipelineConfig {
    GeneratorConfig generator = GeneratorConfig::defaults();
    RenderSpec render;
    LlmEndpointConfig llm;
    ExporterSettings exporter;
    std::optional<std::filesystem::path> prompts_dir;
    std::optional<std::filesystem::path> templates;

    static PipelineConfig from_json(const nlohmann::json& j);
    /// Throws std::invalid_argument on unreadable or malformed files.
    static PipelineConfig from_file(const std::filesystem::path& path);
    nlohmann::json to_json() const;
    std::vector<std::string> problems() const;
    /// Digest of the generator section, stored with every record.
    std::string generator_digest() const;
};

struct QaRecord {
    std::string question;
    double answer = 0;
    /// "", "°" or "²"
    std::string unit;
    std::vector<std::string> cot;
    Validation validation;
    QuestionType question_type = QuestionType::Length;
    std::optional<MeasureQuery> query;
};

struct SampleRecord {
    std::string sample_id;
    std::string symbolic_form;
    std::string image_path;
    std::string caption;
    std::string condition_text;
    std::vector<QaRecord> qa;
    double difficulty = 0;
    int perception_difficulty = 0;
    int reasoning_difficulty = 0;
    std::uint64_t seed = 0;
    std::string generator_config_digest;
    int schema_version = kSchemaVersion;
};

nlohmann::json to_json(const SampleRecord& record);
/// Strict: missing, mistyped or unknown fields throw std::invalid_argument.
SampleRecord record_from_json(const nlohmann::json& j);

/// 0.3 * perception + 0.7 * reasoning, evaluated as (3p + 7r) / 10 so the
/// result is the correctly rounded decimal (3 statements, 4 steps -> 3.7).
double score_difficulty(int perception, int reasoning);
double score_difficulty(const SampleRecord& record);

class MalformedRecord : public std::runtime_error {
public:
    MalformedRecord(std::size_t line, const std::string& detail)
        : std::runtime_error("MalformedRecord(line " + std::to_string(line) + "): " + detail)
        , line_(line)
    {
    }
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

/// Reads records.jsonl; throws MalformedRecord with the 1-based line.
std::vector<SampleRecord> read_records(const std::filesystem::path& path);

struct CorpusStats {
    std::size_t sample_count = 0;
    std::size_t qa_count = 0;
    std::map<int, std::size_t> statement_histogram;
    std::map<std::string, std::size_t> question_types;
    /// Per record by reasoning difficulty: "lt4" and "ge4".
    std::map<std::string, std::size_t> cot_step_buckets;
    double avg_caption_words = 0;
    double avg_caption_chars = 0;
    double avg_condition_words = 0;
    double avg_condition_chars = 0;
    double avg_question_words = 0;
    double avg_cot_steps = 0;
    double avg_difficulty = 0;
    double avg_image_width = 0;
    double avg_image_height = 0;

    nlohmann::json to_json() const;
};

/// Image dimensions are read from files under `root` when given.
CorpusStats compute_stats(
    const std::vector<SampleRecord>& records, const std::optional<std::filesystem::path>& root = std::nullopt);

struct Violation {
    std::string sample_id;
    std::size_t line;
    /// schema, duplicate_id, dsl, realize, constraint, oracle_mismatch,
    /// difficulty, lite_numeral, image_missing
    std::string kind;
    std::string detail;
};

struct ValidationReport {
    std::size_t records = 0;
    std::vector<Violation> violations;

    bool clean() const { return violations.empty(); }
    nlohmann::json to_json() const;
};

ValidationReport validate_corpus(const std::filesystem::path& dir, double eps = kEpsMatch);

/// Everything about one sample that does not depend on QA.
struct SampleDraft {
    std::string sample_id;
    std::uint64_t seed = 0;
    DslSequence sequence;
    Scene scene;
    std::string text_full;
    std::string text_lite;
    RenderOutput image;
};

std::string sample_id(std::size_t index);
std::uint64_t sample_seed(std::uint64_t master_seed, std::size_t index);

/// Generates, realizes, renders and informalizes sample `index`.
SampleDraft draft_sample(const PipelineConfig& config, std::size_t index, const TemplateBank& bank,
    const Rasterizer* rasterizer = nullptr);

struct RunOptions {
    std::filesystem::path out;
    std::size_t count = 0;
    Mode mode = Mode::Offline;
    int jobs = 1;
    /// Required in cot mode.
    LlmClient* llm = nullptr;
    /// When set, each sample is bound to it before QA.
    SimulatedLlmClient* simulator = nullptr;
    const Rasterizer* rasterizer = nullptr;
    /// Progress and per-sample failure messages.
    std::function<void(const std::string&)> log;
};

struct RunSummary {
    std::size_t generated = 0;
    std::size_t resumed = 0;
    std::size_t skipped_no_qa = 0;
    std::size_t failed = 0;
    std::size_t rejected_pairs = 0;
    CorpusStats stats;
    /// 0 success, 2 failures above threshold.
    int exit_code = 0;
};

/// Writes records.jsonl, images/, rejections.jsonl and stats.json under
/// `options.out`, skipping samples whose record and image already exist.
RunSummary run_pipeline(const PipelineConfig& config, const RunOptions& options);

} // namespace geosynth
