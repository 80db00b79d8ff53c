#include "geosynth/exporter.hpp"

#include "geosynth/digest.hpp"
#include "geosynth/realizer.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <mutex>
#include <numeric>
#include <regex>
#include <set>
#include <sstream>
#include <thread>

namespace geosynth {

using nlohmann::json;
namespace fs = std::filesystem;

std::string_view to_string(Mode mode)
{
    switch (mode) {
    case Mode::Cot:
        return "cot";
    case Mode::Caption:
        return "caption";
    case Mode::Offline:
        return "offline";
    }
    return "?";
}

std::optional<Mode> mode_from_string(std::string_view s)
{
    for (auto m : { Mode::Cot, Mode::Caption, Mode::Offline }) {
        if (to_string(m) == s) {
            return m;
        }
    }
    return std::nullopt;
}

std::vector<std::string> ExporterSettings::problems() const
{
    std::vector<std::string> out;
    if (steps_min < 1 || steps_max < steps_min) {
        out.push_back("exporter.steps must satisfy 1 <= min <= max");
    }
    if (qa_cap < 1) {
        out.push_back("exporter.qa_cap must be at least 1");
    }
    if (!(eps_match > 0)) {
        out.push_back("exporter.eps_match must be positive");
    }
    if (!(failure_threshold >= 0 && failure_threshold <= 1)) {
        out.push_back("exporter.failure_threshold must lie in [0, 1]");
    }
    if (!(unit_scale_min > 0 && unit_scale_min <= unit_scale_max && unit_scale_max <= 1)) {
        out.push_back("exporter.unit_scale must satisfy 0 < min <= max <= 1");
    }
    return out;
}

// ---------------------------------------------------------------------------
// Config

namespace {

    template <typename F>
    void each_key(const json& j, std::string_view section, F&& f)
    {
        if (!j.is_object()) {
            throw std::invalid_argument(std::string(section) + " must be an object");
        }
        for (const auto& [key, v] : j.items()) {
            if (!f(key, v)) {
                throw std::invalid_argument(fmt::format("unknown {} config key: {}", section, key));
            }
        }
    }

} // namespace

PipelineConfig PipelineConfig::from_json(const json& j)
{
    PipelineConfig c;
    try {
        each_key(j, "top-level", [&](const std::string& key, const json& v) {
            if (key == "generator") {
                apply_json(c.generator, v);
            } else if (key == "render") {
                each_key(v, "render", [&](const std::string& k, const json& x) {
                    if (k == "width") {
                        c.render.width = x.get<int>();
                    } else if (k == "height") {
                        c.render.height = x.get<int>();
                    } else if (k == "margin_frac") {
                        c.render.margin_frac = x.get<double>();
                    } else if (k == "stroke_width_px") {
                        c.render.stroke_width_px = x.get<int>();
                    } else if (k == "font_size_px") {
                        c.render.font_size_px = x.get<int>();
                    } else if (k == "raster") {
                        c.render.raster = x.get<bool>();
                    } else {
                        return false;
                    }
                    return true;
                });
            } else if (key == "llm") {
                auto& l = c.llm;
                each_key(v, "llm", [&](const std::string& k, const json& x) {
                    if (k == "base_url") {
                        l.base_url = x.get<std::string>();
                    } else if (k == "model_name_search") {
                        l.model_name_search = x.get<std::string>();
                    } else if (k == "model_name_validate") {
                        l.model_name_validate = x.get<std::string>();
                    } else if (k == "api_key_env") {
                        l.api_key_env = x.get<std::string>();
                    } else if (k == "timeout_s") {
                        l.timeout_s = x.get<double>();
                    } else if (k == "max_concurrent") {
                        l.max_concurrent = x.get<int>();
                    } else if (k == "max_attempts") {
                        l.max_attempts = x.get<int>();
                    } else if (k == "backoff_ms") {
                        l.backoff_ms = x.get<int>();
                    } else {
                        return false;
                    }
                    return true;
                });
            } else if (key == "exporter") {
                auto& e = c.exporter;
                each_key(v, "exporter", [&](const std::string& k, const json& x) {
                    if (k == "steps") {
                        e.steps_min = x.at(0).get<int>();
                        e.steps_max = x.at(1).get<int>();
                    } else if (k == "qa_cap") {
                        e.qa_cap = x.get<std::size_t>();
                    } else if (k == "eps_match") {
                        e.eps_match = x.get<double>();
                    } else if (k == "failure_threshold") {
                        e.failure_threshold = x.get<double>();
                    } else if (k == "unit_scale") {
                        e.unit_scale_min = x.at(0).get<double>();
                        e.unit_scale_max = x.at(1).get<double>();
                    } else {
                        return false;
                    }
                    return true;
                });
            } else if (key == "prompts_dir") {
                c.prompts_dir = fs::path(v.get<std::string>());
            } else if (key == "templates") {
                c.templates = fs::path(v.get<std::string>());
            } else {
                return false;
            }
            return true;
        });
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("config: ") + e.what());
    }
    return c;
}

PipelineConfig PipelineConfig::from_file(const fs::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw std::invalid_argument("cannot read config " + path.string());
    }
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        throw std::invalid_argument(path.string() + ": " + e.what());
    }
    auto c = from_json(j);
    // Relative asset paths are relative to the config file.
    const auto base = path.parent_path();
    if (c.prompts_dir && c.prompts_dir->is_relative()) {
        c.prompts_dir = base / *c.prompts_dir;
    }
    if (c.templates && c.templates->is_relative()) {
        c.templates = base / *c.templates;
    }
    return c;
}

json PipelineConfig::to_json() const
{
    json j = {
        { "generator", geosynth::to_json(generator) },
        { "render",
            { { "width", render.width }, { "height", render.height }, { "margin_frac", render.margin_frac },
                { "stroke_width_px", render.stroke_width_px }, { "font_size_px", render.font_size_px },
                { "raster", render.raster } } },
        { "llm",
            { { "base_url", llm.base_url }, { "model_name_search", llm.model_name_search },
                { "model_name_validate", llm.model_name_validate }, { "api_key_env", llm.api_key_env },
                { "timeout_s", llm.timeout_s }, { "max_concurrent", llm.max_concurrent },
                { "max_attempts", llm.max_attempts }, { "backoff_ms", llm.backoff_ms } } },
        { "exporter",
            { { "steps", { exporter.steps_min, exporter.steps_max } }, { "qa_cap", exporter.qa_cap },
                { "eps_match", exporter.eps_match }, { "failure_threshold", exporter.failure_threshold },
                { "unit_scale", { exporter.unit_scale_min, exporter.unit_scale_max } } } },
    };
    if (prompts_dir) {
        j["prompts_dir"] = prompts_dir->string();
    }
    if (templates) {
        j["templates"] = templates->string();
    }
    return j;
}

std::vector<std::string> PipelineConfig::problems() const
{
    std::vector<std::string> out = generator.problems();
    auto add = [&](std::vector<std::string> v) { out.insert(out.end(), v.begin(), v.end()); };
    add(render.problems());
    add(llm.problems());
    add(exporter.problems());
    return out;
}

std::string PipelineConfig::generator_digest() const { return sha256_hex(geosynth::to_json(generator).dump()); }

// ---------------------------------------------------------------------------
// Records

namespace {

    std::string unit_of(const std::optional<MeasureQuery>& q, QuestionType t)
    {
        if (q) {
            switch (q->kind) {
            case MeasureKind::Angle:
                return "°";
            case MeasureKind::Area:
                return "²";
            default:
                return "";
            }
        }
        return t == QuestionType::Angle ? "°" : "";
    }

    QaRecord to_record(const QaVerified& v)
    {
        return QaRecord { v.question, v.answer, unit_of(v.query, v.type), v.cot, v.validation, v.type, v.query };
    }

    json qa_to_json(const QaRecord& q)
    {
        json validation = { { "llm_cross", q.validation.llm_cross }, { "oracle", q.validation.oracle },
            { "oracle_value", q.validation.oracle_value ? json(*q.validation.oracle_value) : json(nullptr) } };
        return json {
            { "question", q.question },
            { "answer", q.answer },
            { "unit", q.unit },
            { "cot", q.cot },
            { "validation", validation },
            { "question_type", to_string(q.question_type) },
            { "query", q.query ? json(q.query->to_string()) : json(nullptr) },
        };
    }

    void expect_keys(const json& j, std::initializer_list<std::string_view> keys, std::string_view what)
    {
        if (!j.is_object()) {
            throw std::invalid_argument(std::string(what) + " is not an object");
        }
        for (auto k : keys) {
            if (!j.contains(k)) {
                throw std::invalid_argument(fmt::format("{} lacks field {}", what, k));
            }
        }
        for (const auto& [k, v] : j.items()) {
            if (std::find(keys.begin(), keys.end(), k) == keys.end()) {
                throw std::invalid_argument(fmt::format("{} has unknown field {}", what, k));
            }
        }
    }

    QaRecord qa_from_json(const json& j)
    {
        expect_keys(j, { "question", "answer", "unit", "cot", "validation", "question_type", "query" }, "qa item");
        QaRecord q;
        q.question = j["question"].get<std::string>();
        q.answer = j["answer"].get<double>();
        q.unit = j["unit"].get<std::string>();
        q.cot = j["cot"].get<std::vector<std::string>>();
        const json& v = j["validation"];
        expect_keys(v, { "llm_cross", "oracle", "oracle_value" }, "validation");
        q.validation.llm_cross = v["llm_cross"].get<bool>();
        q.validation.oracle = v["oracle"].get<bool>();
        if (!v["oracle_value"].is_null()) {
            q.validation.oracle_value = v["oracle_value"].get<double>();
        }
        auto type = question_type_from_string(j["question_type"].get<std::string>());
        if (!type) {
            throw std::invalid_argument("unknown question_type");
        }
        q.question_type = *type;
        if (!j["query"].is_null()) {
            q.query = MeasureQuery::parse(j["query"].get<std::string>());
            if (!q.query) {
                throw std::invalid_argument("unparseable query " + j["query"].get<std::string>());
            }
        }
        return q;
    }

} // namespace

json to_json(const SampleRecord& r)
{
    json qa = json::array();
    for (const auto& q : r.qa) {
        qa.push_back(qa_to_json(q));
    }
    return json {
        { "sample_id", r.sample_id },
        { "symbolic_form", r.symbolic_form },
        { "image_path", r.image_path },
        { "caption", r.caption },
        { "condition_text", r.condition_text },
        { "qa", qa },
        { "difficulty", r.difficulty },
        { "perception_difficulty", r.perception_difficulty },
        { "reasoning_difficulty", r.reasoning_difficulty },
        { "seed", r.seed },
        { "generator_config_digest", r.generator_config_digest },
        { "schema_version", r.schema_version },
    };
}

SampleRecord record_from_json(const json& j)
{
    try {
        expect_keys(j,
            { "sample_id", "symbolic_form", "image_path", "caption", "condition_text", "qa", "difficulty",
                "perception_difficulty", "reasoning_difficulty", "seed", "generator_config_digest",
                "schema_version" },
            "record");
        SampleRecord r;
        r.sample_id = j["sample_id"].get<std::string>();
        r.symbolic_form = j["symbolic_form"].get<std::string>();
        r.image_path = j["image_path"].get<std::string>();
        r.caption = j["caption"].get<std::string>();
        r.condition_text = j["condition_text"].get<std::string>();
        if (!j["qa"].is_array()) {
            throw std::invalid_argument("qa is not an array");
        }
        for (const auto& q : j["qa"]) {
            r.qa.push_back(qa_from_json(q));
        }
        r.difficulty = j["difficulty"].get<double>();
        r.perception_difficulty = j["perception_difficulty"].get<int>();
        r.reasoning_difficulty = j["reasoning_difficulty"].get<int>();
        r.seed = j["seed"].get<std::uint64_t>();
        r.generator_config_digest = j["generator_config_digest"].get<std::string>();
        r.schema_version = j["schema_version"].get<int>();
        if (r.schema_version != kSchemaVersion) {
            throw std::invalid_argument(fmt::format("unsupported schema_version {}", r.schema_version));
        }
        return r;
    } catch (const json::exception& e) {
        throw std::invalid_argument(e.what());
    }
}

double score_difficulty(int perception, int reasoning)
{
    return static_cast<double>(3 * perception + 7 * reasoning) / 10.0;
}

double score_difficulty(const SampleRecord& record)
{
    return score_difficulty(record.perception_difficulty, record.reasoning_difficulty);
}

std::vector<SampleRecord> read_records(const fs::path& path)
{
    std::vector<SampleRecord> out;
    std::ifstream in(path);
    if (!in) {
        return out;
    }
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) {
        ++n;
        if (line.empty()) {
            continue;
        }
        try {
            out.push_back(record_from_json(json::parse(line)));
        } catch (const std::exception& e) {
            throw MalformedRecord(n, e.what());
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Statistics

namespace {

    std::size_t word_count(std::string_view s)
    {
        std::size_t n = 0;
        bool in_word = false;
        for (char c : s) {
            const bool space = std::isspace(static_cast<unsigned char>(c));
            n += !space && !in_word;
            in_word = !space;
        }
        return n;
    }

    /// Code points, not bytes.
    std::size_t char_count(std::string_view s)
    {
        return static_cast<std::size_t>(
            std::count_if(s.begin(), s.end(), [](char c) { return (static_cast<unsigned char>(c) & 0xC0) != 0x80; }));
    }

    std::optional<std::pair<int, int>> image_dimensions(const fs::path& path)
    {
        std::ifstream in(path, std::ios::binary);
        if (!in) {
            return std::nullopt;
        }
        std::vector<std::uint8_t> head(4096);
        in.read(reinterpret_cast<char*>(head.data()), static_cast<std::streamsize>(head.size()));
        head.resize(static_cast<std::size_t>(in.gcount()));
        if (auto d = png_dimensions(head)) {
            return d;
        }
        static const std::regex svg_re(R"re(<svg[^>]*\bwidth="(\d+)"[^>]*\bheight="(\d+)")re");
        std::string text(head.begin(), head.end());
        std::smatch m;
        if (std::regex_search(text, m, svg_re)) {
            return std::pair { std::stoi(m[1].str()), std::stoi(m[2].str()) };
        }
        return std::nullopt;
    }

} // namespace

CorpusStats compute_stats(const std::vector<SampleRecord>& records, const std::optional<fs::path>& root)
{
    CorpusStats s;
    s.sample_count = records.size();
    s.cot_step_buckets = { { "lt4", 0 }, { "ge4", 0 } };
    s.question_types = { { "length", 0 }, { "angle", 0 }, { "shape", 0 } };
    double cap_w = 0, cap_c = 0, cond_w = 0, cond_c = 0, q_w = 0, steps = 0, diff = 0, img_w = 0, img_h = 0;
    std::size_t images = 0;
    for (const auto& r : records) {
        ++s.statement_histogram[r.perception_difficulty];
        ++s.cot_step_buckets[r.reasoning_difficulty < 4 ? "lt4" : "ge4"];
        cap_w += static_cast<double>(word_count(r.caption));
        cap_c += static_cast<double>(char_count(r.caption));
        cond_w += static_cast<double>(word_count(r.condition_text));
        cond_c += static_cast<double>(char_count(r.condition_text));
        diff += r.difficulty;
        for (const auto& q : r.qa) {
            ++s.qa_count;
            ++s.question_types[std::string(to_string(q.question_type))];
            q_w += static_cast<double>(word_count(q.question));
            steps += static_cast<double>(q.cot.size());
        }
        if (root) {
            if (auto d = image_dimensions(*root / r.image_path)) {
                ++images;
                img_w += d->first;
                img_h += d->second;
            }
        }
    }
    auto avg = [](double total, std::size_t n) { return n ? total / static_cast<double>(n) : 0.0; };
    s.avg_caption_words = avg(cap_w, s.sample_count);
    s.avg_caption_chars = avg(cap_c, s.sample_count);
    s.avg_condition_words = avg(cond_w, s.sample_count);
    s.avg_condition_chars = avg(cond_c, s.sample_count);
    s.avg_difficulty = avg(diff, s.sample_count);
    s.avg_question_words = avg(q_w, s.qa_count);
    s.avg_cot_steps = avg(steps, s.qa_count);
    s.avg_image_width = avg(img_w, images);
    s.avg_image_height = avg(img_h, images);
    return s;
}

json CorpusStats::to_json() const
{
    auto frac = [](std::size_t k, std::size_t n) { return n ? static_cast<double>(k) / static_cast<double>(n) : 0.0; };
    json hist = json::object();
    json hist_frac = json::object();
    for (const auto& [k, v] : statement_histogram) {
        hist[std::to_string(k)] = v;
        hist_frac[std::to_string(k)] = frac(v, sample_count);
    }
    json qt = json::object();
    json qt_frac = json::object();
    for (const auto& [k, v] : question_types) {
        qt[k] = v;
        qt_frac[k] = frac(v, qa_count);
    }
    json buckets = json::object();
    json buckets_frac = json::object();
    for (const auto& [k, v] : cot_step_buckets) {
        buckets[k] = v;
        buckets_frac[k] = frac(v, sample_count);
    }
    return json {
        { "sample_count", sample_count },
        { "qa_count", qa_count },
        { "statement_histogram", hist },
        { "statement_fractions", hist_frac },
        { "question_types", qt },
        { "question_type_fractions", qt_frac },
        { "cot_step_buckets", buckets },
        { "cot_step_bucket_fractions", buckets_frac },
        { "text",
            { { "avg_caption_words", avg_caption_words }, { "avg_caption_chars", avg_caption_chars },
                { "avg_condition_words", avg_condition_words }, { "avg_condition_chars", avg_condition_chars },
                { "avg_question_words", avg_question_words } } },
        { "avg_cot_steps", avg_cot_steps },
        { "avg_difficulty", avg_difficulty },
        { "image", { { "avg_width", avg_image_width }, { "avg_height", avg_image_height } } },
    };
}

// ---------------------------------------------------------------------------
// Validation

json ValidationReport::to_json() const
{
    json v = json::array();
    for (const auto& x : violations) {
        v.push_back({ { "sample_id", x.sample_id }, { "line", x.line }, { "kind", x.kind }, { "detail", x.detail } });
    }
    return json { { "records", records }, { "violation_count", violations.size() }, { "violations", v } };
}

ValidationReport validate_corpus(const fs::path& dir, double eps)
{
    ValidationReport report;
    std::ifstream in(dir / "records.jsonl");
    if (!in) {
        report.violations.push_back({ "", 0, "schema", "records.jsonl is missing" });
        return report;
    }
    std::set<std::string> seen;
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) {
        ++n;
        if (line.empty()) {
            continue;
        }
        ++report.records;
        auto flag = [&](const std::string& id, std::string kind, std::string detail) {
            report.violations.push_back({ id, n, std::move(kind), std::move(detail) });
        };
        SampleRecord r;
        try {
            r = record_from_json(json::parse(line));
        } catch (const std::exception& e) {
            flag("", "schema", e.what());
            continue;
        }
        const std::string& id = r.sample_id;
        if (!seen.insert(id).second) {
            flag(id, "duplicate_id", "sample_id occurs more than once");
        }
        if (!fs::exists(dir / r.image_path)) {
            flag(id, "image_missing", r.image_path);
        }

        int steps = 0;
        for (const auto& q : r.qa) {
            steps = std::max(steps, static_cast<int>(q.cot.size()));
        }
        if (r.reasoning_difficulty != steps) {
            flag(id, "difficulty", fmt::format("reasoning_difficulty {} but longest CoT has {} steps",
                                       r.reasoning_difficulty, steps));
        }
        if (r.difficulty != score_difficulty(r)) {
            flag(id, "difficulty",
                fmt::format("difficulty {} != 0.3*{} + 0.7*{}", r.difficulty, r.perception_difficulty,
                    r.reasoning_difficulty));
        }

        DslSequence seq;
        try {
            seq = parse(r.symbolic_form);
        } catch (const DslError& e) {
            flag(id, "dsl", e.what());
            continue;
        }
        if (static_cast<int>(seq.size()) != r.perception_difficulty) {
            flag(id, "difficulty",
                fmt::format("perception_difficulty {} but {} statements", r.perception_difficulty, seq.size()));
        }
        Scene scene;
        try {
            scene = realize(seq);
        } catch (const GeometryError& e) {
            flag(id, "realize", e.what());
            continue;
        }
        for (const auto& res : check_constraints(seq, scene, kEpsGeo)) {
            flag(id, "constraint", fmt::format("statement {}: {} off by {:.3g}", res.statement, res.constraint,
                                       res.residual));
        }

        for (const auto& q : r.qa) {
            auto query = q.query ? q.query : infer_query(q.question, scene);
            if (!query) {
                continue;
            }
            double oracle;
            try {
                oracle = measure(scene, *query).value;
            } catch (const GeometryError&) {
                continue;
            }
            if (std::abs(q.answer - oracle) / std::max(std::abs(oracle), 1.0) > eps) {
                flag(id, "oracle_mismatch",
                    fmt::format("\"{}\" stores {} but {} measures {:.6g}", q.question, q.answer, query->to_string(),
                        oracle));
            }
        }

        std::vector<double> given;
        for (const auto& a : scene.annotations) {
            if (a.value) {
                given.push_back(a.value->to_double());
            }
        }
        for (double x : numerals(r.condition_text)) {
            if (std::any_of(given.begin(), given.end(), [&](double g) { return std::abs(g - x) <= 1e-9; })) {
                flag(id, "lite_numeral", fmt::format("condition_text repeats annotated value {}", x));
            }
        }
    }
    return report;
}

// ---------------------------------------------------------------------------
// Pipeline

std::string sample_id(std::size_t index) { return fmt::format("s{:06d}", index); }

std::uint64_t sample_seed(std::uint64_t master_seed, std::size_t index) { return Rng::derive(master_seed, index); }

SampleDraft draft_sample(
    const PipelineConfig& config, std::size_t index, const TemplateBank& bank, const Rasterizer* rasterizer)
{
    SampleDraft d;
    d.sample_id = sample_id(index);
    d.seed = sample_seed(config.generator.seed, index);
    const Rng rng(d.seed);

    GeneratorConfig gen = config.generator;
    const auto span = static_cast<std::uint64_t>(config.exporter.steps_max - config.exporter.steps_min + 1);
    gen.step_count = config.exporter.steps_min + static_cast<int>(rng.split("steps").below(span));
    gen.seed = Rng::derive(d.seed, "generate");
    d.sequence = generate(gen);

    Rng layout_rng = rng.split("layout");
    const double rotation = layout_rng.uniform(0.0, 360.0);
    d.scene = realize(d.sequence, 1.0, rotation, gen.realize_options());
    d.scene.unit_length = fit_unit_length(d.scene, config.render)
        * layout_rng.uniform(config.exporter.unit_scale_min, config.exporter.unit_scale_max);

    d.image = render(d.scene, config.render, rasterizer);
    const Rng text_rng = rng.split("text");
    d.text_full = to_text_full(d.sequence, d.scene, text_rng, bank);
    d.text_lite = to_text_lite(d.sequence, d.scene, text_rng, bank);
    return d;
}

namespace {

    void write_file(const fs::path& path, std::string_view bytes)
    {
        const auto tmp = fs::path(path.string() + ".tmp");
        {
            std::ofstream out(tmp, std::ios::binary);
            out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
            if (!out) {
                throw std::runtime_error("cannot write " + tmp.string());
            }
        }
        fs::rename(tmp, path);
    }

    json rejection_json(const std::string& id, const Rejection& r)
    {
        auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
        return json { { "sample_id", id }, { "question", r.question }, { "failed_check", r.failed_check },
            { "answer_r1", r.answer_r1 }, { "answer_v3", opt(r.answer_v3) }, { "oracle_value", opt(r.oracle_value) } };
    }

    struct SampleResult {
        std::optional<SampleRecord> record;
        std::vector<json> rejections;
        bool no_qa = false;
        std::optional<std::string> error;
    };

    /// Picks up to `cap` items with a seeded partial shuffle, kept in source order.
    std::vector<QaVerified> pick(std::vector<QaVerified> all, std::size_t cap, Rng rng)
    {
        std::vector<std::size_t> idx(all.size());
        std::iota(idx.begin(), idx.end(), 0);
        const std::size_t k = std::min(cap, idx.size());
        for (std::size_t i = 0; i < k; ++i) {
            std::swap(idx[i], idx[i + rng.below(idx.size() - i)]);
        }
        idx.resize(k);
        std::sort(idx.begin(), idx.end());
        std::vector<QaVerified> out;
        for (auto i : idx) {
            out.push_back(std::move(all[i]));
        }
        return out;
    }

} // namespace

RunSummary run_pipeline(const PipelineConfig& config, const RunOptions& options)
{
    if (auto p = config.problems(); !p.empty()) {
        throw std::invalid_argument("invalid config: " + p.front());
    }
    if (options.mode == Mode::Cot && !options.llm) {
        throw std::invalid_argument("cot mode needs an LLM client");
    }
    const TemplateBank bank = config.templates ? TemplateBank::from_file(*config.templates) : TemplateBank::builtin();
    const Prompts prompts = config.prompts_dir ? Prompts::from_dir(*config.prompts_dir) : Prompts::builtin();
    const std::string digest = config.generator_digest();
    auto log = [&](const std::string& msg) {
        if (options.log) {
            options.log(msg);
        }
    };

    const fs::path out = options.out;
    fs::create_directories(out / "images");
    const fs::path records_path = out / "records.jsonl";
    const fs::path rejections_path = out / "rejections.jsonl";

    // Resume: a sample is done when its record parses and its image exists.
    std::map<std::string, SampleRecord> done;
    for (auto& r : read_records(records_path)) {
        if (fs::exists(out / r.image_path)) {
            done[r.sample_id] = std::move(r);
        }
    }
    std::vector<std::string> kept_rejections;
    if (std::ifstream in(rejections_path); in) {
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty()) {
                continue;
            }
            try {
                if (done.contains(json::parse(line).at("sample_id").get<std::string>())) {
                    kept_rejections.push_back(line);
                }
            } catch (const json::exception&) {
            }
        }
    }

    std::vector<std::size_t> todo;
    for (std::size_t i = 0; i < options.count; ++i) {
        if (!done.contains(sample_id(i))) {
            todo.push_back(i);
        }
    }

    // Rewrite the records file with the surviving records before appending.
    {
        std::string text;
        for (const auto& [id, r] : done) {
            text += to_json(r).dump() + "\n";
        }
        write_file(records_path, text);
    }
    std::ofstream appender(records_path, std::ios::app | std::ios::binary);
    std::mutex append_mutex;

    std::vector<SampleResult> results(todo.size());
    std::atomic<std::size_t> next { 0 };
    auto work = [&] {
        for (std::size_t k; (k = next.fetch_add(1)) < todo.size();) {
            const std::size_t index = todo[k];
            SampleResult& res = results[k];
            try {
                SampleDraft d = draft_sample(config, index, bank, options.rasterizer);
                const std::string ext = d.image.png ? ".png" : ".svg";
                write_file(out / "images" / (d.sample_id + ".svg"), d.image.svg);
                if (d.image.png) {
                    write_file(out / "images" / (d.sample_id + ".png"),
                        std::string_view(reinterpret_cast<const char*>(d.image.png->data()), d.image.png->size()));
                }

                std::vector<QaVerified> qa;
                if (options.mode == Mode::Offline) {
                    qa = pick(offline_qa(d.sequence, d.scene), config.exporter.qa_cap, Rng(d.seed).split("qa"));
                } else if (options.mode == Mode::Cot) {
                    if (options.simulator) {
                        options.simulator->bind(d.text_full, d.sequence, d.scene);
                    }
                    auto outcome = run_cot_qa(d.text_full, d.sequence, d.scene, *options.llm, config.llm, prompts,
                        config.exporter.qa_cap, config.exporter.eps_match);
                    qa = std::move(outcome.accepted);
                    for (const auto& rej : outcome.rejected) {
                        res.rejections.push_back(rejection_json(d.sample_id, rej));
                    }
                    for (const auto& diag : outcome.diagnostics) {
                        log(d.sample_id + ": " + diag);
                    }
                }
                if (options.mode != Mode::Caption && qa.empty()) {
                    res.no_qa = true;
                    log(d.sample_id + ": no verified question, sample skipped");
                    continue;
                }

                SampleRecord r;
                r.sample_id = d.sample_id;
                r.symbolic_form = print(d.sequence);
                r.image_path = "images/" + d.sample_id + ext;
                r.caption = d.text_full;
                r.condition_text = d.text_lite;
                for (const auto& v : qa) {
                    r.qa.push_back(to_record(v));
                    r.reasoning_difficulty = std::max(r.reasoning_difficulty, static_cast<int>(v.cot.size()));
                }
                r.perception_difficulty = static_cast<int>(d.sequence.size());
                r.difficulty = score_difficulty(r);
                r.seed = d.seed;
                r.generator_config_digest = digest;
                {
                    std::lock_guard lock(append_mutex);
                    appender << to_json(r).dump() << '\n';
                    appender.flush();
                }
                res.record = std::move(r);
            } catch (const std::exception& e) {
                res.error = e.what();
                log(fmt::format("{}: failed: {}", sample_id(index), e.what()));
            }
        }
    };
    {
        const int jobs = std::max(1, std::min<int>(options.jobs, static_cast<int>(std::max<std::size_t>(1, todo.size()))));
        std::vector<std::jthread> pool;
        for (int j = 1; j < jobs; ++j) {
            pool.emplace_back(work);
        }
        work();
    }
    appender.close();

    RunSummary summary;
    summary.resumed = done.size();
    std::vector<std::string> rejection_lines = kept_rejections;
    for (auto& res : results) {
        if (res.record) {
            ++summary.generated;
            done[res.record->sample_id] = std::move(*res.record);
        }
        summary.skipped_no_qa += res.no_qa;
        summary.failed += res.error.has_value();
        summary.rejected_pairs += res.rejections.size();
        for (const auto& j : res.rejections) {
            rejection_lines.push_back(j.dump());
        }
    }
    std::stable_sort(rejection_lines.begin(), rejection_lines.end(), [](const std::string& a, const std::string& b) {
        return json::parse(a).at("sample_id").get<std::string>() < json::parse(b).at("sample_id").get<std::string>();
    });

    // Final files in sample order so reruns are byte-identical.
    std::vector<SampleRecord> records;
    std::string text;
    for (auto& [id, r] : done) {
        text += to_json(r).dump() + "\n";
        records.push_back(r);
    }
    write_file(records_path, text);
    std::string rej_text;
    for (const auto& l : rejection_lines) {
        rej_text += l + "\n";
    }
    write_file(rejections_path, rej_text);
    summary.stats = compute_stats(records, out);
    write_file(out / "stats.json", summary.stats.to_json().dump(2) + "\n");

    const double attempted = static_cast<double>(todo.size());
    if (attempted > 0 && static_cast<double>(summary.failed) / attempted > config.exporter.failure_threshold) {
        summary.exit_code = 2;
    }
    log(fmt::format("{} generated, {} resumed, {} without QA, {} failed, {} rejected pairs", summary.generated,
        summary.resumed, summary.skipped_no_qa, summary.failed, summary.rejected_pairs));
    return summary;
}

} // namespace geosynth
