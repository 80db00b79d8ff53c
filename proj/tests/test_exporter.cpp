#include "geosynth/exporter.hpp"

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace geosynth;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path scratch(const std::string& name)
{
    auto p = fs::temp_directory_path() / ("geosynth_exporter_" + name);
    fs::remove_all(p);
    return p;
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<std::string> lines_of(const fs::path& p)
{
    std::vector<std::string> out;
    std::ifstream in(p);
    for (std::string l; std::getline(in, l);) {
        if (!l.empty()) {
            out.push_back(l);
        }
    }
    return out;
}

void write_lines(const fs::path& p, const std::vector<std::string>& lines)
{
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    for (const auto& l : lines) {
        out << l << '\n';
    }
}

PipelineConfig config(std::uint64_t seed)
{
    PipelineConfig c;
    c.generator.seed = seed;
    return c;
}

SampleRecord tiny_record(int statements, int steps)
{
    SampleRecord r;
    r.sample_id = "s000000";
    r.perception_difficulty = statements;
    r.reasoning_difficulty = steps;
    QaRecord q;
    q.question = "What is the length of AC?";
    q.answer = 5;
    q.cot.assign(static_cast<std::size_t>(steps), "step");
    r.qa.push_back(q);
    r.difficulty = score_difficulty(r);
    return r;
}

} // namespace

TEST(Difficulty, WeightedScore)
{
    EXPECT_EQ(score_difficulty(3, 4), 3.7);
    EXPECT_EQ(score_difficulty(1, 1), 1.0);
    EXPECT_EQ(score_difficulty(5, 2), 2.9);
    EXPECT_EQ(score_difficulty(2, 0), 0.6);
}

TEST(Stats, HistogramAndBuckets)
{
    const std::vector<SampleRecord> rs { tiny_record(3, 3), tiny_record(4, 5) };
    const auto s = compute_stats(rs);
    EXPECT_EQ(s.sample_count, 2u);
    EXPECT_EQ(s.qa_count, 2u);
    EXPECT_EQ(s.statement_histogram, (std::map<int, std::size_t> { { 3, 1 }, { 4, 1 } }));
    EXPECT_EQ(s.cot_step_buckets.at("lt4"), 1u);
    EXPECT_EQ(s.cot_step_buckets.at("ge4"), 1u);
    EXPECT_DOUBLE_EQ(s.avg_cot_steps, 4.0);
    EXPECT_DOUBLE_EQ(s.avg_question_words, 6.0);
    EXPECT_DOUBLE_EQ(s.avg_difficulty, (score_difficulty(3, 3) + score_difficulty(4, 5)) / 2);
    const auto j = s.to_json();
    EXPECT_TRUE(j.contains("sample_count"));
}

TEST(Records, RoundTripAndStrictness)
{
    auto r = tiny_record(2, 1);
    r.qa[0].query = MeasureQuery::length(Label { "A" }, Label { "C" });
    r.qa[0].validation = { true, true, 5.0 };
    r.seed = 18446744073709551615ull;
    const json j = to_json(r);
    const auto back = record_from_json(j);
    EXPECT_EQ(to_json(back), j);
    EXPECT_EQ(back.seed, r.seed);

    json extra = j;
    extra["bonus"] = 1;
    EXPECT_THROW(record_from_json(extra), std::invalid_argument);
    json missing = j;
    missing.erase("caption");
    EXPECT_THROW(record_from_json(missing), std::invalid_argument);
    json typed = j;
    typed["difficulty"] = "high";
    EXPECT_THROW(record_from_json(typed), std::invalid_argument);
}

TEST(Records, MalformedLineNumber)
{
    const auto dir = scratch("malformed");
    fs::create_directories(dir);
    write_lines(dir / "records.jsonl", { to_json(tiny_record(2, 1)).dump(), "{\"sample_id\": 3}" });
    try {
        read_records(dir / "records.jsonl");
        FAIL();
    } catch (const MalformedRecord& e) {
        EXPECT_EQ(e.line(), 2u);
    }
}

TEST(Config, ParsesAndRejects)
{
    const json j = json::parse(R"({
        "generator": {"seed": 9, "length_range": [2, 6]},
        "render": {"width": 512, "height": 512},
        "exporter": {"steps": [2, 3], "qa_cap": 3, "unit_scale": [0.5, 0.9]},
        "llm": {"base_url": "http://localhost:1/v1", "max_attempts": 5}
    })");
    const auto c = PipelineConfig::from_json(j);
    EXPECT_EQ(c.generator.seed, 9u);
    EXPECT_EQ(c.generator.length_min, 2);
    EXPECT_EQ(c.generator.length_max, 6);
    EXPECT_EQ(c.render.width, 512);
    EXPECT_EQ(c.exporter.steps_min, 2);
    EXPECT_EQ(c.exporter.steps_max, 3);
    EXPECT_EQ(c.exporter.qa_cap, 3u);
    EXPECT_EQ(c.llm.max_attempts, 5);
    EXPECT_TRUE(c.problems().empty());
    EXPECT_EQ(PipelineConfig::from_json(c.to_json()).to_json(), c.to_json());

    EXPECT_THROW(PipelineConfig::from_json(json::parse(R"({"render": {"colour": 1}})")), std::invalid_argument);
    EXPECT_THROW(PipelineConfig::from_json(json::parse(R"({"unknown": 1})")), std::invalid_argument);
    EXPECT_THROW(PipelineConfig::from_json(json::parse(R"({"exporter": {"qa_cap": "two"}})")), std::invalid_argument);
    auto bad = PipelineConfig::from_json(json::parse(R"({"exporter": {"steps": [3, 2]}})"));
    EXPECT_FALSE(bad.problems().empty());
    EXPECT_THROW(PipelineConfig::from_file("/nonexistent/config.json"), std::invalid_argument);
}

TEST(Config, DigestFollowsGeneratorOnly)
{
    auto a = config(1);
    auto b = config(1);
    b.render.width = 300;
    EXPECT_EQ(a.generator_digest(), b.generator_digest());
    b.generator.length_max = 9;
    EXPECT_NE(a.generator_digest(), b.generator_digest());
}

TEST(Draft, DeterministicAndInRange)
{
    const auto c = config(11);
    const auto bank = TemplateBank::builtin();
    for (std::size_t i = 0; i < 20; ++i) {
        const auto a = draft_sample(c, i, bank);
        const auto b = draft_sample(c, i, bank);
        EXPECT_EQ(print(a.sequence), print(b.sequence));
        EXPECT_EQ(a.image.svg, b.image.svg);
        EXPECT_EQ(a.text_full, b.text_full);
        EXPECT_GE(a.sequence.size(), 2u);
        EXPECT_LE(a.sequence.size(), 5u);
        EXPECT_EQ(a.sample_id, sample_id(i));
    }
    EXPECT_NE(sample_seed(11, 0), sample_seed(11, 1));
    EXPECT_NE(sample_seed(11, 0), sample_seed(12, 0));
}

TEST(Pipeline, OfflineRunProducesValidCorpus)
{
    const auto dir = scratch("offline");
    RunOptions o;
    o.out = dir;
    o.count = 10;
    const auto s = run_pipeline(config(3), o);
    EXPECT_EQ(s.exit_code, 0);
    EXPECT_EQ(s.generated + s.skipped_no_qa + s.failed, 10u);
    EXPECT_GE(s.generated, 8u);
    const auto records = read_records(dir / "records.jsonl");
    ASSERT_EQ(records.size(), s.generated);
    for (const auto& r : records) {
        EXPECT_TRUE(fs::exists(dir / r.image_path));
        EXPECT_FALSE(r.qa.empty());
        EXPECT_LE(r.qa.size(), 2u);
        EXPECT_EQ(r.reasoning_difficulty, 1);
        EXPECT_EQ(r.schema_version, kSchemaVersion);
    }
    EXPECT_TRUE(fs::exists(dir / "stats.json"));
    EXPECT_TRUE(fs::exists(dir / "rejections.jsonl"));
    const auto report = validate_corpus(dir);
    EXPECT_TRUE(report.clean()) << report.to_json().dump(2);
    EXPECT_EQ(report.records, records.size());
}

TEST(Pipeline, ZeroCount)
{
    const auto dir = scratch("zero");
    RunOptions o;
    o.out = dir;
    const auto s = run_pipeline(config(3), o);
    EXPECT_EQ(s.exit_code, 0);
    EXPECT_EQ(s.generated, 0u);
    EXPECT_EQ(slurp(dir / "records.jsonl"), "");
    EXPECT_EQ(s.stats.sample_count, 0u);
}

TEST(Pipeline, ResumeRegeneratesOnlyMissing)
{
    const auto dir = scratch("resume");
    RunOptions o;
    o.out = dir;
    o.count = 8;
    const auto first = run_pipeline(config(5), o);
    const std::string original = slurp(dir / "records.jsonl");
    const auto records = read_records(dir / "records.jsonl");
    std::size_t removed = 0;
    for (std::size_t i = 0; i < records.size(); i += 2) {
        fs::remove(dir / records[i].image_path);
        ++removed;
    }
    const auto second = run_pipeline(config(5), o);
    EXPECT_EQ(second.resumed, first.generated - removed);
    EXPECT_EQ(second.generated, removed);
    EXPECT_EQ(slurp(dir / "records.jsonl"), original);
}

TEST(Pipeline, CaptionModeHasNoQa)
{
    const auto dir = scratch("caption");
    RunOptions o;
    o.out = dir;
    o.count = 3;
    o.mode = Mode::Caption;
    const auto s = run_pipeline(config(8), o);
    EXPECT_EQ(s.generated, 3u);
    for (const auto& r : read_records(dir / "records.jsonl")) {
        EXPECT_TRUE(r.qa.empty());
        EXPECT_EQ(r.reasoning_difficulty, 0);
    }
    EXPECT_TRUE(validate_corpus(dir).clean());
}

TEST(Pipeline, CotNeedsClient)
{
    RunOptions o;
    o.out = scratch("cot_missing");
    o.count = 1;
    o.mode = Mode::Cot;
    EXPECT_THROW(run_pipeline(config(1), o), std::invalid_argument);
}

TEST(Pipeline, FailuresAboveThresholdExitTwo)
{
    // A client that always fails makes every cot sample fail.
    struct Down : LlmClient {
        std::string complete(const std::string&, const std::vector<ChatMessage>&) override
        {
            throw QaError(QaErrorCode::EndpointUnavailable, "down");
        }
    } down;
    RunOptions o;
    o.out = scratch("down");
    o.count = 4;
    o.mode = Mode::Cot;
    o.llm = &down;
    const auto s = run_pipeline(config(1), o);
    EXPECT_EQ(s.failed, 4u);
    EXPECT_EQ(s.exit_code, 2);
}

TEST(Pipeline, JobsDoNotChangeOutput)
{
    const auto a = scratch("jobs1");
    const auto b = scratch("jobs3");
    RunOptions o;
    o.count = 9;
    o.out = a;
    run_pipeline(config(21), o);
    o.out = b;
    o.jobs = 3;
    run_pipeline(config(21), o);
    EXPECT_EQ(slurp(a / "records.jsonl"), slurp(b / "records.jsonl"));
    EXPECT_EQ(slurp(a / "stats.json"), slurp(b / "stats.json"));
}

TEST(Validate, DetectsInjectedFaults)
{
    const auto dir = scratch("faults");
    RunOptions o;
    o.out = dir;
    o.count = 6;
    run_pipeline(config(13), o);
    auto lines = lines_of(dir / "records.jsonl");
    ASSERT_GE(lines.size(), 4u);

    auto r0 = json::parse(lines[0]);
    r0["qa"][0]["answer"] = r0["qa"][0]["answer"].get<double>() * 1.5 + 1;
    lines[0] = r0.dump();
    auto r1 = json::parse(lines[1]);
    r1["difficulty"] = r1["difficulty"].get<double>() + 0.1;
    lines[1] = r1.dump();
    lines.push_back(lines[2]);
    auto r3 = json::parse(lines[3]);
    r3["image_path"] = "images/none.svg";
    lines[3] = r3.dump();
    write_lines(dir / "records.jsonl", lines);

    const auto report = validate_corpus(dir);
    std::set<std::string> kinds;
    for (const auto& v : report.violations) {
        kinds.insert(v.kind);
    }
    EXPECT_TRUE(kinds.contains("oracle_mismatch"));
    EXPECT_TRUE(kinds.contains("difficulty"));
    EXPECT_TRUE(kinds.contains("duplicate_id"));
    EXPECT_TRUE(kinds.contains("image_missing"));
    EXPECT_EQ(report.violations.size(), 4u);
}

TEST(Validate, LeakedNumeralAndBadDsl)
{
    const auto dir = scratch("leak");
    RunOptions o;
    o.out = dir;
    o.count = 3;
    run_pipeline(config(17), o);
    auto lines = lines_of(dir / "records.jsonl");
    ASSERT_GE(lines.size(), 2u);
    auto r0 = json::parse(lines[0]);
    const auto seq = parse(r0["symbolic_form"].get<std::string>());
    const auto p = seq.statements[0].params.at(0);
    r0["condition_text"] = r0["condition_text"].get<std::string>() + " One side is " + p.to_string() + ".";
    lines[0] = r0.dump();
    auto r1 = json::parse(lines[1]);
    r1["symbolic_form"] = "Midpoint(Q,Line(A,B))\n";
    lines[1] = r1.dump();
    write_lines(dir / "records.jsonl", lines);
    std::set<std::string> kinds;
    for (const auto& v : validate_corpus(dir).violations) {
        kinds.insert(v.kind);
    }
    EXPECT_TRUE(kinds.contains("lite_numeral"));
    EXPECT_TRUE(kinds.contains("dsl"));
}
