#include "geosynth/exporter.hpp"
#include "geosynth/realizer.hpp"
#ifdef GEOSYNTH_HAVE_RASTER
#include "geosynth/raster_opencv.hpp"
#endif

#include <CLI11.hpp>
#include <fmt/format.h>

#include <fstream>
#include <filesystem>
#include <iostream>
#include <sstream>

using namespace geosynth;
namespace fs = std::filesystem;

namespace {

struct Globals {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out;
    std::size_t count = 10;
    std::string mode = "offline";
    int jobs = 1;
    std::string llm = "http";
    std::string fixtures;
    std::string record;
};

PipelineConfig load_config(const Globals& g)
{
    PipelineConfig c = g.config.empty() ? PipelineConfig {} : PipelineConfig::from_file(g.config);
    if (g.seed) {
        c.generator.seed = *g.seed;
    }
    return c;
}

const Rasterizer* rasterizer()
{
#ifdef GEOSYNTH_HAVE_RASTER
    static const OpenCvRasterizer r;
    return &r;
#else
    return nullptr;
#endif
}

std::string slurp(const std::string& path)
{
    if (path.empty() || path == "-") {
        std::ostringstream ss;
        ss << std::cin.rdbuf();
        return ss.str();
    }
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::invalid_argument("cannot read " + path);
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void emit(const std::string& out, const std::string& text)
{
    if (out.empty() || out == "-") {
        std::cout << text;
        return;
    }
    std::ofstream f(out, std::ios::binary);
    f << text;
}

/// Owns whatever client chain the flags ask for.
struct ClientStack {
    std::unique_ptr<LlmClient> base;
    SimulatedLlmClient* simulator = nullptr;
    std::unique_ptr<RecordingLlmClient> recorder;

    LlmClient* top() const { return recorder ? static_cast<LlmClient*>(recorder.get()) : base.get(); }
};

ClientStack make_client(const Globals& g, const PipelineConfig& c)
{
    ClientStack s;
    if (g.llm == "http") {
        s.base = std::make_unique<HttpLlmClient>(c.llm);
    } else if (g.llm == "simulated") {
        auto sim = std::make_unique<SimulatedLlmClient>();
        s.simulator = sim.get();
        s.base = std::move(sim);
    } else if (g.llm == "fixtures") {
        if (g.fixtures.empty()) {
            throw std::invalid_argument("--llm fixtures needs --fixtures DIR");
        }
        s.base = std::make_unique<FixtureLlmClient>(g.fixtures);
    } else {
        throw std::invalid_argument("unknown --llm " + g.llm);
    }
    if (!g.record.empty()) {
        s.recorder = std::make_unique<RecordingLlmClient>(*s.base, g.record);
    }
    return s;
}

Mode parse_mode(const std::string& m)
{
    auto mode = mode_from_string(m);
    if (!mode) {
        throw std::invalid_argument("unknown --mode " + m);
    }
    return *mode;
}

nlohmann::json qa_json(const std::vector<QaVerified>& items)
{
    auto arr = nlohmann::json::array();
    for (const auto& v : items) {
        arr.push_back({ { "question", v.question }, { "answer", v.answer }, { "cot", v.cot },
            { "question_type", to_string(v.type) }, { "query", v.query ? v.query->to_string() : "" },
            { "llm_cross", v.validation.llm_cross }, { "oracle", v.validation.oracle } });
    }
    return arr;
}

int run_export(const Globals& g, Mode mode)
{
    const PipelineConfig config = load_config(g);
    if (g.out.empty()) {
        throw std::invalid_argument("--out is required");
    }
    ClientStack clients;
    if (mode == Mode::Cot) {
        clients = make_client(g, config);
    }
    RunOptions opts;
    opts.out = g.out;
    opts.count = g.count;
    opts.mode = mode;
    opts.jobs = g.jobs;
    opts.llm = clients.top();
    opts.simulator = clients.simulator;
    opts.rasterizer = config.render.raster ? rasterizer() : nullptr;
    opts.log = [](const std::string& m) { std::cerr << m << '\n'; };
    if (config.render.raster && !opts.rasterizer) {
        throw RenderError(RenderErrorCode::RasterBackendUnavailable, "built without a raster backend");
    }
    return run_pipeline(config, opts).exit_code;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app { "Synthetic plane-geometry data: DSL sequences, diagrams, text and verified QA." };
    app.require_subcommand(1);
    Globals g;
    app.add_option("--config", g.config, "JSON config file")->check(CLI::ExistingFile);
    app.add_option("--seed", g.seed, "Master seed (overrides the config)");
    app.add_option("--out", g.out, "Output file or dataset directory");
    app.add_option("--count", g.count, "Number of samples");
    app.add_option("--mode", g.mode, "cot, caption or offline");
    app.add_option("--jobs", g.jobs, "Worker threads")->check(CLI::PositiveNumber);
    app.add_option("--llm", g.llm, "LLM source for cot mode: http, simulated or fixtures");
    app.add_option("--fixtures", g.fixtures, "Fixture directory to replay");
    app.add_option("--record", g.record, "Record every LLM exchange into this directory");

    auto* gen = app.add_subcommand("generate", "Print generated DSL sequences as JSON lines");
    auto* rnd = app.add_subcommand("render", "Render a DSL file to SVG (and PNG when enabled)");
    std::string input;
    double rotation = 0;
    rnd->add_option("input", input, "DSL file, - for stdin")->required();
    rnd->add_option("--rotation", rotation, "Rotation in degrees");
    auto* qa = app.add_subcommand("qa", "Question answering for one DSL file");
    qa->add_option("input", input, "DSL file, - for stdin")->required();
    auto* exp = app.add_subcommand("export", "Run the full pipeline into --out");
    auto* st = app.add_subcommand("stats", "Recompute stats.json for the dataset in --out");
    auto* val = app.add_subcommand("validate", "Check every record of the dataset in --out");
    auto* rep = app.add_subcommand("replay-fixtures", "Run cot mode from recorded fixtures (--fixtures)");
    for (auto* sub : { gen, rnd, qa, exp, st, val, rep }) {
        sub->fallthrough();
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    try {
        if (gen->parsed()) {
            const PipelineConfig config = load_config(g);
            std::string text;
            for (std::size_t i = 0; i < g.count; ++i) {
                GeneratorConfig c = config.generator;
                const std::uint64_t seed = sample_seed(c.seed, i);
                c.seed = seed;
                nlohmann::json row = { { "index", i }, { "seed", seed }, { "symbolic_form", print(generate(c)) } };
                text += row.dump() + "\n";
            }
            emit(g.out, text);
        } else if (rnd->parsed()) {
            const PipelineConfig config = load_config(g);
            Scene scene = realize(parse(slurp(input)), 1.0, rotation);
            scene.unit_length = fit_unit_length(scene, config.render);
            const auto out = render(scene, config.render, config.render.raster ? rasterizer() : nullptr);
            if (g.out.empty() || g.out == "-") {
                std::cout << out.svg;
            } else {
                // --out is a path stem; a given .svg or .png extension is dropped.
                std::filesystem::path stem(g.out);
                if (stem.extension() == ".svg" || stem.extension() == ".png") {
                    stem.replace_extension();
                }
                emit(stem.string() + ".svg", out.svg);
                if (out.png) {
                    emit(stem.string() + ".png", std::string(out.png->begin(), out.png->end()));
                }
            }
        } else if (qa->parsed()) {
            const PipelineConfig config = load_config(g);
            const DslSequence seq = parse(slurp(input));
            const Scene scene = realize(seq);
            const Mode mode = parse_mode(g.mode);
            nlohmann::json out;
            if (mode == Mode::Cot) {
                auto clients = make_client(g, config);
                const std::string text = to_text_full(seq, scene, Rng(config.generator.seed));
                if (clients.simulator) {
                    clients.simulator->bind(text, seq, scene);
                }
                const Prompts prompts = config.prompts_dir ? Prompts::from_dir(*config.prompts_dir) : Prompts::builtin();
                auto outcome = run_cot_qa(text, seq, scene, *clients.top(), config.llm, prompts,
                    config.exporter.qa_cap, config.exporter.eps_match);
                out = { { "accepted", qa_json(outcome.accepted) }, { "rejected", outcome.rejected.size() },
                    { "diagnostics", outcome.diagnostics } };
            } else {
                out = { { "accepted", qa_json(offline_qa(seq, scene)) } };
            }
            emit(g.out, out.dump(2) + "\n");
        } else if (exp->parsed()) {
            return run_export(g, parse_mode(g.mode));
        } else if (rep->parsed()) {
            g.llm = "fixtures";
            return run_export(g, Mode::Cot);
        } else if (st->parsed()) {
            const auto stats = compute_stats(read_records(fs::path(g.out) / "records.jsonl"), fs::path(g.out));
            const std::string text = stats.to_json().dump(2) + "\n";
            std::ofstream(fs::path(g.out) / "stats.json", std::ios::binary) << text;
            std::cout << text;
        } else if (val->parsed()) {
            const auto report = validate_corpus(g.out);
            std::cout << report.to_json().dump(2) << '\n';
            return report.clean() ? 0 : 2;
        }
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 1;
    } catch (const DslError& e) {
        std::cerr << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
