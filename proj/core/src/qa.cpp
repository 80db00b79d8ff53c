#include "geosynth/qa.hpp"

#include "geosynth/assets.hpp"
#include "geosynth/digest.hpp"

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <numbers>
#include <regex>
#include <set>
#include <sstream>
#include <thread>

namespace geosynth {

using nlohmann::json;

std::string_view to_string(QuestionType t)
{
    switch (t) {
    case QuestionType::Length:
        return "length";
    case QuestionType::Angle:
        return "angle";
    case QuestionType::Shape:
        return "shape";
    }
    return "?";
}

std::optional<QuestionType> question_type_from_string(std::string_view s)
{
    for (auto t : { QuestionType::Length, QuestionType::Angle, QuestionType::Shape }) {
        if (to_string(t) == s) {
            return t;
        }
    }
    return std::nullopt;
}

std::string_view to_string(QaErrorCode code)
{
    switch (code) {
    case QaErrorCode::EndpointUnavailable:
        return "EndpointUnavailable";
    case QaErrorCode::ResponseUnparseable:
        return "ResponseUnparseable";
    case QaErrorCode::AuthMissing:
        return "AuthMissing";
    case QaErrorCode::AnswerUnparseable:
        return "AnswerUnparseable";
    case QaErrorCode::FixtureMissing:
        return "FixtureMissing";
    }
    return "?";
}

QaError::QaError(QaErrorCode code, const std::string& detail)
    : std::runtime_error(std::string(to_string(code)) + ": " + detail)
    , code_(code)
{
}

namespace {

    std::string lower(std::string_view s)
    {
        std::string out(s);
        for (auto& c : out) {
            c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        }
        return out;
    }

    /// "A1BC" -> {A1, B, C}; empty if the text is not a label run.
    std::vector<Label> split_labels(std::string_view run)
    {
        static const std::regex one("[A-Z][0-9]*");
        std::vector<Label> out;
        std::string s(run);
        std::size_t consumed = 0;
        for (auto it = std::sregex_iterator(s.begin(), s.end(), one); it != std::sregex_iterator(); ++it) {
            if (static_cast<std::size_t>(it->position()) != consumed) {
                return {};
            }
            consumed += it->length();
            out.push_back(Label { it->str() });
        }
        return consumed == s.size() ? out : std::vector<Label> {};
    }

    bool relative_match(double a, double reference, double eps)
    {
        return std::abs(a - reference) / std::max(std::abs(reference), 1.0) <= eps;
    }

} // namespace

QuestionType route_question(std::string_view question, const std::optional<MeasureQuery>& query)
{
    if (query) {
        switch (query->kind) {
        case MeasureKind::Length:
        case MeasureKind::ArcLength:
            return QuestionType::Length;
        case MeasureKind::Angle:
            return QuestionType::Angle;
        case MeasureKind::Area:
        case MeasureKind::Perimeter:
            return QuestionType::Shape;
        }
    }
    const std::string q = lower(question);
    if (q.find("area") != std::string::npos || q.find("perimeter") != std::string::npos) {
        return QuestionType::Shape;
    }
    if (q.find("angle") != std::string::npos || q.find("∠") != std::string::npos
        || q.find("degree") != std::string::npos) {
        return QuestionType::Angle;
    }
    return QuestionType::Length;
}

std::optional<MeasureQuery> infer_query(std::string_view question, const Scene& scene)
{
    const std::string q(question);
    static const std::regex shape_re(
        R"((area|perimeter|arc length) of (?:the )?([a-z]+(?: [a-z]+)?) ((?:[A-Z][0-9]*)+)\b)",
        std::regex::icase);
    static const std::regex angle_re(R"((?:∠|angle )((?:[A-Z][0-9]*){3})\b)");
    static const std::regex length_re(
        R"((?:length of|distance|segment|side) (?:the )?(?:segment |side )?((?:[A-Z][0-9]*){2})\b)");
    static const std::regex between_re(R"(between ([A-Z][0-9]*) and ([A-Z][0-9]*)\b)");

    std::smatch m;
    if (std::regex_search(q, m, shape_re)) {
        const std::string what = lower(m[1].str());
        const std::string noun = lower(m[2].str());
        const std::string labels = m[3].str();
        const MeasureKind kind = what == "area" ? MeasureKind::Area
            : what == "perimeter"               ? MeasureKind::Perimeter
                                                : MeasureKind::ArcLength;
        for (const auto& shape : scene.registry.shapes()) {
            const std::string sn = shape_noun(shape);
            const bool noun_ok = sn == noun || (sn.size() > noun.size() && sn.ends_with(" " + noun))
                || (noun.size() > sn.size() && noun.ends_with(" " + sn));
            if (noun_ok && shape.joined() == labels) {
                return MeasureQuery::of_shape(kind, shape);
            }
        }
        return std::nullopt;
    }
    if (std::regex_search(q, m, angle_re)) {
        auto ls = split_labels(m[1].str());
        if (ls.size() == 3) {
            return MeasureQuery::angle(ls[0], ls[1], ls[2]);
        }
    }
    if (std::regex_search(q, m, length_re)) {
        auto ls = split_labels(m[1].str());
        if (ls.size() == 2) {
            return MeasureQuery::length(ls[0], ls[1]);
        }
    }
    if (std::regex_search(q, m, between_re)) {
        return MeasureQuery::length(Label { m[1].str() }, Label { m[2].str() });
    }
    return std::nullopt;
}

std::vector<std::string> LlmEndpointConfig::problems() const
{
    std::vector<std::string> out;
    if (!(timeout_s > 0)) {
        out.push_back("timeout must be positive");
    }
    if (max_attempts < 1) {
        out.push_back("max_attempts must be at least 1");
    }
    if (max_concurrent < 1) {
        out.push_back("max_concurrent must be at least 1");
    }
    if (backoff_ms < 0) {
        out.push_back("backoff_ms must not be negative");
    }
    if (!base_url.starts_with("http://") && !base_url.starts_with("https://")) {
        out.push_back("base_url must start with http:// or https://");
    }
    if (model_name_search.empty() || model_name_validate.empty()) {
        out.push_back("model names must not be empty");
    }
    return out;
}

std::string fixture_key(const std::string& model, const std::vector<ChatMessage>& messages)
{
    json msgs = json::array();
    for (const auto& m : messages) {
        msgs.push_back({ { "role", m.role }, { "content", m.content } });
    }
    return sha256_hex(model + "\n" + msgs.dump());
}

FixtureLlmClient::FixtureLlmClient(std::filesystem::path dir)
    : dir_(std::move(dir))
{
}

std::string FixtureLlmClient::complete(const std::string& model, const std::vector<ChatMessage>& messages)
{
    const auto path = dir_ / (fixture_key(model, messages) + ".json");
    std::ifstream in(path);
    if (!in) {
        throw QaError(QaErrorCode::FixtureMissing, path.string());
    }
    try {
        return json::parse(in).at("response").get<std::string>();
    } catch (const json::exception& e) {
        throw QaError(QaErrorCode::FixtureMissing, path.string() + ": " + e.what());
    }
}

RecordingLlmClient::RecordingLlmClient(LlmClient& inner, std::filesystem::path dir)
    : inner_(inner)
    , dir_(std::move(dir))
{
    std::filesystem::create_directories(dir_);
}

std::string RecordingLlmClient::complete(const std::string& model, const std::vector<ChatMessage>& messages)
{
    std::string response = inner_.complete(model, messages);
    json prompt = json::array();
    for (const auto& m : messages) {
        prompt.push_back({ { "role", m.role }, { "content", m.content } });
    }
    const json doc = { { "model", model }, { "prompt", prompt }, { "response", response } };
    const auto key = fixture_key(model, messages);
    std::lock_guard lock(mutex_);
    const auto tmp = dir_ / (key + ".tmp");
    {
        std::ofstream out(tmp, std::ios::binary);
        out << doc.dump(2) << '\n';
    }
    std::filesystem::rename(tmp, dir_ / (key + ".json"));
    return response;
}

Prompts Prompts::builtin()
{
    return { std::string(asset("prompts/reverse_search.txt")), std::string(asset("prompts/forward_validate.txt")) };
}

Prompts Prompts::from_dir(const std::filesystem::path& dir)
{
    auto slurp = [](const std::filesystem::path& p) {
        std::ifstream in(p, std::ios::binary);
        if (!in) {
            throw std::runtime_error("cannot read prompt " + p.string());
        }
        std::ostringstream ss;
        ss << in.rdbuf();
        return ss.str();
    };
    return { slurp(dir / "reverse_search.txt"), slurp(dir / "forward_validate.txt") };
}

std::string fill_prompt(std::string_view tpl, std::string_view conditions, std::string_view question)
{
    std::string out(tpl);
    auto sub = [&](std::string_view key, std::string_view value) {
        for (std::size_t pos = 0; (pos = out.find(key, pos)) != std::string::npos; pos += value.size()) {
            out.replace(pos, key.size(), value);
        }
    };
    sub("{{conditions}}", conditions);
    sub("{{question}}", question);
    return out;
}

std::vector<QaCandidate> parse_reverse_response(
    std::string_view raw, const std::vector<Label>& known_labels, std::vector<std::string>& diagnostics)
{
    const auto open = raw.find('[');
    const auto close = raw.rfind(']');
    if (open == std::string_view::npos || close == std::string_view::npos || close < open) {
        throw QaError(QaErrorCode::ResponseUnparseable, "no JSON array in response");
    }
    json arr;
    try {
        arr = json::parse(raw.substr(open, close - open + 1));
    } catch (const json::exception& e) {
        throw QaError(QaErrorCode::ResponseUnparseable, e.what());
    }
    if (!arr.is_array()) {
        throw QaError(QaErrorCode::ResponseUnparseable, "top-level value is not an array");
    }

    const std::set<Label> known(known_labels.begin(), known_labels.end());
    static const std::regex run_re(R"(\b[A-Z][A-Z0-9]+\b)");
    std::vector<QaCandidate> out;
    for (std::size_t i = 0; i < arr.size(); ++i) {
        const json& item = arr[i];
        auto drop = [&](const std::string& why) { diagnostics.push_back(fmt::format("item {}: {}", i, why)); };
        if (!item.is_object() || !item.contains("question") || !item["question"].is_string()) {
            drop("missing question");
            continue;
        }
        QaCandidate c;
        c.question = item["question"].get<std::string>();
        c.raw_response = item.dump();
        std::optional<double> answer;
        if (item.contains("answer") && item["answer"].is_number()) {
            answer = item["answer"].get<double>();
        } else if (item.contains("answer") && item["answer"].is_string()) {
            answer = normalize_answer(item["answer"].get<std::string>());
        }
        if (!answer || !std::isfinite(*answer)) {
            drop("answer does not evaluate to a number");
            continue;
        }
        c.answer_r1 = *answer;
        if (!known.empty()) {
            std::string bad;
            for (auto it = std::sregex_iterator(c.question.begin(), c.question.end(), run_re);
                 it != std::sregex_iterator() && bad.empty(); ++it) {
                const auto labels = split_labels(it->str());
                if (labels.empty()) {
                    bad = it->str();
                }
                for (const auto& l : labels) {
                    if (!known.contains(l)) {
                        bad = l.name;
                        break;
                    }
                }
            }
            if (!bad.empty()) {
                drop("question references unknown label " + bad);
                continue;
            }
        }
        if (item.contains("query") && item["query"].is_string()) {
            c.target_query = MeasureQuery::parse(item["query"].get<std::string>());
            if (!c.target_query) {
                diagnostics.push_back(fmt::format("item {}: ignoring unparseable query", i));
            }
        }
        out.push_back(std::move(c));
    }
    return out;
}

ForwardResult parse_forward_response(std::string_view raw)
{
    static const std::regex step_re(R"(^\s*(?:[*#>-]+\s*)?(?:step\s*)?\d+\s*[.):]\**\s*(.*)$)", std::regex::icase);
    static const std::regex answer_re(R"(answer\s*\**\s*[:：]\s*\**\s*(.+)$)", std::regex::icase);

    ForwardResult r;
    r.raw_response = std::string(raw);
    std::optional<std::string> answer_text;
    std::istringstream in { std::string(raw) };
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        std::smatch m;
        if (std::regex_search(line, m, answer_re)) {
            answer_text = m[1].str();
            continue;
        }
        if (std::regex_match(line, m, step_re)) {
            r.cot.push_back(m[1].str());
        }
    }
    if (!answer_text) {
        throw QaError(QaErrorCode::AnswerUnparseable, "no final answer line");
    }
    auto value = normalize_answer(*answer_text);
    if (!value) {
        throw QaError(QaErrorCode::AnswerUnparseable, "answer '" + *answer_text + "' is not numeric");
    }
    if (r.cot.empty()) {
        throw QaError(QaErrorCode::AnswerUnparseable, "no reasoning steps");
    }
    r.answer = *value;
    return r;
}

ReverseSearchResult reverse_search(const std::string& text_full, const std::vector<Label>& labels,
    LlmClient& client, const LlmEndpointConfig& endpoint, const Prompts& prompts)
{
    const std::vector<ChatMessage> messages { { "user", fill_prompt(prompts.reverse_search, text_full) } };
    const std::string raw = client.complete(endpoint.model_name_search, messages);
    ReverseSearchResult r;
    r.candidates = parse_reverse_response(raw, labels, r.diagnostics);
    return r;
}

ForwardResult forward_validate(const std::string& text_full, const QaCandidate& candidate, LlmClient& client,
    const LlmEndpointConfig& endpoint, const Prompts& prompts)
{
    const std::vector<ChatMessage> messages {
        { "user", fill_prompt(prompts.forward_validate, text_full, candidate.question) }
    };
    return parse_forward_response(client.complete(endpoint.model_name_validate, messages));
}

CrossResult cross_validate(const QaCandidate& candidate, const ForwardResult& forward, const Scene& scene, double eps)
{
    Rejection rej { candidate.question, "", candidate.answer_r1, forward.answer, std::nullopt };
    if (!relative_match(candidate.answer_r1, forward.answer, eps)) {
        rej.failed_check = "llm_cross";
        return rej;
    }
    std::optional<MeasureQuery> query = candidate.target_query ? candidate.target_query
                                                               : infer_query(candidate.question, scene);
    Validation v { true, false, std::nullopt };
    if (query) {
        try {
            const double oracle = measure(scene, *query).value;
            if (!relative_match(forward.answer, oracle, eps)) {
                rej.failed_check = "oracle";
                rej.oracle_value = oracle;
                return rej;
            }
            v.oracle = true;
            v.oracle_value = oracle;
        } catch (const GeometryError&) {
            // Not resolvable by the oracle; the LLM agreement stands alone.
        }
    }
    return QaVerified { candidate.question, forward.answer, forward.cot, v, route_question(candidate.question, query),
        query };
}

std::vector<QaVerified> offline_qa(const DslSequence& sequence, const Scene& scene)
{
    (void)sequence;
    std::set<std::pair<Label, Label>> given_pairs;
    std::set<std::array<Label, 3>> given_angles;
    for (const auto& a : scene.annotations) {
        if ((a.kind == AnnotationKind::LengthLabel || a.kind == AnnotationKind::RadiusLabel) && a.valued()
            && a.target.size() == 2) {
            given_pairs.insert(std::minmax(a.target[0], a.target[1]));
        }
        if ((a.kind == AnnotationKind::AngleLabel || a.kind == AnnotationKind::RightAngleMark)
            && a.target.size() == 3) {
            auto [lo, hi] = std::minmax(a.target[0], a.target[2]);
            given_angles.insert({ lo, a.target[1], hi });
        }
    }

    std::vector<QaVerified> out;
    auto emit = [&](std::string question, MeasureQuery q, QuestionType type) {
        double value;
        try {
            value = measure(scene, q).value;
        } catch (const GeometryError&) {
            return;
        }
        if (!std::isfinite(value)) {
            return;
        }
        std::string step = "[machine-generated] Computed " + q.to_string() + " from the constructed figure.";
        out.push_back(QaVerified { std::move(question), value, { std::move(step) }, Validation { false, true, value },
            type, std::move(q) });
    };

    const auto pts = scene.registry.points();
    for (std::size_t i = 0; i < pts.size(); ++i) {
        for (std::size_t j = i + 1; j < pts.size(); ++j) {
            if (given_pairs.contains(std::minmax(pts[i], pts[j]))) {
                continue;
            }
            const Vec2* a = scene.find(pts[i]);
            const Vec2* b = scene.find(pts[j]);
            if (!a || !b || dist(*a, *b) < kDeltaMin) {
                continue;
            }
            emit(fmt::format("What is the length of {}{}?", pts[i].name, pts[j].name),
                MeasureQuery::length(pts[i], pts[j]), QuestionType::Length);
        }
    }
    for (const auto& ang : scene.registry.angles()) {
        auto [lo, hi] = std::minmax(ang[0], ang[2]);
        if (given_angles.contains({ lo, ang[1], hi })) {
            continue;
        }
        const Vec2* p = scene.find(ang[0]);
        const Vec2* v = scene.find(ang[1]);
        const Vec2* r = scene.find(ang[2]);
        if (!p || !v || !r) {
            continue;
        }
        const double deg = angle_deg(*p, *v, *r);
        if (deg < 1e-6 || deg > 180 - 1e-6) {
            continue;
        }
        emit(fmt::format("What is the measure of ∠{}{}{}?", ang[0].name, ang[1].name, ang[2].name),
            MeasureQuery::angle(ang[0], ang[1], ang[2]), QuestionType::Angle);
    }
    for (const auto& shape : scene.registry.shapes()) {
        const std::string name = shape_noun(shape) + " " + shape.joined();
        if (shape.kind != "Arc") {
            emit("What is the area of " + name + "?", MeasureQuery::of_shape(MeasureKind::Area, shape),
                QuestionType::Shape);
            emit("What is the perimeter of " + name + "?", MeasureQuery::of_shape(MeasureKind::Perimeter, shape),
                QuestionType::Shape);
        }
        if (shape.kind == "Arc" || shape.kind == "Sector" || shape.kind == "Semicircle") {
            emit("What is the arc length of " + name + "?", MeasureQuery::of_shape(MeasureKind::ArcLength, shape),
                QuestionType::Length);
        }
    }
    return out;
}

QaOutcome run_cot_qa(const std::string& text_full, const DslSequence& sequence, const Scene& scene,
    LlmClient& client, const LlmEndpointConfig& endpoint, const Prompts& prompts, std::size_t cap, double eps)
{
    QaOutcome outcome;
    auto labels = scene.registry.points();
    if (labels.empty()) {
        labels = ElementRegistry(sequence).points();
    }
    auto rs = reverse_search(text_full, labels, client, endpoint, prompts);
    outcome.diagnostics = std::move(rs.diagnostics);
    for (const auto& candidate : rs.candidates) {
        if (outcome.accepted.size() >= cap) {
            break;
        }
        ForwardResult fwd;
        try {
            fwd = forward_validate(text_full, candidate, client, endpoint, prompts);
        } catch (const QaError& e) {
            if (e.code() != QaErrorCode::AnswerUnparseable) {
                throw;
            }
            outcome.rejected.push_back(
                Rejection { candidate.question, "forward_unparseable", candidate.answer_r1, std::nullopt, std::nullopt });
            continue;
        }
        auto result = cross_validate(candidate, fwd, scene, eps);
        if (auto* ok = std::get_if<QaVerified>(&result)) {
            outcome.accepted.push_back(std::move(*ok));
        } else {
            outcome.rejected.push_back(std::get<Rejection>(std::move(result)));
        }
    }
    return outcome;
}

// ---------------------------------------------------------------------------
// Simulated endpoint

namespace {

    std::uint64_t fnv1a(std::string_view s)
    {
        std::uint64_t h = 1469598103934665603ULL;
        for (unsigned char c : s) {
            h = (h ^ c) * 1099511628211ULL;
        }
        return h;
    }

    std::string decimal(double v)
    {
        std::string s = fmt::format("{:.4f}", v);
        while (s.back() == '0') {
            s.pop_back();
        }
        if (s.back() == '.') {
            s.pop_back();
        }
        return s == "-0" ? "0" : s;
    }

    /// Symbolic form when the value is a simple multiple of π, else a decimal.
    std::string answer_text(double v, bool symbolic)
    {
        if (symbolic) {
            const double k = v / std::numbers::pi;
            for (int den : { 1, 2, 3, 4, 6, 8, 9, 12 }) {
                const double num = std::round(k * den);
                if (num != 0 && std::abs(k * den - num) < 1e-9) {
                    const auto n = static_cast<long long>(num);
                    if (den == 1) {
                        return n == 1 ? "π" : fmt::format("{}π", n);
                    }
                    return n == 1 ? fmt::format("π/{}", den) : fmt::format("{}π/{}", n, den);
                }
            }
        }
        return decimal(v);
    }

    const char* kFillerSteps[] = {
        "List the given measurements that involve the points in question.",
        "Place the figure so that the given lengths and angles hold.",
        "Relate the requested quantity to the known sides and angles.",
        "Apply the appropriate formula to the related quantities.",
        "Simplify the resulting expression.",
    };

} // namespace

void SimulatedLlmClient::bind(const std::string& text_full, const DslSequence& sequence, const Scene& scene)
{
    Bound b { offline_qa(sequence, scene), fnv1a(text_full) };
    std::lock_guard lock(mutex_);
    bound_[text_full] = std::move(b);
}

std::string SimulatedLlmClient::complete(const std::string& model, const std::vector<ChatMessage>& messages)
{
    (void)model;
    if (messages.empty()) {
        throw QaError(QaErrorCode::ResponseUnparseable, "empty request");
    }
    const std::string& prompt = messages.back().content;
    std::optional<Bound> bound;
    {
        std::lock_guard lock(mutex_);
        std::size_t best = 0;
        for (const auto& [text, b] : bound_) {
            if (text.size() > best && prompt.find(text) != std::string::npos) {
                bound = b;
                best = text.size();
            }
        }
    }
    if (!bound) {
        return "I could not identify the figure these conditions describe.";
    }

    for (const auto& q : bound->questions) {
        if (prompt.find(q.question) == std::string::npos) {
            continue;
        }
        const std::uint64_t h = fnv1a(q.question) ^ bound->salt;
        const std::size_t steps = 2 + h % 5;
        std::string out;
        for (std::size_t i = 0; i < steps; ++i) {
            const char* text = i + 1 == steps ? "Evaluate to obtain the final value."
                                              : kFillerSteps[i % std::size(kFillerSteps)];
            out += fmt::format("Step {}: {}\n", i + 1, text);
        }
        out += "Answer: " + answer_text(q.answer, (h >> 8) % 2 == 0) + "\n";
        return out;
    }

    // Reverse search: a deterministic subset of the oracle-resolvable questions.
    json arr = json::array();
    const auto& qs = bound->questions;
    if (!qs.empty()) {
        const std::size_t want = std::min<std::size_t>(qs.size(), 3);
        const std::size_t stride = qs.size() / want;
        for (std::size_t i = 0; i < want; ++i) {
            const auto& q = qs[(bound->salt + i * stride) % qs.size()];
            json item = { { "question", q.question },
                { "answer", answer_text(q.answer, ((bound->salt >> (i + 3)) & 1) != 0) } };
            if (q.query) {
                item["query"] = q.query->to_string();
            }
            arr.push_back(std::move(item));
        }
    }
    return "Derived conclusions and questions:\n```json\n" + arr.dump(2) + "\n```\n";
}

} // namespace geosynth
