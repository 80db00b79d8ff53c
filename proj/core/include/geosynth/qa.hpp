#pragma once

#include "geosynth/dsl.hpp"
#include "geosynth/measure.hpp"
#include "geosynth/scene.hpp"

#include <chrono>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <semaphore>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace geosynth {

inline constexpr double kEpsMatch = 0.02;

/// Evaluates an LLM answer such as "5", "≈5.0", "4π", "5√2", "\frac{25}{2}",
/// "12.57 square units" or "60°" to a number.
std::optional<double> normalize_answer(std::string_view text);

enum class QuestionType { Length, Angle, Shape };

std::string_view to_string(QuestionType t);
std::optional<QuestionType> question_type_from_string(std::string_view s);

/// Query type when known, else keywords: area/perimeter -> shape,
/// angle/∠/degree -> angle, otherwise length.
QuestionType route_question(std::string_view question, const std::optional<MeasureQuery>& query);

/// Best-effort measure query for questions like "What is the length of AC?",
/// "Find ∠ABC." or "What is the area of circle O?".
std::optional<MeasureQuery> infer_query(std::string_view question, const Scene& scene);

struct ChatMessage {
    std::string role;
    std::string content;
    friend bool operator==(const ChatMessage&, const ChatMessage&) = default;
};

struct LlmEndpointConfig {
    std::string base_url = "http://127.0.0.1:8080/v1";
    std::string model_name_search = "search-model";
    std::string model_name_validate = "validate-model";
    std::string api_key_env = "GEOSYNTH_LLM_API_KEY";
    double timeout_s = 120;
    int max_concurrent = 4;
    int max_attempts = 3;
    int backoff_ms = 500;

    std::vector<std::string> problems() const;
};

enum class QaErrorCode { EndpointUnavailable, ResponseUnparseable, AuthMissing, AnswerUnparseable, FixtureMissing };

std::string_view to_string(QaErrorCode code);

class QaError : public std::runtime_error {
public:
    QaError(QaErrorCode code, const std::string& detail);
    QaErrorCode code() const { return code_; }

private:
    QaErrorCode code_;
};

/// Chat completion: message list in, text out. Implementations must be
/// safe to call from several threads.
class LlmClient {
public:
    virtual ~LlmClient() = default;
    virtual std::string complete(const std::string& model, const std::vector<ChatMessage>& messages) = 0;
};

/// OpenAI-style `POST {base_url}/chat/completions` with bounded concurrency
/// and exponential backoff on transport errors, 429 and 5xx.
class HttpLlmClient : public LlmClient {
public:
    /// Throws QaError(AuthMissing) if the credential variable is unset.
    explicit HttpLlmClient(LlmEndpointConfig config);
    std::string complete(const std::string& model, const std::vector<ChatMessage>& messages) override;

private:
    LlmEndpointConfig config_;
    std::string api_key_;
    std::string origin_;
    std::string path_prefix_;
    std::unique_ptr<std::counting_semaphore<>> slots_;
};

/// File name (without extension) of the fixture for a request.
std::string fixture_key(const std::string& model, const std::vector<ChatMessage>& messages);

/// Replays `<dir>/<fixture_key>.json` files; throws QaError(FixtureMissing).
class FixtureLlmClient : public LlmClient {
public:
    explicit FixtureLlmClient(std::filesystem::path dir);
    std::string complete(const std::string& model, const std::vector<ChatMessage>& messages) override;

private:
    std::filesystem::path dir_;
};

/// Forwards to `inner` and writes every exchange as a fixture.
class RecordingLlmClient : public LlmClient {
public:
    RecordingLlmClient(LlmClient& inner, std::filesystem::path dir);
    std::string complete(const std::string& model, const std::vector<ChatMessage>& messages) override;

private:
    LlmClient& inner_;
    std::filesystem::path dir_;
    std::mutex mutex_;
};

/// Prompt templates with `{{conditions}}` and `{{question}}` placeholders.
struct Prompts {
    std::string reverse_search;
    std::string forward_validate;

    static Prompts builtin();
    /// Reads reverse_search.txt and forward_validate.txt from `dir`.
    static Prompts from_dir(const std::filesystem::path& dir);
};

struct QaCandidate {
    std::string question;
    double answer_r1 = 0;
    std::optional<MeasureQuery> target_query;
    std::string raw_response;
};

struct ForwardResult {
    double answer = 0;
    std::vector<std::string> cot;
    std::string raw_response;
};

struct Validation {
    bool llm_cross = false;
    bool oracle = false;
    std::optional<double> oracle_value;
};

struct QaVerified {
    std::string question;
    double answer = 0;
    std::vector<std::string> cot;
    Validation validation;
    QuestionType type = QuestionType::Length;
    std::optional<MeasureQuery> query;
};

struct Rejection {
    std::string question;
    /// "llm_cross", "oracle", "forward_unparseable"
    std::string failed_check;
    double answer_r1 = 0;
    std::optional<double> answer_v3;
    std::optional<double> oracle_value;
};

using CrossResult = std::variant<QaVerified, Rejection>;

/// Parses a JSON array of {question, answer[, query]} objects, possibly
/// wrapped in prose or a code fence. Malformed items are dropped with a
/// diagnostic; labels must exist in `known_labels` when it is non-empty.
/// Throws QaError(ResponseUnparseable) if no array is present.
std::vector<QaCandidate> parse_reverse_response(
    std::string_view raw, const std::vector<Label>& known_labels, std::vector<std::string>& diagnostics);

/// Numbered steps ("1.", "Step 2:", "3)") and a final "Answer: x" line.
/// Throws QaError(AnswerUnparseable) without an answer or without steps.
ForwardResult parse_forward_response(std::string_view raw);

std::string fill_prompt(std::string_view tpl, std::string_view conditions, std::string_view question = {});

struct ReverseSearchResult {
    std::vector<QaCandidate> candidates;
    std::vector<std::string> diagnostics;
};

ReverseSearchResult reverse_search(const std::string& text_full, const std::vector<Label>& labels, LlmClient& client,
    const LlmEndpointConfig& endpoint, const Prompts& prompts = Prompts::builtin());

ForwardResult forward_validate(const std::string& text_full, const QaCandidate& candidate, LlmClient& client,
    const LlmEndpointConfig& endpoint, const Prompts& prompts = Prompts::builtin());

/// Accepts iff both LLM answers agree within `eps` and, when the target
/// query is measurable in `scene`, the oracle agrees too.
CrossResult cross_validate(
    const QaCandidate& candidate, const ForwardResult& forward, const Scene& scene, double eps = kEpsMatch);

/// Every oracle-resolvable question not already given by a parameter:
/// point distances, registered angles, shape areas, perimeters and arc
/// lengths. Each carries one machine-generated step.
std::vector<QaVerified> offline_qa(const DslSequence& sequence, const Scene& scene);

struct QaOutcome {
    std::vector<QaVerified> accepted;
    std::vector<Rejection> rejected;
    std::vector<std::string> diagnostics;
};

/// Reverse search, forward validation of each candidate, cross-validation;
/// stops after `cap` accepted pairs.
QaOutcome run_cot_qa(const std::string& text_full, const DslSequence& sequence, const Scene& scene, LlmClient& client,
    const LlmEndpointConfig& endpoint, const Prompts& prompts, std::size_t cap, double eps = kEpsMatch);

/// Deterministic stand-in for the external service, answering from the
/// numeric oracle. Each sample must be bound before its prompts are sent.
class SimulatedLlmClient : public LlmClient {
public:
    void bind(const std::string& text_full, const DslSequence& sequence, const Scene& scene);
    std::string complete(const std::string& model, const std::vector<ChatMessage>& messages) override;

private:
    struct Bound {
        std::vector<QaVerified> questions;
        std::uint64_t salt;
    };
    std::mutex mutex_;
    std::map<std::string, Bound> bound_;
};

} // namespace geosynth
