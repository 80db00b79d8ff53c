#include "geosynth/qa.hpp"
#include "geosynth/realizer.hpp"

#include <httplib.h>
#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <numbers>
#include <sstream>
#include <thread>

using namespace geosynth;

namespace {

std::string fixture(const std::string& name)
{
    std::ifstream in(std::string(GEOSYNTH_TEST_FIXTURES) + "/responses/" + name);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<Label> labels(std::initializer_list<const char*> names)
{
    std::vector<Label> out;
    for (auto n : names) {
        out.push_back(Label { n });
    }
    return out;
}

struct Fixed : LlmClient {
    std::string reply;
    std::vector<std::vector<ChatMessage>> seen;
    std::string complete(const std::string&, const std::vector<ChatMessage>& m) override
    {
        seen.push_back(m);
        return reply;
    }
};

} // namespace

TEST(Normalize, Forms)
{
    auto near = [](std::string_view s, double v) {
        auto x = normalize_answer(s);
        ASSERT_TRUE(x) << s;
        EXPECT_NEAR(*x, v, 1e-9) << s;
    };
    near("5", 5);
    near("≈5.0", 5);
    near("4π", 4 * std::numbers::pi);
    near("5√2", 5 * std::sqrt(2.0));
    near("\\frac{25}{2}", 12.5);
    near("12.57 square units", 12.57);
    near("60°", 60);
    near("60 degrees", 60);
    near("AC = 5", 5);
    near("$\\boxed{2\\sqrt{3}}$", 2 * std::sqrt(3.0));
    near("25π/6", 25 * std::numbers::pi / 6);
    near("3^2 + 4", 13);
    near("1,024", 1024);
    EXPECT_FALSE(normalize_answer("twelve"));
    EXPECT_FALSE(normalize_answer(""));
    EXPECT_FALSE(normalize_answer("5/0"));
}

TEST(ReverseParse, ExtractsCandidateFromRecordedResponse)
{
    std::vector<std::string> diags;
    const auto c = parse_reverse_response(fixture("reverse_345.txt"), labels({ "A", "B", "C" }), diags);
    ASSERT_EQ(c.size(), 2u);
    EXPECT_EQ(c[0].question, "What is the length of AC?");
    EXPECT_EQ(c[0].answer_r1, 5);
    EXPECT_FALSE(c[0].target_query);
    EXPECT_EQ(c[1].answer_r1, 6);
    ASSERT_TRUE(c[1].target_query);
    EXPECT_EQ(c[1].target_query->to_string(), "area(Triangle(A,B,C))");
    // Unknown label X and a non-numeric answer are dropped with diagnostics.
    EXPECT_EQ(diags.size(), 2u);
}

TEST(ReverseParse, ProseAndEmpty)
{
    std::vector<std::string> diags;
    try {
        parse_reverse_response("The triangle is a right triangle with hypotenuse 5.", {}, diags);
        FAIL();
    } catch (const QaError& e) {
        EXPECT_EQ(e.code(), QaErrorCode::ResponseUnparseable);
    }
    EXPECT_TRUE(parse_reverse_response("[]", {}, diags).empty());
    EXPECT_THROW(parse_reverse_response("[ not json ]", {}, diags), QaError);
}

TEST(ForwardParse, StepsAndAnswer)
{
    const auto r = parse_forward_response(fixture("forward_345.txt"));
    EXPECT_EQ(r.answer, 5);
    ASSERT_EQ(r.cot.size(), 4u);
    EXPECT_EQ(r.cot[3], "Taking the positive root gives AC = 5.");
    try {
        parse_forward_response(fixture("forward_no_steps.txt"));
        FAIL();
    } catch (const QaError& e) {
        EXPECT_EQ(e.code(), QaErrorCode::AnswerUnparseable);
    }
    EXPECT_EQ(parse_forward_response("1. a\n2) b\nFinal answer: ≈5.0\n").answer, 5.0);
    EXPECT_THROW(parse_forward_response("1. a\n2. b\n"), QaError);
}

TEST(Stages, PromptsCarryConditionsAndQuestion)
{
    const std::string text = "Right triangle ABC has ∠B=90°, AB=3, BC=4.";
    Fixed client;
    client.reply = fixture("reverse_345.txt");
    LlmEndpointConfig ep;
    auto rs = reverse_search(text, labels({ "A", "B", "C" }), client, ep);
    EXPECT_EQ(rs.candidates.size(), 2u);
    EXPECT_NE(client.seen[0][0].content.find(text), std::string::npos);
    EXPECT_EQ(client.seen[0][0].content.find("{{"), std::string::npos);

    client.reply = fixture("forward_345.txt");
    auto fw = forward_validate(text, rs.candidates[0], client, ep);
    EXPECT_EQ(fw.cot.size(), 4u);
    EXPECT_NE(client.seen[1][0].content.find("What is the length of AC?"), std::string::npos);
}

TEST(CrossValidate, Examples)
{
    const auto scene = realize(parse("Triangle(A,B,C)=(3,4,90)"));
    QaCandidate c { "What is the length of AC?", 5, std::nullopt, "" };
    auto ok = cross_validate(c, ForwardResult { 5, { "s" }, "" }, scene);
    ASSERT_TRUE(std::holds_alternative<QaVerified>(ok));
    const auto& v = std::get<QaVerified>(ok);
    EXPECT_TRUE(v.validation.llm_cross);
    EXPECT_TRUE(v.validation.oracle);
    EXPECT_NEAR(*v.validation.oracle_value, 5, 1e-9);
    EXPECT_EQ(v.type, QuestionType::Length);

    auto bad = cross_validate(c, ForwardResult { 4.8, { "s" }, "" }, scene, 0.02);
    ASSERT_TRUE(std::holds_alternative<Rejection>(bad));
    EXPECT_EQ(std::get<Rejection>(bad).failed_check, "llm_cross");

    QaCandidate wrong { "What is the length of AC?", 6, std::nullopt, "" };
    auto o = cross_validate(wrong, ForwardResult { 6, { "s" }, "" }, scene);
    ASSERT_TRUE(std::holds_alternative<Rejection>(o));
    EXPECT_EQ(std::get<Rejection>(o).failed_check, "oracle");

    const auto circle = realize(parse("Circle(O)=(2)"));
    QaCandidate area { "What is the area of circle O?", 12.57, std::nullopt, "" };
    auto a = cross_validate(area, ForwardResult { 12.57, { "s" }, "" }, circle, 0.02);
    ASSERT_TRUE(std::holds_alternative<QaVerified>(a));
    EXPECT_NEAR(*std::get<QaVerified>(a).validation.oracle_value, 4 * std::numbers::pi, 1e-12);
    EXPECT_EQ(std::get<QaVerified>(a).type, QuestionType::Shape);

    // Not resolvable: accepted on LLM agreement alone.
    QaCandidate vague { "How many right angles are there?", 1, std::nullopt, "" };
    auto n = cross_validate(vague, ForwardResult { 1, { "s" }, "" }, scene);
    ASSERT_TRUE(std::holds_alternative<QaVerified>(n));
    EXPECT_FALSE(std::get<QaVerified>(n).validation.oracle);
}

TEST(Routing, KeywordsAndQueries)
{
    EXPECT_EQ(route_question("What is the measure of ∠ABC?", std::nullopt), QuestionType::Angle);
    EXPECT_EQ(route_question("Find the perimeter of square ABCD.", std::nullopt), QuestionType::Shape);
    EXPECT_EQ(route_question("How long is AC?", std::nullopt), QuestionType::Length);
    EXPECT_EQ(route_question("anything", MeasureQuery::angle(Label { "A" }, Label { "B" }, Label { "C" })),
        QuestionType::Angle);
    const auto scene = realize(parse("Triangle(A,B,C)=(3,4,90)\nCircle(O)=(2)"));
    EXPECT_EQ(infer_query("What is the area of triangle ABC?", scene)->to_string(), "area(Triangle(A,B,C))");
    EXPECT_EQ(infer_query("Find angle ABC.", scene)->to_string(), "angle(A,B,C)");
    EXPECT_EQ(infer_query("What is the distance between A and O?", scene)->to_string(), "length(A,O)");
    EXPECT_EQ(infer_query("What is the perimeter of circle O?", scene)->to_string(), "perimeter(Circle(O))");
}

TEST(OfflineQa, Examples)
{
    const auto seq = parse("Triangle(A,B,C)=(3,4,90)");
    const auto scene = realize(seq);
    const auto qa = offline_qa(seq, scene);
    bool found = false;
    for (const auto& q : qa) {
        EXPECT_TRUE(q.validation.oracle);
        EXPECT_FALSE(q.validation.llm_cross);
        ASSERT_EQ(q.cot.size(), 1u);
        EXPECT_EQ(q.cot[0].rfind("[machine-generated]", 0), 0u);
        if (q.question == "What is the length of AC?") {
            found = true;
            EXPECT_NEAR(q.answer, 5, 1e-9);
        }
        // Given lengths are not asked.
        EXPECT_NE(q.question, "What is the length of AB?");
    }
    EXPECT_TRUE(found);

    const auto cseq = parse("Circle(O)=(2)");
    const auto cqa = offline_qa(cseq, realize(cseq));
    ASSERT_FALSE(cqa.empty());
    EXPECT_EQ(cqa[0].question, "What is the area of circle O?");
    EXPECT_NEAR(cqa[0].answer, 4 * std::numbers::pi, 1e-12);
}

TEST(OfflineQa, LengthQuestionBound)
{
    const auto seq = parse("Square(A,B,C,D)=(2)\nMidpoint(E,Line(A,B))\nCentroid(F,A,C,D)\nFoot(G,F,Line(B,C))");
    const auto scene = realize(seq);
    const std::size_t k = scene.points.size();
    std::size_t lengths = 0;
    for (const auto& q : offline_qa(seq, scene)) {
        lengths += q.query && q.query->kind == MeasureKind::Length;
    }
    EXPECT_LE(lengths, k * (k - 1) / 2);
    EXPECT_GT(lengths, 0u);
}

TEST(Fixtures, RecordThenReplay)
{
    const auto dir = std::filesystem::temp_directory_path() / "geosynth_fixture_test";
    std::filesystem::remove_all(dir);
    Fixed inner;
    inner.reply = "Answer: 1";
    RecordingLlmClient rec(inner, dir);
    const std::vector<ChatMessage> msgs { { "user", "hello" } };
    EXPECT_EQ(rec.complete("m", msgs), "Answer: 1");
    FixtureLlmClient replay(dir);
    EXPECT_EQ(replay.complete("m", msgs), "Answer: 1");
    try {
        replay.complete("other-model", msgs);
        FAIL();
    } catch (const QaError& e) {
        EXPECT_EQ(e.code(), QaErrorCode::FixtureMissing);
    }
    EXPECT_NE(fixture_key("m", msgs), fixture_key("m", { { "user", "hello!" } }));
    std::filesystem::remove_all(dir);
}

TEST(Simulated, FullLoopAgreesWithOracle)
{
    const auto seq = parse("Triangle(A,B,C)=(3,4,90)\nMidpoint(D,Line(A,C))\nCircle(O)=(2)");
    const auto scene = realize(seq);
    const std::string text = "Conditions for this figure.";
    SimulatedLlmClient sim;
    sim.bind(text, seq, scene);
    const auto out = run_cot_qa(text, seq, scene, sim, LlmEndpointConfig {}, Prompts::builtin(), 2);
    EXPECT_EQ(out.accepted.size(), 2u);
    EXPECT_TRUE(out.rejected.empty());
    for (const auto& v : out.accepted) {
        EXPECT_TRUE(v.validation.llm_cross);
        EXPECT_TRUE(v.validation.oracle);
        EXPECT_GE(v.cot.size(), 2u);
    }
}

class HttpClientTest : public ::testing::Test {
protected:
    httplib::Server server;
    std::thread thread;
    int port = 0;
    std::atomic<int> calls { 0 };
    std::atomic<int> fail_first { 0 };
    std::atomic<int> status_on_fail { 503 };
    std::string last_auth;

    void SetUp() override
    {
        server.Post("/v1/chat/completions", [this](const httplib::Request& req, httplib::Response& res) {
            const int n = ++calls;
            last_auth = req.get_header_value("Authorization");
            if (n <= fail_first) {
                res.status = status_on_fail;
                return;
            }
            const auto body = nlohmann::json::parse(req.body);
            const std::string echo = body["model"].get<std::string>() + ":" + body["messages"][0]["content"].get<std::string>();
            res.set_content(nlohmann::json { { "choices", { { { "message", { { "role", "assistant" }, { "content", echo } } } } } } }.dump(),
                "application/json");
        });
        port = server.bind_to_any_port("127.0.0.1");
        thread = std::thread([this] { server.listen_after_bind(); });
        server.wait_until_ready();
        setenv("GEOSYNTH_TEST_KEY", "secret", 1);
    }
    void TearDown() override
    {
        server.stop();
        thread.join();
    }
    LlmEndpointConfig config() const
    {
        LlmEndpointConfig c;
        c.base_url = "http://127.0.0.1:" + std::to_string(port) + "/v1";
        c.api_key_env = "GEOSYNTH_TEST_KEY";
        c.backoff_ms = 1;
        c.timeout_s = 5;
        return c;
    }
};

TEST_F(HttpClientTest, RoundTrip)
{
    HttpLlmClient client(config());
    EXPECT_EQ(client.complete("search-model", { { "user", "hi" } }), "search-model:hi");
    EXPECT_EQ(last_auth, "Bearer secret");
}

TEST_F(HttpClientTest, RetriesTransientFailures)
{
    fail_first = 2;
    HttpLlmClient client(config());
    EXPECT_EQ(client.complete("m", { { "user", "x" } }), "m:x");
    EXPECT_EQ(calls.load(), 3);
}

TEST_F(HttpClientTest, GivesUpAfterMaxAttempts)
{
    fail_first = 100;
    status_on_fail = 429;
    HttpLlmClient client(config());
    try {
        client.complete("m", { { "user", "x" } });
        FAIL();
    } catch (const QaError& e) {
        EXPECT_EQ(e.code(), QaErrorCode::EndpointUnavailable);
    }
    EXPECT_EQ(calls.load(), 3);
}

TEST_F(HttpClientTest, MissingCredential)
{
    auto c = config();
    c.api_key_env = "GEOSYNTH_TEST_KEY_UNSET";
    unsetenv("GEOSYNTH_TEST_KEY_UNSET");
    try {
        HttpLlmClient client(c);
        FAIL();
    } catch (const QaError& e) {
        EXPECT_EQ(e.code(), QaErrorCode::AuthMissing);
    }
}

TEST(HttpClient, UnreachableEndpoint)
{
    LlmEndpointConfig c;
    c.base_url = "http://127.0.0.1:9/v1";
    c.api_key_env = "";
    c.backoff_ms = 1;
    c.timeout_s = 1;
    c.max_attempts = 2;
    HttpLlmClient client(c);
    try {
        client.complete("m", { { "user", "x" } });
        FAIL();
    } catch (const QaError& e) {
        EXPECT_EQ(e.code(), QaErrorCode::EndpointUnavailable);
    }
}

TEST(EndpointConfig, Problems)
{
    LlmEndpointConfig c;
    EXPECT_TRUE(c.problems().empty());
    c.timeout_s = 0;
    c.max_attempts = 0;
    EXPECT_EQ(c.problems().size(), 2u);
}
