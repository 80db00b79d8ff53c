#include "geosynth/qa.hpp"

#include <cctype>
#include <cmath>
#include <numbers>

namespace geosynth {

namespace {

    void replace_all(std::string& s, std::string_view from, std::string_view to)
    {
        for (std::size_t pos = 0; (pos = s.find(from, pos)) != std::string::npos; pos += to.size()) {
            s.replace(pos, from.size(), to);
        }
    }

    /// Recursive-descent evaluator over a pre-cleaned ASCII string in which
    /// "π" became 'p', "√" became 'r' and \frac{a}{b} became ((a)/(b)).
    class Eval {
    public:
        explicit Eval(std::string s)
            : s_(std::move(s))
        {
        }

        std::optional<double> run()
        {
            auto v = expr();
            skip();
            if (!v || i_ != s_.size() || !std::isfinite(*v)) {
                return std::nullopt;
            }
            return v;
        }

    private:
        std::string s_;
        std::size_t i_ = 0;

        void skip()
        {
            while (i_ < s_.size() && s_[i_] == ' ') {
                ++i_;
            }
        }
        bool eat(char c)
        {
            skip();
            if (i_ < s_.size() && s_[i_] == c) {
                ++i_;
                return true;
            }
            return false;
        }
        bool starts_factor()
        {
            skip();
            if (i_ >= s_.size()) {
                return false;
            }
            const char c = s_[i_];
            return std::isdigit(static_cast<unsigned char>(c)) || c == '.' || c == '(' || c == 'p' || c == 'r';
        }

        std::optional<double> expr()
        {
            auto v = term();
            while (v) {
                if (eat('+')) {
                    auto r = term();
                    v = r ? std::optional(*v + *r) : std::nullopt;
                } else if (eat('-')) {
                    auto r = term();
                    v = r ? std::optional(*v - *r) : std::nullopt;
                } else {
                    break;
                }
            }
            return v;
        }

        std::optional<double> term()
        {
            auto v = unary();
            while (v) {
                if (eat('*')) {
                    auto r = unary();
                    v = r ? std::optional(*v * *r) : std::nullopt;
                } else if (eat('/')) {
                    auto r = unary();
                    v = r && *r != 0 ? std::optional(*v / *r) : std::nullopt;
                } else if (starts_factor()) {
                    auto r = power();
                    v = r ? std::optional(*v * *r) : std::nullopt;
                } else {
                    break;
                }
            }
            return v;
        }

        std::optional<double> unary()
        {
            if (eat('-')) {
                auto v = unary();
                return v ? std::optional(-*v) : std::nullopt;
            }
            eat('+');
            return power();
        }

        std::optional<double> power()
        {
            auto base = primary();
            if (base && eat('^')) {
                auto e = unary();
                return e ? std::optional(std::pow(*base, *e)) : std::nullopt;
            }
            return base;
        }

        std::optional<double> primary()
        {
            skip();
            if (i_ >= s_.size()) {
                return std::nullopt;
            }
            const char c = s_[i_];
            if (c == '(') {
                ++i_;
                auto v = expr();
                return eat(')') ? v : std::nullopt;
            }
            if (c == 'p') {
                ++i_;
                return std::numbers::pi;
            }
            if (c == 'r') {
                ++i_;
                auto v = power();
                return v && *v >= 0 ? std::optional(std::sqrt(*v)) : std::nullopt;
            }
            if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
                const std::size_t start = i_;
                while (i_ < s_.size() && (std::isdigit(static_cast<unsigned char>(s_[i_])) || s_[i_] == '.')) {
                    ++i_;
                }
                try {
                    return std::stod(s_.substr(start, i_ - start));
                } catch (const std::exception&) {
                    return std::nullopt;
                }
            }
            return std::nullopt;
        }
    };

    /// Rewrites \frac{a}{b} as ((a)/(b)) and \sqrt{a} as r(a).
    std::string expand_latex(std::string s)
    {
        for (std::string_view cmd : { "\\dfrac", "\\tfrac", "\\frac", "\\sqrt" }) {
            std::size_t pos;
            while ((pos = s.find(cmd)) != std::string::npos) {
                const bool frac = cmd != "\\sqrt";
                std::size_t i = pos + cmd.size();
                std::string args[2];
                const int need = frac ? 2 : 1;
                bool ok = true;
                for (int a = 0; a < need && ok; ++a) {
                    while (i < s.size() && s[i] == ' ') {
                        ++i;
                    }
                    if (i >= s.size() || s[i] != '{') {
                        ok = false;
                        break;
                    }
                    int depth = 0;
                    const std::size_t start = i + 1;
                    for (; i < s.size(); ++i) {
                        depth += s[i] == '{';
                        depth -= s[i] == '}';
                        if (depth == 0) {
                            break;
                        }
                    }
                    if (i >= s.size()) {
                        ok = false;
                        break;
                    }
                    args[a] = s.substr(start, i - start);
                    ++i;
                }
                if (!ok) {
                    return {};
                }
                const std::string rep = frac ? "((" + args[0] + ")/(" + args[1] + "))" : "r(" + args[0] + ")";
                s.replace(pos, i - pos, rep);
            }
        }
        return s;
    }

} // namespace

std::optional<double> normalize_answer(std::string_view text)
{
    std::string s(text);
    // Keep only what follows the last '=' or '≈' ("AC = 5", "≈ 12.57").
    for (std::string_view sep : { "≈", "=", "\\approx" }) {
        if (auto pos = s.rfind(sep); pos != std::string::npos) {
            s = s.substr(pos + sep.size());
        }
    }
    if (auto pos = s.find("\\boxed{"); pos != std::string::npos) {
        s = s.substr(pos + 7);
        if (auto end = s.rfind('}'); end != std::string::npos) {
            s = s.substr(0, end);
        }
    }
    replace_all(s, "$", "");
    replace_all(s, "\\left", "");
    replace_all(s, "\\right", "");
    replace_all(s, "\\,", "");
    replace_all(s, "\\pi", "π");
    replace_all(s, "\\cdot", "*");
    replace_all(s, "\\times", "*");
    replace_all(s, "^\\circ", "");
    replace_all(s, "\\circ", "");
    s = expand_latex(s);
    replace_all(s, "×", "*");
    replace_all(s, "·", "*");
    replace_all(s, "π", "p");
    replace_all(s, "√", "r");
    replace_all(s, "²", "");
    replace_all(s, "°", "");
    replace_all(s, "{", "(");
    replace_all(s, "}", ")");
    replace_all(s, ",", "");

    // Words: "pi" and "sqrt" are operators; unit words are dropped.
    std::string out;
    for (std::size_t i = 0; i < s.size();) {
        if (std::isalpha(static_cast<unsigned char>(s[i]))) {
            std::size_t j = i;
            while (j < s.size() && std::isalpha(static_cast<unsigned char>(s[j]))) {
                ++j;
            }
            std::string word = s.substr(i, j - i);
            for (auto& c : word) {
                c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
            }
            if (word == "pi" || word == "p") {
                out += 'p';
            } else if (word == "sqrt" || word == "r") {
                out += 'r';
            }
            i = j;
        } else {
            out += s[i++];
        }
    }
    // A bare trailing "^2" from "units^2" is a unit, not an exponent.
    while (!out.empty() && (out.back() == ' ' || out.back() == '.')) {
        out.pop_back();
    }
    if (out.size() >= 2 && out.substr(out.size() - 2) == "^2" && out.find_first_not_of(" 0123456789.^") == std::string::npos
        && out.find('^') == out.size() - 2) {
        // "12^2" is ambiguous; treat a lone trailing power as intended.
    }
    if (out.empty()) {
        return std::nullopt;
    }
    return Eval(out).run();
}

} // namespace geosynth
