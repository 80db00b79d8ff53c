#include "geosynth/dsl.hpp"

#include <cctype>
#include <set>

namespace geosynth {

bool Label::is_valid(std::string_view text)
{
    if (text.empty() || text.front() < 'A' || text.front() > 'Z') {
        return false;
    }
    for (std::size_t i = 1; i < text.size(); ++i) {
        if (!std::isdigit(static_cast<unsigned char>(text[i]))) {
            return false;
        }
    }
    return text.size() == 1 || text[1] != '0';
}

std::optional<Category> Statement::kind() const
{
    if (const auto* e = entry()) {
        return e->category;
    }
    return std::nullopt;
}

std::vector<Label> Statement::labels() const
{
    std::vector<Label> out;
    for (const auto& arg : args) {
        if (const auto* label = std::get_if<Label>(&arg)) {
            out.push_back(*label);
        } else {
            const auto& line = std::get<LineRef>(arg);
            out.push_back(line.from);
            out.push_back(line.to);
        }
    }
    return out;
}

std::string_view to_string(DiagCode code)
{
    switch (code) {
    case DiagCode::UnknownConstructor:
        return "UnknownConstructor";
    case DiagCode::StandaloneLine:
        return "StandaloneLine";
    case DiagCode::ArityMismatch:
        return "ArityMismatch";
    case DiagCode::UndefinedReference:
        return "UndefinedReference";
    case DiagCode::DuplicateDefinition:
        return "DuplicateDefinition";
    case DiagCode::RepeatedReference:
        return "RepeatedReference";
    case DiagCode::AngleOutOfRange:
        return "AngleOutOfRange";
    case DiagCode::NonPositiveLength:
        return "NonPositiveLength";
    case DiagCode::FirstStatementNotShape:
        return "FirstStatementNotShape";
    }
    return "?";
}

namespace {

    std::string error_message(DslErrorCode code, int line, int column, const std::string& label,
        const std::string& detail)
    {
        std::string msg;
        switch (code) {
        case DslErrorCode::Syntax:
            msg = "syntax error";
            break;
        case DslErrorCode::UnknownConstructor:
            msg = "unknown constructor '" + label + "'";
            break;
        case DslErrorCode::ArityMismatch:
            msg = "arity mismatch for '" + label + "'";
            break;
        case DslErrorCode::UndefinedReference:
            msg = "undefined reference '" + label + "'";
            break;
        case DslErrorCode::DuplicateDefinition:
            msg = "duplicate definition of '" + label + "'";
            break;
        case DslErrorCode::Invalid:
            msg = "invalid statement";
            break;
        }
        msg += " at line " + std::to_string(line);
        if (column > 0) {
            msg += ", column " + std::to_string(column);
        }
        if (!detail.empty()) {
            msg += ": " + detail;
        }
        return msg;
    }

} // namespace

DslError::DslError(DslErrorCode code, int line, int column, std::string label, std::string detail)
    : std::runtime_error(error_message(code, line, column, label, detail))
    , code_(code)
    , line_(line)
    , column_(column)
    , label_(std::move(label))
    , detail_(std::move(detail))
{
}

// ---------------------------------------------------------------- parsing

namespace {

    class LineParser {
    public:
        LineParser(std::string_view text, int line)
            : text_(text)
            , line_(line)
        {
        }

        Statement parse()
        {
            Statement st;
            st.source_line = line_;
            st.constructor = ident("constructor name");
            expect('(');
            std::vector<Rational> inline_params;
            if (!peek(')')) {
                do {
                    parse_arg(st, inline_params);
                } while (accept(','));
            }
            expect(')');
            st.params = std::move(inline_params);
            if (accept('=')) {
                if (accept('(')) {
                    do {
                        st.params.push_back(number());
                    } while (accept(','));
                    expect(')');
                } else {
                    st.params.push_back(number());
                }
            }
            skip_ws();
            if (pos_ != text_.size()) {
                fail("end of statement");
            }
            return st;
        }

    private:
        void parse_arg(Statement& st, std::vector<Rational>& inline_params)
        {
            skip_ws();
            if (pos_ < text_.size()
                && (std::isdigit(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '-'
                    || text_[pos_] == '+')) {
                inline_params.push_back(number());
                return;
            }
            if (!inline_params.empty()) {
                fail("number");
            }
            const std::size_t start = pos_;
            std::string name = ident("point label or Line(...)");
            if (peek('(')) {
                if (name != "Line") {
                    pos_ = start;
                    fail("point label or Line(...)");
                }
                expect('(');
                Label from = label();
                expect(',');
                Label to = label();
                expect(')');
                st.args.emplace_back(LineRef { std::move(from), std::move(to) });
                return;
            }
            if (!Label::is_valid(name)) {
                pos_ = start;
                fail("point label");
            }
            st.args.emplace_back(Label { std::move(name) });
        }

        Label label()
        {
            skip_ws();
            const std::size_t start = pos_;
            std::string name = ident("point label");
            if (!Label::is_valid(name)) {
                pos_ = start;
                fail("point label");
            }
            return Label { std::move(name) };
        }

        std::string ident(const char* what)
        {
            skip_ws();
            const std::size_t start = pos_;
            if (pos_ >= text_.size()
                || !(std::isalpha(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
                fail(what);
            }
            while (pos_ < text_.size()
                && (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
                ++pos_;
            }
            return std::string(text_.substr(start, pos_ - start));
        }

        Rational number()
        {
            skip_ws();
            const std::size_t start = pos_;
            if (pos_ < text_.size() && (text_[pos_] == '-' || text_[pos_] == '+')) {
                ++pos_;
            }
            while (pos_ < text_.size()
                && (std::isdigit(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '.'
                    || text_[pos_] == '/')) {
                ++pos_;
            }
            auto value = Rational::parse(text_.substr(start, pos_ - start));
            if (!value) {
                pos_ = start;
                fail("number");
            }
            return *value;
        }

        void skip_ws()
        {
            while (pos_ < text_.size() && (text_[pos_] == ' ' || text_[pos_] == '\t')) {
                ++pos_;
            }
        }

        bool peek(char c)
        {
            skip_ws();
            return pos_ < text_.size() && text_[pos_] == c;
        }

        bool accept(char c)
        {
            if (peek(c)) {
                ++pos_;
                return true;
            }
            return false;
        }

        void expect(char c)
        {
            if (!accept(c)) {
                fail(std::string("'") + c + "'");
            }
        }

        [[noreturn]] void fail(const std::string& expected)
        {
            throw DslError(DslErrorCode::Syntax, line_, static_cast<int>(pos_) + 1, "",
                "expected " + expected);
        }

        std::string_view text_;
        int line_;
        std::size_t pos_ = 0;
    };

} // namespace

DslSequence parse_syntax(std::string_view source)
{
    DslSequence seq;
    int line_no = 0;
    std::size_t pos = 0;
    while (pos < source.size()) {
        auto end = source.find('\n', pos);
        if (end == std::string_view::npos) {
            end = source.size();
        }
        std::string_view line = source.substr(pos, end - pos);
        pos = end + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.remove_suffix(1);
        }
        auto first = line.find_first_not_of(" \t");
        if (first == std::string_view::npos || line[first] == '#') {
            continue;
        }
        seq.statements.push_back(LineParser(line, line_no).parse());
    }
    return seq;
}

DslSequence parse(std::string_view source)
{
    DslSequence seq = parse_syntax(source);
    auto diags = validate(seq);
    if (diags.empty()) {
        return seq;
    }
    const Diagnostic& d = diags.front();
    const auto& st = seq.statements[static_cast<std::size_t>(d.statement - 1)];
    const int line = st.source_line > 0 ? st.source_line : d.statement;
    DslErrorCode code = DslErrorCode::Invalid;
    switch (d.code) {
    case DiagCode::UnknownConstructor:
    case DiagCode::StandaloneLine:
        code = DslErrorCode::UnknownConstructor;
        break;
    case DiagCode::ArityMismatch:
        code = DslErrorCode::ArityMismatch;
        break;
    case DiagCode::UndefinedReference:
        code = DslErrorCode::UndefinedReference;
        break;
    case DiagCode::DuplicateDefinition:
        code = DslErrorCode::DuplicateDefinition;
        break;
    default:
        break;
    }
    throw DslError(code, line, 0, d.label, d.message);
}

// --------------------------------------------------------------- printing

namespace {

    void append_args(std::string& out, const Statement& st)
    {
        bool first = true;
        for (const auto& arg : st.args) {
            if (!first) {
                out += ',';
            }
            first = false;
            if (const auto* label = std::get_if<Label>(&arg)) {
                out += label->name;
            } else {
                const auto& line = std::get<LineRef>(arg);
                out += "Line(" + line.from.name + "," + line.to.name + ")";
            }
        }
    }

} // namespace

std::string print(const Statement& st)
{
    const CatalogEntry* e = st.entry();
    ParamStyle style = e ? e->style : ParamStyle::Tuple;
    if (style == ParamStyle::Scalar && st.params.size() != 1) {
        style = ParamStyle::Tuple;
    }
    std::string out = st.constructor + "(";
    append_args(out, st);
    if (style == ParamStyle::Inline) {
        for (const auto& p : st.params) {
            out += (st.args.empty() && &p == &st.params.front()) ? "" : ",";
            out += p.to_string();
        }
    }
    out += ')';
    if (style == ParamStyle::Scalar) {
        out += "=" + st.params.front().to_string();
    } else if (style == ParamStyle::Tuple && !st.params.empty()) {
        out += "=(";
        for (std::size_t i = 0; i < st.params.size(); ++i) {
            out += (i ? "," : "") + st.params[i].to_string();
        }
        out += ')';
    }
    return out;
}

std::string print(const DslSequence& seq)
{
    std::string out;
    for (const auto& st : seq.statements) {
        out += print(st);
        out += '\n';
    }
    return out;
}

// ------------------------------------------------------------- validation

namespace {

    bool arity_matches(const CatalogEntry& e, const Statement& st)
    {
        if (st.params.size() != e.params.size()) {
            return false;
        }
        if (e.variadic()) {
            const auto n = static_cast<int>(st.args.size());
            if (n < e.min_vertices || n > e.max_vertices) {
                return false;
            }
            for (const auto& a : st.args) {
                if (!std::holds_alternative<Label>(a)) {
                    return false;
                }
            }
            return true;
        }
        if (st.args.size() != e.slots.size()) {
            return false;
        }
        for (std::size_t i = 0; i < e.slots.size(); ++i) {
            const bool is_line = std::holds_alternative<LineRef>(st.args[i]);
            const Slot s = e.slots[i];
            const bool wants_line = s == Slot::Line || s == Slot::LineFromNew || s == Slot::LineNewNew;
            if (is_line != wants_line) {
                return false;
            }
        }
        return true;
    }

    class Validator {
    public:
        std::vector<Diagnostic> run(const DslSequence& seq)
        {
            for (std::size_t i = 0; i < seq.statements.size(); ++i) {
                check(seq.statements[i], static_cast<int>(i) + 1);
            }
            return std::move(diags_);
        }

    private:
        void emit(DiagCode code, int index, std::string label, std::string message)
        {
            diags_.push_back({ code, index, std::move(label), std::move(message) });
        }

        void require_defined(const Label& l, int index)
        {
            if (!points_.contains(l)) {
                emit(DiagCode::UndefinedReference, index, l.name,
                    "point " + l.name + " is used before it is defined");
            }
        }

        void introduce(const Label& l, int index, std::vector<Label>& fresh)
        {
            if (points_.contains(l)) {
                emit(DiagCode::DuplicateDefinition, index, l.name,
                    "point " + l.name + " is already defined");
                return;
            }
            fresh.push_back(l);
        }

        void check(const Statement& st, int index)
        {
            const CatalogEntry* e = st.entry();
            if (!e) {
                if (st.constructor == "Line") {
                    emit(DiagCode::StandaloneLine, index, st.constructor,
                        "Line(X,Y) is only allowed as an argument");
                } else {
                    emit(DiagCode::UnknownConstructor, index, st.constructor,
                        "constructor " + st.constructor + " is not in the catalog");
                }
                if (index == 1) {
                    emit(DiagCode::FirstStatementNotShape, index, st.constructor,
                        "the first statement must define a shape");
                }
                return;
            }
            if (!arity_matches(*e, st)) {
                emit(DiagCode::ArityMismatch, index, st.constructor,
                    "arguments or parameters do not match " + e->name);
                return;
            }

            std::vector<Label> fresh;
            for (std::size_t i = 0; i < st.args.size(); ++i) {
                const Slot slot = e->variadic() ? Slot::Vertices : e->slots[i];
                const auto* label = std::get_if<Label>(&st.args[i]);
                const auto* line = std::get_if<LineRef>(&st.args[i]);
                switch (slot) {
                case Slot::NewPoint:
                case Slot::Vertices:
                    introduce(*label, index, fresh);
                    break;
                case Slot::Point:
                    require_defined(*label, index);
                    break;
                case Slot::CenterOrNew:
                    if (!points_.contains(*label)) {
                        fresh.push_back(*label);
                    } else if (circles_.contains(*label)) {
                        emit(DiagCode::DuplicateDefinition, index, "Circle(" + label->name + ")",
                            "circle " + label->name + " is already defined");
                    }
                    break;
                case Slot::Circle:
                    if (!points_.contains(*label)) {
                        require_defined(*label, index);
                    } else if (!circles_.contains(*label)) {
                        emit(DiagCode::UndefinedReference, index, "Circle(" + label->name + ")",
                            "no circle is centered at " + label->name);
                    }
                    break;
                case Slot::Line:
                    require_defined(line->from, index);
                    require_defined(line->to, index);
                    break;
                case Slot::LineFromNew:
                    require_defined(line->from, index);
                    introduce(line->to, index, fresh);
                    break;
                case Slot::LineNewNew:
                    introduce(line->from, index, fresh);
                    introduce(line->to, index, fresh);
                    break;
                }
            }

            std::set<Label> seen;
            for (const auto& l : st.labels()) {
                if (!seen.insert(l).second) {
                    emit(DiagCode::RepeatedReference, index, l.name,
                        "label " + l.name + " appears twice in one statement");
                    break;
                }
            }

            for (std::size_t i = 0; i < st.params.size(); ++i) {
                const Rational& p = st.params[i];
                if (e->params[i] == ParamKind::Length && p <= Rational(0)) {
                    emit(DiagCode::NonPositiveLength, index, "",
                        "length " + p.to_string() + " must be positive");
                } else if (e->params[i] == ParamKind::Angle && (p <= Rational(0) || p >= Rational(180))) {
                    emit(DiagCode::AngleOutOfRange, index, "",
                        "angle " + p.to_string() + " must lie in (0, 180) degrees");
                }
            }

            if (index == 1 && e->category != Category::Shape) {
                emit(DiagCode::FirstStatementNotShape, index, st.constructor,
                    "the first statement must define a shape");
            }

            for (auto& l : fresh) {
                points_.insert(l);
            }
            if (e->rule == Rule::Circle) {
                circles_.insert(std::get<Label>(st.args.front()));
            }
        }

        std::set<Label> points_;
        std::set<Label> circles_;
        std::vector<Diagnostic> diags_;
    };

} // namespace

std::vector<Diagnostic> validate(const DslSequence& sequence) { return Validator().run(sequence); }

} // namespace geosynth
