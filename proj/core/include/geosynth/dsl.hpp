#pragma once

#include "geosynth/catalog.hpp"
#include "geosynth/rational.hpp"

#include <compare>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace geosynth {

/// Point label: an uppercase letter optionally followed by digits (A, B, A1).
struct Label {
    std::string name;

    static bool is_valid(std::string_view text);
    friend auto operator<=>(const Label&, const Label&) = default;
};

/// `Line(X,Y)` argument.
struct LineRef {
    Label from;
    Label to;
    friend bool operator==(const LineRef&, const LineRef&) = default;
};

using Arg = std::variant<Label, LineRef>;

/// One Geo-DSL statement.
struct Statement {
    std::string constructor;
    std::vector<Arg> args;
    std::vector<Rational> params;
    /// Source line for diagnostics; not part of structural equality.
    int source_line = 0;

    const CatalogEntry* entry() const { return ElementCatalog::instance().find(constructor); }
    /// Category of the constructor, or nullopt if it is not in the catalog.
    std::optional<Category> kind() const;
    /// Argument labels in order with `Line(X,Y)` flattened to X, Y.
    std::vector<Label> labels() const;

    friend bool operator==(const Statement& a, const Statement& b)
    {
        return a.constructor == b.constructor && a.args == b.args && a.params == b.params;
    }
};

struct DslSequence {
    std::vector<Statement> statements;

    bool empty() const { return statements.empty(); }
    std::size_t size() const { return statements.size(); }
    friend bool operator==(const DslSequence&, const DslSequence&) = default;
};

enum class DiagCode {
    UnknownConstructor,
    StandaloneLine,
    ArityMismatch,
    UndefinedReference,
    DuplicateDefinition,
    RepeatedReference,
    AngleOutOfRange,
    NonPositiveLength,
    FirstStatementNotShape,
};

std::string_view to_string(DiagCode code);

/// One invariant violation; `statement` is 1-based.
struct Diagnostic {
    DiagCode code;
    int statement;
    std::string label;
    std::string message;
};

enum class DslErrorCode {
    Syntax,
    UnknownConstructor,
    ArityMismatch,
    UndefinedReference,
    DuplicateDefinition,
    Invalid,
};

class DslError : public std::runtime_error {
public:
    DslError(DslErrorCode code, int line, int column, std::string label, std::string detail);

    DslErrorCode code() const { return code_; }
    int line() const { return line_; }
    int column() const { return column_; }
    /// Offending label or constructor name, when there is one.
    const std::string& label() const { return label_; }
    /// For syntax errors: what the parser expected.
    const std::string& detail() const { return detail_; }

private:
    DslErrorCode code_;
    int line_;
    int column_;
    std::string label_;
    std::string detail_;
};

/// Parses canonical text without semantic checks. Throws DslError(Syntax).
DslSequence parse_syntax(std::string_view source);

/// Parses and validates; throws DslError carrying the first violation.
DslSequence parse(std::string_view source);

std::string print(const Statement& statement);
/// One LF-terminated line per statement; empty sequence prints as "".
std::string print(const DslSequence& sequence);

/// Empty iff the sequence satisfies every statement and sequence invariant.
std::vector<Diagnostic> validate(const DslSequence& sequence);

} // namespace geosynth
