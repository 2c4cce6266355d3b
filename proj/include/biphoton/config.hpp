#pragma once
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "biphoton/setup.hpp"

namespace biphoton {

enum class Unit { Nanometer, Micrometer, Femtosecond, Picosecond, Nanosecond,
                  Degree, Radian, Dimensionless };

const char* unit_name(Unit unit);

/// A parsed numeric token with its declared unit.
struct Quantity {
    double value = 0.0;
    Unit unit = Unit::Dimensionless;

    bool is_length() const { return unit == Unit::Nanometer || unit == Unit::Micrometer; }
    bool is_time() const {
        return unit == Unit::Femtosecond || unit == Unit::Picosecond || unit == Unit::Nanosecond;
    }
    bool is_angle() const { return unit == Unit::Degree || unit == Unit::Radian; }

    double as_nm() const;   ///< lengths only
    double as_fs() const;   ///< times only
    double as_rad() const;  ///< angles only
};

/// Lexical or grammatical fault, with 1-based source position and the
/// offending line.
class ParseError : public std::runtime_error {
public:
    ParseError(int line, int column, const std::string& message, std::string snippet);

    int line() const { return line_; }
    int column() const { return column_; }
    const std::string& message() const { return message_; }
    const std::string& snippet() const { return snippet_; }

private:
    int line_;
    int column_;
    std::string message_;
    std::string snippet_;
};

/// Semantic validation failure carrying every violated invariant.
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(std::vector<std::string> violations);

    const std::vector<std::string>& violations() const { return violations_; }

private:
    std::vector<std::string> violations_;
};

/// Parse `<real><space?><unit>`; dimensionless when the unit is absent.
/// line/column seed the error position for embedded use.
Quantity parse_quantity(std::string_view token, int line = 1, int column = 1);

/// Parse an INI-style apparatus description into a validated setup.
/// Omitted keys fall back to the stock apparatus; delays accept either
/// time or length values. Unknown sections, unknown keys and malformed
/// values raise ParseError; invariant violations raise ValidationError
/// listing every failure.
ExperimentSetup parse_config(std::string_view source);

/// Same, with `section.key=value` overrides applied after parsing and
/// before validation.
ExperimentSetup parse_config(std::string_view source, std::span<const std::string> overrides);

/// Canonical rendering: every key explicit, values in canonical units at
/// 17 significant digits, so parse(render(s)) == s exactly.
std::string render_config(const ExperimentSetup& setup);

}  // namespace biphoton
