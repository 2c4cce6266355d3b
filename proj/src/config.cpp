#include "biphoton/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <map>
#include <optional>
#include <sstream>

namespace biphoton {

const char* unit_name(Unit unit) {
    switch (unit) {
        case Unit::Nanometer: return "nm";
        case Unit::Micrometer: return "um";
        case Unit::Femtosecond: return "fs";
        case Unit::Picosecond: return "ps";
        case Unit::Nanosecond: return "ns";
        case Unit::Degree: return "deg";
        case Unit::Radian: return "rad";
        case Unit::Dimensionless: return "";
    }
    return "";
}

double Quantity::as_nm() const {
    switch (unit) {
        case Unit::Nanometer: return value;
        case Unit::Micrometer: return value * 1000.0;
        default: throw std::logic_error("quantity is not a length");
    }
}

double Quantity::as_fs() const {
    switch (unit) {
        case Unit::Femtosecond: return value;
        case Unit::Picosecond: return value * 1000.0;
        case Unit::Nanosecond: return value * 1.0e6;
        default: throw std::logic_error("quantity is not a time");
    }
}

double Quantity::as_rad() const {
    switch (unit) {
        case Unit::Degree: return deg_to_rad(value);
        case Unit::Radian: return value;
        default: throw std::logic_error("quantity is not an angle");
    }
}

ParseError::ParseError(int line, int column, const std::string& message, std::string snippet)
    : std::runtime_error("line " + std::to_string(line) + ", column " + std::to_string(column) +
                         ": " + message),
      line_(line),
      column_(column),
      message_(message),
      snippet_(std::move(snippet)) {}

ValidationError::ValidationError(std::vector<std::string> violations)
    : std::runtime_error([&violations] {
          std::string joined = "invalid configuration:";
          for (const auto& v : violations) joined += "\n  - " + v;
          return joined;
      }()),
      violations_(std::move(violations)) {}

namespace {

std::optional<Unit> unit_from_token(std::string_view token) {
    if (token == "nm") return Unit::Nanometer;
    if (token == "um") return Unit::Micrometer;
    if (token == "fs") return Unit::Femtosecond;
    if (token == "ps") return Unit::Picosecond;
    if (token == "ns") return Unit::Nanosecond;
    if (token == "deg") return Unit::Degree;
    if (token == "rad") return Unit::Radian;
    return std::nullopt;
}

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r'; }

std::string_view trim(std::string_view s) {
    while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
    while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
    return s;
}

}  // namespace

Quantity parse_quantity(std::string_view token, int line, int column) {
    const std::string snippet(token);
    std::string_view rest = token;
    std::size_t leading = 0;
    while (!rest.empty() && is_space(rest.front())) {
        rest.remove_prefix(1);
        ++leading;
    }
    if (rest.empty())
        throw ParseError(line, column, "expected a numeric value", snippet);

    double value = 0.0;
    const char* begin = rest.data();
    const char* end = rest.data() + rest.size();
    auto [next, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc{} || next == begin)
        throw ParseError(line, column + static_cast<int>(leading),
                         "malformed numeric value '" + std::string(rest) + "'", snippet);
    if (!std::isfinite(value))
        throw ParseError(line, column + static_cast<int>(leading), "numeric value is not finite",
                         snippet);

    std::string_view tail(next, static_cast<std::size_t>(end - next));
    std::size_t gap = 0;
    while (!tail.empty() && is_space(tail.front())) {
        tail.remove_prefix(1);
        ++gap;
    }
    tail = trim(tail);
    Quantity q;
    q.value = value;
    if (tail.empty()) {
        q.unit = Unit::Dimensionless;
        return q;
    }
    const auto unit = unit_from_token(tail);
    const int unit_col =
        column + static_cast<int>(leading) + static_cast<int>(next - begin) + static_cast<int>(gap);
    if (!unit)
        throw ParseError(line, unit_col, "unknown unit '" + std::string(tail) + "'", snippet);
    q.unit = *unit;
    return q;
}

namespace {

enum class ValueKind { Length, Time, Delay, Angle, Dimensionless, Integer, Token };

struct KeySchema {
    const char* section;
    const char* key;
    ValueKind kind;
};

// Unknown keys are rejected so typos fail loudly.
constexpr KeySchema kSchema[] = {
    {"pump", "wavelength", ValueKind::Length},
    {"pump", "pulse_fwhm", ValueKind::Time},
    {"pump", "rep_period", ValueKind::Time},
    {"pump", "n_pulses", ValueKind::Integer},
    {"pump", "inter_pulse_delay", ValueKind::Delay},
    {"pump", "extra_phase_path", ValueKind::Length},
    {"crystal", "type", ValueKind::Token},
    {"crystal", "thickness", ValueKind::Length},
    {"filter", "center", ValueKind::Length},
    {"filter", "fwhm", ValueKind::Length},
    {"interferometer", "tau", ValueKind::Delay},
    {"interferometer", "tau1", ValueKind::Delay},
    {"analyzers", "theta1", ValueKind::Angle},
    {"analyzers", "theta2", ValueKind::Angle},
    {"detectors", "jitter", ValueKind::Time},
    {"detectors", "coincidence_window", ValueKind::Time},
    {"detectors", "pair_probability", ValueKind::Dimensionless},
    {"detectors", "efficiency", ValueKind::Dimensionless},
    {"model", "sigma_plus", ValueKind::Time},
    {"model", "sigma_minus", ValueKind::Time},
    {"model", "normalization", ValueKind::Dimensionless},
};

const KeySchema* find_schema(std::string_view section, std::string_view key) {
    for (const auto& s : kSchema)
        if (section == s.section && key == s.key) return &s;
    return nullptr;
}

bool known_section(std::string_view section) {
    for (const auto& s : kSchema)
        if (section == s.section) return true;
    return false;
}

struct RawEntry {
    std::string value;
    int line = 1;
    int column = 1;
    std::string snippet;
};

// section -> key -> entry
using RawConfig = std::map<std::string, std::map<std::string, RawEntry>, std::less<>>;

RawConfig parse_raw(std::string_view source) {
    RawConfig raw;
    std::string current_section;
    int line_no = 0;
    std::size_t pos = 0;
    while (pos <= source.size()) {
        const std::size_t eol = source.find('\n', pos);
        std::string_view line = source.substr(pos, eol == std::string_view::npos ? std::string_view::npos
                                                                                 : eol - pos);
        pos = eol == std::string_view::npos ? source.size() + 1 : eol + 1;
        ++line_no;

        const std::string snippet(line);
        const std::size_t hash = line.find('#');
        if (hash != std::string_view::npos) line = line.substr(0, hash);
        std::string_view body = trim(line);
        if (body.empty()) continue;

        if (body.front() == '[') {
            if (body.back() != ']')
                throw ParseError(line_no, 1, "unterminated section header", snippet);
            const std::string_view name = trim(body.substr(1, body.size() - 2));
            if (!known_section(name))
                throw ParseError(line_no, 1, "unknown section '[" + std::string(name) + "]'",
                                 snippet);
            current_section = std::string(name);
            continue;
        }

        const std::size_t eq = body.find('=');
        if (eq == std::string_view::npos)
            throw ParseError(line_no, 1, "expected 'key = value'", snippet);
        const std::string_view key = trim(body.substr(0, eq));
        const std::string_view value = trim(body.substr(eq + 1));
        const int key_col = static_cast<int>(line.find(key)) + 1;
        if (key.empty())
            throw ParseError(line_no, 1, "missing key before '='", snippet);
        if (current_section.empty())
            throw ParseError(line_no, key_col, "key '" + std::string(key) + "' outside any section",
                             snippet);
        if (!find_schema(current_section, key))
            throw ParseError(line_no, key_col,
                             "unknown key '" + std::string(key) + "' in section [" +
                                 current_section + "]",
                             snippet);
        if (value.empty())
            throw ParseError(line_no, static_cast<int>(line.find('=')) + 2,
                             "missing value for key '" + std::string(key) + "'", snippet);

        auto& section_map = raw[current_section];
        if (section_map.contains(std::string(key)))
            throw ParseError(line_no, key_col, "duplicate key '" + std::string(key) + "'", snippet);
        RawEntry entry;
        entry.value = std::string(value);
        entry.line = line_no;
        entry.column = static_cast<int>(line.find(value)) + 1;
        entry.snippet = snippet;
        section_map[std::string(key)] = std::move(entry);
    }
    return raw;
}

void apply_override(RawConfig& raw, const std::string& spec) {
    const std::size_t dot = spec.find('.');
    const std::size_t eq = spec.find('=');
    if (dot == std::string::npos || eq == std::string::npos || dot > eq)
        throw ParseError(1, 1, "override must look like section.key=value", spec);
    const std::string section(trim(std::string_view(spec).substr(0, dot)));
    const std::string key(trim(std::string_view(spec).substr(dot + 1, eq - dot - 1)));
    const std::string value(trim(std::string_view(spec).substr(eq + 1)));
    if (!known_section(section))
        throw ParseError(1, 1, "override names unknown section '" + section + "'", spec);
    if (!find_schema(section, key))
        throw ParseError(1, 1, "override names unknown key '" + section + "." + key + "'", spec);
    if (value.empty())
        throw ParseError(1, 1, "override has no value", spec);
    RawEntry entry;
    entry.value = value;
    entry.snippet = spec;
    raw[section][key] = std::move(entry);
}

double delay_fs(const Quantity& q, const RawEntry& e) {
    if (q.is_time()) return q.as_fs();
    if (q.is_length()) return delay_from_length_nm(q.as_nm());
    throw ParseError(e.line, e.column, "delay requires a time or length unit", e.snippet);
}

double length_nm(const Quantity& q, const RawEntry& e) {
    if (q.is_length()) return q.as_nm();
    throw ParseError(e.line, e.column, "expected a length unit (nm or um)", e.snippet);
}

double time_fs(const Quantity& q, const RawEntry& e) {
    if (q.is_time()) return q.as_fs();
    throw ParseError(e.line, e.column, "expected a time unit (fs, ps or ns)", e.snippet);
}

double angle_rad(const Quantity& q, const RawEntry& e) {
    if (q.is_angle()) return q.as_rad();
    throw ParseError(e.line, e.column, "expected an angle unit (deg or rad)", e.snippet);
}

double plain(const Quantity& q, const RawEntry& e) {
    if (q.unit != Unit::Dimensionless)
        throw ParseError(e.line, e.column, "expected a dimensionless value", e.snippet);
    return q.value;
}

int integer(const Quantity& q, const RawEntry& e) {
    const double v = plain(q, e);
    const double rounded = std::nearbyint(v);
    if (std::abs(v - rounded) > 1e-9 || std::abs(rounded) > 1e9)
        throw ParseError(e.line, e.column, "expected an integer", e.snippet);
    return static_cast<int>(rounded);
}

class SetupBuilder {
public:
    explicit SetupBuilder(const RawConfig& raw) : raw_(raw) {}

    ExperimentSetup build() {
        ExperimentSetup s = default_setup();

        set_length("pump", "wavelength", s.pump.wavelength_nm);
        set_time("pump", "pulse_fwhm", s.pump.pulse_fwhm_fs);
        set_time("pump", "rep_period", s.pump.rep_period_fs);
        set_integer("pump", "n_pulses", s.pump.n_pulses);
        set_delay("pump", "inter_pulse_delay", s.pump.inter_pulse_delay_fs);
        set_length("pump", "extra_phase_path", s.pump.extra_phase_path_nm);

        set_token("crystal", "type", s.crystal.type);
        set_length("crystal", "thickness", s.crystal.thickness_nm);

        set_length("filter", "center", s.filter.center_nm);
        set_length("filter", "fwhm", s.filter.fwhm_nm);

        set_delay("interferometer", "tau", s.delays.tau_fs);
        set_delay("interferometer", "tau1", s.delays.tau1_fs);

        set_angle("analyzers", "theta1", s.analyzers.theta1_rad);
        set_angle("analyzers", "theta2", s.analyzers.theta2_rad);

        set_time("detectors", "jitter", s.detectors.jitter_fs);
        set_time("detectors", "coincidence_window", s.detectors.coincidence_window_fs);
        set_plain("detectors", "pair_probability", s.detectors.pair_probability);
        set_plain("detectors", "efficiency", s.detectors.efficiency);

        // Envelope widths follow the parsed pump and filter unless given
        // explicitly.
        if (s.pump.pulse_fwhm_fs > 0.0 && s.filter.fwhm_nm > 0.0 && s.filter.center_nm > 0.0)
            s.model = default_model_params(s.pump, s.filter);
        set_time("model", "sigma_plus", s.model.sigma_plus_fs);
        set_time("model", "sigma_minus", s.model.sigma_minus_fs);
        set_plain("model", "normalization", s.model.normalization);

        return s;
    }

private:
    const RawEntry* find(const char* section, const char* key) const {
        const auto sec = raw_.find(section);
        if (sec == raw_.end()) return nullptr;
        const auto entry = sec->second.find(key);
        return entry == sec->second.end() ? nullptr : &entry->second;
    }

    template <typename Convert, typename T>
    void set(const char* section, const char* key, T& target, Convert&& convert) {
        const RawEntry* e = find(section, key);
        if (!e) return;
        try {
            target = convert(parse_quantity(e->value, e->line, e->column), *e);
        } catch (const ParseError& err) {
            // Re-anchor value-level faults to the whole source line.
            throw ParseError(err.line(), err.column(), err.message(), e->snippet);
        }
    }

    void set_length(const char* s, const char* k, double& t) { set(s, k, t, length_nm); }
    void set_time(const char* s, const char* k, double& t) { set(s, k, t, time_fs); }
    void set_delay(const char* s, const char* k, double& t) { set(s, k, t, delay_fs); }
    void set_angle(const char* s, const char* k, double& t) { set(s, k, t, angle_rad); }
    void set_plain(const char* s, const char* k, double& t) { set(s, k, t, plain); }
    void set_integer(const char* s, const char* k, int& t) { set(s, k, t, integer); }
    void set_token(const char* section, const char* key, std::string& target) {
        if (const RawEntry* e = find(section, key)) target = e->value;
    }

    const RawConfig& raw_;
};

ExperimentSetup build_and_validate(const RawConfig& raw) {
    ExperimentSetup setup = SetupBuilder(raw).build();
    auto violations = validate(setup);
    if (!violations.empty()) throw ValidationError(std::move(violations));
    return setup;
}

std::string g17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

ExperimentSetup parse_config(std::string_view source) {
    return build_and_validate(parse_raw(source));
}

ExperimentSetup parse_config(std::string_view source, std::span<const std::string> overrides) {
    RawConfig raw = parse_raw(source);
    for (const auto& o : overrides) apply_override(raw, o);
    return build_and_validate(raw);
}

std::string render_config(const ExperimentSetup& s) {
    std::ostringstream out;
    out << "[pump]\n"
        << "wavelength = " << g17(s.pump.wavelength_nm) << " nm\n"
        << "pulse_fwhm = " << g17(s.pump.pulse_fwhm_fs) << " fs\n"
        << "rep_period = " << g17(s.pump.rep_period_fs) << " fs\n"
        << "n_pulses = " << s.pump.n_pulses << "\n"
        << "inter_pulse_delay = " << g17(s.pump.inter_pulse_delay_fs) << " fs\n"
        << "extra_phase_path = " << g17(s.pump.extra_phase_path_nm) << " nm\n"
        << "[crystal]\n"
        << "type = " << s.crystal.type << "\n"
        << "thickness = " << g17(s.crystal.thickness_nm) << " nm\n"
        << "[filter]\n"
        << "center = " << g17(s.filter.center_nm) << " nm\n"
        << "fwhm = " << g17(s.filter.fwhm_nm) << " nm\n"
        << "[interferometer]\n"
        << "tau = " << g17(s.delays.tau_fs) << " fs\n"
        << "tau1 = " << g17(s.delays.tau1_fs) << " fs\n"
        << "[analyzers]\n"
        << "theta1 = " << g17(s.analyzers.theta1_rad) << " rad\n"
        << "theta2 = " << g17(s.analyzers.theta2_rad) << " rad\n"
        << "[detectors]\n"
        << "jitter = " << g17(s.detectors.jitter_fs) << " fs\n"
        << "coincidence_window = " << g17(s.detectors.coincidence_window_fs) << " fs\n"
        << "pair_probability = " << g17(s.detectors.pair_probability) << "\n"
        << "efficiency = " << g17(s.detectors.efficiency) << "\n"
        << "[model]\n"
        << "sigma_plus = " << g17(s.model.sigma_plus_fs) << " fs\n"
        << "sigma_minus = " << g17(s.model.sigma_minus_fs) << " fs\n"
        << "normalization = " << g17(s.model.normalization) << "\n";
    return out.str();
}

}  // namespace biphoton
