#include "biphoton/curve_io.hpp"

#include <charconv>
#include <cstdio>
#include <stdexcept>

#include "json.hpp"

namespace biphoton {

namespace {

std::string g17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

double parse_double(std::string_view token, const char* what) {
    double v = 0.0;
    const auto [next, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
    if (ec != std::errc{} || next != token.data() + token.size())
        throw std::runtime_error(std::string("curve: malformed ") + what + " '" +
                                 std::string(token) + "'");
    return v;
}

Curve read_curve_csv(std::string_view text) {
    std::size_t pos = text.find('\n');
    if (pos == std::string_view::npos)
        throw std::runtime_error("curve: missing CSV header line");
    std::string_view header = text.substr(0, pos);
    constexpr std::string_view kPrefix = "# parameter=";
    if (!header.starts_with(kPrefix))
        throw std::runtime_error("curve: CSV header must start with '# parameter='");
    header.remove_prefix(kPrefix.size());
    const std::size_t sep = header.find(" y_kind=");
    if (sep == std::string_view::npos)
        throw std::runtime_error("curve: CSV header missing y_kind");
    const std::string parameter(header.substr(0, sep));
    const std::string kind_name(header.substr(sep + 8));

    std::vector<CurvePoint> points;
    ++pos;
    while (pos < text.size()) {
        std::size_t eol = text.find('\n', pos);
        if (eol == std::string_view::npos) eol = text.size();
        const std::string_view row = text.substr(pos, eol - pos);
        pos = eol + 1;
        if (row.empty()) continue;
        const std::size_t comma = row.find(',');
        if (comma == std::string_view::npos)
            throw std::runtime_error("curve: CSV row missing comma: '" + std::string(row) + "'");
        points.push_back({parse_double(row.substr(0, comma), "x"),
                          parse_double(row.substr(comma + 1), "y")});
    }
    return make_curve(parameter, curve_kind_from_name(kind_name), std::move(points));
}

Curve read_curve_json(std::string_view text) {
    const auto doc = nlohmann::json::parse(text);
    std::vector<CurvePoint> points;
    for (const auto& p : doc.at("points"))
        points.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
    return make_curve(doc.at("parameter").get<std::string>(),
                      curve_kind_from_name(doc.at("y_kind").get<std::string>()),
                      std::move(points));
}

}  // namespace

std::string write_curve(const Curve& curve, CurveFormat format) {
    if (format == CurveFormat::Csv) {
        std::string out = "# parameter=" + curve.parameter + " y_kind=" +
                          curve_kind_name(curve.kind) + "\n";
        for (const auto& p : curve.points)
            out += g17(p.x) + "," + g17(p.y) + "\n";
        return out;
    }
    nlohmann::json doc;
    doc["parameter"] = curve.parameter;
    doc["y_kind"] = curve_kind_name(curve.kind);
    auto points = nlohmann::json::array();
    for (const auto& p : curve.points) points.push_back({p.x, p.y});
    doc["points"] = std::move(points);
    return doc.dump();
}

Curve read_curve(std::string_view text) {
    std::size_t first = text.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos)
        throw std::runtime_error("curve: empty input");
    if (text[first] == '#') return read_curve_csv(text.substr(first));
    if (text[first] == '{') return read_curve_json(text.substr(first));
    throw std::runtime_error("curve: unrecognized format");
}

}  // namespace biphoton
