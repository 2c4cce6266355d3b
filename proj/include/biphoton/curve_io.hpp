#pragma once
#include <string>
#include <string_view>

#include "biphoton/rate.hpp"

namespace biphoton {

enum class CurveFormat { Csv, Json };

/// CSV: `# parameter=<name> y_kind=<kind>` header then `x,y` rows at 17
/// significant digits, LF endings. JSON: {parameter, y_kind, points}.
/// Both round-trip losslessly through read_curve.
std::string write_curve(const Curve& curve, CurveFormat format);

/// Inverse of write_curve; the format is recognized from the first byte.
Curve read_curve(std::string_view text);

}  // namespace biphoton
