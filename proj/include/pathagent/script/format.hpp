#pragma once

#include <functional>
#include <string>
#include <string_view>

#include "pathagent/script/value.hpp"

namespace pathagent::script {

/// Applies a format-spec ("[[fill]align][sign][#][0][width][,][.prec][type]")
/// to a value, as format(value, spec) would. Throws ScriptFault(ValueError).
std::string format_value(const Value& v, std::string_view spec);

/// str.format(): positional and named replacement fields with optional
/// conversion (!r / !s) and format spec.
std::string format_string(std::string_view fmt, const CallArgs& args);

/// printf-style "%" formatting with %s %r %d %i %f %e %g %x %%.
std::string percent_format(std::string_view fmt, const Value& args);

/// Python round() semantics: half-to-even on the exact binary value.
double round_to_digits(double x, int ndigits);

}  // namespace pathagent::script
