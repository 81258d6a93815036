#pragma once

#include "imdp/model.hpp"

#include <string>
#include <string_view>

namespace imdp {

/// Parses the line-oriented model format:
///
///     imdp <num_states>
///     actions <label> <label> ...
///     initial <state>
///     name <state> "<display name>"
///     label "<name>" <state> <state> ...
///     trans <state> <action> <succ> [<lo>, <hi>]   # or a bare probability
///     reward <state> <action> <value>
///
/// `#` starts a comment. States without `trans` records get the implicit
/// self-loop. The result is validated; errors carry line and column.
ImdpModel parse_model(std::string_view text);

/// Canonical serialization; parse_model(write_model(m)) == m. Numerals use 17
/// significant digits, point intervals are written as bare numbers.
std::string write_model(const ImdpModel& model);

/// Parses `P>=p [F "label"]`, `P<=p [...]`, `R>=b [...]`, `R<=b [...]`.
Spec parse_spec(std::string_view text, const ImdpModel& model);

std::string write_spec(const Spec& spec);

/// Strategy file: one line `<state>: <action> <action> ...` per state, the
/// state given by index or by display name. Absorbing states may be omitted.
MultiStrategy parse_strategy(std::string_view text, const ImdpModel& model);

std::string write_strategy(const ImdpModel& model, const MultiStrategy& theta);

/// `%.17g` rendering used by every text output of the project.
std::string format_double(double value);

ImdpModel load_model_file(const std::string& path);
std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, std::string_view text);

} // namespace imdp
