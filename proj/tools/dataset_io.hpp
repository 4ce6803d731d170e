#pragma once

#include <iosfwd>
#include <string>

#include "boro/model.hpp"

namespace boro::cli {

/// Reads the CSV dataset format:
///
///   # dims d k
///   x1,...,xd,y1,...,yk
///   <d + k numbers per row>
///
/// Other lines starting with '#' and blank lines are ignored. Errors name the
/// source and line number.
Dataset read_dataset(std::istream& in, const std::string& source = "<input>");
Dataset read_dataset_file(const std::string& path);

/// Writes the same format. Values use `digits` significant digits; the
/// default round-trips every double exactly.
void write_dataset(std::ostream& out, const Dataset& data, int digits = 17);

/// printf-style %.{digits}g.
std::string format_number(double v, int digits = 12);

}  // namespace boro::cli
