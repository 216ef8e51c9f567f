#ifndef SEGWAVE_IO_HPP
#define SEGWAVE_IO_HPP

#include <string>
#include <vector>

namespace segwave {

/// Shortest round-trip decimal representation, locale-independent.
std::string format_double(double x);

/// Writes a CSV table with a header row, LF line endings and '.' decimals.
void write_csv(const std::string& path,
               const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& columns);

void write_text_file(const std::string& path, const std::string& content);

}  // namespace segwave

#endif
