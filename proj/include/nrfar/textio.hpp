#ifndef NRFAR_TEXTIO_HPP
#define NRFAR_TEXTIO_HPP

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace nrfar {

// Shortest decimal string that parses back to exactly the same double.
std::string format_double(double value);

std::string format_hex64(std::uint64_t value);

std::uint64_t fnv1a64(std::string_view data);

// Minimal CSV splitting; fields in our files never contain quoted commas.
std::vector<std::string> split_csv_line(const std::string& line);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

}  // namespace nrfar

#endif
