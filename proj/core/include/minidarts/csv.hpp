#ifndef MINIDARTS_CSV_HPP
#define MINIDARTS_CSV_HPP

#include <string>
#include <vector>

namespace minidarts {

// Shortest round-trip decimal representation of a double (std::to_chars).
std::string format_double(double v);

// Minimal CSV reader for the files this project writes: no quoting, first
// row is the header.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

CsvTable read_csv(const std::string& path);

}  // namespace minidarts

#endif
