#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace mspf::csv {

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

/// Shortest round-trip decimal form; integral values print without a fraction.
std::string format_number(double value);

void write(const std::filesystem::path& path, const Table& table);
Table read(const std::filesystem::path& path);

}  // namespace mspf::csv
