// CSV and SVG emission for experiment outputs.
#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

namespace sbe {

// CSV file whose first line records provenance ("# config_hash=... seed=...")
// followed by the header row.
class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const std::string& provenance,
            const std::vector<std::string>& columns);

  void row(const std::vector<std::string>& cells);
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
  std::ofstream out_;
  std::size_t columns_;
};

struct Series {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
};

// Self-contained SVG line chart.
void write_svg_lines(const std::filesystem::path& path, const std::string& title, const std::string& x_label,
                     const std::string& y_label, const std::vector<Series>& series);

struct Bar {
  std::string label;
  double value;
  double low;
  double high;
};

// Bar chart with interval whiskers.
void write_svg_bars(const std::filesystem::path& path, const std::string& title, const std::string& y_label,
                    const std::vector<Bar>& bars);

}  // namespace sbe
