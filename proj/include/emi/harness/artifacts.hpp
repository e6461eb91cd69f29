#pragma once

#include "emi/numcore/matrix.hpp"
#include "emi/objective/objective.hpp"

#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <vector>

namespace emi::harness {

// One progress.csv row.
struct IterationRecord {
  int iteration = 0;
  long long steps = 0;  // cumulative environment steps
  double mean_return = 0.0;
  double std_return = 0.0;
  LossReport loss;
  double mean_r_int = 0.0;
  double seconds = 0.0;
};

// iteration, steps, mean_return, std_return, dyn_loss, err_penalty, info_loss,
// kl_reg, mean_err_norm, mean_r_int, seconds
const std::vector<std::string>& progress_columns();

// Shortest text that parses back to the same double ("%.17g").
std::string format_number(double value);

// Appends rows to progress.csv, flushing after each one.
class ProgressWriter {
 public:
  explicit ProgressWriter(const std::filesystem::path& path);
  void append(const IterationRecord& record);

 private:
  std::ofstream out_;
};

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  // Column by header name; std::out_of_range if absent.
  std::vector<double> column(const std::string& name) const;
};

// UTF-8, comma separated, header row, '.' decimals, LF line ends.
void write_csv(const std::filesystem::path& path, const CsvTable& table);
CsvTable read_csv(const std::filesystem::path& path);

struct ScatterStyle {
  std::string title;
  std::string x_label = "phi_1";
  std::string y_label = "phi_2";
  int size = 480;
};

// Standalone SVG 1.1 scatter: one <circle> per row of `points` (m x 2),
// coloured along a blue-to-red ramp by `values` when given (same length).
void write_scatter_svg(const std::filesystem::path& path, const num::Matrix& points,
                       std::span<const double> values, const ScatterStyle& style);

}  // namespace emi::harness
