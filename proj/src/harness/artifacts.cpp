#include "emi/harness/artifacts.hpp"

#include "emi/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace emi::harness {

const std::vector<std::string>& progress_columns() {
  static const std::vector<std::string> cols = {
      "iteration", "steps",         "mean_return", "std_return", "dyn_loss",  "err_penalty",
      "info_loss", "kl_reg",        "mean_err_norm", "mean_r_int", "seconds"};
  return cols;
}

std::string format_number(double value) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

ProgressWriter::ProgressWriter(const std::filesystem::path& path) : out_(path, std::ios::binary) {
  if (!out_) throw std::runtime_error("cannot write " + path.string());
  const auto& cols = progress_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) out_ << (i ? "," : "") << cols[i];
  out_ << '\n';
  out_.flush();
}

void ProgressWriter::append(const IterationRecord& r) {
  out_ << r.iteration << ',' << r.steps << ',' << format_number(r.mean_return) << ','
       << format_number(r.std_return) << ',' << format_number(r.loss.dynamics_loss) << ','
       << format_number(r.loss.error_penalty) << ',' << format_number(r.loss.info_loss) << ','
       << format_number(r.loss.kl_reg) << ',' << format_number(r.loss.mean_error_norm) << ','
       << format_number(r.mean_r_int) << ',' << format_number(r.seconds) << '\n';
  out_.flush();
  if (!out_) throw std::runtime_error("failed writing progress row");
}

std::vector<double> CsvTable::column(const std::string& name) const {
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) throw std::out_of_range("csv has no column '" + name + "'");
  const auto idx = static_cast<std::size_t>(it - header.begin());
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& row : rows) out.push_back(row.at(idx));
  return out;
}

void write_csv(const std::filesystem::path& path, const CsvTable& table) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  for (std::size_t i = 0; i < table.header.size(); ++i) out << (i ? "," : "") << table.header[i];
  out << '\n';
  for (const auto& row : table.rows) {
    if (row.size() != table.header.size()) throw ShapeError("csv row width differs from header");
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << format_number(row[i]);
    out << '\n';
  }
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  CsvTable t;
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error(path.string() + ": empty csv");
  {
    std::istringstream head(line);
    std::string cell;
    while (std::getline(head, cell, ',')) t.header.push_back(cell);
  }
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<double> row;
    std::istringstream cells(line);
    std::string cell;
    while (std::getline(cells, cell, ',')) {
      try {
        std::size_t used = 0;
        row.push_back(std::stod(cell, &used));
        if (used != cell.size()) throw std::invalid_argument(cell);
      } catch (const std::exception&) {
        throw std::runtime_error(path.string() + ":" + std::to_string(lineno) + ": bad number '" +
                                 cell + "'");
      }
    }
    if (row.size() != t.header.size()) {
      throw std::runtime_error(path.string() + ":" + std::to_string(lineno) + ": expected " +
                               std::to_string(t.header.size()) + " fields");
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

namespace {

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string ramp(double t) {
  t = std::clamp(t, 0.0, 1.0);
  char buf[32];
  std::snprintf(buf, sizeof(buf), "rgb(%d,%d,%d)", static_cast<int>(std::lround(255 * t)), 64,
                static_cast<int>(std::lround(255 * (1 - t))));
  return buf;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

}  // namespace

void write_scatter_svg(const std::filesystem::path& path, const num::Matrix& points,
                       std::span<const double> values, const ScatterStyle& style) {
  if (points.cols() != 2) throw ShapeError("scatter needs m x 2 points");
  if (!values.empty() && values.size() != static_cast<std::size_t>(points.rows())) {
    throw ShapeError("scatter colour values must match point count");
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());

  const double size = style.size;
  const double margin = 40.0;
  const double inner = size - 2 * margin;
  double x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  if (points.rows() > 0) {
    x0 = points.col(0).minCoeff();
    x1 = points.col(0).maxCoeff();
    y0 = points.col(1).minCoeff();
    y1 = points.col(1).maxCoeff();
  }
  if (x1 - x0 < 1e-12) { x0 -= 0.5; x1 += 0.5; }
  if (y1 - y0 < 1e-12) { y0 -= 0.5; y1 += 0.5; }
  double v0 = 0, v1 = 1;
  if (!values.empty()) {
    v0 = *std::min_element(values.begin(), values.end());
    v1 = *std::max_element(values.begin(), values.end());
    if (v1 - v0 < 1e-12) v1 = v0 + 1;
  }

  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << style.size
      << "\" height=\"" << style.size << "\" viewBox=\"0 0 " << style.size << ' ' << style.size
      << "\">\n"
      << "<rect x=\"0\" y=\"0\" width=\"" << style.size << "\" height=\"" << style.size
      << "\" fill=\"white\"/>\n"
      << "<rect x=\"" << margin << "\" y=\"" << margin << "\" width=\"" << inner << "\" height=\""
      << inner << "\" fill=\"none\" stroke=\"black\"/>\n"
      << "<text x=\"" << size / 2 << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"14\">"
      << xml_escape(style.title) << "</text>\n"
      << "<text x=\"" << size / 2 << "\" y=\"" << size - 10
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">"
      << xml_escape(style.x_label) << "</text>\n"
      << "<text x=\"14\" y=\"" << size / 2 << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"12\" transform=\"rotate(-90 14 "
      << size / 2 << ")\">" << xml_escape(style.y_label) << "</text>\n"
      << "<g stroke=\"none\" fill-opacity=\"0.6\">\n";
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    const double px = margin + (points(i, 0) - x0) / (x1 - x0) * inner;
    const double py = margin + (1.0 - (points(i, 1) - y0) / (y1 - y0)) * inner;
    const std::string colour =
        values.empty() ? "rgb(31,119,180)" : ramp((values[static_cast<std::size_t>(i)] - v0) / (v1 - v0));
    out << "<circle cx=\"" << fmt(px) << "\" cy=\"" << fmt(py) << "\" r=\"1.5\" fill=\"" << colour
        << "\"/>\n";
  }
  out << "</g>\n</svg>\n";
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

}  // namespace emi::harness
