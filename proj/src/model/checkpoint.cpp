#include "emi/model/checkpoint.hpp"

#include "emi/error.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace emi {

using num::Matrix;

const Matrix& Checkpoint::at(const std::string& name) const {
  for (const auto& [n, m] : matrices) {
    if (n == name) return m;
  }
  throw ShapeError("checkpoint has no matrix '" + name + "'");
}

void write_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write checkpoint " + path.string());
  out << "emi-checkpoint 1\n";
  for (const auto& [key, value] : checkpoint.meta) out << "meta " << key << ' ' << value << '\n';
  char buf[32];
  for (const auto& [name, m] : checkpoint.matrices) {
    out << "matrix " << name << ' ' << m.rows() << ' ' << m.cols() << '\n';
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      for (Eigen::Index c = 0; c < m.cols(); ++c) {
        std::snprintf(buf, sizeof(buf), "%.17g", m(r, c));
        if (c > 0) out << ' ';
        out << buf;
      }
      out << '\n';
    }
  }
  out << "end\n";
  if (!out) throw std::runtime_error("failed writing checkpoint " + path.string());
}

Checkpoint read_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open checkpoint " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != "emi-checkpoint 1") {
    throw std::runtime_error(path.string() + ": not an emi checkpoint");
  }
  Checkpoint cp;
  bool ended = false;
  while (std::getline(in, line)) {
    if (line == "end") {
      ended = true;
      break;
    }
    std::istringstream head(line);
    std::string tag;
    head >> tag;
    if (tag == "meta") {
      std::string key;
      head >> key;
      std::string value;
      std::getline(head >> std::ws, value);
      cp.meta[key] = value;
    } else if (tag == "matrix") {
      std::string name;
      Eigen::Index rows = -1, cols = -1;
      head >> name >> rows >> cols;
      if (!head || rows < 0 || cols < 0) throw std::runtime_error("bad matrix header: " + line);
      Matrix m(rows, cols);
      for (Eigen::Index r = 0; r < rows; ++r) {
        if (!std::getline(in, line)) throw std::runtime_error("truncated matrix " + name);
        std::istringstream values(line);
        for (Eigen::Index c = 0; c < cols; ++c) {
          if (!(values >> m(r, c))) throw std::runtime_error("bad values in matrix " + name);
        }
      }
      cp.matrices.emplace_back(name, std::move(m));
    } else {
      throw std::runtime_error("unexpected checkpoint line: " + line);
    }
  }
  if (!ended) throw std::runtime_error(path.string() + ": missing end marker");
  return cp;
}

Checkpoint snapshot(const std::vector<std::pair<std::string, Matrix*>>& params) {
  Checkpoint cp;
  for (const auto& [name, m] : params) cp.matrices.emplace_back(name, *m);
  return cp;
}

void restore(const Checkpoint& checkpoint, const std::vector<std::pair<std::string, Matrix*>>& params) {
  for (const auto& [name, m] : params) {
    const Matrix& src = checkpoint.at(name);
    num::require_same_shape(*m, src, "restore " + name);
    *m = src;
  }
}

}  // namespace emi
