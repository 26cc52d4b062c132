// Copyright (c) 2026 The FPME Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "fpme/errors.hpp"
#include "fpme/grid.hpp"
#include "fpme/numeric.hpp"

namespace fpme {

/// Output directory where every file is first written under a `.partial`
/// suffix; finalize() promotes all of them atomically-ish at the end of a
/// successful run. If the run dies mid-way the partials stay behind.
class OutputDir {
 public:
  explicit OutputDir(std::filesystem::path root) : root_(std::move(root)) {
    std::filesystem::create_directories(root_);
  }

  const std::filesystem::path& root() const { return root_; }

  void write_text(const std::string& name, const std::string& content) {
    const auto partial = root_ / (name + ".partial");
    std::ofstream out(partial, std::ios::binary | std::ios::trunc);
    if (!out) throw NumericalError("OutputDir: cannot open " + partial.string());
    out << content;
    out.close();
    pending_.push_back(name);
  }

  void finalize() {
    for (const auto& name : pending_)
      std::filesystem::rename(root_ / (name + ".partial"), root_ / name);
    pending_.clear();
  }

 private:
  std::filesystem::path root_;
  std::vector<std::string> pending_;
};

/// CSV assembly with 17-significant-digit floats.
class CsvBuilder {
 public:
  explicit CsvBuilder(std::vector<std::string> header) {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (i) body_ += ',';
      body_ += header[i];
    }
    body_ += '\n';
  }

  void row(const std::vector<double>& values) {
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (i) body_ += ',';
      body_ += format_g17(values[i]);
    }
    body_ += '\n';
  }

  void raw_row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) body_ += ',';
      body_ += cells[i];
    }
    body_ += '\n';
  }

  const std::string& str() const { return body_; }

 private:
  std::string body_;
};

/// Square matrix as CSV (no header), 17 significant digits.
inline std::string matrix_csv(const Eigen::MatrixXd& m) {
  std::string out;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) out += ',';
      out += format_g17(m(i, j));
    }
    out += '\n';
  }
  return out;
}

}  // namespace fpme
