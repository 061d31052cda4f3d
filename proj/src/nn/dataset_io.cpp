#include <dprune/error.hpp>
#include <dprune/nn/dataset_io.hpp>

#include <fstream>
#include <iomanip>
#include <sstream>
#include <vector>

namespace dprune {

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

void write_dataset_csv(std::ostream& os, const Dataset& data) {
  data.validate();
  const Index p = data.inputs.cols();
  for (Index j = 0; j < p; ++j) os << (j ? "," : "") << 'x' << j;
  if (data.is_classification()) {
    os << ",label\n";
  } else {
    for (Index j = 0; j < data.targets.cols(); ++j) os << ",y" << j;
    os << '\n';
  }
  os << std::setprecision(17);
  for (Index i = 0; i < data.size(); ++i) {
    for (Index j = 0; j < p; ++j) os << (j ? "," : "") << data.inputs(i, j);
    if (data.is_classification()) {
      os << ',' << data.labels[static_cast<std::size_t>(i)];
    } else {
      for (Index j = 0; j < data.targets.cols(); ++j) os << ',' << data.targets(i, j);
    }
    os << '\n';
  }
}

void write_dataset_csv(const std::string& path, const Dataset& data) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open '" + path + "' for writing");
  write_dataset_csv(os, data);
}

Dataset read_dataset_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw DomainError("dataset csv: missing header");
  const auto header = split_csv(line);
  Index p = 0, m = 0;
  bool labelled = false;
  for (const auto& h : header) {
    if (!h.empty() && h[0] == 'x') {
      ++p;
    } else if (!h.empty() && h[0] == 'y') {
      ++m;
    } else if (h == "label") {
      labelled = true;
    } else {
      throw DomainError("dataset csv: unexpected column '" + h + "'");
    }
  }
  if (p == 0 || (labelled == (m > 0))) throw DomainError("dataset csv: need x columns and either y columns or label");

  std::vector<std::vector<double>> rows;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto cells = split_csv(line);
    if (cells.size() != header.size()) throw DomainError("dataset csv: ragged row");
    std::vector<double> row;
    for (const auto& c : cells) row.push_back(std::stod(c));
    rows.push_back(std::move(row));
  }
  Dataset d;
  const auto n = static_cast<Index>(rows.size());
  d.inputs.resize(n, p);
  if (!labelled) d.targets.resize(n, m);
  for (Index i = 0; i < n; ++i) {
    const auto& r = rows[static_cast<std::size_t>(i)];
    for (Index j = 0; j < p; ++j) d.inputs(i, j) = r[static_cast<std::size_t>(j)];
    if (labelled) {
      d.labels.push_back(static_cast<int>(r[static_cast<std::size_t>(p)]));
    } else {
      for (Index j = 0; j < m; ++j) d.targets(i, j) = r[static_cast<std::size_t>(p + j)];
    }
  }
  d.validate();
  return d;
}

Dataset read_dataset_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open '" + path + "'");
  return read_dataset_csv(is);
}

}  // namespace dprune
