#include "linkpmf/covariates.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

namespace linkpmf {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) {
    if (!cell.empty() && cell.back() == '\r') cell.pop_back();
    cells.push_back(cell);
  }
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

}  // namespace

CovariateMatrix::CovariateMatrix(std::size_t n_nodes) : active_(n_nodes) { finalize(); }

CovariateMatrix::CovariateMatrix(std::vector<CovariateGroup> groups,
                                 std::vector<std::vector<NodeId>> active)
    : groups_(std::move(groups)), active_(std::move(active)) {
  std::size_t column = 0;
  for (auto& g : groups_) {
    g.first_column = column;
    column += g.levels.size();
  }
  finalize();
}

void CovariateMatrix::finalize() {
  std::size_t n_columns = 0;
  group_of_column_.clear();
  for (std::size_t g = 0; g < groups_.size(); ++g) {
    n_columns += groups_[g].levels.size();
    group_of_column_.insert(group_of_column_.end(), groups_[g].levels.size(), g);
  }
  column_sums_.assign(n_columns, 0.0);
  std::vector<char> group_hit(groups_.size());
  for (std::size_t i = 0; i < active_.size(); ++i) {
    auto& row = active_[i];
    std::sort(row.begin(), row.end());
    row.erase(std::unique(row.begin(), row.end()), row.end());
    std::fill(group_hit.begin(), group_hit.end(), 0);
    for (const NodeId c : row) {
      if (c >= n_columns) {
        throw Error("covariate column " + std::to_string(c) + " out of range for node " +
                    std::to_string(i));
      }
      const std::size_t g = group_of_column_[c];
      if (group_hit[g]) {
        throw Error("node " + std::to_string(i) + " has two levels of covariate group '" +
                    groups_[g].name + "'");
      }
      group_hit[g] = 1;
      column_sums_[c] += 1.0;
    }
  }
}

CovariateMatrix CovariateMatrix::from_levels(std::vector<CovariateGroup> groups,
                                             const std::vector<std::vector<int>>& levels) {
  std::vector<std::vector<NodeId>> active(levels.size());
  std::size_t column = 0;
  std::vector<std::size_t> first(groups.size());
  for (std::size_t g = 0; g < groups.size(); ++g) {
    first[g] = column;
    column += groups[g].levels.size();
  }
  for (std::size_t i = 0; i < levels.size(); ++i) {
    if (levels[i].size() != groups.size()) {
      throw DimensionError("node " + std::to_string(i) + " has " + std::to_string(levels[i].size()) +
                           " group levels, expected " + std::to_string(groups.size()));
    }
    for (std::size_t g = 0; g < groups.size(); ++g) {
      const int level = levels[i][g];
      if (level < 0) continue;
      if (static_cast<std::size_t>(level) >= groups[g].levels.size()) {
        throw Error("level " + std::to_string(level) + " out of range for group '" + groups[g].name + "'");
      }
      active[i].push_back(static_cast<NodeId>(first[g] + level));
    }
  }
  return CovariateMatrix(std::move(groups), std::move(active));
}

bool CovariateMatrix::value(std::size_t node, std::size_t column) const {
  const auto& row = active_.at(node);
  return std::binary_search(row.begin(), row.end(), static_cast<NodeId>(column));
}

std::vector<std::string> CovariateMatrix::column_names() const {
  std::vector<std::string> names;
  for (const auto& g : groups_) {
    for (const auto& level : g.levels) {
      names.push_back(g.levels.size() == 1 && level.empty() ? g.name : g.name + "=" + level);
    }
  }
  return names;
}

CovariateMatrix CovariateMatrix::without_group(std::size_t group) const {
  if (group >= groups_.size()) {
    throw Error("covariate group " + std::to_string(group) + " does not exist");
  }
  const std::size_t first = groups_[group].first_column;
  const std::size_t width = groups_[group].levels.size();
  std::vector<CovariateGroup> groups = groups_;
  groups.erase(groups.begin() + static_cast<std::ptrdiff_t>(group));
  std::vector<std::vector<NodeId>> active(active_.size());
  for (std::size_t i = 0; i < active_.size(); ++i) {
    for (const NodeId c : active_[i]) {
      if (c < first) {
        active[i].push_back(c);
      } else if (c >= first + width) {
        active[i].push_back(static_cast<NodeId>(c - width));
      }
    }
  }
  return CovariateMatrix(std::move(groups), std::move(active));
}

std::vector<NodeId> CovariateMatrix::resolve(std::span<const std::string> level_names,
                                             bool* unknown) const {
  const auto names = column_names();
  std::vector<NodeId> out;
  bool missing = false;
  for (const auto& name : level_names) {
    const auto it = std::find(names.begin(), names.end(), name);
    if (it == names.end()) {
      missing = true;
      continue;
    }
    out.push_back(static_cast<NodeId>(it - names.begin()));
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  std::vector<char> hit(groups_.size());
  for (const NodeId c : out) {
    if (hit[group_of_column_[c]]++) {
      throw Error("two levels of covariate group '" + groups_[group_of_column_[c]].name + "'");
    }
  }
  if (unknown) *unknown = missing;
  return out;
}

CovariateMatrix read_covariates_csv(std::istream& in, const LabelMap& labels) {
  std::string line;
  if (!std::getline(in, line)) {
    throw ParseError("covariate file is empty; a header row is required", 1);
  }
  const auto header = split_csv_line(line);
  if (header.empty() || header.front() != "label") {
    throw ParseError("covariate header must start with 'label'", 1);
  }

  // Group columns by the part before '='; the file's column order is kept
  // within a group, groups appear in order of first mention.
  std::vector<CovariateGroup> groups;
  std::map<std::string, std::size_t> group_index;
  std::vector<std::pair<std::size_t, std::size_t>> column_slot;  // (group, level)
  for (std::size_t c = 1; c < header.size(); ++c) {
    const auto& name = header[c];
    const auto eq = name.find('=');
    const std::string group = eq == std::string::npos ? name : name.substr(0, eq);
    const std::string level = eq == std::string::npos ? std::string() : name.substr(eq + 1);
    auto [it, inserted] = group_index.try_emplace(group, groups.size());
    if (inserted) groups.push_back({group, {}, 0});
    auto& levels = groups[it->second].levels;
    if (std::find(levels.begin(), levels.end(), level) != levels.end()) {
      throw ParseError("duplicate covariate column '" + name + "'", 1);
    }
    column_slot.emplace_back(it->second, levels.size());
    levels.push_back(level);
  }
  std::vector<std::size_t> first(groups.size());
  for (std::size_t g = 0, col = 0; g < groups.size(); col += groups[g].levels.size(), ++g) {
    first[g] = col;
  }

  std::vector<std::vector<NodeId>> active(labels.size());
  std::vector<char> seen(labels.size(), 0);
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != header.size()) {
      throw ParseError("expected " + std::to_string(header.size()) + " cells, got " +
                           std::to_string(cells.size()),
                       line_no);
    }
    const auto node = labels.find(cells[0]);
    std::vector<NodeId> row;
    std::vector<char> group_hit(groups.size(), 0);
    for (std::size_t c = 1; c < cells.size(); ++c) {
      if (cells[c] == "0") continue;
      if (cells[c] != "1") {
        throw ParseError("covariate cells must be 0 or 1, got '" + cells[c] + "'", line_no);
      }
      const auto [g, level] = column_slot[c - 1];
      if (group_hit[g]++) {
        throw ParseError("node '" + cells[0] + "' has two levels of covariate group '" +
                             groups[g].name + "'",
                         line_no);
      }
      row.push_back(static_cast<NodeId>(first[g] + level));
    }
    if (!node) continue;
    if (seen[*node]++) {
      throw ParseError("duplicate covariate row for '" + cells[0] + "'", line_no);
    }
    active[*node] = std::move(row);
  }
  return CovariateMatrix(std::move(groups), std::move(active));
}

CovariateMatrix load_covariates_csv(const std::string& path, const LabelMap& labels) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  return read_covariates_csv(in, labels);
}

void write_covariates_csv(std::ostream& out, const CovariateMatrix& covariates,
                          const LabelMap& labels) {
  if (labels.size() != covariates.n_nodes()) {
    throw DimensionError("write_covariates_csv: label map and covariate matrix sizes differ");
  }
  out << "label";
  for (const auto& name : covariates.column_names()) out << ',' << name;
  out << '\n';
  std::vector<char> row(covariates.n_covariates());
  for (std::size_t i = 0; i < covariates.n_nodes(); ++i) {
    std::fill(row.begin(), row.end(), 0);
    for (const NodeId c : covariates.active(i)) row[c] = 1;
    out << labels.label(static_cast<NodeId>(i));
    for (const char v : row) out << ',' << (v ? '1' : '0');
    out << '\n';
  }
}

}  // namespace linkpmf
