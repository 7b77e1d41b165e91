#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "linkpmf/common.hpp"
#include "linkpmf/graph.hpp"

namespace linkpmf {

/// One categorical variable; its levels occupy consecutive columns.
struct CovariateGroup {
  std::string name;
  std::vector<std::string> levels;
  std::size_t first_column = 0;

  friend bool operator==(const CovariateGroup&, const CovariateGroup&) = default;
};

/// Binary (dummy-encoded) covariates for one side of the graph.
///
/// Each node activates at most one level per group. Nodes with no row in the
/// source file get an all-zero indicator row.
class CovariateMatrix {
 public:
  CovariateMatrix() = default;

  /// No covariates at all (K = 0).
  explicit CovariateMatrix(std::size_t n_nodes);

  /// `active[i]` lists the active columns of node i. Throws Error when a node
  /// activates two levels of one group or a column is out of range.
  CovariateMatrix(std::vector<CovariateGroup> groups, std::vector<std::vector<NodeId>> active);

  /// `levels[i][g]` is node i's level in group g, or -1 for "unknown".
  static CovariateMatrix from_levels(std::vector<CovariateGroup> groups,
                                     const std::vector<std::vector<int>>& levels);

  std::size_t n_nodes() const noexcept { return active_.size(); }
  std::size_t n_covariates() const noexcept { return column_sums_.size(); }
  std::span<const NodeId> active(std::size_t node) const { return active_[node]; }
  bool value(std::size_t node, std::size_t column) const;
  std::span<const double> column_sums() const noexcept { return column_sums_; }

  const std::vector<CovariateGroup>& groups() const noexcept { return groups_; }
  std::vector<std::string> column_names() const;

  /// Copy without the columns of group `group`.
  CovariateMatrix without_group(std::size_t group) const;

  /// Resolves "group=level" names to column ids; names that match no column
  /// are dropped and reported through `unknown`.
  std::vector<NodeId> resolve(std::span<const std::string> level_names, bool* unknown) const;

  friend bool operator==(const CovariateMatrix&, const CovariateMatrix&) = default;

 private:
  void finalize();

  std::vector<CovariateGroup> groups_;
  std::vector<std::vector<NodeId>> active_;
  std::vector<double> column_sums_;
  std::vector<std::size_t> group_of_column_;
};

/// Reads `label,<col_1>,...,<col_K>` with a mandatory header. Column names of
/// the form `group=level` are grouped; any other name is its own group.
/// Rows whose label is not in `labels` are skipped; nodes with no row get an
/// all-zero indicator row.
CovariateMatrix read_covariates_csv(std::istream& in, const LabelMap& labels);
CovariateMatrix load_covariates_csv(const std::string& path, const LabelMap& labels);
void write_covariates_csv(std::ostream& out, const CovariateMatrix& covariates,
                          const LabelMap& labels);

}  // namespace linkpmf
