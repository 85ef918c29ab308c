#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "flowforest/flow.hpp"

// Columnar on-disk store for ingested, labeled, partitioned flows. One file
// holds the benign pool and every family set; numeric fields are stored as
// contiguous column arrays, strings as length-prefixed blobs per column.

namespace flowforest {

struct IngestCounts {
  size_t total_rows = 0;
  size_t parse_errors = 0;
  size_t unlabeled = 0;
  size_t excluded = 0;  // flows of excluded families (e.g. Sogou)
  size_t benign = 0;
  std::map<std::string, size_t> per_family;
};

struct FlowStore {
  FlowPartition partition;
  IngestCounts counts;

  void save(const std::filesystem::path& path) const;
  static FlowStore load(const std::filesystem::path& path);
};

}  // namespace flowforest
