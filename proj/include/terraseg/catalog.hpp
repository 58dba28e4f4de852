#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "terraseg/date.hpp"
#include "terraseg/geobox.hpp"
#include "terraseg/raster.hpp"

namespace terraseg {

struct SceneRecord {
  Satellite satellite = Satellite::Synthetic;
  Date timestamp;
  GeoBox geobox;
  std::vector<std::string> bands;
  std::string path;  // canonical path to the TSRF payload

  bool operator==(const SceneRecord&) const = default;
};

// Temporal query window, in calendar months, both ends inclusive.
//   PlusMinusMonths(k):            [target month - k, target month + k]
//   TargetPlusPreviousMonths(k):   [target month - k, target month]
struct Window {
  enum class Kind { PlusMinusMonths, TargetPlusPreviousMonths };
  Kind kind = Kind::PlusMinusMonths;
  int months = 2;

  static Window plus_minus(int k) { return {Kind::PlusMinusMonths, k}; }
  static Window target_plus_previous(int k) { return {Kind::TargetPlusPreviousMonths, k}; }

  // Inclusive month-index range [first, last] for a given target date.
  std::pair<int, int> month_range(const Date& target) const;
};

// Immutable scene index; queries are safe from any number of threads.
struct Catalog {
  std::vector<SceneRecord> records;  // sorted by (satellite, timestamp, path)

  size_t size() const { return records.size(); }
};

struct CatalogDiagnostic {
  std::string path;
  std::string message;
};

struct CatalogBuildReport {
  Catalog catalog;
  std::vector<CatalogDiagnostic> diagnostics;
};

// Recursively indexes every TSRF sidecar under `root`. Malformed sidecars are
// reported, not fatal; duplicates reached through links collapse to one record.
CatalogBuildReport build_catalog(const std::filesystem::path& root);

std::vector<SceneRecord> query_window(const Catalog& c, const GeoBox& g, const Date& target,
                                      const Window& window,
                                      const std::vector<Satellite>& satellites);

// JSON-lines export/import (one SceneRecord per line).
void save_catalog(const Catalog& c, const std::filesystem::path& file);
Catalog load_catalog(const std::filesystem::path& file);

}  // namespace terraseg
