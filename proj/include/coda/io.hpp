#pragma once

// Serialization: ESRI ASCII grids, composition raster stacks with a sidecar
// naming file, CSV tables, PGM quick-look images, key-value run configs and
// run manifests.

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "coda/grid.hpp"

namespace coda {

/// ESRI ASCII grid reader. Header keys are case-insensitive; DX/DY headers
/// are accepted for non-square cells. Errors carry the offending line number.
ScalarField read_ascii_grid(const std::filesystem::path& path);

/// Writer emits 17 significant digits so read(write(f)) == f exactly.
void write_ascii_grid(const ScalarField& field, const std::filesystem::path& path);

/// A composition raster is one ASCII grid per part plus a sidecar text file
/// listing "name path" pairs, one per line.
CompositionField read_composition(const std::filesystem::path& sidecar,
                                  bool replace_zeros = false,
                                  double detection_limit = 1e-6);
CompositionField read_composition(const std::vector<std::filesystem::path>& parts,
                                  std::vector<std::string> part_names = {},
                                  bool replace_zeros = false,
                                  double detection_limit = 1e-6);
void write_composition(const CompositionField& field,
                       const std::filesystem::path& sidecar,
                       const std::filesystem::path& dir);

/// P2 (plain) grayscale PGM scaled to the field's data range.
void write_pgm(const ScalarField& field, const std::filesystem::path& path);

/// CSV with a header row, UTF-8, '.' decimal separator.
void write_csv(const std::filesystem::path& path,
               const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows);

/// Structured-text config: "key = value" lines with optional [section]
/// headers; keys are stored as "section.key". '#' starts a comment.
class RunConfig {
 public:
  RunConfig() = default;
  static RunConfig load(const std::filesystem::path& path);

  bool has(const std::string& key) const { return kv_.count(key) > 0; }
  std::string get(const std::string& key, const std::string& fallback) const;
  double get(const std::string& key, double fallback) const;
  int get(const std::string& key, int fallback) const;
  void set(const std::string& key, const std::string& value) { kv_[key] = value; }

  const std::map<std::string, std::string>& entries() const { return kv_; }

 private:
  std::map<std::string, std::string> kv_;
};

/// FNV-1a content hash, hex-encoded; used for output checksums in manifests.
std::string file_checksum(const std::filesystem::path& path);

struct RunManifest {
  std::string command;
  std::uint64_t seed = 0;
  std::string version;
  double wall_seconds = 0.0;
  std::map<std::string, std::string> config;            // flattened snapshot
  std::vector<std::string> inputs;                      // paths
  std::map<std::string, std::string> output_checksums;  // path -> hash

  void write(const std::filesystem::path& path) const;
};

}  // namespace coda
