#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "bnlab/harness.hpp"

namespace bnlab {

/// Reads an INI config. Unknown sections or keys are rejected with
/// ConfigInvalid; a missing file raises Io. The result is validated.
RunConfig load_config(const std::filesystem::path& path);
/// Same, from INI text.
RunConfig parse_config(const std::string& text);

/// Every setting as sorted `section.key = value` lines, doubles at full
/// precision. Two configs with the same dump drive identical runs.
std::string canonical_dump(const RunConfig& cfg);
/// Hex SHA-256 of canonical_dump with run.output_dir left empty.
std::string config_hash(const RunConfig& cfg);
nlohmann::json config_to_json(const RunConfig& cfg);

/// Library and tool versions recorded in manifests.
nlohmann::json version_info();

/// Writes manifest.json (config hash, versions, seeds, subcommand, outputs).
void write_manifest(const std::filesystem::path& dir, const RunConfig& cfg, const std::string& subcommand,
                    const std::vector<std::string>& outputs);

/// Writes <stem>.json (header) and <stem>.bin (float64, little endian, fields
/// back to back, each in row-major order with the last axis fastest).
void write_snapshot(const std::filesystem::path& dir, const std::string& stem, double time,
                    const std::vector<std::pair<std::string, Field>>& fields, const RunConfig& cfg);

struct Snapshot {
  GridSpec grid;
  double time = 0.0;
  std::vector<std::pair<std::string, Field>> fields;
  nlohmann::json header;
};
/// Reads a snapshot by the path of its JSON header.
Snapshot read_snapshot(const std::filesystem::path& header);

/// Minimal CSV writer; doubles are printed with 17 significant digits.
class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& columns);
  ~CsvWriter();
  CsvWriter(const CsvWriter&) = delete;
  CsvWriter& operator=(const CsvWriter&) = delete;

  void row(const std::vector<double>& values);

 private:
  std::FILE* f_ = nullptr;
  std::size_t ncols_;
};

void write_json(const std::filesystem::path& path, const nlohmann::json& j);

}  // namespace bnlab
