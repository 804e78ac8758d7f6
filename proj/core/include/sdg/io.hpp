#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

namespace sdg {

inline constexpr const char* kToolVersion = "0.3.0";

/// Writes through a temporary sibling file and renames it into place.
/// IoError on failure.
void write_atomic(const std::filesystem::path& path, std::string_view content);

std::string read_file(const std::filesystem::path& path);

/// SHA-1 of "blob <size>\0<content>", hex encoded (what git hash-object prints).
std::string git_blob_sha1(std::string_view content);

struct Provenance {
  std::uint64_t seed = 0;
  std::string config_sha1;
  std::string tool_version = kToolVersion;
};

/// "# key=value" lines for seed, config hash and tool version.
std::string metadata_lines(const Provenance& prov);
nlohmann::json metadata_json(const Provenance& prov);

/// Shortest decimal form that round-trips.
std::string format_double(double v);

/// RFC-4180 table with LF line endings.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header);

  using Cell = std::variant<double, std::int64_t, std::string>;
  void add_row(std::vector<Cell> row);
  std::size_t rows() const { return rows_.size(); }
  const std::vector<std::string>& header() const { return header_; }

  /// Metadata lines followed by the header and the rows.
  std::string render(const Provenance& prov) const;

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<Cell>> rows_;
};

/// Sorted keys, two-space indent, trailing newline.
std::string render_json(const nlohmann::json& doc);

}  // namespace sdg
