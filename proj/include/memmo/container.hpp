#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "memmo/common.hpp"

namespace memmo {

/// Versioned binary file: the 8-byte magic "MEMMOBIN", a u32 format version, a
/// u64 header length, a UTF-8 JSON header, then every matrix as little-endian
/// f64 in row-major order. The header lists the matrices as
/// {"name", "rows", "cols"} in storage order under the key "matrices".
struct Container {
  nlohmann::json header = nlohmann::json::object();
  std::vector<std::pair<std::string, Matrix>> matrices;

  void Add(std::string name, Matrix m);
  /// Throws InputError when the matrix is missing.
  const Matrix& Get(const std::string& name) const;
  bool Has(const std::string& name) const;
};

inline constexpr std::uint32_t kContainerVersion = 1;

void WriteContainer(std::ostream& out, const Container& c);
Container ReadContainer(std::istream& in);
void SaveContainer(const std::filesystem::path& file, const Container& c);
Container LoadContainer(const std::filesystem::path& file);

}  // namespace memmo
