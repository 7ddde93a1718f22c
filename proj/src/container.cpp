#include "memmo/container.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

namespace memmo {

static_assert(std::endian::native == std::endian::little,
              "the container format is written on little-endian hosts only");

namespace {

constexpr std::array<char, 8> kMagic = {'M', 'E', 'M', 'M', 'O', 'B', 'I', 'N'};

template <typename T>
void WritePod(std::ostream& out, T value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T ReadPod(std::istream& in) {
  T value{};
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!in) throw ConfigError("container: truncated file");
  return value;
}

}  // namespace

void Container::Add(std::string name, Matrix m) {
  if (Has(name)) throw InputError("container: duplicate matrix '" + name + "'");
  matrices.emplace_back(std::move(name), std::move(m));
}

bool Container::Has(const std::string& name) const {
  return std::any_of(matrices.begin(), matrices.end(),
                     [&](const auto& entry) { return entry.first == name; });
}

const Matrix& Container::Get(const std::string& name) const {
  for (const auto& [key, m] : matrices) {
    if (key == name) return m;
  }
  throw InputError("container: no matrix named '" + name + "'");
}

void WriteContainer(std::ostream& out, const Container& c) {
  nlohmann::json header = c.header;
  header["matrices"] = nlohmann::json::array();
  for (const auto& [name, m] : c.matrices) {
    header["matrices"].push_back({{"name", name}, {"rows", m.rows()}, {"cols", m.cols()}});
  }
  const std::string text = header.dump();
  out.write(kMagic.data(), kMagic.size());
  WritePod<std::uint32_t>(out, kContainerVersion);
  WritePod<std::uint64_t>(out, text.size());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  std::vector<double> row;
  for (const auto& [name, m] : c.matrices) {
    row.resize(static_cast<std::size_t>(m.cols()));
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      for (Eigen::Index j = 0; j < m.cols(); ++j) row[static_cast<std::size_t>(j)] = m(i, j);
      out.write(reinterpret_cast<const char*>(row.data()),
                static_cast<std::streamsize>(row.size() * sizeof(double)));
    }
  }
  if (!out) throw ConfigError("container: write failed");
}

Container ReadContainer(std::istream& in) {
  std::array<char, 8> magic{};
  in.read(magic.data(), magic.size());
  if (!in || magic != kMagic) throw ConfigError("container: bad magic");
  const auto version = ReadPod<std::uint32_t>(in);
  if (version != kContainerVersion) {
    throw ConfigError("container: unsupported version " + std::to_string(version));
  }
  const auto length = ReadPod<std::uint64_t>(in);
  std::string text(length, '\0');
  in.read(text.data(), static_cast<std::streamsize>(length));
  if (!in) throw ConfigError("container: truncated header");
  Container c;
  try {
    c.header = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("container: malformed header: ") + e.what());
  }
  const nlohmann::json entries = c.header.value("matrices", nlohmann::json::array());
  c.header.erase("matrices");
  for (const auto& entry : entries) {
    const auto rows = entry.at("rows").get<Eigen::Index>();
    const auto cols = entry.at("cols").get<Eigen::Index>();
    if (rows < 0 || cols < 0) throw ConfigError("container: negative matrix shape");
    Matrix m(rows, cols);
    std::vector<double> row(static_cast<std::size_t>(cols));
    for (Eigen::Index i = 0; i < rows; ++i) {
      in.read(reinterpret_cast<char*>(row.data()),
              static_cast<std::streamsize>(row.size() * sizeof(double)));
      if (!in) throw ConfigError("container: truncated matrix data");
      for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = row[static_cast<std::size_t>(j)];
    }
    c.matrices.emplace_back(entry.at("name").get<std::string>(), std::move(m));
  }
  return c;
}

void SaveContainer(const std::filesystem::path& file, const Container& c) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw ConfigError("cannot open " + file.string() + " for writing");
  WriteContainer(out, c);
}

Container LoadContainer(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + file.string());
  return ReadContainer(in);
}

}  // namespace memmo
