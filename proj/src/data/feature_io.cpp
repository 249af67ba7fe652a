// SPDX-License-Identifier: Apache-2.0
#include "nlq/data/feature_io.hpp"

#include <cstdio>
#include <cstring>
#include <fstream>
#include <iterator>

#include "nlq/core/errors.hpp"
#include "nlq/core/le_bytes.hpp"

namespace nlq::data {

namespace fs = std::filesystem;

namespace {

constexpr char kMagic[4] = {'E', 'G', 'F', '1'};

std::vector<std::uint8_t> read_file(const fs::path& path, const std::string& id) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw FormatError("feature '" + id + "': missing file " + path.string());
  return {std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>()};
}

void write_file(const fs::path& path, const std::vector<std::uint8_t>& bytes) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot write " + path.string());
  os.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!os) throw IoError("failed writing " + path.string());
}

}  // namespace

Matrix round_to_f32(const Matrix& m) {
  return m.unaryExpr([](double v) { return static_cast<double>(static_cast<float>(v)); });
}

std::vector<std::uint8_t> encode_feature_matrix(const Matrix& m) {
  if (!m.allFinite()) throw InvalidArgument("feature matrix contains non-finite values");
  std::vector<std::uint8_t> out;
  out.reserve(12 + 4 * static_cast<std::size_t>(m.size()));
  out.insert(out.end(), std::begin(kMagic), std::end(kMagic));
  put_u32_le(out, static_cast<std::uint32_t>(m.rows()));
  put_u32_le(out, static_cast<std::uint32_t>(m.cols()));
  for (Eigen::Index i = 0; i < m.size(); ++i) put_f32_le(out, static_cast<float>(m.data()[i]));
  return out;
}

Matrix decode_feature_matrix(const std::vector<std::uint8_t>& bytes, const std::string& id) {
  if (bytes.size() < 12 || std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw FormatError("feature '" + id + "': bad magic");
  }
  const std::uint32_t rows = get_u32_le(bytes.data() + 4);
  const std::uint32_t cols = get_u32_le(bytes.data() + 8);
  const std::uint64_t expected = 12 + 4ULL * rows * cols;
  if (bytes.size() != expected) {
    throw FormatError("feature '" + id + "': payload has " + std::to_string(bytes.size()) + " bytes, expected " +
                      std::to_string(expected));
  }
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = get_f32_le(bytes.data() + 12 + 4 * i);
  if (!m.allFinite()) throw FormatError("feature '" + id + "': non-finite values");
  return m;
}

nlohmann::json write_features(const fs::path& dir, const FeatureMap& features) {
  fs::create_directories(dir);
  nlohmann::json manifest;
  manifest["format"] = "EGF1";
  manifest["entries"] = nlohmann::json::array();
  std::size_t index = 0;
  for (const auto& [id, m] : features) {
    char name[32];
    std::snprintf(name, sizeof name, "%06zu.egf", index++);
    write_file(dir / name, encode_feature_matrix(m));
    manifest["entries"].push_back({{"id", id}, {"file", name}, {"rows", m.rows()}, {"cols", m.cols()}});
  }
  std::ofstream os(dir / "manifest.json", std::ios::trunc);
  if (!os) throw IoError("cannot write manifest in " + dir.string());
  os << manifest.dump(1) << "\n";
  return manifest;
}

FeatureMap read_features(const fs::path& dir) {
  std::ifstream is(dir / "manifest.json");
  if (!is) throw FormatError("feature container: missing manifest.json in " + dir.string());
  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(is);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("feature container: manifest is not valid JSON: ") + e.what());
  }
  if (manifest.value("format", "") != "EGF1" || !manifest.contains("entries") || !manifest["entries"].is_array()) {
    throw FormatError("feature container: manifest lacks EGF1 format tag or entries");
  }
  FeatureMap out;
  for (const auto& entry : manifest["entries"]) {
    std::string id;
    try {
      id = entry.at("id").get<std::string>();
      const auto file = entry.at("file").get<std::string>();
      const auto rows = entry.at("rows").get<Eigen::Index>();
      const auto cols = entry.at("cols").get<Eigen::Index>();
      Matrix m = decode_feature_matrix(read_file(dir / file, id), id);
      if (m.rows() != rows || m.cols() != cols) {
        throw FormatError("feature '" + id + "': manifest shape does not match file");
      }
      if (!out.emplace(id, std::move(m)).second) throw FormatError("feature '" + id + "': duplicate id");
    } catch (const nlohmann::json::exception& e) {
      throw FormatError("feature container: bad manifest entry '" + id + "': " + e.what());
    }
  }
  return out;
}

}  // namespace nlq::data
