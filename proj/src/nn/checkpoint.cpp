// SPDX-License-Identifier: Apache-2.0
#include "nlq/nn/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "nlq/core/errors.hpp"
#include "nlq/core/le_bytes.hpp"

namespace nlq::nn {

namespace {

constexpr char kMagic[4] = {'N', 'L', 'Q', 'C'};

}  // namespace

nlohmann::json encoder_config_to_json(const EncoderConfig& c) {
  return {{"hidden_dim", c.hidden_dim},           {"num_heads", c.num_heads},
          {"intra_layers", c.intra_layers},       {"cross_layers", c.cross_layers},
          {"video_input_dim", c.video_input_dim}, {"text_input_dim", c.text_input_dim},
          {"num_scales", c.num_scales},           {"dropout_rate", c.dropout_rate},
          {"feedforward_dim", c.feedforward_dim},      {"head", std::string(to_string(c.head))}};
}

EncoderConfig encoder_config_from_json(const nlohmann::json& j) {
  try {
    EncoderConfig c;
    c.hidden_dim = j.at("hidden_dim").get<int>();
    c.num_heads = j.at("num_heads").get<int>();
    c.intra_layers = j.at("intra_layers").get<int>();
    c.cross_layers = j.at("cross_layers").get<int>();
    c.video_input_dim = j.at("video_input_dim").get<int>();
    c.text_input_dim = j.at("text_input_dim").get<int>();
    c.num_scales = j.at("num_scales").get<int>();
    c.dropout_rate = j.at("dropout_rate").get<double>();
    c.feedforward_dim = j.at("feedforward_dim").get<int>();
    c.head = head_kind_from_string(j.at("head").get<std::string>());
    c.validate();
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("checkpoint: bad encoder_config: ") + e.what());
  }
}

std::vector<std::uint8_t> encode_checkpoint(const GroundingModel& model, const nlohmann::json& metadata) {
  const ParameterStore& p = model.params();
  nlohmann::json header;
  header["encoder_config"] = encoder_config_to_json(model.config());
  header["seed"] = model.seed();
  header["metadata"] = metadata.is_null() ? nlohmann::json::object() : metadata;
  auto manifest = nlohmann::json::array();
  std::uint64_t offset = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const Matrix& m = p.value(i);
    manifest.push_back({{"name", p.name(i)}, {"rows", m.rows()}, {"cols", m.cols()}, {"offset", offset}});
    offset += static_cast<std::uint64_t>(m.size()) * 4;
  }
  header["parameters"] = manifest;
  const std::string text = header.dump();

  std::vector<std::uint8_t> out;
  out.reserve(16 + text.size() + offset);
  out.insert(out.end(), std::begin(kMagic), std::end(kMagic));
  put_u32_le(out, kCheckpointVersion);
  put_u64_le(out, text.size());
  out.insert(out.end(), text.begin(), text.end());
  for (std::size_t i = 0; i < p.size(); ++i) {
    const Matrix& m = p.value(i);
    for (Eigen::Index j = 0; j < m.size(); ++j) put_f32_le(out, static_cast<float>(m.data()[j]));
  }
  return out;
}

Checkpoint decode_checkpoint(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < 16 || std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw FormatError("checkpoint: bad magic");
  }
  const std::uint32_t version = get_u32_le(bytes.data() + 4);
  if (version != kCheckpointVersion) {
    throw FormatError("checkpoint: unsupported version " + std::to_string(version));
  }
  const std::uint64_t json_len = get_u64_le(bytes.data() + 8);
  if (json_len > bytes.size() - 16) throw FormatError("checkpoint: truncated header");
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(bytes.begin() + 16, bytes.begin() + 16 + static_cast<std::ptrdiff_t>(json_len));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("checkpoint: header is not valid JSON: ") + e.what());
  }
  const std::size_t payload_start = 16 + json_len;
  const std::size_t payload_size = bytes.size() - payload_start;

  if (!header.is_object() || !header.contains("encoder_config") || !header.contains("parameters")) {
    throw FormatError("checkpoint: header lacks encoder_config or parameters");
  }
  const EncoderConfig config = encoder_config_from_json(header.at("encoder_config"));
  ParameterStore params;
  try {
    for (const auto& entry : header.at("parameters")) {
      const auto name = entry.at("name").get<std::string>();
      const auto rows = entry.at("rows").get<Eigen::Index>();
      const auto cols = entry.at("cols").get<Eigen::Index>();
      const auto offset = entry.at("offset").get<std::uint64_t>();
      const std::uint64_t nbytes = static_cast<std::uint64_t>(rows) * static_cast<std::uint64_t>(cols) * 4;
      if (rows < 0 || cols < 0 || offset > payload_size || nbytes > payload_size - offset) {
        throw FormatError("checkpoint: truncated payload for '" + name + "'");
      }
      Matrix m(rows, cols);
      const std::uint8_t* src = bytes.data() + payload_start + offset;
      for (Eigen::Index j = 0; j < m.size(); ++j) m.data()[j] = get_f32_le(src + 4 * j);
      params.add(name, std::move(m));
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("checkpoint: bad parameter manifest: ") + e.what());
  }
  Checkpoint ck{GroundingModel::from_parameters(config, header.value("seed", std::uint64_t{0}), std::move(params)),
                header.value("metadata", nlohmann::json::object())};
  return ck;
}

void save_checkpoint(const std::filesystem::path& path, const GroundingModel& model, const nlohmann::json& metadata) {
  const auto bytes = encode_checkpoint(model, metadata);
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot open checkpoint for writing: " + path.string());
  os.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!os) throw IoError("failed writing checkpoint: " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open checkpoint: " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  return decode_checkpoint(bytes);
}

GroundingModel quantize_to_f32(const GroundingModel& model) {
  GroundingModel out = model;
  ParameterStore& p = out.params();
  for (std::size_t i = 0; i < p.size(); ++i) {
    Matrix& m = p.value(i);
    for (Eigen::Index j = 0; j < m.size(); ++j) m.data()[j] = static_cast<float>(m.data()[j]);
  }
  return out;
}

}  // namespace nlq::nn
