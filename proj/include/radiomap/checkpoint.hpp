#pragma once

#include <nlohmann/json.hpp>

#include <array>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "radiomap/errors.hpp"
#include "radiomap/models.hpp"

namespace radiomap {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Spec JSON

inline json spec_to_json(const UNetSpec& s) {
  return {{"in_channels", s.in_channels},
          {"stage_channels", s.stage_channels},
          {"kernel_size", s.kernel_size},
          {"out_channels", s.out_channels},
          {"padding", s.padding == Padding::Zero ? "zero" : "circular"}};
}

/// Rejects unknown keys.
inline void check_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + ": expected a JSON object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || it.key() == a;
    if (!ok) throw ConfigError(where + ": unknown key '" + it.key() + "'");
  }
}

inline UNetSpec unet_spec_from_json(const json& j) {
  check_keys(j, {"in_channels", "stage_channels", "kernel_size", "out_channels", "padding"}, "unet spec");
  UNetSpec s;
  try {
    s.in_channels = j.value("in_channels", s.in_channels);
    s.stage_channels = j.value("stage_channels", s.stage_channels);
    s.kernel_size = j.value("kernel_size", s.kernel_size);
    s.out_channels = j.value("out_channels", s.out_channels);
    const std::string pad = j.value("padding", std::string("zero"));
    if (pad != "zero" && pad != "circular") throw ConfigError("unet spec: padding must be zero|circular");
    s.padding = pad == "zero" ? Padding::Zero : Padding::Circular;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("unet spec: ") + e.what());
  }
  validate(s);
  return s;
}

inline json spec_to_json(const MlpSpec& s) { return {{"hidden_sizes", s.hidden_sizes}}; }

inline MlpSpec mlp_spec_from_json(const json& j) {
  check_keys(j, {"hidden_sizes"}, "mlp spec");
  MlpSpec s;
  try {
    s.hidden_sizes = j.value("hidden_sizes", s.hidden_sizes);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("mlp spec: ") + e.what());
  }
  return s;
}

// ---------------------------------------------------------------------------
// Checkpoint file: 8-byte magic, u64 header length, JSON header, then the
// parameters as little-endian IEEE-754 doubles.

inline constexpr std::array<char, 8> kCheckpointMagic{'R', 'M', 'A', 'P', 'C', 'K', 'P', 'T'};
inline constexpr int kCheckpointVersion = 1;

struct Checkpoint {
  json header;
  std::vector<double> params;
};

namespace detail {

inline void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

inline std::uint64_t get_u64(const unsigned char* p) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
  return v;
}

template <typename T>
void append_params(std::vector<double>& out, const std::vector<Tensor<T>>& params) {
  for (const auto& t : params)
    for (T v : t.data()) out.push_back(static_cast<double>(v));
}

template <typename T>
std::size_t assign_params(std::vector<Tensor<T>>& params, const std::vector<double>& blob, std::size_t offset) {
  for (auto& t : params)
    for (T& v : t.data()) v = static_cast<T>(blob.at(offset++));
  return offset;
}

}  // namespace detail

inline void write_checkpoint(const Checkpoint& ck, const std::filesystem::path& path) {
  json header = ck.header;
  header["version"] = kCheckpointVersion;
  header["param_count"] = ck.params.size();
  const std::string text = header.dump();
  std::string bytes(kCheckpointMagic.begin(), kCheckpointMagic.end());
  detail::put_u64(bytes, text.size());
  bytes += text;
  for (double d : ck.params) {
    std::uint64_t bits;
    std::memcpy(&bits, &d, sizeof bits);
    detail::put_u64(bytes, bits);
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write checkpoint " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw DataError("write failed: " + path.string());
}

/// Parameter count implied by the UNet layout stored in a header.
inline std::size_t expected_param_count(const json& header) {
  const std::string kind = header.at("kind");
  if (kind == "unet") return static_cast<std::size_t>(param_count(unet_spec_from_json(header.at("spec"))));
  if (kind == "wnet")
    return static_cast<std::size_t>(param_count(unet_spec_from_json(header.at("spec").at("first"))) +
                                    param_count(unet_spec_from_json(header.at("spec").at("second"))));
  if (kind == "mlp") return static_cast<std::size_t>(param_count(mlp_spec_from_json(header.at("spec"))));
  throw DataError("checkpoint: unknown model kind '" + kind + "'");
}

inline Checkpoint read_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open checkpoint " + path.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (bytes.size() < 16 || std::memcmp(bytes.data(), kCheckpointMagic.data(), 8) != 0)
    throw DataError("not a radiomap checkpoint: " + path.string());
  const std::uint64_t hlen = detail::get_u64(bytes.data() + 8);
  if (hlen > bytes.size() - 16) throw DataError("checkpoint header length mismatch in " + path.string());
  Checkpoint ck;
  try {
    ck.header = json::parse(bytes.begin() + 16, bytes.begin() + 16 + static_cast<long>(hlen));
  } catch (const json::exception& e) {
    throw DataError(std::string("checkpoint header is not valid JSON: ") + e.what());
  }
  if (ck.header.value("version", -1) != kCheckpointVersion)
    throw DataError("unknown checkpoint version " + ck.header.value("version", json(nullptr)).dump());

  const std::size_t declared = ck.header.at("param_count");
  const std::size_t blob_bytes = bytes.size() - 16 - hlen;
  if (blob_bytes != declared * 8)
    throw DataError("checkpoint length mismatch: header declares " + std::to_string(declared) + " parameters (" +
                    std::to_string(declared * 8) + " bytes) but blob has " + std::to_string(blob_bytes) + " bytes");
  const std::size_t from_spec = expected_param_count(ck.header);
  if (from_spec != declared)
    throw DataError("checkpoint spec/blob mismatch: spec implies " + std::to_string(from_spec) +
                    " parameters, blob holds " + std::to_string(declared));
  ck.params.resize(declared);
  const unsigned char* p = bytes.data() + 16 + hlen;
  for (std::size_t i = 0; i < declared; ++i) {
    std::uint64_t bits = detail::get_u64(p + 8 * i);
    std::memcpy(&ck.params[i], &bits, sizeof bits);
  }
  return ck;
}

template <typename T>
void save_checkpoint(const UNet<T>& model, const std::filesystem::path& path, const json& metadata = json::object()) {
  Checkpoint ck;
  ck.header = {{"kind", "unet"}, {"spec", spec_to_json(model.spec())}, {"seed", model.seed()}, {"metadata", metadata}};
  detail::append_params(ck.params, model.parameters());
  write_checkpoint(ck, path);
}

template <typename T>
void save_checkpoint(const WNet<T>& model, const std::filesystem::path& path, const json& metadata = json::object()) {
  Checkpoint ck;
  ck.header = {{"kind", "wnet"},
               {"spec",
                {{"first", spec_to_json(model.first().spec())},
                 {"second", spec_to_json(model.second().spec())},
                 {"mode", to_string(model.mode())}}},
               {"seed", {model.first().seed(), model.second().seed()}},
               {"metadata", metadata}};
  detail::append_params(ck.params, model.first().parameters());
  detail::append_params(ck.params, model.second().parameters());
  write_checkpoint(ck, path);
}

template <typename T>
void save_checkpoint(const Mlp<T>& model, const std::filesystem::path& path, const json& metadata = json::object()) {
  Checkpoint ck;
  ck.header = {{"kind", "mlp"}, {"spec", spec_to_json(model.spec())}, {"seed", model.seed()}, {"metadata", metadata}};
  detail::append_params(ck.params, model.parameters());
  write_checkpoint(ck, path);
}

inline void require_kind(const Checkpoint& ck, const std::string& kind) {
  if (ck.header.at("kind") != kind)
    throw DataError("checkpoint holds a " + ck.header.at("kind").get<std::string>() + ", expected " + kind);
}

template <typename T = double>
UNet<T> unet_from_checkpoint(const Checkpoint& ck) {
  require_kind(ck, "unet");
  UNet<T> m(unet_spec_from_json(ck.header.at("spec")), ck.header.at("seed").get<std::uint64_t>());
  detail::assign_params(m.parameters(), ck.params, 0);
  return m;
}

template <typename T = double>
WNet<T> wnet_from_checkpoint(const Checkpoint& ck) {
  require_kind(ck, "wnet");
  const json& s = ck.header.at("spec");
  WNetSpec spec{unet_spec_from_json(s.at("first")), unet_spec_from_json(s.at("second")),
                wnet_mode_from_string(s.at("mode"))};
  const auto seeds = ck.header.at("seed").get<std::vector<std::uint64_t>>();
  UNet<T> first(spec.first, seeds.at(0)), second(spec.second, seeds.at(1));
  std::size_t off = detail::assign_params(first.parameters(), ck.params, 0);
  detail::assign_params(second.parameters(), ck.params, off);
  return WNet<T>(spec, std::move(first), std::move(second));
}

template <typename T = double>
Mlp<T> mlp_from_checkpoint(const Checkpoint& ck) {
  require_kind(ck, "mlp");
  Mlp<T> m(mlp_spec_from_json(ck.header.at("spec")), ck.header.at("seed").get<std::uint64_t>());
  detail::assign_params(m.parameters(), ck.params, 0);
  return m;
}

template <typename T = double>
UNet<T> load_unet(const std::filesystem::path& path) {
  return unet_from_checkpoint<T>(read_checkpoint(path));
}

template <typename T = double>
WNet<T> load_wnet(const std::filesystem::path& path) {
  return wnet_from_checkpoint<T>(read_checkpoint(path));
}

template <typename T = double>
Mlp<T> load_mlp(const std::filesystem::path& path) {
  return mlp_from_checkpoint<T>(read_checkpoint(path));
}

}  // namespace radiomap
