#include "tenence/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace tenence {

namespace {

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes little-endian");

constexpr char kMagic[4] = {'T', 'N', 'C', 'K'};

template <class T>
void put(std::string& out, T value) {
  char buf[sizeof(T)];
  std::memcpy(buf, &value, sizeof(T));
  out.append(buf, sizeof(T));
}

template <class T>
T take(const std::string& in, std::size_t& pos) {
  if (pos + sizeof(T) > in.size()) throw CheckpointError("checkpoint truncated");
  T value;
  std::memcpy(&value, in.data() + pos, sizeof(T));
  pos += sizeof(T);
  return value;
}

nlohmann::json config_json(const ModelConfig& c) {
  return {{"feature_dim", c.feature_dim}, {"enc_dim", c.enc_dim},
          {"state_dim", c.state_dim},     {"time_dim", c.time_dim},
          {"dec_dim", c.dec_dim},         {"local_hidden", c.local_hidden},
          {"head_bias", c.head_bias}};
}

ModelConfig config_from(const nlohmann::json& j) {
  ModelConfig c;
  c.feature_dim = j.at("feature_dim").get<std::size_t>();
  c.enc_dim = j.at("enc_dim").get<std::size_t>();
  c.state_dim = j.at("state_dim").get<std::size_t>();
  c.time_dim = j.at("time_dim").get<std::size_t>();
  c.dec_dim = j.at("dec_dim").get<std::size_t>();
  c.local_hidden = j.at("local_hidden").get<std::size_t>();
  c.head_bias = j.at("head_bias").get<bool>();
  return c;
}

}  // namespace

std::string serialize_checkpoint(const ModelParameters& params, const CheckpointMeta& meta) {
  nlohmann::json header;
  header["config_hash"] = meta.config_hash;
  header["seed"] = meta.seed;
  header["epoch"] = meta.epoch;
  header["model"] = config_json(params.config);
  header["tensors"] = nlohmann::json::array();
  for_each_tensor(params.tensors, [&](const std::string& name, const Matrix& m) {
    header["tensors"].push_back({{"name", name}, {"rows", m.rows()}, {"cols", m.cols()}});
  });
  const std::string text = header.dump();

  std::string out(kMagic, 4);
  put<std::uint32_t>(out, kCheckpointVersion);
  put<std::uint64_t>(out, text.size());
  out += text;
  for_each_tensor(params.tensors, [&](const std::string&, const Matrix& m) {
    out.append(reinterpret_cast<const char*>(m.data()),
               static_cast<std::size_t>(m.size()) * sizeof(double));
  });
  return out;
}

Checkpoint deserialize_checkpoint(const std::string& bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw CheckpointError("not a checkpoint (bad magic)");
  }
  std::size_t pos = 4;
  const auto version = take<std::uint32_t>(bytes, pos);
  if (version != kCheckpointVersion) {
    throw CheckpointError("unsupported checkpoint version " + std::to_string(version));
  }
  const auto header_len = take<std::uint64_t>(bytes, pos);
  if (pos + header_len > bytes.size()) throw CheckpointError("checkpoint truncated");
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(bytes.substr(pos, header_len));
  } catch (const nlohmann::json::exception& e) {
    throw CheckpointError(std::string("bad checkpoint header: ") + e.what());
  }
  pos += header_len;

  Checkpoint ck;
  try {
    ck.meta.config_hash = header.at("config_hash").get<std::string>();
    ck.meta.seed = header.at("seed").get<std::uint64_t>();
    ck.meta.epoch = header.at("epoch").get<std::size_t>();
    ck.params = zero_parameters(config_from(header.at("model")));
  } catch (const nlohmann::json::exception& e) {
    throw CheckpointError(std::string("bad checkpoint header: ") + e.what());
  }
  const auto& listed = header.at("tensors");
  std::size_t idx = 0;
  for_each_tensor(ck.params.tensors, [&](const std::string& name, Matrix& m) {
    if (idx >= listed.size() || listed[idx].at("name") != name ||
        listed[idx].at("rows").get<Eigen::Index>() != m.rows() ||
        listed[idx].at("cols").get<Eigen::Index>() != m.cols()) {
      throw CheckpointError("checkpoint tensor layout mismatch at " + name);
    }
    const auto n = static_cast<std::size_t>(m.size()) * sizeof(double);
    if (pos + n > bytes.size()) throw CheckpointError("checkpoint truncated");
    std::memcpy(m.data(), bytes.data() + pos, n);
    pos += n;
    ++idx;
  });
  if (idx != listed.size() || pos != bytes.size()) {
    throw CheckpointError("checkpoint has trailing or missing tensors");
  }
  return ck;
}

void save_checkpoint(const std::filesystem::path& path, const ModelParameters& params,
                     const CheckpointMeta& meta) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw CheckpointError("cannot write " + path.string());
  const auto bytes = serialize_checkpoint(params, meta);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw CheckpointError("write failed: " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return deserialize_checkpoint(buf.str());
}

}  // namespace tenence
