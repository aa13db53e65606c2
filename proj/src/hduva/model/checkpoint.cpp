#include "hduva/model/checkpoint.hpp"

#include <cstring>
#include <fstream>

#include <json.hpp>

#include "hduva/core/errors.hpp"

namespace hduva::model {

using nlohmann::json;

namespace {

constexpr char kMagic[8] = {'H', 'D', 'U', 'V', 'A', 'C', 'P', '1'};

json config_to_json_obj(const ModelConfig& c) {
  json j;
  j["zx_dim"] = c.zx_dim;
  j["zy_dim"] = c.zy_dim;
  j["zd_dim"] = c.zd_dim;
  j["topic_dim"] = c.topic_dim;
  j["num_classes"] = c.num_classes;
  j["channels"] = c.channels;
  j["height"] = c.height;
  j["width"] = c.width;
  j["variant"] = variant_name(c.variant);
  j["with_zx"] = c.with_zx;
  j["decoder_uses_s"] = c.decoder_uses_s;
  j["topic_samples"] = c.topic_samples;
  j["backbone"] = c.backbone == Backbone::linear ? "linear" : "conv_small";
  j["trunk_c1"] = c.trunk_c1;
  j["trunk_c2"] = c.trunk_c2;
  return j;
}

ModelConfig config_from_json_obj(const json& j) {
  ModelConfig c;
  c.zx_dim = j.at("zx_dim").get<int>();
  c.zy_dim = j.at("zy_dim").get<int>();
  c.zd_dim = j.at("zd_dim").get<int>();
  c.topic_dim = j.at("topic_dim").get<int>();
  c.num_classes = j.at("num_classes").get<int>();
  c.channels = j.at("channels").get<int>();
  c.height = j.at("height").get<int>();
  c.width = j.at("width").get<int>();
  c.variant = variant_from_name(j.at("variant").get<std::string>());
  c.with_zx = j.at("with_zx").get<bool>();
  c.decoder_uses_s = j.at("decoder_uses_s").get<bool>();
  c.topic_samples = j.at("topic_samples").get<int>();
  c.backbone = j.at("backbone").get<std::string>() == "linear"
                   ? Backbone::linear
                   : Backbone::conv_small;
  c.trunk_c1 = j.at("trunk_c1").get<int>();
  c.trunk_c2 = j.at("trunk_c2").get<int>();
  return c;
}

}  // namespace

std::string model_config_to_json(const ModelConfig& cfg) {
  return config_to_json_obj(cfg).dump();
}

ModelConfig model_config_from_json(const std::string& text) {
  return config_from_json_obj(json::parse(text));
}

void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
  json j;
  j["version"] = ckpt.version;
  j["model"] = config_to_json_obj(ckpt.config);
  j["variant_tag"] = ckpt.variant_tag;
  j["seed"] = ckpt.seed;
  j["objective_history"] = ckpt.objective_history;
  j["train_config"] = ckpt.train_config;
  json tensors = json::array();
  for (const auto& name : ckpt.params.names()) {
    const Tensor& t = ckpt.params.get(name);
    json e;
    e["name"] = name;
    e["shape"] = t.shape();
    e["trainable"] = ckpt.params.trainable(name);
    tensors.push_back(e);
  }
  j["tensors"] = tensors;
  const std::string header = j.dump();

  std::ofstream out(path, std::ios::binary);
  if (!out) throw io_error("cannot open checkpoint for writing: " + path);
  out.write(kMagic, sizeof(kMagic));
  const std::uint64_t hlen = header.size();
  out.write(reinterpret_cast<const char*>(&hlen), sizeof(hlen));
  out.write(header.data(), static_cast<std::streamsize>(header.size()));
  for (const auto& name : ckpt.params.names()) {
    const Tensor& t = ckpt.params.get(name);
    out.write(reinterpret_cast<const char*>(t.data()),
              static_cast<std::streamsize>(t.size() * sizeof(double)));
  }
  if (!out) throw io_error("checkpoint write failed: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("cannot open checkpoint: " + path);
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw io_error("not a checkpoint file: " + path);
  std::uint64_t hlen = 0;
  in.read(reinterpret_cast<char*>(&hlen), sizeof(hlen));
  std::string header(hlen, '\0');
  in.read(header.data(), static_cast<std::streamsize>(hlen));
  if (!in) throw io_error("truncated checkpoint header: " + path);
  json j = json::parse(header);

  Checkpoint ckpt;
  ckpt.version = j.at("version").get<int>();
  ckpt.config = config_from_json_obj(j.at("model"));
  ckpt.variant_tag = j.at("variant_tag").get<std::string>();
  ckpt.seed = j.at("seed").get<std::uint64_t>();
  ckpt.objective_history = j.at("objective_history").get<std::vector<double>>();
  ckpt.train_config =
      j.at("train_config").get<std::map<std::string, std::string>>();
  for (const auto& e : j.at("tensors")) {
    const std::string name = e.at("name").get<std::string>();
    const std::vector<int> shape = e.at("shape").get<std::vector<int>>();
    Tensor& t = ckpt.params.create(name, shape, e.at("trainable").get<bool>());
    in.read(reinterpret_cast<char*>(t.data()),
            static_cast<std::streamsize>(t.size() * sizeof(double)));
  }
  if (!in) throw io_error("truncated checkpoint blob: " + path);
  return ckpt;
}

}  // namespace hduva::model
