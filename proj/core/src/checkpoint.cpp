#include "oasd/checkpoint.hpp"

#include <fstream>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "oasd/error.hpp"

namespace oasd {

using nlohmann::json;

ModelState ModelState::init(const ModelConfig& cfg) {
  ModelState m;
  m.config = cfg;
  Rng init_rng = Rng::substream(cfg.seed, "init");
  m.rsr = RsrParams::init(cfg.vocab, cfg.embed_dim, cfg.hidden_dim, init_rng);
  m.policy = PolicyParams::init(m.rsr.z_dim(), cfg.label_dim, init_rng);
  m.opt_rsr = AdamState(AdamConfig{.lr = cfg.lr_rsr});
  m.opt_policy = AdamState(AdamConfig{.lr = cfg.lr_asd});
  return m;
}

void apply_profile(ModelConfig& cfg, const std::string& profile) {
  if (profile == "desk") {
    cfg.embed_dim = cfg.hidden_dim = cfg.label_dim = 32;
  } else if (profile == "paper") {
    cfg.embed_dim = cfg.hidden_dim = cfg.label_dim = 128;
  } else {
    throw config_error(fmt::format("unknown profile '{}', expected desk|paper", profile));
  }
  cfg.profile = profile;
}

namespace {

json tensor_to_json(const Tensor& t) {
  json j;
  j["shape"] = t.shape();
  j["data"] = std::vector<double>(t.span().begin(), t.span().end());
  return j;
}

Tensor tensor_from_json(const json& j) {
  return Tensor::from(j.at("shape").get<std::vector<std::size_t>>(),
                      j.at("data").get<std::vector<double>>());
}

void put_opt(json& tensors, const std::string& prefix, const AdamState& opt) {
  for (const auto& [name, mv] : opt.moments()) {
    tensors[fmt::format("{}.{}.m", prefix, name)] = tensor_to_json(mv.first);
    tensors[fmt::format("{}.{}.v", prefix, name)] = tensor_to_json(mv.second);
  }
}

void get_opt(const json& tensors, const std::string& prefix, AdamState& opt) {
  const std::string m_suffix = ".m";
  for (auto it = tensors.begin(); it != tensors.end(); ++it) {
    const std::string& key = it.key();
    if (key.rfind(prefix + ".", 0) != 0) continue;
    if (key.size() < m_suffix.size() ||
        key.compare(key.size() - m_suffix.size(), m_suffix.size(), m_suffix) != 0) {
      continue;
    }
    const std::string name =
        key.substr(prefix.size() + 1, key.size() - prefix.size() - 1 - m_suffix.size());
    Tensor m = tensor_from_json(it.value());
    Tensor v = tensor_from_json(tensors.at(fmt::format("{}.{}.v", prefix, name)));
    opt.moments()[name] = {std::move(m), std::move(v)};
  }
}

}  // namespace

void save_model(std::ostream& out, const ModelState& model) {
  json doc;
  doc["version"] = 1;
  const ModelConfig& c = model.config;
  doc["config"] = {{"vocab", c.vocab},
                   {"embed_dim", c.embed_dim},
                   {"hidden_dim", c.hidden_dim},
                   {"label_dim", c.label_dim},
                   {"alpha", c.alpha},
                   {"delta", c.delta},
                   {"delay", c.delay},
                   {"slots_per_day", c.slots_per_day},
                   {"lr_rsr", c.lr_rsr},
                   {"lr_asd", c.lr_asd},
                   {"seed", c.seed},
                   {"profile", c.profile},
                   {"opt_rsr_step", model.opt_rsr.step_count()},
                   {"opt_policy_step", model.opt_policy.step_count()},
                   {"opt_rsr_adaptive", model.opt_rsr.config().adaptive},
                   {"opt_policy_adaptive", model.opt_policy.config().adaptive}};

  json tensors;
  tensors["rsr.embedding"] = tensor_to_json(model.rsr.embedding);
  tensors["rsr.lstm.w_x"] = tensor_to_json(model.rsr.lstm.w_x);
  tensors["rsr.lstm.w_h"] = tensor_to_json(model.rsr.lstm.w_h);
  tensors["rsr.lstm.bias"] = tensor_to_json(model.rsr.lstm.bias);
  tensors["rsr.head_w"] = tensor_to_json(model.rsr.head_w);
  tensors["rsr.head_b"] = tensor_to_json(model.rsr.head_b);
  tensors["pol.label_embed"] = tensor_to_json(model.policy.label_embed);
  tensors["pol.head_w"] = tensor_to_json(model.policy.head_w);
  tensors["pol.head_b"] = tensor_to_json(model.policy.head_b);
  put_opt(tensors, "opt_rsr", model.opt_rsr);
  put_opt(tensors, "opt_policy", model.opt_policy);
  doc["tensors"] = std::move(tensors);

  out << doc.dump(2) << "\n";
}

void save_model_file(const std::string& path, const ModelState& model) {
  std::ofstream out(path);
  if (!out) throw io_error(fmt::format("cannot write model file '{}'", path));
  save_model(out, model);
}

ModelState load_model(std::istream& in) {
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw parse_error(fmt::format("model file: {}", e.what()));
  }
  if (doc.value("version", 0) != 1) {
    throw validation_error("unsupported model checkpoint version");
  }

  ModelState m;
  const json& c = doc.at("config");
  m.config.vocab = c.at("vocab").get<std::size_t>();
  m.config.embed_dim = c.at("embed_dim").get<std::size_t>();
  m.config.hidden_dim = c.at("hidden_dim").get<std::size_t>();
  m.config.label_dim = c.at("label_dim").get<std::size_t>();
  m.config.alpha = c.at("alpha").get<double>();
  m.config.delta = c.at("delta").get<double>();
  m.config.delay = c.at("delay").get<std::size_t>();
  m.config.slots_per_day = c.at("slots_per_day").get<int>();
  m.config.lr_rsr = c.at("lr_rsr").get<double>();
  m.config.lr_asd = c.at("lr_asd").get<double>();
  m.config.seed = c.at("seed").get<std::uint64_t>();
  m.config.profile = c.at("profile").get<std::string>();

  const json& tensors = doc.at("tensors");
  m.rsr.embedding = tensor_from_json(tensors.at("rsr.embedding"));
  m.rsr.lstm.w_x = tensor_from_json(tensors.at("rsr.lstm.w_x"));
  m.rsr.lstm.w_h = tensor_from_json(tensors.at("rsr.lstm.w_h"));
  m.rsr.lstm.bias = tensor_from_json(tensors.at("rsr.lstm.bias"));
  m.rsr.lstm.input_size = m.config.embed_dim;
  m.rsr.lstm.hidden_size = m.config.hidden_dim;
  m.rsr.head_w = tensor_from_json(tensors.at("rsr.head_w"));
  m.rsr.head_b = tensor_from_json(tensors.at("rsr.head_b"));
  m.policy.label_embed = tensor_from_json(tensors.at("pol.label_embed"));
  m.policy.head_w = tensor_from_json(tensors.at("pol.head_w"));
  m.policy.head_b = tensor_from_json(tensors.at("pol.head_b"));

  const AdamConfig rsr_cfg{.lr = m.config.lr_rsr,
                           .adaptive = c.value("opt_rsr_adaptive", true)};
  const AdamConfig pol_cfg{.lr = m.config.lr_asd,
                           .adaptive = c.value("opt_policy_adaptive", true)};
  m.opt_rsr = AdamState(rsr_cfg);
  m.opt_policy = AdamState(pol_cfg);
  get_opt(tensors, "opt_rsr", m.opt_rsr);
  get_opt(tensors, "opt_policy", m.opt_policy);
  m.opt_rsr.restore(c.at("opt_rsr_step").get<std::int64_t>(), rsr_cfg);
  m.opt_policy.restore(c.at("opt_policy_step").get<std::int64_t>(), pol_cfg);

  if (m.rsr.embedding.dim(0) != m.config.vocab ||
      m.rsr.lstm.w_x.dim(1) != m.config.embed_dim ||
      m.rsr.lstm.w_x.dim(0) != 4 * m.config.hidden_dim) {
    throw validation_error("model tensor shapes disagree with the config");
  }
  return m;
}

ModelState load_model_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error(fmt::format("cannot open model file '{}'", path));
  return load_model(in);
}

}  // namespace oasd
