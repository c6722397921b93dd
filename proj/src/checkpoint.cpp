#include "reltr/checkpoint.hpp"

#include <fstream>

#include "json.hpp"
#include "reltr/error.hpp"

namespace reltr {

namespace {
using ojson = nlohmann::ordered_json;
}

void save_checkpoint(const ModelConfig& cfg, const Vocab& vocab,
                     const ModelParams& params, const FrequencyTable& freq,
                     const std::string& path) {
  ojson doc;
  doc["format_version"] = "1.0";

  ojson& jc = doc["config"];
  jc["d_model"] = cfg.d_model;
  jc["num_heads"] = cfg.num_heads;
  jc["d_vis"] = cfg.d_vis;
  jc["d_sem"] = cfg.d_sem;
  jc["d_ff"] = cfg.d_ff;
  jc["num_classes"] = cfg.num_classes;
  jc["num_predicates"] = cfg.num_predicates;
  jc["encoder_layers"] = cfg.encoder_layers;
  jc["decoder_layers"] = cfg.decoder_layers;
  jc["dropout"] = cfg.dropout;
  jc["ln_eps"] = cfg.ln_eps;
  jc["pos_m"] = cfg.pos_m;
  jc["leaky_slope"] = cfg.leaky_slope;
  jc["seed"] = cfg.seed;

  doc["vocab"]["object_classes"] = vocab.object_classes;
  doc["vocab"]["predicates"] = vocab.predicates;

  ojson& jf = doc["frequency"];
  jf["num_classes"] = freq.num_classes;
  jf["num_predicates"] = freq.num_predicates;
  jf["eps"] = freq.eps;
  jf["counts"] = freq.counts;

  ojson jp = ojson::array();
  for (const auto& [name, t] : params.collect()) {
    ojson entry;
    entry["name"] = name;
    entry["shape"] = t.shape();
    entry["data"] = std::vector<double>(t.data(), t.data() + t.size());
    jp.push_back(std::move(entry));
  }
  doc["params"] = std::move(jp);

  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("save_checkpoint: cannot open " + path);
  out << doc.dump() << '\n';
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("load_checkpoint: cannot open " + path);
  ojson doc;
  try {
    doc = ojson::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("load_checkpoint: parse error in " + path + ": " +
                          e.what());
  }

  Checkpoint ck;
  try {
    const std::string version = doc.at("format_version").get<std::string>();
    if (version.substr(0, version.find('.')) != "1")
      throw ValidationError("load_checkpoint: unsupported format_version " +
                            version);

    const ojson& jc = doc.at("config");
    ck.config.d_model = jc.at("d_model").get<std::size_t>();
    ck.config.num_heads = jc.at("num_heads").get<std::size_t>();
    ck.config.d_vis = jc.at("d_vis").get<std::size_t>();
    ck.config.d_sem = jc.at("d_sem").get<std::size_t>();
    ck.config.d_ff = jc.at("d_ff").get<std::size_t>();
    ck.config.num_classes = jc.at("num_classes").get<std::size_t>();
    ck.config.num_predicates = jc.at("num_predicates").get<std::size_t>();
    ck.config.encoder_layers = jc.at("encoder_layers").get<std::size_t>();
    ck.config.decoder_layers = jc.at("decoder_layers").get<std::size_t>();
    ck.config.dropout = jc.at("dropout").get<double>();
    ck.config.ln_eps = jc.at("ln_eps").get<double>();
    ck.config.pos_m = jc.at("pos_m").get<double>();
    ck.config.leaky_slope = jc.at("leaky_slope").get<double>();
    ck.config.seed = jc.at("seed").get<std::uint64_t>();

    ck.vocab.object_classes =
        doc.at("vocab").at("object_classes").get<std::vector<std::string>>();
    ck.vocab.predicates =
        doc.at("vocab").at("predicates").get<std::vector<std::string>>();

    const ojson& jf = doc.at("frequency");
    ck.freq.num_classes = jf.at("num_classes").get<std::size_t>();
    ck.freq.num_predicates = jf.at("num_predicates").get<std::size_t>();
    ck.freq.eps = jf.at("eps").get<double>();
    ck.freq.counts = jf.at("counts").get<std::vector<std::int64_t>>();

    ck.params = ModelParams::create(ck.config, ck.vocab);
    NamedParams named = ck.params.collect();
    const ojson& jp = doc.at("params");
    if (jp.size() != named.size())
      throw ValidationError("load_checkpoint: expected " +
                            std::to_string(named.size()) + " parameters, got " +
                            std::to_string(jp.size()));
    for (std::size_t i = 0; i < named.size(); ++i) {
      const auto& [name, t] = named[i];
      const ojson& entry = jp.at(i);
      if (entry.at("name").get<std::string>() != name)
        throw ValidationError("load_checkpoint: parameter " +
                              std::to_string(i) + " is " +
                              entry.at("name").get<std::string>() +
                              ", expected " + name);
      const auto shape = entry.at("shape").get<std::vector<std::size_t>>();
      if (shape != t.shape())
        throw ValidationError("load_checkpoint: parameter " + name +
                              " has the wrong shape");
      const auto values = entry.at("data").get<std::vector<double>>();
      if (values.size() != t.size())
        throw ValidationError("load_checkpoint: parameter " + name +
                              " has the wrong element count");
      t.impl()->data = values;
    }
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("load_checkpoint: malformed field in " + path +
                          ": " + e.what());
  }

  if (ck.freq.num_classes != ck.config.num_classes ||
      ck.freq.num_predicates != ck.config.num_predicates ||
      ck.freq.counts.size() != ck.freq.num_classes * ck.freq.num_classes *
                                   ck.freq.num_predicates)
    throw ValidationError(
        "load_checkpoint: frequency table does not match the config");
  return ck;
}

}  // namespace reltr
