// Command-line surface: dataset generation, training, evaluation, and
// attention-heatmap export.  Option resolution order for every command is
// defaults < REL_SEED environment variable < --config file < explicit flags.
#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "reltr/checkpoint.hpp"
#include "reltr/error.hpp"
#include "reltr/eval.hpp"
#include "reltr/heatmap.hpp"
#include "reltr/train.hpp"

namespace {

using nlohmann::json;
using ojson = nlohmann::ordered_json;

constexpr const char* kFormatVersion = "1.0";

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_text(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw reltr::ValidationError("cannot open for writing: " + path);
  out << content;
  if (!out) throw reltr::ValidationError("write failed: " + path);
}

// Settings shared by the resolution machinery: a parsed --config document
// (empty when absent) plus the REL_SEED environment override.
struct ResolveContext {
  json file;           // object; empty if no --config
  bool has_env_seed = false;
  std::uint64_t env_seed = 0;
};

ResolveContext make_context(const std::string& config_path,
                            const std::vector<std::string>& allowed_keys) {
  ResolveContext ctx;
  if (const char* env = std::getenv("REL_SEED")) {
    char* end = nullptr;
    unsigned long long v = std::strtoull(env, &end, 10);
    if (end == env || *end != '\0')
      throw reltr::ConfigError(std::string("REL_SEED is not an integer: ") +
                               env);
    ctx.has_env_seed = true;
    ctx.env_seed = v;
  }
  if (!config_path.empty()) {
    std::ifstream in(config_path);
    if (!in)
      throw reltr::ConfigError("config file not found: " + config_path);
    try {
      in >> ctx.file;
    } catch (const json::exception& e) {
      throw reltr::ConfigError("config file " + config_path + ": " + e.what());
    }
    if (!ctx.file.is_object())
      throw reltr::ConfigError("config file " + config_path +
                               ": top level must be an object");
    for (const auto& [key, value] : ctx.file.items()) {
      (void)value;
      if (std::find(allowed_keys.begin(), allowed_keys.end(), key) ==
          allowed_keys.end())
        throw reltr::ConfigError("config file " + config_path +
                                 ": unknown key \"" + key + "\"");
    }
  }
  return ctx;
}

// flag value wins if present; otherwise config file; otherwise (for the seed
// only) REL_SEED; otherwise the built-in default already in *value.
template <typename T>
void resolve(const ResolveContext& ctx, const char* key,
             const CLI::Option* opt, T* value) {
  if (opt != nullptr && opt->count() > 0) return;
  if (ctx.file.contains(key)) {
    try {
      *value = ctx.file.at(key).get<T>();
    } catch (const json::exception& e) {
      throw reltr::ConfigError(std::string("config key \"") + key +
                               "\": " + e.what());
    }
  }
}

void resolve_seed(const ResolveContext& ctx, const CLI::Option* opt,
                  std::uint64_t* seed) {
  if (opt != nullptr && opt->count() > 0) return;
  if (ctx.file.contains("seed")) {
    *seed = ctx.file.at("seed").get<std::uint64_t>();
    return;
  }
  if (ctx.has_env_seed) *seed = ctx.env_seed;
}

reltr::Task parse_mode(const std::string& mode) {
  if (mode == "sgcls") return reltr::Task::SGCLS;
  if (mode == "predcls") return reltr::Task::PREDCLS;
  throw reltr::ConfigError("mode must be sgcls or predcls, got \"" + mode +
                           "\"");
}

// Compares the dataset against the dimensions a checkpoint was built for.
void check_compatibility(const reltr::Checkpoint& ck,
                         const reltr::DatasetFile& ds) {
  if (ds.d_vis != static_cast<std::size_t>(ck.config.d_vis))
    throw reltr::ConfigError(
        "visual feature width mismatch: checkpoint expects d_vis " +
        std::to_string(ck.config.d_vis) + ", dataset provides d_vis " +
        std::to_string(ds.d_vis));
  if (ds.vocab.num_classes() != static_cast<std::size_t>(ck.config.num_classes))
    throw reltr::ConfigError(
        "object class count mismatch: checkpoint expects " +
        std::to_string(ck.config.num_classes) + ", dataset provides " +
        std::to_string(ds.vocab.num_classes()));
  if (ds.vocab.num_predicates() !=
      static_cast<std::size_t>(ck.config.num_predicates))
    throw reltr::ConfigError(
        "predicate count mismatch: checkpoint expects " +
        std::to_string(ck.config.num_predicates) + ", dataset provides " +
        std::to_string(ds.vocab.num_predicates()));
}

// ---------------------------------------------------------------- generate

struct GenerateArgs {
  std::string config_path, out_path;
  std::uint64_t seed = 42;
  CLI::Option* seed_opt = nullptr;
};

int cmd_generate(GenerateArgs& args) {
  std::vector<std::string> keys = {
      "num_samples",  "min_nodes",      "max_nodes", "d_vis",
      "feature_noise", "prior_strength", "seed",      "rules"};
  ResolveContext ctx = make_context(args.config_path, keys);

  reltr::SyntheticConfig cfg;
  resolve(ctx, "num_samples", nullptr, &cfg.num_samples);
  resolve(ctx, "min_nodes", nullptr, &cfg.min_nodes);
  resolve(ctx, "max_nodes", nullptr, &cfg.max_nodes);
  resolve(ctx, "d_vis", nullptr, &cfg.d_vis);
  resolve(ctx, "feature_noise", nullptr, &cfg.feature_noise);
  resolve(ctx, "prior_strength", nullptr, &cfg.prior_strength);
  if (ctx.file.contains("rules")) {
    const json& r = ctx.file.at("rules");
    if (r.contains("on_gap")) cfg.rules.on_gap = r.at("on_gap").get<double>();
    if (r.contains("on_overlap"))
      cfg.rules.on_overlap = r.at("on_overlap").get<double>();
    if (r.contains("in_area_ratio"))
      cfg.rules.in_area_ratio = r.at("in_area_ratio").get<double>();
    if (r.contains("gap_frac"))
      cfg.rules.gap_frac = r.at("gap_frac").get<double>();
    if (r.contains("near_frac"))
      cfg.rules.near_frac = r.at("near_frac").get<double>();
  }
  cfg.seed = args.seed;
  resolve_seed(ctx, args.seed_opt, &cfg.seed);

  reltr::DatasetFile ds = reltr::generate_synthetic(cfg);
  reltr::save_dataset(ds, args.out_path);

  // Echo the resolved generator settings into the artifact.  Extra keys are
  // ignored by the loader, so the file still passes validation.
  std::ifstream in(args.out_path, std::ios::binary);
  ojson doc = ojson::parse(in);
  in.close();
  doc["generator_config"] = ojson{
      {"num_samples", cfg.num_samples},
      {"min_nodes", cfg.min_nodes},
      {"max_nodes", cfg.max_nodes},
      {"d_vis", cfg.d_vis},
      {"feature_noise", cfg.feature_noise},
      {"prior_strength", cfg.prior_strength},
      {"seed", cfg.seed},
      {"rules",
       ojson{{"on_gap", cfg.rules.on_gap},
             {"on_overlap", cfg.rules.on_overlap},
             {"in_area_ratio", cfg.rules.in_area_ratio},
             {"gap_frac", cfg.rules.gap_frac},
             {"near_frac", cfg.rules.near_frac}}}};
  write_text(args.out_path, doc.dump() + "\n");

  std::cout << "wrote " << ds.samples.size() << " samples to "
            << args.out_path << " (seed " << cfg.seed << ")\n";
  return 0;
}

// ------------------------------------------------------------------- train

struct TrainArgs {
  std::string config_path, data_path, mode = "predcls";
  std::string checkpoint_path, log_path;
  std::size_t epochs = 30;
  double lr = 1e-3;
  std::uint64_t seed = 42;
  CLI::Option *mode_opt = nullptr, *epochs_opt = nullptr, *lr_opt = nullptr,
              *seed_opt = nullptr;
};

int cmd_train(TrainArgs& args) {
  std::vector<std::string> keys = {
      "mode",         "epochs",        "batch_size",       "lr",
      "patience",     "decay_factor",  "dropout",          "seed",
      "object_weight", "predicate_weight", "freq_eps",
      "d_model",      "num_heads",     "d_sem",            "d_ff",
      "encoder_layers", "decoder_layers", "ln_eps",         "pos_m",
      "leaky_slope"};
  ResolveContext ctx = make_context(args.config_path, keys);

  resolve(ctx, "mode", args.mode_opt, &args.mode);
  reltr::Task task = parse_mode(args.mode);

  reltr::TrainConfig tc;
  tc.epochs = args.epochs;
  tc.lr = args.lr;
  resolve(ctx, "epochs", args.epochs_opt, &tc.epochs);
  resolve(ctx, "lr", args.lr_opt, &tc.lr);
  resolve(ctx, "batch_size", nullptr, &tc.batch_size);
  resolve(ctx, "patience", nullptr, &tc.patience);
  resolve(ctx, "decay_factor", nullptr, &tc.decay_factor);
  resolve(ctx, "dropout", nullptr, &tc.dropout);
  resolve(ctx, "object_weight", nullptr, &tc.weights.object);
  resolve(ctx, "predicate_weight", nullptr, &tc.weights.predicate);
  resolve(ctx, "freq_eps", nullptr, &tc.freq_eps);
  tc.seed = args.seed;
  resolve_seed(ctx, args.seed_opt, &tc.seed);
  tc.task = task;
  tc.checkpoint_path = args.checkpoint_path;

  reltr::DatasetFile ds = reltr::load_dataset(args.data_path);

  reltr::ModelConfig cfg;
  resolve(ctx, "d_model", nullptr, &cfg.d_model);
  resolve(ctx, "num_heads", nullptr, &cfg.num_heads);
  resolve(ctx, "d_sem", nullptr, &cfg.d_sem);
  resolve(ctx, "d_ff", nullptr, &cfg.d_ff);
  resolve(ctx, "encoder_layers", nullptr, &cfg.encoder_layers);
  resolve(ctx, "decoder_layers", nullptr, &cfg.decoder_layers);
  resolve(ctx, "ln_eps", nullptr, &cfg.ln_eps);
  resolve(ctx, "pos_m", nullptr, &cfg.pos_m);
  resolve(ctx, "leaky_slope", nullptr, &cfg.leaky_slope);
  cfg.d_vis = ds.d_vis;
  cfg.num_classes = ds.vocab.num_classes();
  cfg.num_predicates = ds.vocab.num_predicates();
  cfg.dropout = tc.dropout;
  cfg.seed = tc.seed;
  cfg.validate();

  // The split is a fixed protocol of the dataset, independent of the model
  // seed, so train and eval always agree on the partition.
  reltr::SplitIndices split =
      reltr::split_dataset(ds.samples.size(), reltr::SplitSpec{});

  std::ostringstream log;
  log << "# train log (format_version " << kFormatVersion << ")\n"
      << "# data " << args.data_path << "\n"
      << "# mode " << args.mode << "\n"
      << "# epochs " << tc.epochs << " batch_size " << tc.batch_size
      << " lr " << fmt(tc.lr) << " patience " << tc.patience
      << " decay_factor " << fmt(tc.decay_factor) << " dropout "
      << fmt(tc.dropout) << " seed " << tc.seed << "\n"
      << "# loss_weights object " << fmt(tc.weights.object) << " predicate "
      << fmt(tc.weights.predicate) << " freq_eps " << fmt(tc.freq_eps) << "\n"
      << "# model d_model " << cfg.d_model << " num_heads " << cfg.num_heads
      << " d_vis " << cfg.d_vis << " d_sem " << cfg.d_sem << " d_ff "
      << cfg.d_ff << " encoder_layers " << cfg.encoder_layers
      << " decoder_layers " << cfg.decoder_layers << "\n"
      << "# split train " << split.train.size() << " val " << split.val.size()
      << " test " << split.test.size() << "\n";
  std::cout << log.str();

  reltr::ModelParams params = reltr::ModelParams::create(cfg, ds.vocab);
  reltr::TrainResult result =
      reltr::train(params, cfg, ds.vocab, ds, split, tc);

  for (const reltr::EpochLog& e : result.log) {
    std::ostringstream line;
    line << "epoch " << e.epoch << " train_loss " << fmt(e.train_loss)
         << " val_recall " << fmt(e.val_recall) << " lr " << fmt(e.lr) << "\n";
    log << line.str();
    std::cout << line.str();
  }
  std::ostringstream footer;
  footer << "# best epoch " << result.best_epoch << " val_recall "
         << fmt(result.best_val_recall) << "\n"
         << "# checkpoint " << args.checkpoint_path << "\n";
  log << footer.str();
  std::cout << footer.str();

  if (!args.log_path.empty()) write_text(args.log_path, log.str());
  return 0;
}

// -------------------------------------------------------------------- eval

struct EvalArgs {
  std::string config_path, checkpoint_path, data_path;
  std::string split = "test", constraint = "both", report_path;
  std::vector<std::size_t> ks;
  CLI::Option *split_opt = nullptr, *constraint_opt = nullptr,
              *ks_opt = nullptr;
};

int cmd_eval(EvalArgs& args) {
  ResolveContext ctx =
      make_context(args.config_path, {"split", "constraint", "ks"});
  resolve(ctx, "split", args.split_opt, &args.split);
  resolve(ctx, "constraint", args.constraint_opt, &args.constraint);
  resolve(ctx, "ks", args.ks_opt, &args.ks);

  reltr::Checkpoint ck = reltr::load_checkpoint(args.checkpoint_path);
  reltr::DatasetFile ds = reltr::load_dataset(args.data_path);
  check_compatibility(ck, ds);

  reltr::SplitIndices split =
      reltr::split_dataset(ds.samples.size(), reltr::SplitSpec{});
  std::vector<std::size_t> indices;
  if (args.split == "train") {
    indices = split.train;
  } else if (args.split == "val") {
    indices = split.val;
  } else if (args.split == "test") {
    indices = split.test;
  } else if (args.split == "all") {
    for (std::size_t i = 0; i < ds.samples.size(); ++i) indices.push_back(i);
  } else {
    throw reltr::ConfigError("split must be train, val, test, or all, got \"" +
                             args.split + "\"");
  }

  bool want_graph = args.constraint == "graph" || args.constraint == "both";
  bool want_nograph =
      args.constraint == "nograph" || args.constraint == "both";
  if (!want_graph && !want_nograph)
    throw reltr::ConfigError(
        "constraint must be graph, nograph, or both, got \"" +
        args.constraint + "\"");

  reltr::EvalOptions opts;
  if (!args.ks.empty()) {
    opts.graph_ks = args.ks;
    opts.nograph_ks = args.ks;
  }
  if (!want_graph) opts.graph_ks.clear();
  if (!want_nograph) opts.nograph_ks.clear();

  reltr::EvalReport report =
      reltr::evaluate(ck.params, ck.freq, ck.config, ds, indices, opts);

  std::ostringstream header;
  header << "# eval report (format_version " << kFormatVersion << ")\n"
         << "# checkpoint " << args.checkpoint_path << "\n"
         << "# data " << args.data_path << " split " << args.split << " ("
         << indices.size() << " samples)\n"
         << "# constraint " << args.constraint << " ks";
  std::vector<std::size_t> shown =
      !args.ks.empty() ? args.ks
                       : (want_graph ? opts.graph_ks : opts.nograph_ks);
  for (std::size_t k : shown) header << " " << k;
  header << "\n";
  std::string report_text = header.str() + reltr::format_report(report);
  std::cout << report_text;
  if (!args.report_path.empty()) {
    write_text(args.report_path, report_text);

    std::ostringstream conf;
    conf << "# predicate confusion (format_version " << kFormatVersion
         << ")\n"
         << "# checkpoint " << args.checkpoint_path << "\n"
         << "# data " << args.data_path << " split " << args.split << "\n";
    for (reltr::Task task : {reltr::Task::SGCLS, reltr::Task::PREDCLS}) {
      reltr::ConfusionReport cr =
          reltr::confusion(ck.params, ck.freq, ck.config, ds, indices, task);
      conf << "## " << reltr::task_name(task) << "\n"
           << reltr::format_confusion(cr, ck.vocab);
    }
    write_text(args.report_path + ".confusion", conf.str());
  }
  return 0;
}

// --------------------------------------------------------------- attention

struct AttentionArgs {
  std::string config_path, checkpoint_path, data_path, sample_id, out_dir;
  std::string mode = "predcls";
  int layer = -1;  // 1-based; -1 selects each stack's last layer
  CLI::Option *layer_opt = nullptr, *mode_opt = nullptr;
};

int cmd_attention(AttentionArgs& args) {
  ResolveContext ctx = make_context(args.config_path, {"layer", "mode"});
  resolve(ctx, "layer", args.layer_opt, &args.layer);
  resolve(ctx, "mode", args.mode_opt, &args.mode);
  reltr::Task task = parse_mode(args.mode);

  reltr::Checkpoint ck = reltr::load_checkpoint(args.checkpoint_path);
  reltr::DatasetFile ds = reltr::load_dataset(args.data_path);
  check_compatibility(ck, ds);

  const reltr::SceneSample* sample = nullptr;
  for (const reltr::SceneSample& s : ds.samples)
    if (s.sample_id == args.sample_id) sample = &s;
  if (sample == nullptr) {
    std::ostringstream msg;
    msg << "sample \"" << args.sample_id << "\" not found; available ids:";
    std::size_t shown = 0;
    for (const reltr::SceneSample& s : ds.samples) {
      if (shown == 50) {
        msg << " ... (" << ds.samples.size() - shown << " more)";
        break;
      }
      msg << " " << s.sample_id;
      ++shown;
    }
    throw reltr::ValidationError(msg.str());
  }
  if (sample->nodes.size() < 2)
    throw reltr::ValidationError("sample \"" + args.sample_id +
                                 "\" has a single node and no candidate "
                                 "edges; nothing to visualize");

  const std::size_t enc = ck.config.encoder_layers;
  const std::size_t dec = ck.config.decoder_layers;
  if (args.layer != -1 &&
      (args.layer < 1 || static_cast<std::size_t>(args.layer) >
                             std::max(enc, dec)))
    throw reltr::ConfigError(
        "layer " + std::to_string(args.layer) + " out of range: encoder has " +
        std::to_string(enc) + " layers, decoder has " + std::to_string(dec));
  // A request beyond a stack's depth selects that stack's last layer.
  std::size_t enc_layer =
      args.layer == -1 ? enc : std::min<std::size_t>(args.layer, enc);
  std::size_t dec_layer =
      args.layer == -1 ? dec : std::min<std::size_t>(args.layer, dec);

  reltr::ForwardOut out;
  {
    reltr::NoGradGuard guard;
    reltr::Rng rng(0);
    out = reltr::forward(*sample, task, ck.params, ck.freq, ck.config, false,
                         rng);
  }

  std::vector<std::string> node_labels;
  for (std::size_t i = 0; i < sample->nodes.size(); ++i)
    node_labels.push_back(
        "n" + std::to_string(i) + ":" +
        ck.vocab.object_classes[static_cast<std::size_t>(
            sample->nodes[i].gt_class)]);
  std::vector<std::string> edge_labels;
  for (std::size_t e = 0; e * 2 < out.ordered_pairs.size(); ++e)
    edge_labels.push_back(
        "e" + std::to_string(e) + ":n" +
        std::to_string(out.ordered_pairs[2 * e].subject) + "-n" +
        std::to_string(out.ordered_pairs[2 * e].object));

  const reltr::Tensor& n2n = out.trace.n2n.at(enc_layer - 1);
  const reltr::Tensor& e2n = out.trace.e2n.at(dec_layer - 1);
  const std::string base = args.out_dir + "/";
  reltr::write_attention_csv(n2n, node_labels, node_labels, base + "n2n.csv");
  reltr::write_attention_pgm(n2n, base + "n2n.pgm");
  reltr::write_attention_csv(e2n, edge_labels, node_labels, base + "e2n.csv");
  reltr::write_attention_pgm(e2n, base + "e2n.pgm");

  ojson run = {
      {"format_version", kFormatVersion},
      {"command", "attention"},
      {"checkpoint", args.checkpoint_path},
      {"data", args.data_path},
      {"sample_id", args.sample_id},
      {"mode", args.mode},
      {"encoder_layer", enc_layer},
      {"decoder_layer", dec_layer},
  };
  write_text(base + "run_config.json", run.dump() + "\n");

  std::cout << "wrote n2n (" << n2n.rows() << "x" << n2n.cols() << ") and e2n ("
            << e2n.rows() << "x" << e2n.cols() << ") heatmaps to "
            << args.out_dir << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "relation transformer: synthetic scene-graph data, training, "
      "evaluation, and attention heatmaps"};
  app.require_subcommand(1);

  GenerateArgs gen;
  CLI::App* g = app.add_subcommand("generate", "write a synthetic dataset");
  g->add_option("--config", gen.config_path, "JSON config file");
  g->add_option("--out", gen.out_path, "output dataset path")->required();
  gen.seed_opt = g->add_option("--seed", gen.seed, "generator seed");

  TrainArgs tr;
  CLI::App* t = app.add_subcommand("train", "train a model");
  t->add_option("--config", tr.config_path, "JSON config file");
  t->add_option("--data", tr.data_path, "dataset path")->required();
  tr.mode_opt = t->add_option("--mode", tr.mode, "sgcls or predcls")
                    ->check(CLI::IsMember({"sgcls", "predcls"}));
  tr.epochs_opt = t->add_option("--epochs", tr.epochs, "training epochs");
  tr.lr_opt = t->add_option("--lr", tr.lr, "initial learning rate");
  tr.seed_opt = t->add_option("--seed", tr.seed, "model and shuffle seed");
  t->add_option("--out-checkpoint", tr.checkpoint_path,
                "best-validation checkpoint path")
      ->required();
  t->add_option("--log", tr.log_path, "per-epoch log file");

  EvalArgs ev;
  CLI::App* e = app.add_subcommand("eval", "evaluate a checkpoint");
  e->add_option("--config", ev.config_path, "JSON config file");
  e->add_option("--checkpoint", ev.checkpoint_path, "checkpoint path")
      ->required();
  e->add_option("--data", ev.data_path, "dataset path")->required();
  ev.split_opt =
      e->add_option("--split", ev.split, "train, val, test, or all");
  ev.ks_opt = e->add_option("--ks", ev.ks, "recall cutoffs (default: graph "
                                           "20,50,100 and no-graph 50,100)")
                  ->delimiter(',');
  ev.constraint_opt = e->add_option("--constraint", ev.constraint,
                                    "graph, nograph, or both");
  e->add_option("--report", ev.report_path,
                "report file (confusion written alongside)");

  AttentionArgs at;
  CLI::App* a = app.add_subcommand("attention", "export attention heatmaps");
  a->add_option("--config", at.config_path, "JSON config file");
  a->add_option("--checkpoint", at.checkpoint_path, "checkpoint path")
      ->required();
  a->add_option("--data", at.data_path, "dataset path")->required();
  a->add_option("--sample-id", at.sample_id, "sample to visualize")
      ->required();
  at.layer_opt = a->add_option(
      "--layer", at.layer,
      "1-based layer index; default: each stack's last layer");
  at.mode_opt = a->add_option("--mode", at.mode, "sgcls or predcls")
                    ->check(CLI::IsMember({"sgcls", "predcls"}));
  a->add_option("--out-dir", at.out_dir, "output directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (g->parsed()) return cmd_generate(gen);
    if (t->parsed()) return cmd_train(tr);
    if (e->parsed()) return cmd_eval(ev);
    if (a->parsed()) return cmd_attention(at);
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return 1;
  }
  return 0;
}
