#include "reltr/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "reltr/error.hpp"
#include "reltr/rng.hpp"

namespace reltr {

namespace {

using ojson = nlohmann::ordered_json;

enum ClassId : int {
  kPerson = 0,
  kDog,
  kCat,
  kTable,
  kChair,
  kCup,
  kPlate,
  kHat,
  kShirt,
  kTree,
  kBuilding,
  kCar
};

enum PredId : int {
  kBackground = 0,
  kOn,
  kIn,
  kWearing,
  kAbove,
  kUnder,
  kNear
};

bool is_wearable(int c) { return c == kHat || c == kShirt; }

double overlap_x(const Box& a, const Box& b) {
  return std::max(0.0, std::min(a.x2, b.x2) - std::max(a.x1, b.x1));
}

bool fully_inside(const Box& inner, const Box& outer) {
  return inner.x1 >= outer.x1 && inner.y1 >= outer.y1 &&
         inner.x2 <= outer.x2 && inner.y2 <= outer.y2;
}

bool center_inside(const Box& inner, const Box& outer) {
  return inner.cx() >= outer.x1 && inner.cx() <= outer.x2 &&
         inner.cy() >= outer.y1 && inner.cy() <= outer.y2;
}

}  // namespace

Vocab default_vocab() {
  Vocab v;
  v.object_classes = {"person", "dog",   "cat",  "table", "chair",    "cup",
                      "plate",  "hat",   "shirt", "tree",  "building", "car"};
  v.predicates = {"__background__", "on",    "in",  "wearing",
                  "above",          "under", "near"};
  return v;
}

int rule_predicate(int class_i, int class_j, const Box& box_i, const Box& box_j,
                   double image_w, double image_h, const RuleParams& rules) {
  // Priority order; the first matching rule decides the ordered pair i -> j.
  // 1. wearing: a person wears a wearable whose center lies inside their box.
  if (class_i == kPerson && is_wearable(class_j) &&
      center_inside(box_j, box_i))
    return kWearing;

  // 2. in: full containment with a clear size gap.  Wearables on a person
  // keep the "wearing" reading instead.
  if (!(is_wearable(class_i) && class_j == kPerson) &&
      fully_inside(box_i, box_j) &&
      box_i.area() <= rules.in_area_ratio * box_j.area())
    return kIn;

  const double ov = overlap_x(box_i, box_j);

  // 3. on: bottom edge of i rests near the top edge of j with real overlap.
  if (std::abs(box_i.y2 - box_j.y1) <= rules.on_gap * image_h &&
      ov >= rules.on_overlap * box_i.width())
    return kOn;

  // 4/5. above/under: a clear vertical gap with some horizontal overlap.
  if (box_i.y2 < box_j.y1 - rules.gap_frac * image_h && ov > 0.0) return kAbove;
  if (box_i.y1 > box_j.y2 + rules.gap_frac * image_h && ov > 0.0) return kUnder;

  // 6. near: close centers, relative to the image diagonal.
  const double dx = box_i.cx() - box_j.cx();
  const double dy = box_i.cy() - box_j.cy();
  const double diag = std::hypot(image_w, image_h);
  if (std::hypot(dx, dy) <= rules.near_frac * diag) return kNear;

  return kBackground;
}

namespace {

constexpr double kCanvas = 256.0;

// (w, h) size draw for a class, in pixels.
std::pair<double, double> class_size(int c, Rng& rng) {
  auto u = [&](double lo, double hi) { return kCanvas * rng.uniform(lo, hi); };
  switch (c) {
    case kPerson:   return {u(0.10, 0.18), u(0.30, 0.45)};
    case kDog:      return {u(0.12, 0.20), u(0.10, 0.16)};
    case kCat:      return {u(0.10, 0.16), u(0.08, 0.14)};
    case kTable:    return {u(0.30, 0.50), u(0.20, 0.30)};
    case kChair:    return {u(0.15, 0.25), u(0.25, 0.35)};
    case kCup:      return {u(0.04, 0.08), u(0.05, 0.09)};
    case kPlate:    return {u(0.07, 0.12), u(0.03, 0.06)};
    case kHat:      return {u(0.06, 0.10), u(0.04, 0.07)};
    case kShirt:    return {u(0.10, 0.16), u(0.12, 0.20)};
    case kTree:     return {u(0.15, 0.30), u(0.40, 0.60)};
    case kBuilding: return {u(0.30, 0.50), u(0.50, 0.70)};
    case kCar:      return {u(0.30, 0.45), u(0.15, 0.25)};
    default:        return {u(0.10, 0.20), u(0.10, 0.20)};
  }
}

Box clamp_box(double x1, double y1, double w, double h) {
  w = std::min(w, kCanvas - 2.0);
  h = std::min(h, kCanvas - 2.0);
  x1 = std::clamp(x1, 0.0, kCanvas - w);
  y1 = std::clamp(y1, 0.0, kCanvas - h);
  return {x1, y1, x1 + w, y1 + h};
}

struct Placed {
  int cls;
  Box box;
};

// Places one scene's worth of boxes.  Intents only shape the geometry; the
// ground-truth triples are derived afterwards from rule_predicate alone.
std::vector<Placed> place_scene(std::size_t n, const SyntheticConfig& cfg,
                                Rng& rng) {
  std::vector<Placed> placed;
  placed.reserve(n);

  auto pick = [&](std::initializer_list<int> classes) {
    std::vector<int> v(classes);
    return v[rng.uniform_int(v.size())];
  };
  auto find_by_class = [&](std::initializer_list<int> classes) -> int {
    std::vector<int> hits;
    for (std::size_t idx = 0; idx < placed.size(); ++idx)
      for (int c : classes)
        if (placed[idx].cls == c) hits.push_back(static_cast<int>(idx));
    if (hits.empty()) return -1;
    return hits[rng.uniform_int(hits.size())];
  };

  // First node: a support object near the bottom of the canvas.
  {
    int c = pick({kTable, kChair, kTree, kBuilding, kCar});
    auto [w, h] = class_size(c, rng);
    double y2 = kCanvas * rng.uniform(0.70, 0.95);
    double x1 = rng.uniform(0.0, kCanvas - w);
    placed.push_back({c, clamp_box(x1, y2 - h, w, h)});
  }

  while (placed.size() < n) {
    const double dice = rng.uniform();
    if (dice < 0.30) {
      // ON: rest a small object on a support's top edge.
      int t = find_by_class({kTable, kChair, kCar, kBuilding, kTree});
      if (t >= 0) {
        const Box& tb = placed[static_cast<std::size_t>(t)].box;
        int c = pick({kCup, kPlate, kCat, kDog, kPerson});
        auto [w, h] = class_size(c, rng);
        w = std::min(w, tb.width());  // keep the required overlap reachable
        double x1 = tb.x1 + rng.uniform(0.0, std::max(1.0, tb.width() - w));
        double jitter = kCanvas * cfg.rules.on_gap * rng.uniform(-0.5, 0.5);
        double y2 = tb.y1 + jitter;
        placed.push_back({c, clamp_box(x1, y2 - h, w, h)});
        continue;
      }
    } else if (dice < 0.45) {
      // IN: put a creature inside a container.
      int t = find_by_class({kBuilding, kCar});
      if (t >= 0) {
        const Box& tb = placed[static_cast<std::size_t>(t)].box;
        int c = pick({kPerson, kDog, kCat});
        double iw = tb.width() * rng.uniform(0.25, 0.45);
        double ih = tb.height() * rng.uniform(0.30, 0.55);
        double x1 = tb.x1 + rng.uniform(0.05, 0.50) * tb.width();
        double y1 = tb.y1 + rng.uniform(0.05, 0.40) * tb.height();
        Box b = {x1, y1, std::min(x1 + iw, tb.x2 - 1.0),
                 std::min(y1 + ih, tb.y2 - 1.0)};
        if (b.width() > 4.0 && b.height() > 4.0) {
          placed.push_back({c, b});
          continue;
        }
      }
    } else if (dice < 0.60) {
      // WEAR: give a person a hat or shirt (or add the person first).
      int t = find_by_class({kPerson});
      if (t < 0) {
        auto [w, h] = class_size(kPerson, rng);
        double x1 = rng.uniform(0.0, kCanvas - w);
        double y1 = rng.uniform(0.2, 0.55) * kCanvas;
        placed.push_back({kPerson, clamp_box(x1, y1, w, h)});
        continue;
      }
      const Box& pb = placed[static_cast<std::size_t>(t)].box;
      int c = pick({kHat, kShirt});
      auto [w, h] = class_size(c, rng);
      w = std::min(w, pb.width());
      double frac = (c == kHat) ? rng.uniform(0.02, 0.12)
                                : rng.uniform(0.30, 0.55);
      double cy = pb.y1 + frac * pb.height();
      double cx = pb.cx() + pb.width() * rng.uniform(-0.1, 0.1);
      placed.push_back({c, clamp_box(cx - w / 2, cy - h / 2, w, h)});
      continue;
    } else if (dice < 0.72) {
      // ABOVE: float a small object above an existing one with a clear gap.
      int t = static_cast<int>(rng.uniform_int(placed.size()));
      const Box& tb = placed[static_cast<std::size_t>(t)].box;
      int c = pick({kCup, kPlate, kHat, kCat, kDog});
      auto [w, h] = class_size(c, rng);
      double gap = kCanvas * (cfg.rules.gap_frac + rng.uniform(0.02, 0.15));
      double y2 = tb.y1 - gap;
      if (y2 - h > 0.0) {
        double cx = tb.cx() + tb.width() * rng.uniform(-0.3, 0.3);
        placed.push_back({c, clamp_box(cx - w / 2, y2 - h, w, h)});
        continue;
      }
    } else if (dice < 0.82) {
      // BELOW: tuck a small object under an existing one with a clear gap.
      int t = static_cast<int>(rng.uniform_int(placed.size()));
      const Box& tb = placed[static_cast<std::size_t>(t)].box;
      int c = pick({kCup, kPlate, kCat, kDog});
      auto [w, h] = class_size(c, rng);
      double gap = kCanvas * (cfg.rules.gap_frac + rng.uniform(0.02, 0.10));
      double y1 = tb.y2 + gap;
      if (y1 + h < kCanvas) {
        double cx = tb.cx() + tb.width() * rng.uniform(-0.3, 0.3);
        placed.push_back({c, clamp_box(cx - w / 2, y1, w, h)});
        continue;
      }
    }
    // FREE: drop anything anywhere (often lands "near" something).
    int c = pick({kPerson, kDog, kCat, kTable, kChair, kCup, kPlate, kTree, kCar});
    auto [w, h] = class_size(c, rng);
    double x1 = rng.uniform(0.0, kCanvas - w);
    double y1 = rng.uniform(0.0, kCanvas - h);
    placed.push_back({c, clamp_box(x1, y1, w, h)});
  }
  return placed;
}

std::vector<double> class_prototype(const std::string& name, std::size_t d_vis,
                                    std::uint64_t seed) {
  Rng rng(hash_name(name + "|proto", seed));
  std::vector<double> v(d_vis);
  for (double& x : v) x = rng.normal();
  return v;
}

std::vector<double> spatial_projection(std::size_t d_vis, std::uint64_t seed) {
  Rng rng(hash_name("spatial-projection", seed));
  std::vector<double> m(d_vis * 5);
  const double scale = 1.0 / std::sqrt(5.0);
  for (double& x : m) x = rng.normal() * scale;
  return m;
}

}  // namespace

DatasetFile generate_synthetic(const SyntheticConfig& cfg) {
  Vocab vocab = default_vocab();
  if (cfg.num_classes != vocab.num_classes() ||
      cfg.num_predicates != vocab.num_predicates())
    throw ConfigError(
        "generate_synthetic: the rule set defines " +
        std::to_string(vocab.num_classes()) + " classes and " +
        std::to_string(vocab.num_predicates()) +
        " predicates; config asked for " + std::to_string(cfg.num_classes) +
        "/" + std::to_string(cfg.num_predicates));
  if (cfg.min_nodes < 2 || cfg.max_nodes < cfg.min_nodes)
    throw ConfigError("generate_synthetic: need 2 <= min_nodes <= max_nodes");
  if (cfg.num_predicates < 3)
    throw ConfigError("generate_synthetic: need at least 3 predicates");

  DatasetFile ds;
  ds.vocab = vocab;
  ds.d_vis = cfg.d_vis;
  ds.samples.reserve(cfg.num_samples);

  std::vector<std::vector<double>> protos;
  for (const std::string& name : vocab.object_classes)
    protos.push_back(class_prototype(name, cfg.d_vis, cfg.seed));
  const std::vector<double> sp = spatial_projection(cfg.d_vis, cfg.seed);
  const std::size_t C = vocab.num_classes();

  for (std::size_t s = 0; s < cfg.num_samples; ++s) {
    SceneSample sample;
    for (int attempt = 0; attempt < 100; ++attempt) {
      Rng rng(hash_name("scene|" + std::to_string(s) + "|" +
                            std::to_string(attempt),
                        cfg.seed));
      std::size_t n =
          cfg.min_nodes + rng.uniform_int(cfg.max_nodes - cfg.min_nodes + 1);
      std::vector<Placed> placed = place_scene(n, cfg, rng);
      rng.shuffle(placed);  // decouple class identity from node position

      sample = SceneSample{};
      sample.sample_id = "scene_" + std::to_string(100000 + s).substr(1);
      sample.image_w = kCanvas;
      sample.image_h = kCanvas;
      for (const Placed& p : placed) {
        SceneNode node;
        node.box = p.box;
        node.gt_class = p.cls;

        const auto g = box_geometry(p.box, kCanvas, kCanvas);
        node.visual_feature.resize(cfg.d_vis);
        for (std::size_t d = 0; d < cfg.d_vis; ++d) {
          double spatial = 0.0;
          for (std::size_t k = 0; k < 5; ++k) spatial += sp[d * 5 + k] * g[k];
          node.visual_feature[d] =
              protos[static_cast<std::size_t>(p.cls)][d] + spatial +
              cfg.feature_noise * rng.normal();
        }

        std::vector<double> logits(C);
        for (std::size_t c = 0; c < C; ++c)
          logits[c] = (static_cast<int>(c) == p.cls ? cfg.prior_strength : 0.0) +
                      rng.normal();
        double mx = *std::max_element(logits.begin(), logits.end());
        double total = 0.0;
        node.detector_prior.resize(C);
        for (std::size_t c = 0; c < C; ++c) {
          node.detector_prior[c] = std::exp(logits[c] - mx);
          total += node.detector_prior[c];
        }
        for (double& p2 : node.detector_prior) p2 /= total;

        sample.nodes.push_back(std::move(node));
      }

      // Ground truth comes from the pure rule function only.
      for (std::size_t i = 0; i < sample.nodes.size(); ++i)
        for (std::size_t j = 0; j < sample.nodes.size(); ++j) {
          if (i == j) continue;
          int pred = rule_predicate(
              sample.nodes[i].gt_class, sample.nodes[j].gt_class,
              sample.nodes[i].box, sample.nodes[j].box, kCanvas, kCanvas,
              cfg.rules);
          if (pred != kBackground)
            sample.gt_triples.push_back(
                {static_cast<int>(i), pred, static_cast<int>(j)});
        }
      if (!sample.gt_triples.empty()) break;
    }
    if (sample.gt_triples.empty())
      throw std::runtime_error("generate_synthetic: could not produce a scene "
                               "with at least one triple");
    ds.samples.push_back(std::move(sample));
  }
  return ds;
}

// ---- serialization ----

void save_dataset(const DatasetFile& ds, const std::string& path) {
  ojson doc;
  doc["format_version"] = "1.0";
  doc["vocab"]["object_classes"] = ds.vocab.object_classes;
  doc["vocab"]["predicates"] = ds.vocab.predicates;
  doc["feature_dims"]["d_vis"] = ds.d_vis;
  ojson samples = ojson::array();
  for (const SceneSample& s : ds.samples) {
    ojson js;
    js["sample_id"] = s.sample_id;
    js["image_size"] = {s.image_w, s.image_h};
    ojson nodes = ojson::array();
    for (const SceneNode& n : s.nodes) {
      ojson jn;
      jn["box"] = {n.box.x1, n.box.y1, n.box.x2, n.box.y2};
      jn["gt_class"] = n.gt_class;
      jn["visual_feature"] = n.visual_feature;
      jn["detector_prior"] = n.detector_prior;
      nodes.push_back(std::move(jn));
    }
    js["nodes"] = std::move(nodes);
    ojson triples = ojson::array();
    for (const Triple& t : s.gt_triples)
      triples.push_back({t.subject, t.predicate, t.object});
    js["gt_triples"] = std::move(triples);
    samples.push_back(std::move(js));
  }
  doc["samples"] = std::move(samples);

  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("save_dataset: cannot open " + path);
  out << doc.dump() << '\n';
}

DatasetFile load_dataset(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("load_dataset: cannot open " + path);
  ojson doc;
  try {
    doc = ojson::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("load_dataset: parse error in " + path + ": " +
                          e.what());
  }

  DatasetFile ds;
  try {
    const std::string version = doc.at("format_version").get<std::string>();
    const std::string major = version.substr(0, version.find('.'));
    if (major != "1")
      throw ValidationError("load_dataset: unsupported format_version " +
                            version);
    ds.vocab.object_classes =
        doc.at("vocab").at("object_classes").get<std::vector<std::string>>();
    ds.vocab.predicates =
        doc.at("vocab").at("predicates").get<std::vector<std::string>>();
    ds.d_vis = doc.at("feature_dims").at("d_vis").get<std::size_t>();
    for (const ojson& js : doc.at("samples")) {
      SceneSample s;
      s.sample_id = js.at("sample_id").get<std::string>();
      s.image_w = js.at("image_size").at(0).get<double>();
      s.image_h = js.at("image_size").at(1).get<double>();
      for (const ojson& jn : js.at("nodes")) {
        SceneNode n;
        n.box = {jn.at("box").at(0).get<double>(),
                 jn.at("box").at(1).get<double>(),
                 jn.at("box").at(2).get<double>(),
                 jn.at("box").at(3).get<double>()};
        n.gt_class = jn.at("gt_class").get<int>();
        n.visual_feature = jn.at("visual_feature").get<std::vector<double>>();
        n.detector_prior = jn.at("detector_prior").get<std::vector<double>>();
        s.nodes.push_back(std::move(n));
      }
      for (const ojson& jt : js.at("gt_triples"))
        s.gt_triples.push_back({jt.at(0).get<int>(), jt.at(1).get<int>(),
                                jt.at(2).get<int>()});
      ds.samples.push_back(std::move(s));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("load_dataset: malformed field in " + path + ": " +
                          e.what());
  }

  validate_dataset(ds);
  return ds;
}

void validate_dataset(const DatasetFile& ds) {
  if (ds.vocab.object_classes.empty())
    throw ValidationError("dataset: vocab.object_classes is empty");
  if (ds.vocab.predicates.empty() ||
      ds.vocab.predicates[0] != "__background__")
    throw ValidationError(
        "dataset: vocab.predicates[0] must be __background__");
  const int C = static_cast<int>(ds.vocab.num_classes());
  const int P = static_cast<int>(ds.vocab.num_predicates());

  for (const SceneSample& s : ds.samples) {
    auto fail = [&](const std::string& what) {
      throw ValidationError("dataset sample " + s.sample_id + ": " + what);
    };
    if (!(s.image_w > 0.0) || !(s.image_h > 0.0)) fail("image_size not positive");
    for (std::size_t i = 0; i < s.nodes.size(); ++i) {
      const SceneNode& n = s.nodes[i];
      const std::string ni = "nodes[" + std::to_string(i) + "]";
      if (!(n.box.x1 < n.box.x2) || !(n.box.y1 < n.box.y2))
        fail(ni + ".box is degenerate");
      if (n.box.x1 < 0.0 || n.box.y1 < 0.0 || n.box.x2 > s.image_w ||
          n.box.y2 > s.image_h)
        fail(ni + ".box extends outside the image");
      if (n.gt_class < 0 || n.gt_class >= C) fail(ni + ".gt_class out of range");
      if (n.visual_feature.size() != ds.d_vis)
        fail(ni + ".visual_feature length != d_vis");
      if (n.detector_prior.size() != static_cast<std::size_t>(C))
        fail(ni + ".detector_prior length != num classes");
      double total = 0.0;
      for (double p : n.detector_prior) {
        if (p < 0.0) fail(ni + ".detector_prior has a negative entry");
        total += p;
      }
      if (std::abs(total - 1.0) > 1e-6)
        fail(ni + ".detector_prior does not sum to 1");
    }
    const int nn = static_cast<int>(s.nodes.size());
    for (std::size_t t = 0; t < s.gt_triples.size(); ++t) {
      const Triple& tr = s.gt_triples[t];
      const std::string ti = "gt_triples[" + std::to_string(t) + "]";
      if (tr.subject < 0 || tr.subject >= nn) fail(ti + ".subject out of range");
      if (tr.object < 0 || tr.object >= nn) fail(ti + ".object out of range");
      if (tr.subject == tr.object) fail(ti + " has subject == object");
      if (tr.predicate < 1 || tr.predicate >= P)
        fail(ti + ".predicate out of range");
    }
  }
}

// ---- semantic vectors and splits ----

Tensor class_semantic_vectors(const Vocab& vocab, std::size_t d_sem,
                              std::uint64_t seed) {
  if (d_sem < 2) throw ConfigError("class_semantic_vectors: d_sem must be >= 2");
  const std::size_t C = vocab.num_classes();
  std::vector<double> table(C * d_sem);
  for (std::size_t c = 0; c < C; ++c) {
    Rng rng(hash_name(vocab.object_classes[c], seed));
    double norm2 = 0.0;
    for (std::size_t d = 0; d < d_sem; ++d) {
      double x = rng.normal();
      table[c * d_sem + d] = x;
      norm2 += x * x;
    }
    const double inv = 1.0 / std::sqrt(norm2);
    for (std::size_t d = 0; d < d_sem; ++d) table[c * d_sem + d] *= inv;
  }
  return Tensor::from_data({C, d_sem}, std::move(table));
}

SplitIndices split_dataset(std::size_t num_samples, const SplitSpec& spec) {
  if (spec.train < 0.0 || spec.val < 0.0 || spec.test < 0.0 ||
      std::abs(spec.train + spec.val + spec.test - 1.0) > 1e-9)
    throw ConfigError("split_dataset: fractions must be >= 0 and sum to 1");
  std::vector<std::size_t> order(num_samples);
  for (std::size_t i = 0; i < num_samples; ++i) order[i] = i;
  Rng rng(spec.seed);
  rng.shuffle(order);

  std::size_t n_train = static_cast<std::size_t>(
      std::llround(spec.train * static_cast<double>(num_samples)));
  std::size_t n_val = static_cast<std::size_t>(
      std::llround(spec.val * static_cast<double>(num_samples)));
  n_train = std::min(n_train, num_samples);
  n_val = std::min(n_val, num_samples - n_train);

  SplitIndices out;
  out.train.assign(order.begin(), order.begin() + static_cast<long>(n_train));
  out.val.assign(order.begin() + static_cast<long>(n_train),
                 order.begin() + static_cast<long>(n_train + n_val));
  out.test.assign(order.begin() + static_cast<long>(n_train + n_val),
                  order.end());
  return out;
}

}  // namespace reltr
