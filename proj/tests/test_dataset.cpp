#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "json.hpp"
#include "reltr/dataset.hpp"
#include "reltr/error.hpp"
#include "reltr/frequency.hpp"
#include "reltr/geometry.hpp"

using namespace reltr;
using ojson = nlohmann::ordered_json;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  REQUIRE(out.good());
  out << text;
}

// Checks that fn throws E and that the message mentions every given needle.
template <typename E, typename Fn>
void expect_throw_contains(Fn&& fn, const std::vector<std::string>& needles) {
  try {
    fn();
    FAIL("expected an exception");
  } catch (const E& e) {
    const std::string msg = e.what();
    for (const std::string& needle : needles) {
      INFO("message: " << msg << " needle: " << needle);
      CHECK(msg.find(needle) != std::string::npos);
    }
  }
}

SyntheticConfig small_cfg(std::size_t n_samples = 20) {
  SyntheticConfig cfg;
  cfg.num_samples = n_samples;
  cfg.d_vis = 8;
  return cfg;
}

}  // namespace

// ---------------- geometry ----------------

TEST_CASE("box_geometry frozen example") {
  // 100x100 image, box (10,20)-(30,80): center (20,50), size 20x60.
  auto g = box_geometry({10, 20, 30, 80}, 100, 100);
  CHECK(g[0] == doctest::Approx(0.2).epsilon(1e-12));
  CHECK(g[1] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(g[2] == doctest::Approx(0.2).epsilon(1e-12));
  CHECK(g[3] == doctest::Approx(0.6).epsilon(1e-12));
  CHECK(g[4] == doctest::Approx(0.12).epsilon(1e-12));
}

TEST_CASE("box_geometry outputs lie in (0,1] for in-bounds boxes") {
  auto g = box_geometry({0, 0, 256, 256}, 256, 256);
  for (double v : g) {
    CHECK(v > 0.0);
    CHECK(v <= 1.0);
  }
}

TEST_CASE("box_geometry validation errors") {
  CHECK_THROWS_AS(box_geometry({10, 10, 10, 20}, 100, 100), ValidationError);
  CHECK_THROWS_AS(box_geometry({30, 20, 10, 80}, 100, 100), ValidationError);
  CHECK_THROWS_AS(box_geometry({10, 20, 30, 120}, 100, 100), ValidationError);
  CHECK_THROWS_AS(box_geometry({-5, 20, 30, 80}, 100, 100), ValidationError);
  CHECK_THROWS_AS(box_geometry({10, 20, 30, 80}, 0, 100), ValidationError);
  // Degenerate-box message carries the coordinates.
  expect_throw_contains<ValidationError>(
      [] { box_geometry({10, 10, 10, 20}, 100, 100); }, {"10"});
}

TEST_CASE("union_box covers both inputs") {
  Box u = union_box({10, 20, 30, 40}, {25, 5, 60, 35});
  CHECK(u.x1 == 10);
  CHECK(u.y1 == 5);
  CHECK(u.x2 == 60);
  CHECK(u.y2 == 40);
}

// ---------------- predicate rules ----------------

namespace {
// Class ids in the default vocab.
constexpr int kPerson = 0, kDog = 1, kCat = 2, kTable = 3, kCup = 5,
              kHat = 7, kShirt = 8, kBuilding = 10;
// Predicate ids.
constexpr int kBg = 0, kOn = 1, kIn = 2, kWearing = 3, kAbove = 4, kUnder = 5,
              kNear = 6;
constexpr double W = 256, H = 256;
}  // namespace

TEST_CASE("rule: cup resting on a table is 'on'") {
  RuleParams rp;
  Box table{60, 150, 200, 220};
  Box cup{100, 120, 120, 150};  // bottom exactly at table top, full overlap
  CHECK(rule_predicate(kCup, kTable, cup, table, W, H, rp) == kOn);
}

TEST_CASE("rule: person inside a building is 'in'") {
  RuleParams rp;
  Box building{40, 60, 220, 250};
  Box person{100, 120, 130, 200};
  CHECK(rule_predicate(kPerson, kBuilding, person, building, W, H, rp) == kIn);
}

TEST_CASE("rule: hat centered on a person is 'wearing', not 'in'") {
  RuleParams rp;
  Box person{100, 60, 140, 200};
  Box hat{108, 62, 132, 80};  // fully inside the person box
  CHECK(rule_predicate(kPerson, kHat, person, hat, W, H, rp) == kWearing);
  // The reverse direction must not degrade to "in" (the wearing reading wins
  // by exclusion), and a hat does not wear a person.
  int rev = rule_predicate(kHat, kPerson, hat, person, W, H, rp);
  CHECK(rev != kIn);
  CHECK(rev != kWearing);
}

TEST_CASE("rule: clear vertical gap gives 'above' and 'under'") {
  RuleParams rp;
  Box high{100, 20, 140, 60};
  Box low{110, 120, 150, 180};
  CHECK(rule_predicate(kCat, kDog, high, low, W, H, rp) == kAbove);
  CHECK(rule_predicate(kDog, kCat, low, high, W, H, rp) == kUnder);
}

TEST_CASE("rule: close centers without other structure are 'near'") {
  RuleParams rp;
  Box a{40, 100, 80, 140};
  Box b{100, 100, 140, 140};  // centers 60 apart, diag*0.22 ~ 79.6
  CHECK(rule_predicate(kCat, kDog, a, b, W, H, rp) == kNear);
  CHECK(rule_predicate(kDog, kCat, b, a, W, H, rp) == kNear);
}

TEST_CASE("rule: far apart with no overlap is background") {
  RuleParams rp;
  Box a{0, 0, 30, 30};
  Box b{220, 220, 250, 250};
  CHECK(rule_predicate(kCat, kDog, a, b, W, H, rp) == kBg);
}

TEST_CASE("rule: 'on' outranks the gap rules near a surface") {
  RuleParams rp;
  Box table{60, 150, 200, 220};
  Box cup{100, 110, 120, 145};  // 5px above the top edge, within on_gap
  CHECK(rule_predicate(kCup, kTable, cup, table, W, H, rp) == kOn);
}

// ---------------- synthetic generator ----------------

TEST_CASE("generator is deterministic: identical files byte for byte") {
  SyntheticConfig cfg = small_cfg(12);
  DatasetFile a = generate_synthetic(cfg);
  DatasetFile b = generate_synthetic(cfg);
  save_dataset(a, "tmp_gen_a.json");
  save_dataset(b, "tmp_gen_b.json");
  CHECK(slurp("tmp_gen_a.json") == slurp("tmp_gen_b.json"));
  std::remove("tmp_gen_a.json");
  std::remove("tmp_gen_b.json");
}

TEST_CASE("different seeds give different data") {
  SyntheticConfig cfg = small_cfg(4);
  DatasetFile a = generate_synthetic(cfg);
  cfg.seed = 43;
  DatasetFile b = generate_synthetic(cfg);
  bool any_diff = false;
  for (std::size_t s = 0; s < a.samples.size() && !any_diff; ++s)
    any_diff = a.samples[s].nodes.size() != b.samples[s].nodes.size() ||
               a.samples[s].nodes[0].box.x1 != b.samples[s].nodes[0].box.x1;
  CHECK(any_diff);
}

TEST_CASE("every generated scene has at least one triple and valid sizes") {
  SyntheticConfig cfg = small_cfg(60);
  DatasetFile ds = generate_synthetic(cfg);
  REQUIRE(ds.samples.size() == 60);
  for (const SceneSample& s : ds.samples) {
    CHECK(!s.gt_triples.empty());
    CHECK(s.nodes.size() >= cfg.min_nodes);
    CHECK(s.nodes.size() <= cfg.max_nodes);
  }
  CHECK_NOTHROW(validate_dataset(ds));
}

TEST_CASE("rule replay oracle reproduces gt_triples exactly") {
  SyntheticConfig cfg = small_cfg(40);
  DatasetFile ds = generate_synthetic(cfg);
  for (const SceneSample& s : ds.samples) {
    std::vector<Triple> replay;
    for (std::size_t i = 0; i < s.nodes.size(); ++i)
      for (std::size_t j = 0; j < s.nodes.size(); ++j) {
        if (i == j) continue;
        int p = rule_predicate(s.nodes[i].gt_class, s.nodes[j].gt_class,
                               s.nodes[i].box, s.nodes[j].box, s.image_w,
                               s.image_h, cfg.rules);
        if (p != 0)
          replay.push_back({static_cast<int>(i), p, static_cast<int>(j)});
      }
    REQUIRE(replay.size() == s.gt_triples.size());
    for (std::size_t t = 0; t < replay.size(); ++t) {
      CHECK(replay[t].subject == s.gt_triples[t].subject);
      CHECK(replay[t].predicate == s.gt_triples[t].predicate);
      CHECK(replay[t].object == s.gt_triples[t].object);
    }
  }
}

TEST_CASE("generator exercises every foreground predicate") {
  DatasetFile ds = generate_synthetic(small_cfg(200));
  std::vector<int> seen(ds.vocab.num_predicates(), 0);
  for (const SceneSample& s : ds.samples)
    for (const Triple& t : s.gt_triples)
      ++seen[static_cast<std::size_t>(t.predicate)];
  for (std::size_t p = 1; p < seen.size(); ++p) {
    INFO("predicate " << ds.vocab.predicates[p]);
    CHECK(seen[p] > 0);
  }
}

TEST_CASE("generator config validation") {
  SyntheticConfig cfg = small_cfg(2);
  cfg.num_classes = 10;
  CHECK_THROWS_AS(generate_synthetic(cfg), ConfigError);
  cfg = small_cfg(2);
  cfg.num_predicates = 5;
  CHECK_THROWS_AS(generate_synthetic(cfg), ConfigError);
  cfg = small_cfg(2);
  cfg.min_nodes = 1;
  CHECK_THROWS_AS(generate_synthetic(cfg), ConfigError);
  cfg = small_cfg(2);
  cfg.min_nodes = 5;
  cfg.max_nodes = 4;
  CHECK_THROWS_AS(generate_synthetic(cfg), ConfigError);
}

TEST_CASE("detector priors are sharp, normalized, and usually correct") {
  DatasetFile ds = generate_synthetic(small_cfg(50));
  std::size_t correct = 0, total = 0;
  for (const SceneSample& s : ds.samples)
    for (const SceneNode& n : s.nodes) {
      double sum = 0.0;
      std::size_t best = 0;
      for (std::size_t c = 0; c < n.detector_prior.size(); ++c) {
        sum += n.detector_prior[c];
        if (n.detector_prior[c] > n.detector_prior[best]) best = c;
      }
      CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
      ++total;
      if (static_cast<int>(best) == n.gt_class) ++correct;
    }
  // prior_strength 5 should make the argmax match gt far more often than not
  CHECK(static_cast<double>(correct) / static_cast<double>(total) > 0.7);
}

// ---------------- serialization ----------------

TEST_CASE("save -> load -> save round trip is byte identical") {
  DatasetFile ds = generate_synthetic(small_cfg(8));
  save_dataset(ds, "tmp_rt_1.json");
  DatasetFile loaded = load_dataset("tmp_rt_1.json");
  save_dataset(loaded, "tmp_rt_2.json");
  CHECK(slurp("tmp_rt_1.json") == slurp("tmp_rt_2.json"));
  std::remove("tmp_rt_1.json");
  std::remove("tmp_rt_2.json");
}

TEST_CASE("empty samples list loads as a valid zero-sample dataset") {
  ojson doc;
  doc["format_version"] = "1.0";
  doc["vocab"]["object_classes"] = {"a", "b"};
  doc["vocab"]["predicates"] = {"__background__", "on"};
  doc["feature_dims"]["d_vis"] = 4;
  doc["samples"] = ojson::array();
  spit("tmp_empty.json", doc.dump());
  DatasetFile ds = load_dataset("tmp_empty.json");
  CHECK(ds.samples.empty());
  CHECK(ds.d_vis == 4);
  CHECK(ds.vocab.num_predicates() == 2);
  std::remove("tmp_empty.json");
}

namespace {
// Loads a valid generated file as raw JSON so individual fields can be
// corrupted before re-saving.
ojson generated_doc() {
  DatasetFile ds = generate_synthetic(small_cfg(3));
  save_dataset(ds, "tmp_doc.json");
  ojson doc = ojson::parse(slurp("tmp_doc.json"));
  std::remove("tmp_doc.json");
  return doc;
}
}  // namespace

TEST_CASE("loader rejects unknown major format versions") {
  ojson doc = generated_doc();
  doc["format_version"] = "2.0";
  spit("tmp_ver.json", doc.dump());
  expect_throw_contains<ValidationError>(
      [] { load_dataset("tmp_ver.json"); }, {"format_version", "2.0"});
  std::remove("tmp_ver.json");
}

TEST_CASE("loader rejects out-of-range triple naming sample and field") {
  ojson doc = generated_doc();
  const std::string sid = doc["samples"][0]["sample_id"].get<std::string>();
  doc["samples"][0]["gt_triples"][0][0] = 99;
  spit("tmp_tri.json", doc.dump());
  expect_throw_contains<ValidationError>(
      [] { load_dataset("tmp_tri.json"); }, {sid, "gt_triples[0]", "subject"});
  std::remove("tmp_tri.json");
}

TEST_CASE("loader rejects a bad detector prior naming sample and field") {
  ojson doc = generated_doc();
  const std::string sid = doc["samples"][1]["sample_id"].get<std::string>();
  doc["samples"][1]["nodes"][0]["detector_prior"][0] = 5.0;
  spit("tmp_prior.json", doc.dump());
  expect_throw_contains<ValidationError>(
      [] { load_dataset("tmp_prior.json"); },
      {sid, "nodes[0]", "detector_prior"});
  std::remove("tmp_prior.json");
}

TEST_CASE("loader rejects feature width mismatch") {
  ojson doc = generated_doc();
  doc["samples"][2]["nodes"][1]["visual_feature"].push_back(0.0);
  spit("tmp_feat.json", doc.dump());
  expect_throw_contains<ValidationError>(
      [] { load_dataset("tmp_feat.json"); }, {"nodes[1]", "visual_feature"});
  std::remove("tmp_feat.json");
}

TEST_CASE("loader rejects a box outside the image") {
  ojson doc = generated_doc();
  const std::string sid = doc["samples"][0]["sample_id"].get<std::string>();
  doc["samples"][0]["nodes"][0]["box"][2] = 9999.0;
  spit("tmp_box.json", doc.dump());
  expect_throw_contains<ValidationError>(
      [] { load_dataset("tmp_box.json"); }, {sid, "nodes[0]", "box"});
  std::remove("tmp_box.json");
}

TEST_CASE("loader rejects missing fields and unparsable text") {
  ojson doc = generated_doc();
  doc["samples"][0].erase("nodes");
  spit("tmp_missing.json", doc.dump());
  CHECK_THROWS_AS(load_dataset("tmp_missing.json"), ValidationError);
  std::remove("tmp_missing.json");

  spit("tmp_garbage.json", "this is not json {");
  CHECK_THROWS_AS(load_dataset("tmp_garbage.json"), ValidationError);
  std::remove("tmp_garbage.json");

  CHECK_THROWS_AS(load_dataset("tmp_does_not_exist.json"), ValidationError);
}

TEST_CASE("validate rejects a vocabulary without the background predicate") {
  DatasetFile ds = generate_synthetic(small_cfg(1));
  ds.vocab.predicates[0] = "on_second_thought";
  CHECK_THROWS_AS(validate_dataset(ds), ValidationError);
}

// ---------------- semantic vectors ----------------

TEST_CASE("class vectors are unit norm and name-determined") {
  Vocab vocab = default_vocab();
  Tensor t1 = class_semantic_vectors(vocab, 16, 42);
  Tensor t2 = class_semantic_vectors(vocab, 16, 42);
  REQUIRE(t1.shape() == std::vector<std::size_t>{12, 16});
  for (std::size_t c = 0; c < 12; ++c) {
    double n2 = 0.0;
    for (std::size_t d = 0; d < 16; ++d) {
      CHECK(t1.at2(c, d) == t2.at2(c, d));  // bitwise determinism
      n2 += t1.at2(c, d) * t1.at2(c, d);
    }
    CHECK(std::sqrt(n2) == doctest::Approx(1.0).epsilon(1e-12));
  }

  // The vector depends on the name, not the slot: permuting the vocabulary
  // permutes rows identically.
  Vocab shuffled = vocab;
  std::swap(shuffled.object_classes[0], shuffled.object_classes[5]);
  Tensor t3 = class_semantic_vectors(shuffled, 16, 42);
  for (std::size_t d = 0; d < 16; ++d) {
    CHECK(t3.at2(0, d) == t1.at2(5, d));
    CHECK(t3.at2(5, d) == t1.at2(0, d));
  }

  // Different seed, different table.
  Tensor t4 = class_semantic_vectors(vocab, 16, 7);
  CHECK(t4.at2(0, 0) != t1.at2(0, 0));

  CHECK_THROWS_AS(class_semantic_vectors(vocab, 1, 42), ConfigError);
}

TEST_CASE("150 classes at d_sem=16 stay well separated") {
  Vocab big;
  for (int c = 0; c < 150; ++c)
    big.object_classes.push_back("class_" + std::to_string(c));
  big.predicates = {"__background__", "rel"};
  Tensor t = class_semantic_vectors(big, 16, 42);
  double worst = 0.0;
  for (std::size_t a = 0; a < 150; ++a)
    for (std::size_t b = a + 1; b < 150; ++b) {
      double dot = 0.0;
      for (std::size_t d = 0; d < 16; ++d) dot += t.at2(a, d) * t.at2(b, d);
      worst = std::max(worst, std::abs(dot));
    }
  CHECK(worst < 0.95);  // rows are unit norm, so dot == cosine
}

// ---------------- splits ----------------

TEST_CASE("split is a deterministic, disjoint, exhaustive partition") {
  SplitSpec spec;
  SplitIndices s1 = split_dataset(2400, spec);
  SplitIndices s2 = split_dataset(2400, spec);
  CHECK(s1.train == s2.train);
  CHECK(s1.val == s2.val);
  CHECK(s1.test == s2.test);
  CHECK(s1.train.size() == 2000);
  CHECK(s1.val.size() == 200);
  CHECK(s1.test.size() == 200);

  std::vector<std::size_t> all;
  all.insert(all.end(), s1.train.begin(), s1.train.end());
  all.insert(all.end(), s1.val.begin(), s1.val.end());
  all.insert(all.end(), s1.test.begin(), s1.test.end());
  std::sort(all.begin(), all.end());
  REQUIRE(all.size() == 2400);
  for (std::size_t i = 0; i < all.size(); ++i) CHECK(all[i] == i);

  SplitSpec other;
  other.seed = 7;
  CHECK(split_dataset(2400, other).train != s1.train);

  SplitSpec bad;
  bad.train = 0.9;  // now sums to 1.1
  CHECK_THROWS_AS(split_dataset(100, bad), ConfigError);
}

// ---------------- frequency table ----------------

TEST_CASE("frequency toy corpus: counts {on:2, of:1}, eps=1") {
  DatasetFile ds;
  ds.vocab.object_classes = {"man", "horse"};
  ds.vocab.predicates = {"__background__", "on", "of"};
  ds.d_vis = 1;
  SceneSample s;
  s.sample_id = "toy";
  s.image_w = s.image_h = 10;
  s.nodes.resize(2);
  s.nodes[0].gt_class = 0;
  s.nodes[1].gt_class = 1;
  s.gt_triples = {{0, 1, 1}, {0, 1, 1}, {0, 2, 1}};
  ds.samples.push_back(s);

  FrequencyTable table = build_frequency_table(ds, {0}, 1.0);
  CHECK(table.count(0, 1, 1) == 2);
  CHECK(table.count(0, 1, 2) == 1);
  CHECK(table.count(0, 1, 0) == 0);
  CHECK(table.count(1, 0, 1) == 0);

  Tensor bias = freq_bias(table, 0, 1);
  REQUIRE(bias.shape() == std::vector<std::size_t>{1, 3});
  CHECK(bias.at2(0, 0) == doctest::Approx(std::log(1.0 / 6.0)).epsilon(1e-12));
  CHECK(bias.at2(0, 1) == doctest::Approx(std::log(3.0 / 6.0)).epsilon(1e-12));
  CHECK(bias.at2(0, 2) == doctest::Approx(std::log(2.0 / 6.0)).epsilon(1e-12));

  // Unseen pair: uniform ln(1/(R+1)).
  Tensor uniform = freq_bias(table, 1, 0);
  for (std::size_t r = 0; r < 3; ++r)
    CHECK(uniform.at2(0, r) ==
          doctest::Approx(std::log(1.0 / 3.0)).epsilon(1e-12));
}

TEST_CASE("eps -> 0 limit: bias differences approach log of count ratios") {
  DatasetFile ds;
  ds.vocab.object_classes = {"a", "b"};
  ds.vocab.predicates = {"__background__", "r1", "r2"};
  ds.d_vis = 1;
  SceneSample s;
  s.sample_id = "toy";
  s.image_w = s.image_h = 10;
  s.nodes.resize(2);
  s.nodes[0].gt_class = 0;
  s.nodes[1].gt_class = 1;
  s.gt_triples = {{0, 1, 1}, {0, 1, 1}, {0, 1, 1}, {0, 2, 1}};
  ds.samples.push_back(s);
  FrequencyTable table = build_frequency_table(ds, {0}, 1e-9);
  Tensor bias = freq_bias(table, 0, 1);
  CHECK(bias.at2(0, 1) - bias.at2(0, 2) ==
        doctest::Approx(std::log(3.0)).epsilon(1e-6));
}

TEST_CASE("empty split gives all-zero counts and a uniform bias") {
  DatasetFile ds = generate_synthetic(small_cfg(3));
  FrequencyTable table = build_frequency_table(ds, {}, 1.0);
  for (std::int64_t c : table.counts) CHECK(c == 0);
  Tensor bias = freq_bias(table, 0, 1);
  for (std::size_t r = 0; r < table.num_predicates; ++r)
    CHECK(bias.at2(0, r) ==
          doctest::Approx(std::log(1.0 / 7.0)).epsilon(1e-12));
}

TEST_CASE("frequency table matches an independent counting pass") {
  DatasetFile ds = generate_synthetic(small_cfg(100));
  SplitIndices split = split_dataset(ds.samples.size(), SplitSpec{});
  FrequencyTable table = build_frequency_table(ds, split.train, 1.0);

  // Independent oracle: a map keyed by (sub_class, obj_class, predicate).
  std::map<std::tuple<int, int, int>, std::int64_t> oracle;
  for (std::size_t idx : split.train) {
    const SceneSample& s = ds.samples[idx];
    for (const Triple& t : s.gt_triples)
      ++oracle[{s.nodes[static_cast<std::size_t>(t.subject)].gt_class,
                s.nodes[static_cast<std::size_t>(t.object)].gt_class,
                t.predicate}];
  }
  std::int64_t table_total = 0, oracle_total = 0;
  for (std::size_t sc = 0; sc < table.num_classes; ++sc)
    for (std::size_t oc = 0; oc < table.num_classes; ++oc)
      for (std::size_t r = 0; r < table.num_predicates; ++r) {
        auto it = oracle.find({static_cast<int>(sc), static_cast<int>(oc),
                               static_cast<int>(r)});
        std::int64_t want = (it == oracle.end()) ? 0 : it->second;
        CHECK(table.count(static_cast<int>(sc), static_cast<int>(oc),
                          static_cast<int>(r)) == want);
        table_total +=
            table.count(static_cast<int>(sc), static_cast<int>(oc),
                        static_cast<int>(r));
      }
  for (const auto& [key, v] : oracle) oracle_total += v;
  CHECK(table_total == oracle_total);
  CHECK(table_total > 0);
}

TEST_CASE("frequency error handling") {
  DatasetFile ds = generate_synthetic(small_cfg(2));
  CHECK_THROWS_AS(build_frequency_table(ds, {0}, 0.0), ConfigError);
  CHECK_THROWS_AS(build_frequency_table(ds, {99}, 1.0), ValidationError);
  FrequencyTable table = build_frequency_table(ds, {0, 1}, 1.0);
  CHECK_THROWS_AS(freq_bias(table, -1, 0), ValidationError);
  CHECK_THROWS_AS(freq_bias(table, 0, 99), ValidationError);
  CHECK_THROWS_AS(table.count(0, 0, 99), ValidationError);
}
