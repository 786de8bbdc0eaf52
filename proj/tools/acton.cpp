// Copyright 2026 The Acton Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Command-line entry point: gen-synth, train, build-lexicon, tokenize, eval,
// detect, compose and sweep-k over one JSON configuration.

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "acton/apps.hpp"
#include "acton/evaluation.hpp"
#include "acton/lexicon.hpp"
#include "acton/metrics.hpp"
#include "acton/motion.hpp"
#include "acton/pipeline.hpp"
#include "acton/serialization.hpp"
#include "acton/synth.hpp"
#include "acton/tan.hpp"
#include "acton/train.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace acton;

namespace {

constexpr const char* kVersion = "0.1.0";

// Failure category reported in the one-line error record.
struct CliError : std::runtime_error {
  std::string kind;
  CliError(std::string k, const std::string& message) : std::runtime_error(message), kind(std::move(k)) {}
};

struct Flags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::string profile;
  std::string out;
  std::string corpus;
  std::string checkpoint;
  std::string lexicon;
  std::string map_corpus;
  std::string loss;
  std::optional<std::size_t> k;
  std::optional<std::size_t> words;
};

struct Run {
  std::string command;
  pipeline::PipelineConfig config;
  std::string digest;
  fs::path dir;
  Provenance provenance;
};

pipeline::PipelineConfig resolve_config(const Flags& f) {
  json doc = json::object();
  if (!f.config.empty()) {
    std::ifstream in(f.config);
    if (!in) throw CliError("missing_input", "config file not found: " + f.config);
    try {
      doc = json::parse(in);
    } catch (const std::exception& e) {
      throw CliError("bad_config", f.config + ": " + e.what());
    }
  }
  const std::string profile = !f.profile.empty() ? f.profile : doc.value("profile", std::string("desk"));
  pipeline::PipelineConfig c;
  try {
    c = pipeline::from_json(doc, profile);
  } catch (const std::exception& e) {
    throw CliError("bad_config", e.what());
  }
  // Flags win over the file.
  if (f.seed) c.seed = *f.seed;
  if (f.threads) c.threads = *f.threads;
  if (!f.out.empty()) c.out = f.out;
  if (!f.corpus.empty()) c.corpus = f.corpus;
  if (!f.checkpoint.empty()) c.checkpoint = f.checkpoint;
  if (!f.lexicon.empty()) c.lexicon = f.lexicon;
  if (!f.loss.empty()) c.train.loss = train::parse_loss_kind(f.loss);
  if (f.k) c.k = *f.k;
  if (f.words) c.compose.word_count = *f.words;
  c.train.seed = c.seed;
  try {
    c.validate();
  } catch (const std::exception& e) {
    throw CliError("bad_config", e.what());
  }
  return c;
}

std::string timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y%m%d-%H%M%S");
  return os.str();
}

void require(const std::string& value, const std::string& what);

struct Needs {
  bool corpus = false;
  bool checkpoint = false;
  bool lexicon = false;
};

Run start(const std::string& command, const Flags& f, Needs needs = {}) {
  Run run;
  run.command = command;
  run.config = resolve_config(f);
  // Inputs are checked before anything is written.
  if (needs.corpus) require(run.config.corpus, "corpus directory");
  if (needs.checkpoint) require(run.config.checkpoint, "checkpoint");
  if (needs.lexicon) require(run.config.lexicon, "lexicon");
  run.digest = pipeline::config_digest(run.config);
  run.dir = run.config.out.empty() ? fs::path("runs") / (command + "-" + timestamp()) : fs::path(run.config.out);
  fs::create_directories(run.dir);
  run.provenance = {{"tool", std::string("acton ") + kVersion},
                    {"command", command},
                    {"config_digest", run.digest},
                    {"seed", std::to_string(run.config.seed)},
                    {"profile", run.config.profile}};
  return run;
}

std::string provenance_line(const Run& run) {
  std::string s;
  for (const auto& [k, v] : run.provenance) s += (s.empty() ? "" : " ") + k + "=" + v;
  return s;
}

// Outputs are write-once: an existing file is never replaced.
fs::path output(const Run& run, const std::string& name) {
  const fs::path p = run.dir / name;
  if (fs::exists(p)) throw CliError("output_exists", p.string() + " already exists; choose a fresh --out directory");
  return p;
}

void write_config(const Run& run) {
  std::ofstream out(output(run, run.command + ".config.json"));
  json j = pipeline::to_json(run.config);
  j["provenance"] = run.provenance;
  out << j.dump(2) << '\n';
}

void require(const std::string& value, const std::string& what) {
  if (value.empty()) throw CliError("missing_input", what + " not given (flag or config paths section)");
  if (!fs::exists(value)) throw CliError("missing_input", what + " not found: " + value);
}

LabeledCorpus load_input_corpus(const std::string& dir) {
  require(dir, "corpus directory");
  return load_corpus(dir);
}

tan::TanWeights load_weights(const std::string& path) {
  require(path, "checkpoint");
  return tan::load_checkpoint(path);
}

std::string corpus_digest(const LabeledCorpus& corpus) {
  std::uint64_t h = fnv1a64("corpus");
  for (const auto& s : corpus.sequences) {
    const auto& d = s.data();
    h = fnv1a64(std::string_view(reinterpret_cast<const char*>(d.data()), d.size() * sizeof(double)), h);
  }
  return hex_digest(h);
}

lexicon::Lexicon load_guarded_lexicon(const std::string& path, const tan::TanWeights& weights) {
  require(path, "lexicon");
  lexicon::Lexicon lex = lexicon::load_lexicon(path);
  if (lex.checkpoint_digest != weights.digest())
    throw CliError("digest_mismatch", "lexicon " + path + " was built from checkpoint " + lex.checkpoint_digest +
                                          " but the given checkpoint is " + weights.digest() +
                                          "; rebuild the lexicon for this checkpoint");
  return lex;
}

tan::FeatureSpace space_of(const std::string& s) {
  return s == "hidden" ? tan::FeatureSpace::kHidden : tan::FeatureSpace::kProjection;
}

lexicon::Tokenized tokenize(const LabeledCorpus& corpus, const tan::TanWeights& w, const lexicon::Lexicon& lex,
                            int threads) {
  const auto features = tan::embed(corpus.sequences, w, space_of(lex.space), threads);
  return lexicon::tokenize_features(features, lex);
}

void print_done(const Run& run) { std::cout << run.command << ": wrote " << run.dir.string() << '\n'; }

int cmd_gen_synth(const Flags& f) {
  Run run = start("gen-synth", f);
  const auto& s = run.config.synth;
  const LabeledCorpus corpus = generate_synthetic_corpus(s.primitives, s.sequences, s.per_sequence,
                                                         s.frames_per_primitive, run.config.seed, s.options);
  if (fs::exists(run.dir / "labels.json"))
    throw CliError("output_exists", (run.dir / "labels.json").string() + " already exists");
  save_corpus(run.dir, corpus, run.provenance);
  write_config(run);
  print_done(run);
  return 0;
}

int cmd_train(const Flags& f) {
  Run run = start("train", f, {true, false, false});
  const LabeledCorpus corpus = load_input_corpus(run.config.corpus);
  tan::TanConfig tc = run.config.tan;
  tc.input_dim = corpus.sequences.front().joints() * 3;
  const fs::path ckpt = output(run, "checkpoint.tan");
  const fs::path hist = output(run, "history.csv");
  const train::TrainResult result = train::train_tan(corpus.sequences, tc, run.config.train);
  Provenance prov = run.provenance;
  prov["corpus"] = corpus_digest(corpus);
  save_checkpoint(ckpt, result.weights, prov);
  train::write_history(hist, result.history, provenance_line(run));
  write_config(run);
  std::cout << "train: " << result.steps << " steps, final loss "
            << (result.history.empty() ? 0.0 : result.history.back().mean_loss) << ", checkpoint digest "
            << result.weights.digest() << '\n';
  print_done(run);
  return 0;
}

int cmd_build_lexicon(const Flags& f) {
  Run run = start("build-lexicon", f, {true, true, false});
  const LabeledCorpus corpus = load_input_corpus(run.config.corpus);
  const tan::TanWeights w = load_weights(run.config.checkpoint);
  const fs::path path = output(run, "lexicon.acl");
  const auto features = tan::embed(corpus.sequences, w, space_of(run.config.space), run.config.threads);
  lexicon::Lexicon lex = lexicon::kmeans(vstack(features), run.config.k, run.config.seed);
  lex.space = run.config.space;
  lex.corpus_id = corpus_digest(corpus);
  lex.checkpoint_digest = w.digest();
  save_lexicon(path, lex, run.provenance);
  write_config(run);
  std::cout << "build-lexicon: K=" << lex.k << " inertia " << lex.inertia << " after " << lex.iterations
            << " iterations\n";
  print_done(run);
  return 0;
}

int cmd_tokenize(const Flags& f) {
  Run run = start("tokenize", f, {true, true, true});
  const LabeledCorpus corpus = load_input_corpus(run.config.corpus);
  const tan::TanWeights w = load_weights(run.config.checkpoint);
  const lexicon::Lexicon lex = load_guarded_lexicon(run.config.lexicon, w);
  const fs::path path = output(run, "tokens.csv");
  const auto tokens = tokenize(corpus, w, lex, run.config.threads);
  lexicon::write_token_streams(path, corpus.names, tokens.streams, provenance_line(run));
  write_config(run);
  print_done(run);
  return 0;
}

int cmd_eval(const Flags& f) {
  Run run = start("eval", f, {true, true, true});
  const auto& c = run.config;
  const LabeledCorpus corpus = load_input_corpus(c.corpus);
  const tan::TanWeights w = load_weights(c.checkpoint);
  const lexicon::Lexicon lex = load_guarded_lexicon(c.lexicon, w);
  const fs::path text = output(run, "report.txt");
  const fs::path js = output(run, "report.json");
  const auto tokens = tokenize(corpus, w, lex, c.threads);

  metrics::MetricsReport report;
  Rng rng(c.seed ^ 0x7A0ULL);
  const auto pairs = evaluation::warped_pairs(corpus.sequences, c.metrics.tau_pairs, c.train.augment, rng);
  report.kendalls_tau = evaluation::mean_tau_tan(pairs, w, c.threads);
  std::vector<int> truth, clusters;
  for (std::size_t s = 0; s < corpus.sequences.size(); ++s) {
    truth.insert(truth.end(), corpus.frame_labels[s].begin(), corpus.frame_labels[s].end());
    clusters.insert(clusters.end(), tokens.labels[s].begin(), tokens.labels[s].end());
  }
  report.nmi = metrics::nmi(truth, clusters);
  std::vector<std::vector<int>> streams;
  for (const auto& st : tokens.streams) streams.push_back(lexicon::symbols(st));
  report.entropy = metrics::entropy_monotonicity_check(streams, c.metrics.entropy_n_max);
  report.f2 = metrics::ngram_entropy(streams, 2).f_n;
  report.provenance = run.provenance;
  report.provenance["checkpoint_digest"] = w.digest();
  report.provenance["tau_pairs"] = "speed-warped copies of corpus sequences";
  write_report_text(text, report);
  write_report_json(js, report);
  write_config(run);
  std::cout << "eval: tau " << report.kendalls_tau << " nmi " << report.nmi << " f2 " << report.f2 << '\n';
  print_done(run);
  return 0;
}

std::vector<metrics::Interval> intervals_of(const std::vector<int>& labels) {
  std::vector<metrics::Interval> out;
  for (const auto& seg : lexicon::segment(labels)) out.push_back({seg.acton, seg.start, seg.end});
  return out;
}

int cmd_detect(const Flags& f) {
  Run run = start("detect", f, {true, true, true});
  const auto& c = run.config;
  const LabeledCorpus corpus = load_input_corpus(c.corpus);
  const tan::TanWeights w = load_weights(c.checkpoint);
  const lexicon::Lexicon lex = load_guarded_lexicon(c.lexicon, w);
  const fs::path csv = output(run, "detections.csv");
  const fs::path summary = output(run, "detect.txt");

  LabeledCorpus map_corpus;
  if (!f.map_corpus.empty()) {
    map_corpus = load_input_corpus(f.map_corpus);
  } else {
    std::cerr << "warning: no --map-corpus; learning the class map on the evaluated corpus\n";
    map_corpus = corpus;
  }
  const auto map_tokens = tokenize(map_corpus, w, lex, c.threads);
  const apps::ActonClassMap map = apps::learn_acton_class_map(map_tokens.labels, map_corpus.frame_labels, lex.k);

  apps::DetectOptions options = c.detect;
  if (options.scales.empty()) options.scales = apps::default_scales(corpus.sequences.front().fps());
  const auto tokens = tokenize(corpus, w, lex, c.threads);
  std::vector<std::vector<metrics::Detection>> detections;
  std::vector<std::vector<metrics::Interval>> truth;
  for (std::size_t s = 0; s < corpus.sequences.size(); ++s) {
    detections.push_back(apps::detect_from_actons(tokens.labels[s], map, options));
    truth.push_back(intervals_of(corpus.frame_labels[s]));
  }
  apps::write_detections(csv, corpus.names, detections, provenance_line(run));
  const double map_score = metrics::detection_map(detections, truth, c.metrics.map_iou);
  std::ofstream out(summary);
  out << "# " << provenance_line(run) << '\n';
  out << "scales=";
  for (std::size_t i = 0; i < options.scales.size(); ++i) out << (i ? "," : "") << options.scales[i];
  out << "\nstride_fraction=" << options.stride_fraction << "\nnms_iou=" << options.nms_iou
      << "\nmap_iou=" << c.metrics.map_iou << "\nmap=" << map_score << '\n';
  write_config(run);
  std::cout << "detect: mAP@" << c.metrics.map_iou << " = " << map_score << '\n';
  print_done(run);
  return 0;
}

int cmd_compose(const Flags& f) {
  Run run = start("compose", f, {true, true, true});
  const auto& c = run.config;
  const LabeledCorpus corpus = load_input_corpus(c.corpus);
  const tan::TanWeights w = load_weights(c.checkpoint);
  const lexicon::Lexicon lex = load_guarded_lexicon(c.lexicon, w);
  const fs::path motion = output(run, "composed.skel");
  const fs::path words = output(run, "words.csv");
  const auto tokens = tokenize(corpus, w, lex, c.threads);
  Rng rng(c.seed ^ 0xC0DEULL);
  const apps::ComposedMotion composed = apps::compose(lex, corpus.sequences, tokens.streams, c.compose, rng);
  save_sequence(motion, composed.motion, run.provenance);
  std::ofstream out(words);
  out << "# " << provenance_line(run) << '\n' << "word,acton,sequence,start,end\n";
  for (std::size_t i = 0; i < composed.words.size(); ++i) {
    const auto& inst = composed.instances[i];
    out << i << ',' << composed.words[i] << ',' << corpus.names[inst.sequence] << ',' << inst.start << ','
        << inst.end << '\n';
  }
  write_config(run);
  std::cout << "compose: " << composed.words.size() << " words, " << composed.motion.frames() << " frames\n";
  print_done(run);
  return 0;
}

int cmd_sweep_k(const Flags& f) {
  Run run = start("sweep-k", f, {true, true, false});
  const auto& c = run.config;
  const LabeledCorpus corpus = load_input_corpus(c.corpus);
  const tan::TanWeights w = load_weights(c.checkpoint);
  const fs::path csv = output(run, "sweep_k.csv");
  const auto features = tan::embed(corpus.sequences, w, space_of(c.space), c.threads);
  std::ofstream out(csv);
  out << "# " << provenance_line(run) << '\n' << "k,slice,nmi,f2\n";
  out.precision(10);
  for (std::size_t k : c.sweep_k) {
    const auto score = evaluation::cluster_score(features, corpus.frame_labels, k, c.seed);
    out << k << ",all," << score.nmi << ',' << score.f2 << '\n';
    std::cout << "sweep-k: K=" << k << " nmi " << score.nmi << " f2 " << score.f2 << '\n';
  }
  write_config(run);
  print_done(run);
  return 0;
}

std::string json_escape(const std::string& s) { return json(s).dump(); }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Motion tokenization toolkit"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", kVersion);
  Flags f;
  std::uint64_t seed = 0;
  int threads = 1;
  std::size_t k = 0, words = 0;
  auto* seed_opt = app.add_option("--seed", seed, "Master seed");
  auto* threads_opt = app.add_option("--threads", threads, "Worker threads; 1 is deterministic")->check(CLI::PositiveNumber);
  app.add_option("--config", f.config, "Pipeline configuration (JSON)");
  app.add_option("--profile", f.profile, "Named defaults")->check(CLI::IsMember({"desk", "paper"}));
  app.add_option("--out", f.out, "Output directory (default: runs/<command>-<timestamp>)");

  auto add_inputs = [&](CLI::App* sub, bool ckpt, bool lex) {
    sub->add_option("--corpus", f.corpus, "Corpus directory");
    if (ckpt) sub->add_option("--checkpoint", f.checkpoint, "TAN checkpoint");
    if (lex) sub->add_option("--lexicon", f.lexicon, "Lexicon file");
  };
  auto* gen = app.add_subcommand("gen-synth", "Write a labeled synthetic corpus");
  auto* tr = app.add_subcommand("train", "Train TAN (or a TCN/TCC baseline)");
  add_inputs(tr, false, false);
  tr->add_option("--loss", f.loss, "Training loss")->check(CLI::IsMember({"tan", "tcn", "tcc"}));
  auto* bl = app.add_subcommand("build-lexicon", "K-means lexicon over embedded frames");
  add_inputs(bl, true, false);
  auto* k_opt = bl->add_option("--k", k, "Lexicon size")->check(CLI::PositiveNumber);
  auto* tk = app.add_subcommand("tokenize", "Token streams for a corpus");
  add_inputs(tk, true, true);
  auto* ev = app.add_subcommand("eval", "Kendall's tau, NMI and entropy report");
  add_inputs(ev, true, true);
  auto* dt = app.add_subcommand("detect", "Sliding-window action detection");
  add_inputs(dt, true, true);
  dt->add_option("--map-corpus", f.map_corpus, "Labeled corpus for the acton-to-class map");
  auto* cp = app.add_subcommand("compose", "Chain acton instances into new motion");
  add_inputs(cp, true, true);
  auto* words_opt = cp->add_option("--words", words, "Word count")->check(CLI::PositiveNumber);
  auto* sk = app.add_subcommand("sweep-k", "NMI and F_2 over a grid of K");
  add_inputs(sk, true, false);

  std::string command = "acton";
  try {
    app.parse(argc, argv);
    if (*seed_opt) f.seed = seed;
    if (*threads_opt) f.threads = threads;
    if (*k_opt) f.k = k;
    if (*words_opt) f.words = words;
    const CLI::App* sub = app.get_subcommands().front();
    command = sub->get_name();
    if (sub == gen) return cmd_gen_synth(f);
    if (sub == tr) return cmd_train(f);
    if (sub == bl) return cmd_build_lexicon(f);
    if (sub == tk) return cmd_tokenize(f);
    if (sub == ev) return cmd_eval(f);
    if (sub == dt) return cmd_detect(f);
    if (sub == cp) return cmd_compose(f);
    return cmd_sweep_k(f);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const CliError& e) {
    std::cerr << "{\"error\":" << json_escape(e.kind) << ",\"command\":" << json_escape(command)
              << ",\"message\":" << json_escape(e.what()) << "}\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "{\"error\":\"failure\",\"command\":" << json_escape(command)
              << ",\"message\":" << json_escape(e.what()) << "}\n";
    return 1;
  }
}
