// Copyright 2026 The ctrlgraph Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// ctrlgraph: dataset building, attribute extraction, training, generation,
// evaluation and scheduler tables from one binary.

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ctrlgraph/config.hpp"
#include "ctrlgraph/dataset.hpp"
#include "ctrlgraph/evaluation.hpp"
#include "ctrlgraph/graph.hpp"
#include "ctrlgraph/model.hpp"
#include "ctrlgraph/training.hpp"

namespace fs = std::filesystem;

namespace ctrlgraph {
namespace {

struct Labeled {
  std::string id;
  AttributeVector attributes;
};

std::string FormatReal(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

std::string FormatAttribute(Attr a, double v) {
  if (IsCountAttribute(a)) return std::to_string(std::llround(v));
  return FormatReal(v);
}

double ParseReal(std::string_view s, std::string_view what) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size() ||
      !std::isfinite(v)) {
    throw std::invalid_argument("bad value for " + std::string(what) + ": '" +
                                std::string(s) + "'");
  }
  return v;
}

std::vector<std::string> Split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(item);
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

std::ofstream OpenOut(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

std::string AttributeHeader() {
  std::string h = "id";
  for (auto name : kAttributeNames) h += "\t" + std::string(name);
  return h;
}

std::string AttributeRow(const std::string& id, const AttributeVector& c) {
  std::string row = id;
  for (std::size_t i = 0; i < kNumAttributes; ++i) {
    row += "\t" + FormatAttribute(static_cast<Attr>(i), c.values[i]);
  }
  return row;
}

// Tab-separated table written by extract-attrs: a header row, then one row
// per graph with an id followed by the twelve attributes.
std::vector<Labeled> ReadAttributeTable(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::string line;
  std::vector<Labeled> rows;
  std::size_t line_no = 0;
  std::vector<std::size_t> column_of(kNumAttributes);
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto cells = Split(line, '\t');
    if (line_no == 1) {
      if (cells.size() != kNumAttributes + 1 || cells[0] != "id") {
        throw std::invalid_argument(
            path.string() + ": expected a header with id and " +
            std::to_string(kNumAttributes) + " attribute columns, got " +
            std::to_string(cells.size() > 0 ? cells.size() - 1 : 0));
      }
      for (std::size_t c = 1; c < cells.size(); ++c) {
        auto a = AttributeFromName(cells[c]);
        if (!a) {
          throw std::invalid_argument(path.string() + ": unknown attribute " +
                                      cells[c]);
        }
        column_of[static_cast<std::size_t>(*a)] = c;
      }
      continue;
    }
    if (cells.size() != kNumAttributes + 1) {
      throw std::invalid_argument(path.string() + " line " +
                                  std::to_string(line_no) + ": expected " +
                                  std::to_string(kNumAttributes) +
                                  " attributes, got " +
                                  std::to_string(cells.size() - 1));
    }
    Labeled row{cells[0], {}};
    for (std::size_t i = 0; i < kNumAttributes; ++i) {
      row.attributes.values[i] =
          ParseReal(cells[column_of[i]], kAttributeNames[i]);
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

// name=value pairs separated by commas. Every attribute must be given
// unless it is masked.
Labeled ParseInlineAttributes(const std::string& text,
                              const std::vector<Attr>& masked) {
  Labeled row{"inline", {}};
  std::array<bool, kNumAttributes> given{};
  for (const auto& item : Split(text, ',')) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("inline attributes need name=value, got '" +
                                  item + "'");
    }
    auto a = AttributeFromName(item.substr(0, eq));
    if (!a) throw std::invalid_argument("unknown attribute " + item.substr(0, eq));
    row.attributes[*a] = ParseReal(item.substr(eq + 1), item.substr(0, eq));
    given[static_cast<std::size_t>(*a)] = true;
  }
  for (Attr a : masked) given[static_cast<std::size_t>(a)] = true;
  std::size_t count = 0;
  for (bool g : given) count += g;
  if (count != kNumAttributes) {
    throw std::invalid_argument("inline attributes give " +
                                std::to_string(count) + " of " +
                                std::to_string(kNumAttributes) + " values");
  }
  return row;
}

std::vector<Labeled> LoadTargets(const std::string& spec,
                                 const std::vector<Attr>& masked) {
  if (fs::exists(spec)) return ReadAttributeTable(spec);
  if (spec.find('=') != std::string::npos) {
    return {ParseInlineAttributes(spec, masked)};
  }
  throw std::runtime_error("cannot read attributes from " + spec);
}

std::vector<Attr> ParseMaskList(const std::vector<std::string>& names) {
  std::vector<Attr> out;
  for (const auto& n : names) {
    for (Attr a : ParseAttributeList(n)) {
      if (std::find(out.begin(), out.end(), a) == out.end()) out.push_back(a);
    }
  }
  return out;
}

// ---- make-dataset ---------------------------------------------------------

struct MakeDatasetArgs {
  std::string input;
  std::string records;
  std::size_t k = DatasetConfig{}.k;
  std::size_t max_nodes = DatasetConfig{}.max_nodes;
  std::vector<double> splits = {0.9, 0.05, 0.05};
  std::uint64_t seed = 0;
  std::string order = "as-is";
  std::string out;
};

int RunMakeDataset(const MakeDatasetArgs& a) {
  if (a.splits.size() != 3) {
    throw std::invalid_argument("--splits needs three fractions");
  }
  DatasetConfig cfg;
  cfg.k = a.k;
  cfg.max_nodes = a.max_nodes;
  cfg.split_fractions = {a.splits[0], a.splits[1], a.splits[2]};
  cfg.seed = a.seed;
  cfg.node_order = ParseNodeOrder(a.order);
  cfg.Validate();
  Dataset d;
  if (!a.records.empty()) {
    d = BuildDatasetFromRecords(ReadRecords(a.records), cfg);
  } else {
    std::ifstream in(a.input);
    if (!in) throw std::runtime_error("cannot read " + a.input);
    d = BuildDataset(ReadEdgeList(in), cfg);
  }
  SaveDataset(d, a.out);
  std::cout << "train " << d.splits.train.size() << "\n"
            << "val " << d.splits.val.size() << "\n"
            << "test " << d.splits.test.size() << "\n"
            << "discarded " << d.discarded << "\n";
  return 0;
}

// ---- extract-attrs --------------------------------------------------------

int RunExtractAttrs(const std::string& graphs, const std::string& out_path) {
  auto records = ReadRecords(graphs);
  if (records.empty()) {
    std::cerr << "ctrlgraph: warning: " << graphs << " holds no graphs\n";
  }
  std::vector<AttributeVector> attrs(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    attrs[i] = ComputeAttributes(records[i].graph);
  }
  std::ostringstream table;
  table << AttributeHeader() << "\n";
  for (std::size_t i = 0; i < records.size(); ++i) {
    table << AttributeRow(records[i].id, attrs[i]) << "\n";
  }
  if (out_path.empty() || out_path == "-") {
    std::cout << table.str();
  } else {
    OpenOut(out_path) << table.str();
  }
  return 0;
}

// ---- train ----------------------------------------------------------------

struct TrainArgs {
  std::string dataset;
  std::optional<std::string> config;
  std::string out;
  std::string log;
  std::optional<std::string> disable_attrs;
  std::vector<std::string> set;
  std::optional<std::size_t> epochs;
  std::optional<std::size_t> batch_size;
  std::optional<double> learning_rate;
  std::optional<double> alpha;
  std::optional<double> gamma;
  std::optional<double> beta0;
  std::optional<std::string> schedule;
  std::optional<std::uint64_t> seed;
  bool quiet = false;
};

int RunTrain(const TrainArgs& a) {
  Dataset d = LoadDataset(a.dataset);
  std::optional<fs::path> cfg_path;
  if (a.config) cfg_path = fs::path(*a.config);
  cfg_path = ResolveConfigPath(cfg_path);
  RunConfig cfg = cfg_path ? LoadRunConfig(*cfg_path) : RunConfig{};
  for (const auto& kv : a.set) {
    const auto eq = kv.find('='), dot = kv.find('.');
    if (eq == std::string::npos || dot == std::string::npos || dot > eq) {
      throw std::invalid_argument("--set expects section.key=value, got '" +
                                  kv + "'");
    }
    SetConfigValue(cfg, kv.substr(0, dot), kv.substr(dot + 1, eq - dot - 1),
                   kv.substr(eq + 1));
  }
  auto& t = cfg.training;
  if (a.epochs) t.epochs = *a.epochs;
  if (a.batch_size) t.batch_size = *a.batch_size;
  if (a.learning_rate) t.learning_rate = *a.learning_rate;
  if (a.alpha) t.scheduler.alpha = *a.alpha;
  if (a.gamma) t.scheduler.gamma = *a.gamma;
  if (a.beta0) t.scheduler.beta0 = *a.beta0;
  if (a.schedule) t.scheduler.mode = ParseScheduleMode(*a.schedule);
  if (a.seed) t.seed = *a.seed;
  if (a.disable_attrs) {
    SetConfigValue(cfg, "training", "disable_attrs", *a.disable_attrs);
  }
  // The dataset fixes the adjacency size.
  cfg.dataset = d.config;
  cfg.model.max_nodes = d.config.max_nodes;
  cfg.Validate();

  const fs::path log_path = a.log.empty() ? fs::path(a.out + ".log.jsonl")
                                          : fs::path(a.log);
  std::ofstream log = OpenOut(log_path);
  auto result = Train(d.splits.train, d.stats, cfg.model, t,
                      [&](const EpochStats& s) {
                        const std::string line = EpochStatsToJsonLine(s);
                        log << line << "\n";
                        log.flush();
                        if (!a.quiet) std::cerr << line << "\n";
                      });
  SaveCheckpoint(result.checkpoint, a.out);
  const auto& last = result.log.back();
  std::cout << "trained " << result.log.size() << " epochs on "
            << d.splits.train.size() << " graphs, final loss "
            << FormatReal(last.loss) << "\n";
  return 0;
}

// ---- generate -------------------------------------------------------------

struct GenerateArgs {
  std::string checkpoint;
  std::string attrs;
  std::size_t num = 1;
  std::string mode = "sample";
  std::vector<std::string> mask;
  std::uint64_t seed = 0;
  std::string out;
  std::string dot_dir;
};

int RunGenerate(const GenerateArgs& a) {
  if (a.out.empty() && a.dot_dir.empty()) {
    throw std::invalid_argument("give --out, --dot-dir or both");
  }
  Checkpoint ckpt = LoadCheckpoint(a.checkpoint);
  Generator gen(ckpt);
  GenerateOptions opts;
  opts.num_samples = a.num;
  opts.mode = ParseSampleMode(a.mode);
  opts.masked = ParseMaskList(a.mask);
  auto targets = LoadTargets(a.attrs, opts.masked);
  std::vector<GraphRecord> out;
  for (std::size_t i = 0; i < targets.size(); ++i) {
    opts.seed = a.seed + i;
    auto graphs = gen.Generate(targets[i].attributes, opts);
    for (std::size_t s = 0; s < graphs.size(); ++s) {
      out.push_back(MakeRecord(targets[i].id + "-" + std::to_string(s),
                               std::move(graphs[s])));
    }
  }
  if (!a.out.empty()) {
    if (fs::path(a.out).has_parent_path()) {
      fs::create_directories(fs::path(a.out).parent_path());
    }
    WriteRecords(a.out, out);
  }
  if (!a.dot_dir.empty()) {
    fs::create_directories(a.dot_dir);
    for (const auto& r : out) {
      OpenOut(fs::path(a.dot_dir) / (r.id + ".dot")) << ToDot(r.graph, "g");
    }
  }
  std::cout << "generated " << out.size() << " graphs\n";
  return 0;
}

// ---- evaluate -------------------------------------------------------------

struct EvaluateArgs {
  std::string checkpoint;
  std::string dataset;
  std::string metrics = "sd,ged,mad,mmd,novelty";
  std::string out;
  std::string split = "test";
  std::string against = "truth";
  std::string mode = "sample";
  std::uint64_t seed = 0;
  std::size_t limit = 0;
  std::size_t ged_cap = kGedExactCap;
};

int RunEvaluate(const EvaluateArgs& a) {
  const auto metrics = ParseMetrics(a.metrics);
  if (a.against != "truth" && a.against != "generated") {
    throw std::invalid_argument("--against must be truth or generated");
  }
  Dataset d = LoadDataset(a.dataset);
  const std::vector<GraphRecord>* split = nullptr;
  if (a.split == "train") split = &d.splits.train;
  if (a.split == "val") split = &d.splits.val;
  if (a.split == "test") split = &d.splits.test;
  if (split == nullptr) {
    throw std::invalid_argument("--split must be train, val or test");
  }
  std::size_t n = split->size();
  if (a.limit > 0) n = std::min(n, a.limit);
  if (n == 0) throw std::invalid_argument("the " + a.split + " split is empty");

  Checkpoint ckpt = LoadCheckpoint(a.checkpoint);
  Generator gen(ckpt);
  GenerateOptions opts;
  opts.mode = ParseSampleMode(a.mode);
  std::vector<std::string> ids(n);
  std::vector<AttributeVector> targets(n);
  std::vector<Graph> reference(n), generated(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& r = (*split)[i];
    ids[i] = r.id;
    targets[i] = r.attributes;
    opts.seed = a.seed + i;
    generated[i] = std::move(gen.Generate(r.attributes, opts).front());
    reference[i] = a.against == "truth"
                       ? r.graph
                       : std::move(gen.Generate(r.attributes, opts).front());
  }
  std::vector<Graph> training;
  training.reserve(d.splits.train.size());
  for (const auto& r : d.splits.train) training.push_back(r.graph);

  EvaluationInput in{ids, reference, targets, generated, training};
  const std::string report = MetricReportToJson(Evaluate(in, metrics, a.ged_cap));
  if (a.out.empty() || a.out == "-") {
    std::cout << report;
  } else {
    OpenOut(a.out) << report;
  }
  return 0;
}

// ---- schedule -------------------------------------------------------------

int RunSchedule(const SchedulerConfig& cfg, std::size_t epochs,
                const std::string& out_path) {
  cfg.Validate();
  if (epochs == 0) throw std::invalid_argument("--epochs must be positive");
  std::ostringstream table;
  table << "epoch\tt\tbeta\n";
  for (std::size_t e = 0; e <= epochs; ++e) {
    const double t = static_cast<double>(e) / static_cast<double>(epochs);
    const double beta = e == 0 ? (cfg.mode == ScheduleMode::kScheduled
                                      ? InclusionFactor(0.0, cfg)
                                      : EpochBeta(1, 1, cfg))
                               : EpochBeta(e, epochs, cfg);
    table << e << "\t" << FormatReal(t) << "\t" << FormatReal(beta) << "\n";
  }
  if (out_path.empty() || out_path == "-") {
    std::cout << table.str();
  } else {
    OpenOut(out_path) << table.str();
  }
  return 0;
}

// ---- synth ----------------------------------------------------------------

struct SynthArgs {
  std::string kind = "mixed";
  std::size_t count = 100;
  std::size_t min_nodes = 10;
  std::size_t max_nodes = 30;
  std::size_t m = 2;
  double p = 0.2;
  std::uint64_t seed = 0;
  std::string out;
};

int RunSynth(const SynthArgs& a) {
  if (a.kind != "ba" && a.kind != "er" && a.kind != "mixed") {
    throw std::invalid_argument("--kind must be ba, er or mixed");
  }
  if (a.min_nodes == 0 || a.min_nodes > a.max_nodes) {
    throw std::invalid_argument("need 0 < --min-nodes <= --max-nodes");
  }
  std::mt19937_64 rng(a.seed);
  std::uniform_int_distribution<std::size_t> size(a.min_nodes, a.max_nodes);
  std::vector<GraphRecord> out;
  out.reserve(a.count);
  for (std::size_t i = 0; i < a.count; ++i) {
    const std::size_t n = size(rng);
    const std::uint64_t s = rng();
    const bool ba = a.kind == "ba" || (a.kind == "mixed" && i % 2 == 1);
    Graph g = ba ? BarabasiAlbert(n, std::min(a.m, n - 1), s)
                 : ErdosRenyi(n, a.p, s);
    out.push_back(MakeRecord((ba ? "ba-" : "er-") + std::to_string(i),
                             std::move(g)));
  }
  if (fs::path(a.out).has_parent_path()) {
    fs::create_directories(fs::path(a.out).parent_path());
  }
  WriteRecords(a.out, out);
  std::cout << "wrote " << out.size() << " graphs\n";
  return 0;
}

int Main(int argc, char** argv) {
  CLI::App app{"Attribute-controlled graph generation toolkit.", "ctrlgraph"};
  app.require_subcommand(1);
  app.option_defaults()->always_capture_default();

  MakeDatasetArgs md;
  auto* make = app.add_subcommand(
      "make-dataset", "Extract k-hop subgraphs from an edge list into splits.");
  make->option_defaults()->always_capture_default();
  auto* input_opt =
      make->add_option("--input", md.input, "Edge list, one 'u v' per line");
  auto* records_opt = make->add_option(
      "--records", md.records, "Graph record file used instead of --input");
  input_opt->excludes(records_opt);
  make->add_option("--k", md.k, "Hop radius")->check(CLI::PositiveNumber);
  make->add_option("--max-nodes", md.max_nodes, "Largest subgraph kept");
  make->add_option("--splits", md.splits, "train,val,test fractions")
      ->delimiter(',')
      ->expected(3);
  make->add_option("--seed", md.seed, "Split seed");
  make->add_option("--order", md.order, "Node order: as-is or bfs");
  make->add_option("--out", md.out, "Output dataset directory")->required();

  std::string ea_graphs, ea_out;
  auto* extract = app.add_subcommand(
      "extract-attrs", "Write the attribute table of a graph record file.");
  extract->add_option("--graphs", ea_graphs, "Graph record file")->required();
  extract->add_option("--out", ea_out, "Output table ('-' for stdout)")
      ->default_str("-");

  TrainArgs tr;
  const TrainingConfig td;
  auto* train = app.add_subcommand(
      "train", "Train a model; flags override the config file.");
  train->add_option("--dataset", tr.dataset, "Dataset directory")->required();
  train->add_option("--config", tr.config,
                    std::string("Run config file (default: $") +
                        kConfigEnvVar + " if set)");
  train->add_option("--out", tr.out, "Checkpoint path")->required();
  train->add_option("--log", tr.log, "Loss log (default: <out>.log.jsonl)");
  train->add_option("--disable-attrs", tr.disable_attrs,
                    "Comma-separated attributes to drop")
      ->default_str("none");
  train->add_option("--set", tr.set, "Config override section.key=value")
      ->default_str("");
  train->add_option("--epochs", tr.epochs, "Epochs")
      ->default_str(std::to_string(td.epochs));
  train->add_option("--batch-size", tr.batch_size, "Minibatch size")
      ->default_str(std::to_string(td.batch_size));
  train->add_option("--lr", tr.learning_rate, "Learning rate")
      ->default_str(FormatReal(td.learning_rate));
  train->add_option("--alpha", tr.alpha, "Scheduler shape")
      ->default_str(FormatReal(td.scheduler.alpha));
  train->add_option("--gamma", tr.gamma, "Scheduler cap")
      ->default_str(FormatReal(td.scheduler.gamma));
  train->add_option("--beta0", tr.beta0, "Scheduler start")
      ->default_str(FormatReal(td.scheduler.beta0));
  train->add_option("--schedule", tr.schedule,
                    "scheduled, constant or posterior-only")
      ->default_str(std::string(ScheduleModeName(td.scheduler.mode)));
  train->add_option("--seed", tr.seed, "Seed")
      ->default_str(std::to_string(td.seed));
  train->add_flag("--quiet", tr.quiet, "Do not echo the loss log");

  GenerateArgs ge;
  auto* generate = app.add_subcommand(
      "generate", "Generate graphs for target attribute vectors.");
  generate->option_defaults()->always_capture_default();
  generate->add_option("--checkpoint", ge.checkpoint, "Checkpoint")->required();
  generate
      ->add_option("--attrs", ge.attrs,
                   "Attribute table file or inline name=value,...")
      ->required();
  generate->add_option("--num", ge.num, "Graphs per attribute vector");
  generate->add_option("--mode", ge.mode, "sample or threshold");
  generate->add_option("--mask-attr", ge.mask,
                       "Attribute to zero out (repeatable)");
  generate->add_option("--seed", ge.seed, "Seed of the first vector");
  generate->add_option("--out", ge.out, "Output graph record file");
  generate->add_option("--dot-dir", ge.dot_dir, "Directory for DOT files");

  EvaluateArgs ev;
  auto* evaluate = app.add_subcommand(
      "evaluate", "Generate from a split's attributes and score the result.");
  evaluate->option_defaults()->always_capture_default();
  evaluate->add_option("--checkpoint", ev.checkpoint, "Checkpoint")->required();
  evaluate->add_option("--dataset", ev.dataset, "Dataset directory")->required();
  evaluate->add_option("--metrics", ev.metrics, "Comma-separated metrics");
  evaluate->add_option("--out", ev.out, "Report path ('-' for stdout)")
      ->default_str("-");
  evaluate->add_option("--split", ev.split, "train, val or test");
  evaluate->add_option("--against", ev.against,
                       "Reference graphs: truth or generated");
  evaluate->add_option("--mode", ev.mode, "sample or threshold");
  evaluate->add_option("--seed", ev.seed, "Seed of the first record");
  evaluate->add_option("--limit", ev.limit, "Use at most this many records (0 = all)");
  evaluate->add_option("--ged-cap", ev.ged_cap, "Largest graph for exact GED");

  SchedulerConfig sc;
  std::size_t sc_epochs = 100;
  std::string sc_mode = "scheduled", sc_out;
  auto* schedule = app.add_subcommand(
      "schedule", "Print the inclusion factor over an epoch grid.");
  schedule->option_defaults()->always_capture_default();
  schedule->add_option("--alpha", sc.alpha, "Shape");
  schedule->add_option("--gamma", sc.gamma, "Cap");
  schedule->add_option("--beta0", sc.beta0, "Start");
  schedule->add_option("--mode", sc_mode, "scheduled, constant or posterior-only");
  schedule->add_option("--epochs", sc_epochs, "Epoch count");
  schedule->add_option("--out", sc_out, "Output table ('-' for stdout)")
      ->default_str("-");

  SynthArgs sy;
  auto* synth = app.add_subcommand(
      "synth", "Write random Erdos-Renyi / Barabasi-Albert graph records.");
  synth->option_defaults()->always_capture_default();
  synth->add_option("--kind", sy.kind, "ba, er or mixed");
  synth->add_option("--count", sy.count, "Number of graphs");
  synth->add_option("--min-nodes", sy.min_nodes, "Smallest size");
  synth->add_option("--max-nodes", sy.max_nodes, "Largest size");
  synth->add_option("--m", sy.m, "Attachment edges per new node (ba)");
  synth->add_option("--p", sy.p, "Edge probability (er)");
  synth->add_option("--seed", sy.seed, "Seed");
  synth->add_option("--out", sy.out, "Output graph record file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "ctrlgraph: error: " << e.what() << "\n";
    return 2;
  }

  if (*make) {
    if (md.input.empty() && md.records.empty()) {
      throw std::invalid_argument("give --input or --records");
    }
    return RunMakeDataset(md);
  }
  if (*extract) return RunExtractAttrs(ea_graphs, ea_out);
  if (*train) return RunTrain(tr);
  if (*generate) return RunGenerate(ge);
  if (*evaluate) return RunEvaluate(ev);
  if (*schedule) {
    sc.mode = ParseScheduleMode(sc_mode);
    return RunSchedule(sc, sc_epochs, sc_out);
  }
  if (*synth) return RunSynth(sy);
  return 2;
}

}  // namespace
}  // namespace ctrlgraph

int main(int argc, char** argv) {
  try {
    return ctrlgraph::Main(argc, argv);
  } catch (const std::exception& e) {
    std::string msg = e.what();
    std::replace(msg.begin(), msg.end(), '\n', ' ');
    std::cerr << "ctrlgraph: error: " << msg << "\n";
    return 1;
  }
}
