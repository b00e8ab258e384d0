// lsc: command-line front end for lexical semantic change detection.
//
//   lsc synth      generate a synthetic T0/T1 pair with gold labels
//   lsc train      train per-epoch CBOW embeddings
//   lsc pos-model  POS-distribution distances per target
//   lsc score      neighbor-based change scores per target
//   lsc predict    apply system1/system2/system3 to score tables
//   lsc evaluate   accuracy, false positives and false negatives against gold
//   lsc sweep      threshold/range analysis across k
//
// Exit status: 0 on success, 1 on a pipeline error, 2 on a usage error.

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "lsc/lsc.hpp"

namespace fs = std::filesystem;

namespace {

struct Options {
  std::string t0, t1, targets, gold, out = ".";
  std::string emb0, emb1, pred;
  std::vector<std::string> scores;
  std::size_t k = 10;
  std::size_t k_min = 1, k_max = 50;
  std::vector<std::string> aggregations;
  std::vector<std::string> measures;
  std::string scheme = "system1";
  lsc::TrainingConfig train;
  lsc::SynthConfig synth;
  std::string pos_shift;
};

void require_file(const std::string& path, const char* flag) {
  if (path.empty()) throw lsc::ArgumentError(std::string("missing required ") + flag);
  if (!fs::exists(path)) throw lsc::IoError(std::string(flag) + ": file not found: " + path);
}

fs::path output_dir(const Options& o) {
  fs::path dir(o.out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw lsc::IoError("cannot create output directory '" + dir.string() + "': " + ec.message());
  return dir;
}

lsc::Corpus load_corpus(const std::string& path, const char* flag, lsc::Epoch epoch) {
  require_file(path, flag);
  try {
    return lsc::read_corpus(path, epoch);
  } catch (const lsc::ParseError& e) {
    throw lsc::ParseError(path + ": " + e.what(), e.line());
  }
}

std::vector<lsc::Target> load_targets(const Options& o) {
  require_file(o.targets, "--targets");
  auto t = lsc::read_targets(o.targets);
  if (t.empty()) throw lsc::ArgumentError("targets file '" + o.targets + "' lists no targets");
  return t;
}

std::vector<lsc::ResolvedTarget> resolve(const Options& o, const std::vector<lsc::Target>& targets) {
  const bool need_corpora = std::any_of(targets.begin(), targets.end(), [](const auto& t) { return !t.pos; });
  if (!need_corpora) return lsc::resolve_targets(targets, {});
  if (o.t0.empty() || o.t1.empty())
    throw lsc::ArgumentError("targets without a POS column need --t0 and --t1 to pick the most frequent tag");
  const auto c0 = load_corpus(o.t0, "--t0", lsc::Epoch::T0);
  const auto c1 = load_corpus(o.t1, "--t1", lsc::Epoch::T1);
  return lsc::resolve_targets(targets, {&c0, &c1});
}

std::vector<lsc::MeasureKind> measures_of(const Options& o) {
  if (o.measures.empty()) return {lsc::kMeasureKinds.begin(), lsc::kMeasureKinds.end()};
  std::vector<lsc::MeasureKind> out;
  for (const auto& m : o.measures) out.push_back(lsc::parse_measure(m));
  return out;
}

lsc::Aggregation aggregation_of(const Options& o) {
  return o.aggregations.empty() ? lsc::Aggregation::T0Only : lsc::parse_aggregation(o.aggregations.front());
}

int cmd_synth(Options& o) {
  if (!o.pos_shift.empty()) {
    // FROM:TO:FRACTION, e.g. PROPN:NOUN:0.5
    const auto parts = lsc::detail::split(o.pos_shift, ':');
    if (parts.size() != 3) throw lsc::ArgumentError("--pos-shift expects FROM:TO:FRACTION");
    auto from = lsc::pos_category(parts[0]), to = lsc::pos_category(parts[1]);
    if (!from || !to) throw lsc::ArgumentError("--pos-shift categories must be ADJ, NOUN, PROPN or VERB");
    o.synth.pos_shift = lsc::PosShift{*from, *to, std::stod(std::string(parts[2]))};
  }
  const auto data = lsc::generate_synthetic(o.synth);
  const auto dir = output_dir(o);
  lsc::write_corpus(dir / "t0.tsv", data.t0);
  lsc::write_corpus(dir / "t1.tsv", data.t1);
  {
    auto out = lsc::detail::open_output(dir / "targets.tsv");
    for (const auto& t : data.targets) out << t << '\n';
  }
  {
    auto out = lsc::detail::open_output(dir / "gold.tsv");
    lsc::write_gold(out, data.gold);
  }
  std::cout << "synth: " << data.targets.size() << " targets, " << data.t0.sentences.size() << " sentences/epoch -> "
            << dir.string() << '\n';
  return 0;
}

int cmd_train(Options& o) {
  const auto c0 = load_corpus(o.t0, "--t0", lsc::Epoch::T0);
  const auto c1 = load_corpus(o.t1, "--t1", lsc::Epoch::T1);
  const auto m0 = lsc::train_cbow(c0, o.train);
  const auto m1 = lsc::train_cbow(c1, o.train);
  const auto dir = output_dir(o);
  lsc::save_embeddings(dir / "t0.vec", m0);
  lsc::save_embeddings(dir / "t1.vec", m1);
  std::cout << "train: T0 " << m0.size() << " keys, T1 " << m1.size() << " keys, dim " << o.train.dim
            << (o.train.deterministic ? " (deterministic)" : "") << " -> " << dir.string() << '\n';
  return 0;
}

int cmd_pos_model(Options& o) {
  const auto c0 = load_corpus(o.t0, "--t0", lsc::Epoch::T0);
  const auto c1 = load_corpus(o.t1, "--t1", lsc::Epoch::T1);
  const auto targets = load_targets(o);
  const auto dir = output_dir(o);
  std::vector<lsc::ScoreRecord> rows;
  auto dist = lsc::detail::open_output(dir / "pos_distributions.tsv");
  dist << "target\tepoch\tADJ\tNOUN\tPROPN\tVERB\n";
  for (const auto& t : targets) {
    const auto change = lsc::pos_change(c0, c1, t.lemma);
    for (const auto& [epoch, d] : {std::pair{"T0", change.t0}, std::pair{"T1", change.t1}}) {
      dist << t.lemma << '\t' << epoch;
      for (double v : d.values) dist << '\t' << lsc::format_fixed(v, 6);
      dist << '\n';
    }
    for (auto kind : lsc::kDistanceKinds)
      rows.push_back({t.lemma, std::string(lsc::to_string(kind)), 0, "-", change[kind]});
  }
  lsc::write_scores(dir / "pos_scores.tsv", rows);
  std::cout << "pos-model: " << targets.size() << " targets x 3 distances -> " << (dir / "pos_scores.tsv").string()
            << '\n';
  return 0;
}

std::pair<lsc::EmbeddingModel, lsc::EmbeddingModel> load_models(const Options& o) {
  require_file(o.emb0, "--emb0");
  require_file(o.emb1, "--emb1");
  return {lsc::load_embeddings(o.emb0, lsc::Epoch::T0), lsc::load_embeddings(o.emb1, lsc::Epoch::T1)};
}

int cmd_score(Options& o) {
  const auto targets = resolve(o, load_targets(o));
  const auto [m0, m1] = load_models(o);
  const auto agg = aggregation_of(o);
  const auto measures = measures_of(o);
  std::vector<lsc::ScoreRecord> rows;
  for (auto kind : measures) {
    const auto table = lsc::score_table(m0, m1, targets, o.k, agg, kind);
    for (const auto& t : targets)
      rows.push_back({t.name, std::string(lsc::to_string(kind)), o.k, std::string(lsc::to_string(agg)),
                      table.rows.at(t.name)});
  }
  const auto dir = output_dir(o);
  lsc::write_scores(dir / "scores.tsv", rows);
  std::cout << "score: " << targets.size() << " targets x " << measures.size() << " measures (k=" << o.k << ", "
            << lsc::to_string(agg) << ") -> " << (dir / "scores.tsv").string() << '\n';
  return 0;
}

int cmd_predict(Options& o) {
  if (o.scores.empty()) throw lsc::ArgumentError("predict needs at least one --scores file");
  std::vector<lsc::ScoreRecord> rows;
  for (const auto& path : o.scores) {
    require_file(path, "--scores");
    auto r = lsc::read_scores(path);
    rows.insert(rows.end(), r.begin(), r.end());
  }
  const auto agg = std::string(lsc::to_string(aggregation_of(o)));
  auto pick = [&](std::string_view measure, bool embedding, bool higher) {
    lsc::ScoreTable t{{}, higher};
    for (const auto& r : rows) {
      if (r.measure != measure) continue;
      if (embedding && (r.k != o.k || lsc::parse_aggregation(r.aggregation) != lsc::parse_aggregation(agg))) continue;
      if (!t.rows.emplace(r.target, r.score).second)
        throw lsc::ArgumentError("duplicate '" + std::string(measure) + "' score for target '" + r.target + "'");
    }
    if (t.rows.empty())
      throw lsc::ArgumentError("no '" + std::string(measure) + "' scores" +
                               (embedding ? " at k=" + std::to_string(o.k) + ", " + agg : std::string()) +
                               " in the given --scores files");
    return t;
  };
  auto pos_system = [&] {
    return lsc::system1(pick("euclidean", false, true), pick("manhattan", false, true), pick("cosine", false, true));
  };
  auto emb_system = [&] {
    return lsc::system2(pick("aad", true, true), pick("cos-sim", true, false));
  };
  const auto scheme = lsc::parse_scheme(o.scheme);
  lsc::PredictionSet p;
  switch (scheme) {
    case lsc::Scheme::System1: p = pos_system(); break;
    case lsc::Scheme::System2: p = emb_system(); break;
    case lsc::Scheme::System3: p = lsc::system3(pos_system(), emb_system()); break;
  }
  const auto dir = output_dir(o);
  const auto path = dir / ("predictions_" + o.scheme + ".tsv");
  lsc::write_predictions(path, p);
  std::cout << "predict: " << o.scheme << " flags " << p.changed.size() << " of " << p.universe.size()
            << " targets as changed -> " << path.string() << '\n';
  return 0;
}

int cmd_evaluate(Options& o) {
  require_file(o.pred, "--pred");
  require_file(o.gold, "--gold");
  const auto report = lsc::evaluate(lsc::read_predictions(o.pred), lsc::read_gold(o.gold));
  if (!o.out.empty() && o.out != ".") {
    auto out = lsc::detail::open_output(output_dir(o) / "evaluation.tsv");
    lsc::write_report(out, report);
  }
  auto join = [](const std::vector<std::string>& v) {
    std::string s;
    for (const auto& x : v) s += (s.empty() ? "" : ",") + x;
    return s.empty() ? std::string("-") : s;
  };
  std::cout << "evaluate: accuracy " << lsc::format_fixed(report.accuracy, 4) << " (" << report.correct() << "/"
            << report.n << "), FP " << join(report.false_positives) << ", FN " << join(report.false_negatives)
            << '\n';
  return 0;
}

int cmd_sweep(Options& o) {
  if (o.k_min < 1 || o.k_max < o.k_min) throw lsc::ArgumentError("need 1 <= --k-min <= --k-max");
  const auto targets = resolve(o, load_targets(o));
  require_file(o.gold, "--gold");
  const auto gold = lsc::read_gold(o.gold);
  const auto [m0, m1] = load_models(o);
  std::vector<std::size_t> ks;
  for (std::size_t k = o.k_min; k <= o.k_max; ++k) ks.push_back(k);
  std::vector<lsc::Aggregation> aggs;
  for (const auto& a : o.aggregations) aggs.push_back(lsc::parse_aggregation(a));
  if (aggs.empty()) aggs.assign(lsc::kAggregations.begin(), lsc::kAggregations.end());
  const auto records = lsc::sweep_k(m0, m1, targets, gold, ks, measures_of(o), aggs);
  const auto dir = output_dir(o);
  lsc::write_sweep_csv(dir / "sweep.csv", records);
  std::cout << "sweep: " << records.size() << " records (k " << o.k_min << ".." << o.k_max << ") -> "
            << (dir / "sweep.csv").string() << '\n';
  return 0;
}

// "key = value" lines become "--key value" arguments for the chosen
// subcommand. Keys the subcommand does not know are skipped; flags given on
// the command line win.
std::vector<std::string> expand_config(const std::vector<std::string>& args, const CLI::App& app) {
  std::vector<std::string> out;
  std::optional<std::string> config;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      config = args[++i];
    } else if (args[i].rfind("--config=", 0) == 0) {
      config = args[i].substr(9);
    } else {
      out.push_back(args[i]);
    }
  }
  if (!config) return out;
  std::ifstream in(*config);
  if (!in) throw lsc::IoError("cannot open config file '" + *config + "'");
  if (out.empty()) return out;
  const CLI::App* sub = nullptr;
  for (const auto* s : app.get_subcommands({}))
    if (s->get_name() == out.front()) sub = s;
  if (!sub) return out;

  auto given = [&](const std::string& flag) {
    return std::any_of(out.begin(), out.end(), [&](const std::string& a) { return a == flag || a.rfind(flag + "=", 0) == 0; });
  };
  std::vector<std::string> extra;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    lsc::detail::strip_cr(line);
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos || line[first] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw lsc::ParseError(*config + ": expected 'key = value'", lineno);
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\"");
      const auto e = s.find_last_not_of(" \t\"");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    const std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
    const std::string flag = "--" + key;
    const CLI::Option* opt = nullptr;
    try {
      opt = sub->get_option(flag);
    } catch (const CLI::OptionNotFound&) {
      continue;
    }
    if (given(flag)) continue;
    if (opt->get_type_size() == 0) {
      if (value == "true" || value == "1" || value == "yes") extra.push_back(flag);
    } else {
      extra.push_back(flag);
      extra.push_back(value);
    }
  }
  out.insert(out.begin() + 1, extra.begin(), extra.end());
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Lexical semantic change detection between two time-sliced corpora"};
  app.name("lsc");
  app.require_subcommand(1);
  Options o;

  auto out_opt = [&](CLI::App* s) { s->add_option("--out", o.out, "Output directory")->envname("LSC_OUT"); };
  auto corpora = [&](CLI::App* s) {
    s->add_option("--t0", o.t0, "T0 corpus (form<TAB>pos<TAB>lemma)");
    s->add_option("--t1", o.t1, "T1 corpus");
  };
  auto models = [&](CLI::App* s) {
    s->add_option("--emb0", o.emb0, "T0 embeddings (word2vec text format)");
    s->add_option("--emb1", o.emb1, "T1 embeddings");
  };

  auto* synth = app.add_subcommand("synth", "Generate a synthetic corpus pair with gold labels");
  synth->add_option("--seed", o.synth.seed, "Generator seed")->capture_default_str();
  synth->add_option("--n-changed", o.synth.n_changed)->capture_default_str();
  synth->add_option("--n-stable", o.synth.n_stable)->capture_default_str();
  synth->add_option("--sentences", o.synth.sentences_per_epoch, "Sentences per epoch")->capture_default_str();
  synth->add_option("--topic-vocab", o.synth.topic_vocab_size, "Words per topic")->capture_default_str();
  synth->add_option("--topics", o.synth.topics, "Topic count (0 = one per target)")->capture_default_str();
  synth->add_option("--shift", o.synth.shift_strength, "Share of changed-target T1 contexts moved")->capture_default_str();
  synth->add_option("--pos-shift", o.pos_shift, "Retag changed targets in T1, FROM:TO:FRACTION");
  out_opt(synth);

  auto* train = app.add_subcommand("train", "Train CBOW embeddings for both epochs");
  corpora(train);
  train->add_option("--dim", o.train.dim)->capture_default_str();
  train->add_option("--window", o.train.window)->capture_default_str();
  train->add_option("--min-count", o.train.min_count)->capture_default_str();
  train->add_option("--negatives", o.train.negatives)->capture_default_str();
  train->add_option("--epochs", o.train.epochs)->capture_default_str();
  train->add_option("--lr", o.train.initial_lr, "Initial learning rate")->capture_default_str();
  train->add_option("--final-lr", o.train.final_lr)->capture_default_str();
  train->add_option("--sample", o.train.subsample_threshold, "Subsampling threshold")->capture_default_str();
  train->add_option("--seed", o.train.seed)->capture_default_str();
  train->add_option("--threads", o.train.threads, "Workers in fast mode (0 = all cores)")->capture_default_str();
  bool deterministic = false;
  train->add_flag("--deterministic", deterministic, "Single-threaded, bit-reproducible training");
  out_opt(train);

  auto* pos = app.add_subcommand("pos-model", "POS-distribution distances per target");
  corpora(pos);
  pos->add_option("--targets", o.targets, "Targets file (lemma[<TAB>POS])");
  out_opt(pos);

  auto* score = app.add_subcommand("score", "Neighbor-based change scores per target");
  corpora(score);
  models(score);
  score->add_option("--targets", o.targets, "Targets file");
  score->add_option("--k", o.k, "Neighbors per target")->capture_default_str()->check(CLI::PositiveNumber);
  score->add_option("--aggregation", o.aggregations, "t0-only or union")->expected(1)->check(CLI::IsMember({"t0-only", "union"}));
  score->add_option("--measure", o.measures, "aad, cos-sim, cos-dist (repeatable; default all)")
      ->check(CLI::IsMember({"aad", "cos-sim", "cos-dist"}));
  out_opt(score);

  auto* predict = app.add_subcommand("predict", "Binary predictions from score tables");
  predict->add_option("--scheme", o.scheme)->capture_default_str()->check(CLI::IsMember({"system1", "system2", "system3"}));
  predict->add_option("--scores", o.scores, "Score table(s) from pos-model and/or score");
  predict->add_option("--k", o.k, "k of the embedding scores to use")->capture_default_str()->check(CLI::PositiveNumber);
  predict->add_option("--aggregation", o.aggregations, "t0-only or union")->expected(1)->check(CLI::IsMember({"t0-only", "union"}));
  out_opt(predict);

  auto* evaluate = app.add_subcommand("evaluate", "Accuracy and error sets against gold labels");
  evaluate->add_option("--pred", o.pred, "Predictions file (target<TAB>0|1)");
  evaluate->add_option("--gold", o.gold, "Gold file (target<TAB>0|1)");
  out_opt(evaluate);

  auto* sweep = app.add_subcommand("sweep", "Class ranges and best thresholds across k");
  corpora(sweep);
  models(sweep);
  sweep->add_option("--targets", o.targets, "Targets file");
  sweep->add_option("--gold", o.gold, "Gold file");
  sweep->add_option("--k-min", o.k_min)->capture_default_str();
  sweep->add_option("--k-max", o.k_max)->capture_default_str();
  sweep->add_option("--measure", o.measures, "Measures to sweep (default all)")->check(CLI::IsMember({"aad", "cos-sim", "cos-dist"}));
  sweep->add_option("--aggregation", o.aggregations, "Aggregations to sweep (default both)")->check(CLI::IsMember({"t0-only", "union"}));
  out_opt(sweep);

  app.set_help_all_flag("--help-all");
  app.footer("Any subcommand accepts --config FILE with 'key = value' lines standing in for its flags.");

  try {
    std::vector<std::string> args(argv + 1, argv + argc);
    args = expand_config(args, app);
    std::reverse(args.begin(), args.end());  // CLI11 consumes a reversed vector
    app.parse(args);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "lsc: usage error: " << e.what() << "\n" << "Run 'lsc --help' for usage.\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "lsc: error: " << e.what() << '\n';
    return 1;
  }

  o.train.deterministic = deterministic;
  try {
    if (*synth) return cmd_synth(o);
    if (*train) return cmd_train(o);
    if (*pos) return cmd_pos_model(o);
    if (*score) return cmd_score(o);
    if (*predict) return cmd_predict(o);
    if (*evaluate) return cmd_evaluate(o);
    if (*sweep) return cmd_sweep(o);
  } catch (const std::exception& e) {
    std::cerr << "lsc " << app.get_subcommands().front()->get_name() << ": error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}
