#include <trieguide/cli.hpp>
#include <trieguide/decode.hpp>
#include <trieguide/errors.hpp>
#include <trieguide/eval.hpp>
#include <trieguide/filter.hpp>
#include <trieguide/ingest.hpp>
#include <trieguide/lm.hpp>
#include <trieguide/train.hpp>
#include <trieguide/trie.hpp>
#include <trieguide/util.hpp>
#include <trieguide/vocab.hpp>

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <ostream>
#include <set>

#include <fmt/format.h>
#include <spdlog/sinks/ostream_sink.h>
#include <spdlog/spdlog.h>

namespace trieguide {

namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;

// ---------------------------------------------------------------------------------------------
// file helpers

/// Opens `path` and runs `fn` on it; parse failures are reported against the file name.
template <typename Fn>
auto with_input(const fs::path& path, Fn&& fn) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  try {
    return fn(in);
  } catch (const ParseError& e) {
    throw Error(path.string() + ": " + e.what());
  } catch (const InvalidArgument& e) {
    throw Error(path.string() + ": " + e.what());
  }
}

/// Parses a JSON-lines stream; blank lines are skipped.
std::vector<json> read_jsonl(std::istream& in) {
  std::vector<json> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      auto row = json::parse(line);
      if (!row.is_object()) throw ParseError(lineno, 0, "expected a JSON object");
      rows.push_back(std::move(row));
    } catch (const json::parse_error& e) {
      throw ParseError(lineno, e.byte > 0 ? e.byte - 1 : 0, "malformed JSON");
    }
  }
  return rows;
}

std::string string_field(const json& row, const char* key, std::size_t lineno, bool required = true) {
  const auto it = row.find(key);
  if (it == row.end()) {
    if (!required) return {};
    throw ParseError(lineno, 0, fmt::format("missing string field `{}`", key));
  }
  if (!it->is_string()) throw ParseError(lineno, 0, fmt::format("field `{}` must be a string", key));
  return it->get<std::string>();
}

struct DatasetRow {
  std::string caption;
  std::string ocr_cover;
  std::string query;
};

std::vector<DatasetRow> read_dataset(const fs::path& path) {
  return with_input(path, [](std::istream& in) {
    std::vector<DatasetRow> rows;
    std::size_t lineno = 0;
    for (const auto& row : read_jsonl(in)) {
      ++lineno;
      rows.push_back({string_field(row, "caption", lineno), string_field(row, "ocr_cover", lineno),
                      string_field(row, "query", lineno)});
    }
    return rows;
  });
}

void write_dataset(std::ostream& out, std::span<const LogRecord> records) {
  for (const auto& r : records) {
    out << json{{"caption", r.caption}, {"ocr_cover", r.ocr_cover}, {"query", r.query}}.dump() << '\n';
  }
}

/// A generated candidate as written by `generate` and `filter`.
struct Candidate {
  std::size_t example = 0;
  std::size_t rank = 0;
  std::optional<std::string> ground_truth;
  ScoredQuery query;
};

json candidate_json(const Candidate& c) {
  json row;
  row["example"] = c.example;
  row["rank"] = c.rank;
  if (c.ground_truth) row["ground_truth"] = *c.ground_truth;
  row["query"] = c.query.text;
  row["log_prob"] = c.query.log_prob;
  row["token_probs"] = c.query.token_probs;
  row["eos_prob"] = c.query.eos_prob;
  return row;
}

std::vector<Candidate> read_candidates(std::istream& in) {
  std::vector<Candidate> out;
  std::size_t lineno = 0;
  for (const auto& row : read_jsonl(in)) {
    ++lineno;
    Candidate c;
    try {
      c.example = row.at("example").get<std::size_t>();
      c.rank = row.value("rank", std::size_t{0});
      if (row.contains("ground_truth")) c.ground_truth = row.at("ground_truth").get<std::string>();
      c.query.text = row.at("query").get<std::string>();
      c.query.log_prob = row.at("log_prob").get<double>();
      c.query.token_probs = row.at("token_probs").get<std::vector<double>>();
      c.query.eos_prob = row.value("eos_prob", 1.0);
    } catch (const json::exception& e) {
      throw ParseError(lineno, 0, fmt::format("bad prediction record: {}", e.what()));
    }
    out.push_back(std::move(c));
  }
  return out;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  for (auto part : split(s, ',')) {
    if (!part.empty()) out.emplace_back(part);
  }
  return out;
}

Config load_config(const std::string& path) { return path.empty() ? Config{} : Config::load(path); }

/// Prompt template and instruction text, overridable with the `template` / `instruction` keys
/// (backslash escapes allowed so the template can span lines).
struct PromptSettings {
  std::string tmpl{kDefaultTemplate};
  std::string instruction{kDefaultInstruction};

  static PromptSettings from(const Config& cfg) {
    PromptSettings p;
    for (auto [key, target] : {std::pair{"template", &p.tmpl}, std::pair{"instruction", &p.instruction}}) {
      if (!cfg.contains(key)) continue;
      auto v = unescape_field(cfg.get_string(key, ""));
      if (!v) throw InvalidArgument(fmt::format("config key '{}' has a bad escape sequence", key));
      *target = std::move(*v);
    }
    return p;
  }
  std::string render(std::string_view caption, std::string_view ocr) const {
    return render_prompt(caption, ocr, tmpl, instruction);
  }
};

std::optional<Date> config_date(const Config& cfg, const char* key) {
  if (!cfg.contains(key)) return std::nullopt;
  const auto d = parse_date(cfg.get_string(key, ""));
  if (!d) throw InvalidArgument(fmt::format("config key '{}' is not a YYYY-MM-DD date", key));
  return d;
}

// ---------------------------------------------------------------------------------------------
// commands

struct Options {
  std::string input;
  std::string output;
  std::string trie;
  std::string checkpoint;
  std::string config;
  std::uint64_t seed = 0;
  std::optional<double> alpha;
  std::optional<std::string> nttp_variant;
  std::size_t beam_width = 5;
  std::size_t topk = 5;
  std::optional<double> theta_g;
  std::optional<double> theta_l;
  std::optional<int> window_days;
  bool no_trie = false;
  bool no_filter = false;
};

void cmd_ingest(const Options& o) {
  const auto cfg = load_config(o.config);
  const BigramJaccardScorer scorer;
  const auto records = with_input(o.input, [&](std::istream& in) { return read_log_tsv(in, &scorer); });

  CleaningConfig cc;
  cc.min_exposure = static_cast<std::uint64_t>(cfg.get_int("min_exposure", static_cast<long long>(cc.min_exposure)));
  cc.min_clicks = static_cast<std::uint64_t>(cfg.get_int("min_clicks", static_cast<long long>(cc.min_clicks)));
  cc.min_similarity = cfg.get_double("min_similarity", cc.min_similarity);
  cc.blocklist = split_list(cfg.get_string("blocklist", ""));
  const auto cleaned = clean(records, cc);
  const auto& kept = cleaned.kept;
  spdlog::info("ingest: kept {} of {} records (rejected exposure={} clicks={} similarity={} blocklist={})",
               kept.size(), records.size(), cleaned.rejected.exposure, cleaned.rejected.clicks,
               cleaned.rejected.similarity, cleaned.rejected.blocklist);
  if (kept.empty()) throw Error("ingest: no records survived cleaning");

  const auto train_fraction = cfg.get_double("train_fraction", 0.8);
  const auto train_count =
      static_cast<std::size_t>(cfg.get_int("train_count", static_cast<long long>(train_fraction * kept.size())));
  std::size_t holdout_default = train_count <= kept.size() ? kept.size() - train_count : 0;
  holdout_default -= holdout_default % 2;
  const auto holdout_count =
      static_cast<std::size_t>(cfg.get_int("holdout_count", static_cast<long long>(holdout_default)));
  const auto split = chronological_split(kept, train_count, holdout_count, o.seed);

  const int window = o.window_days.value_or(static_cast<int>(cfg.get_int("window_days", QueryTrie::kDefaultWindowDays)));
  Date today = std::chrono::floor<std::chrono::days>(kept.front().timestamp);
  for (const auto& r : kept) today = std::max(today, Date{std::chrono::floor<std::chrono::days>(r.timestamp)});
  today = config_date(cfg, "today").value_or(today);
  auto pool = build_query_pool(kept, today, window);
  if (const auto excl = cfg.get_string("exclude_file", ""); !excl.empty()) {
    std::set<std::string> excluded;
    with_input(excl, [&](std::istream& in) {
      std::string line;
      while (std::getline(in, line)) {
        if (!line.empty()) excluded.insert(line);
      }
      return 0;
    });
    pool = apply_exclusions(std::move(pool), excluded);
  }

  std::vector<std::string> corpus{PromptSettings::from(cfg).render("", "")};
  for (const auto& r : kept) {
    corpus.push_back(r.caption);
    corpus.push_back(r.ocr_cover);
    corpus.push_back(r.query);
  }
  const auto vocab = Vocabulary::build(corpus);

  const fs::path dir(o.output);
  fs::create_directories(dir);
  AtomicFile train(dir / "train.jsonl"), validation(dir / "validation.jsonl"), test(dir / "test.jsonl"),
      pool_file(dir / "pool.tsv"), vocab_file(dir / "vocab.txt"), report(dir / "ingest_report.tsv");
  write_dataset(train.stream(), split.train);
  write_dataset(validation.stream(), split.validation);
  write_dataset(test.stream(), split.test);
  write_query_entries(pool_file.stream(), window, pool);
  vocab.save(vocab_file.stream());
  report.stream() << "reason\tcount\n"
                  << "kept\t" << kept.size() << '\n'
                  << "exposure\t" << cleaned.rejected.exposure << '\n'
                  << "clicks\t" << cleaned.rejected.clicks << '\n'
                  << "similarity\t" << cleaned.rejected.similarity << '\n'
                  << "blocklist\t" << cleaned.rejected.blocklist << '\n';
  for (auto* f : {&train, &validation, &test, &pool_file, &vocab_file, &report}) f->commit();
  spdlog::info("ingest: train={} validation={} test={} pool={} vocab={}", split.train.size(), split.validation.size(),
               split.test.size(), pool.size(), vocab.size());
}

void cmd_build_trie(const Options& o) {
  const auto cfg = load_config(o.config);
  auto incoming = with_input(o.input, [](std::istream& in) { return read_query_entries(in); });
  std::vector<QueryEntry> entries;
  int window = incoming.window_days;
  if (!o.trie.empty()) {
    auto previous = with_input(o.trie, [](std::istream& in) { return read_query_entries(in); });
    window = previous.window_days;
    entries = std::move(previous.entries);
  }
  entries.insert(entries.end(), incoming.entries.begin(), incoming.entries.end());
  window = o.window_days.value_or(static_cast<int>(cfg.get_int("window_days", window)));
  if (entries.empty()) throw Error("build-trie: no queries to insert");

  std::vector<std::string> corpus;
  Date today = entries.front().last_seen;
  for (const auto& e : entries) {
    corpus.push_back(e.query);
    today = std::max(today, e.last_seen);
  }
  today = config_date(cfg, "today").value_or(today);
  const auto vocab = Vocabulary::build(corpus);
  const auto trie = build_trie(entries, vocab, window).evict_expired(today);

  AtomicFile out(o.output);
  save_snapshot(trie, vocab, out.stream());
  out.commit();
  spdlog::info("build-trie: {} queries, {} nodes, window={} days, today={}", trie.query_count(), trie.node_count(),
               window, format_date(today));
}

QueryTrie load_trie_file(const std::string& path, const Tokenizer& tokenizer) {
  return with_input(path, [&](std::istream& in) { return load_snapshot(in, tokenizer); });
}

void cmd_train(const Options& o) {
  const auto cfg = load_config(o.config);
  if (o.trie.empty()) throw Error("train: --trie is required");
  const auto rows = read_dataset(o.input);
  if (rows.empty()) throw Error("train: " + o.input + " has no examples");
  const auto pool = with_input(o.trie, [](std::istream& in) { return read_query_entries(in); });
  const auto prompts = PromptSettings::from(cfg);

  Vocabulary vocab;
  if (const auto path = cfg.get_string("vocab", ""); !path.empty()) {
    vocab = with_input(path, [](std::istream& in) { return Vocabulary::load(in); });
  } else {
    std::vector<std::string> corpus{prompts.render("", "")};
    for (const auto& r : rows) {
      corpus.push_back(r.caption);
      corpus.push_back(r.ocr_cover);
      corpus.push_back(r.query);
    }
    for (const auto& e : pool.entries) corpus.push_back(e.query);
    vocab = Vocabulary::build(corpus);
  }
  const auto trie = load_trie_file(o.trie, vocab);

  std::vector<TrainingExample> dataset;
  dataset.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    try {
      TrainingExample ex{{vocab.tokenize(prompts.render(rows[i].caption, rows[i].ocr_cover))},
                         vocab.tokenize(rows[i].query)};
      if (ex.target.empty()) throw InvalidArgument("empty query");
      ex.target.push_back(vocab.eos());
      dataset.push_back(std::move(ex));
    } catch (const InvalidArgument& e) {
      throw Error(fmt::format("{}: line {}: {}", o.input, i + 1, e.what()));
    }
  }

  LossSpec spec;
  spec.alpha = o.alpha.value_or(cfg.get_double("alpha", spec.alpha));
  spec.variant = parse_nttp_variant(o.nttp_variant.value_or(cfg.get_string("nttp_variant", "per-child")));
  spec.normalize_children = cfg.get_bool("normalize_children", spec.normalize_children);
  TrainConfig tc;
  tc.learning_rate = cfg.get_double("learning_rate", tc.learning_rate);
  tc.batch_size = static_cast<std::size_t>(cfg.get_int("batch_size", static_cast<long long>(tc.batch_size)));
  tc.epochs = static_cast<std::size_t>(cfg.get_int("epochs", static_cast<long long>(tc.epochs)));
  tc.seed = o.seed;
  const int dim = static_cast<int>(cfg.get_int("dim", 16));
  const int order = static_cast<int>(cfg.get_int("order", 3));
  const double init_scale = cfg.get_double("init_scale", 0.1);

  auto model = random_tiny_lm(vocab.symbol_count(), dim, order, o.seed, init_scale);
  const auto result = train_loop(std::move(model), dataset, trie, spec, tc);
  spdlog::info("train: {} examples, alpha={}, variant={}, loss {:.4f} -> {:.4f}", dataset.size(), spec.alpha,
               to_string(spec.variant), result.initial_loss, result.epoch_loss.back());

  AtomicFile ckpt(o.output), trace(o.output + ".loss.csv");
  save_checkpoint(ckpt.stream(), result.model, vocab);
  trace.stream() << "epoch,loss\n" << fmt::format("0,{}\n", result.initial_loss);
  for (std::size_t e = 0; e < result.epoch_loss.size(); ++e) {
    trace.stream() << fmt::format("{},{}\n", e + 1, result.epoch_loss[e]);
  }
  ckpt.commit();
  trace.commit();
}

void cmd_generate(const Options& o) {
  const auto cfg = load_config(o.config);
  if (o.checkpoint.empty()) throw Error("generate: --checkpoint is required");
  if (o.trie.empty() && !o.no_trie) throw Error("generate: --trie is required unless --no-trie is given");
  const auto ckpt = with_input(o.checkpoint, [](std::istream& in) { return load_checkpoint(in); });
  std::optional<QueryTrie> trie;
  if (!o.no_trie) trie = load_trie_file(o.trie, ckpt.vocab);
  const auto rows = read_dataset(o.input);

  DecodeOptions opts;
  opts.beam_width = o.beam_width;
  opts.k = o.topk;
  opts.max_len = static_cast<std::size_t>(cfg.get_int("max_len", static_cast<long long>(opts.max_len)));
  opts.renormalize = cfg.get_bool("renormalize", opts.renormalize);
  opts.length_penalty = cfg.get_double("length_penalty", opts.length_penalty);

  const auto prompts = PromptSettings::from(cfg);
  const TinyLmScorer scorer(ckpt.model);
  AtomicFile out(o.output);
  std::size_t written = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    std::size_t dropped = 0;
    const PromptContext prompt{ckpt.vocab.tokenize_lossy(prompts.render(rows[i].caption, rows[i].ocr_cover), &dropped)};
    if (dropped) spdlog::debug("generate: example {} dropped {} out-of-vocabulary characters", i, dropped);
    auto queries = trie ? constrained_beam(scorer, prompt, *trie, opts) : unconstrained_beam(scorer, prompt, opts);
    attach_text(queries, ckpt.vocab);
    for (std::size_t r = 0; r < queries.size(); ++r) {
      out.stream() << candidate_json({i, r, rows[i].query, queries[r]}).dump() << '\n';
      ++written;
    }
  }
  out.commit();
  spdlog::info("generate: {} candidates for {} examples ({})", written, rows.size(),
               trie ? "trie-constrained" : "unconstrained");
}

void cmd_filter(const Options& o) {
  const auto cfg = load_config(o.config);
  const auto candidates = with_input(o.input, [](std::istream& in) { return read_candidates(in); });
  FilterConfig fc;
  fc.theta_g = o.theta_g.value_or(cfg.get_double("theta_g", fc.theta_g));
  fc.theta_l = o.theta_l.value_or(cfg.get_double("theta_l", fc.theta_l));
  fc.include_eos = cfg.get_bool("include_eos", fc.include_eos);

  std::vector<ScoredQuery> queries;
  queries.reserve(candidates.size());
  for (const auto& c : candidates) queries.push_back(c.query);
  const auto result = apply_filter(queries, fc);

  AtomicFile survivors(o.output), report(o.output + ".report.tsv");
  report.stream() << "query\tf_g\tf_l\tverdict\n";
  std::size_t kept = 0;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const auto& r = result.reports[i];
    const bool pass = o.no_filter || r.passed_local;
    const char* verdict = pass ? "pass" : (r.passed_global ? "reject-local" : "reject-global");
    report.stream() << escape_field(r.query.text) << '\t' << fmt::format("{:.6f}\t{:.6f}", r.f_g, r.f_l) << '\t'
                    << verdict << '\n';
    if (pass) {
      survivors.stream() << candidate_json(candidates[i]).dump() << '\n';
      ++kept;
    }
  }
  survivors.commit();
  report.commit();
  spdlog::info("filter: {} of {} candidates kept (theta_g={}, theta_l={}{})", kept, candidates.size(), fc.theta_g,
               fc.theta_l, o.no_filter ? ", filter disabled" : "");
}

std::vector<EvalRecord> read_eval_records(std::istream& in) {
  const auto rows = read_jsonl(in);
  std::vector<EvalRecord> records;
  if (!rows.empty() && rows.front().contains("predictions")) {
    std::size_t lineno = 0;
    for (const auto& row : rows) {
      ++lineno;
      EvalRecord r;
      r.ground_truth = string_field(row, "query", lineno);
      try {
        r.predictions = row.at("predictions").get<std::vector<std::string>>();
      } catch (const json::exception&) {
        throw ParseError(lineno, 0, "`predictions` must be an array of strings");
      }
      records.push_back(std::move(r));
    }
    return records;
  }

  // generate/filter output: group candidates by example in file order
  std::map<std::size_t, std::size_t> slot;
  std::size_t lineno = 0;
  for (const auto& row : rows) {
    ++lineno;
    if (!row.contains("example")) throw ParseError(lineno, 0, "missing `example` field");
    const auto example = row.at("example").get<std::size_t>();
    const auto gt = string_field(row, "ground_truth", lineno);
    auto [it, fresh] = slot.try_emplace(example, records.size());
    if (fresh) records.push_back({gt, {}});
    records[it->second].predictions.push_back(string_field(row, "query", lineno));
  }
  return records;
}

void cmd_eval(const Options& o) {
  const auto cfg = load_config(o.config);
  const auto records = with_input(o.input, [](std::istream& in) { return read_eval_records(in); });
  std::vector<std::size_t> ks;
  for (const auto& k : split_list(cfg.get_string("ks", "1,5,10,20"))) {
    try {
      ks.push_back(static_cast<std::size_t>(std::stoul(k)));
    } catch (const std::exception&) {
      throw InvalidArgument("config key 'ks' must be a comma-separated list of integers");
    }
  }
  const auto summary = evaluate(records, ks);
  AtomicFile out(o.output);
  write_summary_tsv(out.stream(), summary);
  out.commit();
  for (std::size_t k : summary.ks) spdlog::info("eval: Edit@{} = {:.4f}", k, summary.edit_at.at(k));
}

void configure_logging(std::ostream& err) {
  auto sink = std::make_shared<spdlog::sinks::ostream_sink_mt>(err);
  auto logger = std::make_shared<spdlog::logger>("trieguide", sink);
  logger->set_pattern("[%l] %v");
  spdlog::level::level_enum level = spdlog::level::info;
  if (const char* env = std::getenv("GREAT_LOG_LEVEL")) {
    const std::string v(env);
    if (v == "error") level = spdlog::level::err;
    else if (v == "warn") level = spdlog::level::warn;
    else if (v == "info") level = spdlog::level::info;
    else if (v == "debug") level = spdlog::level::debug;
    else err << "warning: ignoring unknown GREAT_LOG_LEVEL '" << v << "'\n";
  }
  logger->set_level(level);
  spdlog::set_default_logger(logger);
}

}  // namespace

int run_cli(std::span<const std::string> args, std::ostream& out, std::ostream& err) {
  configure_logging(err);

  CLI::App app{"Trie-constrained query generation pipeline"};
  app.require_subcommand(1);
  Options o;

  auto add_io = [&](CLI::App* sub, bool output_required = true) {
    sub->add_option("--input", o.input, "Input file")->required();
    sub->add_option("--output", o.output, "Output path")->required(output_required);
    sub->add_option("--config", o.config, "key=value configuration file")->check(CLI::ExistingFile);
  };

  auto* ingest = app.add_subcommand("ingest", "Clean logs, split the dataset and emit the query pool");
  add_io(ingest);
  ingest->add_option("--seed", o.seed, "Split shuffle seed");
  ingest->add_option("--window-days", o.window_days, "Query pool time window in days")->check(CLI::PositiveNumber);

  auto* build = app.add_subcommand("build-trie", "Build (or update) a trie snapshot from a query pool");
  add_io(build);
  build->add_option("--trie", o.trie, "Existing snapshot to merge with the pool");
  build->add_option("--window-days", o.window_days, "Eviction window in days")->check(CLI::PositiveNumber);

  auto* train = app.add_subcommand("train", "Train the model with the trie auxiliary loss");
  add_io(train);
  train->add_option("--trie", o.trie, "Trie snapshot")->required();
  train->add_option("--seed", o.seed, "Initialization and shuffle seed");
  train->add_option("--alpha", o.alpha, "Weight of the trie auxiliary loss")->check(CLI::NonNegativeNumber);
  train->add_option("--nttp-variant", o.nttp_variant, "per-child or set-mass")
      ->check(CLI::IsMember({"per-child", "set-mass"}));

  auto* generate = app.add_subcommand("generate", "Generate ranked queries for each dataset row");
  add_io(generate);
  generate->add_option("--checkpoint", o.checkpoint, "Model checkpoint")->required();
  generate->add_option("--trie", o.trie, "Trie snapshot");
  generate->add_option("--beam-width", o.beam_width, "Beam width")->check(CLI::PositiveNumber);
  generate->add_option("--topk", o.topk, "Queries kept per row")->check(CLI::PositiveNumber);
  generate->add_flag("--no-trie", o.no_trie, "Decode over the full vocabulary");
  generate->add_option("--seed", o.seed, "Unused; accepted for a uniform command line");

  auto* filter = app.add_subcommand("filter", "Apply the global/local probability filter");
  add_io(filter);
  filter->add_option("--theta-g", o.theta_g, "Global (mean probability) threshold")->check(CLI::Range(0.0, 1.0));
  filter->add_option("--theta-l", o.theta_l, "Local (min probability) threshold")->check(CLI::Range(0.0, 1.0));
  filter->add_flag("--no-filter", o.no_filter, "Pass every candidate through");

  auto* eval = app.add_subcommand("eval", "Compute Edit@k against the ground truth");
  add_io(eval);

  std::vector<const char*> argv{"trieguide"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  const std::map<CLI::App*, std::function<void(const Options&)>> commands{
      {ingest, cmd_ingest}, {build, cmd_build_trie}, {train, cmd_train},
      {generate, cmd_generate}, {filter, cmd_filter}, {eval, cmd_eval}};
  CLI::App* chosen = app.get_subcommands().front();
  try {
    commands.at(chosen)(o);
  } catch (const std::exception& e) {
    err << "error: " << chosen->get_name() << ": " << e.what() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace trieguide
