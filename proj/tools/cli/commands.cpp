#include "commands.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <limits>
#include <optional>
#include <regex>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "nnb/data.hpp"
#include "nnb/embeddings.hpp"
#include "nnb/errors.hpp"
#include "nnb/gaussian.hpp"
#include "nnb/neural.hpp"
#include "nnb/numeric_text.hpp"
#include "nnb/serialization.hpp"
#include "nnb/training.hpp"
#include "nnb/verification.hpp"

namespace nnb::cli {
namespace {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ModelKind {
  bool gaussian = false;
  std::size_t order = 0;
};

ModelKind resolve_model(const std::string& name, std::optional<std::size_t> order) {
  if (name == "gaussian-nb") {
    if (order) throw UsageError("--order does not apply to gaussian-nb");
    return {true, 0};
  }
  if (name == "neural-nb") {
    if (order && *order != 0) throw UsageError("neural-nb is the order-0 scorer; drop --order");
    return {false, 0};
  }
  if (name == "neural-pooled-mc") return {false, order.value_or(1)};
  static const std::regex suffixed(R"(neural-pooled-mc(?:\((\d+)\)|(\d+)))");
  std::smatch m;
  if (std::regex_match(name, m, suffixed)) {
    const std::size_t k = std::stoul(m[1].matched ? m[1].str() : m[2].str());
    if (order && *order != k) throw UsageError("--order disagrees with the model name " + name);
    return {false, k};
  }
  throw UsageError("unknown model kind '" + name +
                   "' (expected gaussian-nb, neural-nb, neural-pooled-mc or neural-pooled-mc(k))");
}

std::string utc_now() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream s;
  s << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return s.str();
}

struct TextOptions {
  std::string format = "jsonl";
  std::string text_field = "text";
  std::string label_field = "label";
  std::string oov = "skip";
  bool keep_case = false;

  void add_to(CLI::App& cmd) {
    cmd.add_option("--format", format, "Dataset format")
        ->check(CLI::IsMember({"jsonl", "csv", "tsv"}))
        ->capture_default_str();
    cmd.add_option("--text-field", text_field, "Text column or key")->capture_default_str();
    cmd.add_option("--label-field", label_field, "Label column or key")->capture_default_str();
    cmd.add_option("--oov", oov, "Out-of-vocabulary tokens: skip or zero")
        ->check(CLI::IsMember({"skip", "zero"}))
        ->capture_default_str();
    cmd.add_flag("--keep-case", keep_case, "Do not lowercase before lookup");
  }

  TokenizerConfig tokenizer() const { return {!keep_case, true}; }
  OovPolicy policy() const { return oov == "zero" ? OovPolicy::zero : OovPolicy::skip; }

  Json to_json() const {
    return Json{{"format", format},
                {"text_field", text_field},
                {"label_field", label_field},
                {"oov", oov},
                {"lowercase", !keep_case}};
  }
};

TextDataset read_texts(const std::string& path, const TextOptions& o) {
  return load_dataset(path, parse_dataset_format(o.format), o.text_field, o.label_field);
}

EmbeddedSequence embed_text(const std::string& text, const EmbeddingTable& table, const TextOptions& o) {
  const auto tokens = tokenize(text, o.tokenizer());
  return embed(tokens, table, o.policy());
}

std::vector<LabeledSequence> embed_dataset(const TextDataset& ds, const LabelSet& labels,
                                           const EmbeddingTable& table, const TextOptions& o) {
  std::vector<LabeledSequence> out;
  out.reserve(ds.examples.size());
  for (const auto& ex : ds.examples) out.push_back({embed_text(ex.text, table, o), labels.index_of(ex.label)});
  return out;
}

/// Any stored classifier that maps an embedded text to a prediction.
struct Classifier {
  std::string kind;
  LabelSet labels;
  std::optional<std::size_t> embed_dim;
  std::function<Prediction(const EmbeddedSequence&)> predict;
};

Classifier load_classifier(const std::string& path) {
  const std::string kind = read_model_kind(path);
  if (kind == "gaussian-nb") {
    auto stored = load_model(path, read_gaussian_nb);
    auto labels = stored.labels.value_or(LabelSet::numbered(stored.model.num_labels()));
    return {kind, std::move(labels), std::nullopt,
            [model = std::move(stored.model)](const EmbeddedSequence& s) { return gaussian_nb_predict(model, s); }};
  }
  if (kind == "neural-pooled-mc") {
    auto stored = load_model(path, read_scorer);
    auto labels = stored.labels.value_or(LabelSet::numbered(stored.model.num_labels()));
    const std::size_t dim = stored.model.embed_dim();
    return {kind, std::move(labels), dim,
            [scorer = std::move(stored.model)](const EmbeddedSequence& s) { return nnb::predict(scorer, s); }};
  }
  throw InvalidInput("model kind '" + kind + "' is not a text classifier");
}

EmbeddingTable load_table_for(const std::string& path, const Classifier& model) {
  auto table = load_embeddings(path);
  if (model.embed_dim && table.dim() != *model.embed_dim) {
    throw ShapeError("embedding dimension " + std::to_string(table.dim()) + " does not match the checkpoint (" +
                     std::to_string(*model.embed_dim) + ")");
  }
  return table;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path);
  if (!f) throw InvalidInput("cannot write " + path.string());
  f << text;
}

// ---------------------------------------------------------------- train

struct TrainArgs {
  std::string model;
  std::optional<std::size_t> order;
  std::string train_path, test_path, val_path, embeddings;
  std::string out_dir = "nnb-out";
  double val_fraction = 0.25;
  std::size_t hidden = kDefaultHiddenWidth;
  TrainConfig config;
  TextOptions text;
};

void add_train(CLI::App& app, TrainArgs& a) {
  auto* cmd = app.add_subcommand("train", "Train a classifier and write checkpoint, log, report and manifest");
  cmd->add_option("--model", a.model, "gaussian-nb, neural-nb, neural-pooled-mc or neural-pooled-mc(k)")
      ->required();
  cmd->add_option("--order", a.order, "Window order k for neural-pooled-mc (default 1)");
  cmd->add_option("--train", a.train_path, "Training set")->required()->check(CLI::ExistingFile);
  cmd->add_option("--test", a.test_path, "Test set; without it runs are scored on validation")
      ->check(CLI::ExistingFile);
  cmd->add_option("--val", a.val_path, "Explicit validation set instead of a split")->check(CLI::ExistingFile);
  cmd->add_option("--val-fraction", a.val_fraction, "Share of the training set held out for validation")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  cmd->add_option("--embeddings", a.embeddings, "word2vec-style text vectors")->required()->check(CLI::ExistingFile);
  cmd->add_option("--lr", a.config.learning_rate, "Adam learning rate")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_option("--batch", a.config.batch_size, "Mini-batch size")->check(CLI::PositiveNumber)->capture_default_str();
  cmd->add_option("--epochs", a.config.epochs, "Epochs per run")->check(CLI::PositiveNumber)->capture_default_str();
  cmd->add_option("--runs", a.config.runs, "Independent runs")->check(CLI::PositiveNumber)->capture_default_str();
  cmd->add_option("--seed", a.config.seed, "Base seed; run r uses seed + r")->capture_default_str();
  cmd->add_option("--hidden", a.hidden, "Hidden layer width")->check(CLI::PositiveNumber)->capture_default_str();
  cmd->add_flag("--eval-initial", a.config.evaluate_initial, "Also consider the untrained weights (epoch 0)");
  cmd->add_option("--out", a.out_dir, "Output directory")->capture_default_str();
  a.text.add_to(*cmd);
}

Json train_config_json(const TrainConfig& c) {
  return Json{{"learning_rate", c.learning_rate}, {"batch_size", c.batch_size}, {"epochs", c.epochs},
              {"runs", c.runs},  {"seed", c.seed},          {"beta1", c.beta1},
              {"beta2", c.beta2}, {"epsilon", c.epsilon},   {"evaluate_initial", c.evaluate_initial}};
}

int cmd_train(const TrainArgs& a, std::ostream& out) {
  const ModelKind kind = resolve_model(a.model, a.order);
  try {
    a.config.validate();
    if (!kind.gaussian) SplitPlan{a.val_fraction, a.config.seed}.validate();
  } catch (const InvalidInput& e) {
    throw UsageError(e.what());
  }
  const std::string started = utc_now();

  const auto table = load_embeddings(a.embeddings);
  const auto train_ds = read_texts(a.train_path, a.text);
  const auto labels = train_ds.label_set();
  std::optional<std::vector<LabeledSequence>> test_seqs;
  if (!a.test_path.empty()) test_seqs = embed_dataset(read_texts(a.test_path, a.text), labels, table, a.text);

  const fs::path dir(a.out_dir);
  fs::create_directories(dir);
  std::ofstream log(dir / "train_log.jsonl");
  if (!log) throw InvalidInput("cannot write " + (dir / "train_log.jsonl").string());

  EvalReport report;
  std::string metric;
  std::size_t best_run = 0;
  if (kind.gaussian) {
    // Deterministic fit: one run on the whole training file.
    const auto seqs = embed_dataset(train_ds, labels, table, a.text);
    const auto model = fit_gaussian_nb(seqs, labels);
    metric = test_seqs ? "test_error" : "train_error";
    report = summarize_runs({evaluate(model, test_seqs ? *test_seqs : seqs)});
    save_model(dir / "model.ckpt", model, labels);
  } else {
    TextDataset train_part, val_part;
    if (a.val_path.empty()) {
      std::tie(train_part, val_part) = split(train_ds, {a.val_fraction, a.config.seed});
    } else {
      train_part = train_ds;
      val_part = read_texts(a.val_path, a.text);
    }
    const auto train_seqs = embed_dataset(train_part, labels, table, a.text);
    const auto val_seqs = embed_dataset(val_part, labels, table, a.text);

    std::optional<PooledScorer> best;
    double best_val = std::numeric_limits<double>::infinity();
    std::size_t run = 0;
    report = multi_run(
        [&](std::uint64_t seed) {
          TrainConfig c = a.config;
          c.seed = seed;
          const auto initial = PooledScorer::create(kind.order, table.dim(), labels.size(), a.hidden, seed);
          const auto result = train(initial, train_seqs, val_seqs, c);
          double val_error = 0.0;
          for (const auto& entry : result.log) {
            log << epoch_log_line(entry, run) << '\n';
            if (entry.epoch == result.best_epoch) val_error = entry.validation_error;
          }
          if (val_error < best_val) {
            best_val = val_error;
            best = result.best;
            best_run = run;
          }
          ++run;
          return test_seqs ? evaluate(result.best, *test_seqs) : val_error;
        },
        a.config);
    metric = test_seqs ? "test_error" : "validation_error";
    save_model(dir / "model.ckpt", *best, labels);
  }

  Json report_json = Json::parse(report_to_json(report));
  report_json["metric"] = metric;
  write_text(dir / "report.json", report_json.dump(2) + "\n");

  Json manifest{{"tool", "nnb"},
                {"version", NNB_VERSION},
                {"command", "train"},
                {"model", a.model},
                {"kind", kind.gaussian ? "gaussian-nb" : "neural-pooled-mc"},
                {"order", kind.order},
                {"hidden", kind.gaussian ? 0 : a.hidden},
                {"train", fs::absolute(a.train_path).string()},
                {"test", a.test_path.empty() ? Json(nullptr) : Json(fs::absolute(a.test_path).string())},
                {"validation", a.val_path.empty() ? Json(nullptr) : Json(fs::absolute(a.val_path).string())},
                {"val_fraction", a.val_fraction},
                {"embeddings", fs::absolute(a.embeddings).string()},
                {"embedding_dim", table.dim()},
                {"labels", labels.names()},
                {"text", a.text.to_json()},
                {"train_config", train_config_json(a.config)},
                {"checkpoint_run", best_run},
                {"started", started},
                {"finished", utc_now()}};
  write_text(dir / "manifest.json", manifest.dump(2) + "\n");

  out << a.model << " (" << metric << "): mean " << format_double(report.mean) << " +/- "
      << format_double(report.half_width) << " over " << report.run_errors.size() << " run(s)\n";
  out << "wrote " << (dir / "model.ckpt").string() << '\n';
  return kExitOk;
}

// ------------------------------------------------------------- evaluate

struct EvaluateArgs {
  std::string checkpoint, test_path, embeddings, predictions;
  TextOptions text;
};

void add_evaluate(CLI::App& app, EvaluateArgs& a) {
  auto* cmd = app.add_subcommand("evaluate", "Error rate of a checkpoint on a labelled set");
  cmd->add_option("--checkpoint", a.checkpoint, "Model file")->required()->check(CLI::ExistingFile);
  cmd->add_option("--test", a.test_path, "Labelled set")->required()->check(CLI::ExistingFile);
  cmd->add_option("--embeddings", a.embeddings, "word2vec-style text vectors")->required()->check(CLI::ExistingFile);
  cmd->add_option("--predictions", a.predictions, "Also write one predicted label per line");
  a.text.add_to(*cmd);
}

int cmd_evaluate(const EvaluateArgs& a, std::ostream& out) {
  const auto model = load_classifier(a.checkpoint);
  const auto table = load_table_for(a.embeddings, model);
  const auto ds = read_texts(a.test_path, a.text);
  std::vector<std::size_t> predicted, truth;
  for (const auto& ex : ds.examples) {
    truth.push_back(model.labels.index_of(ex.label));
    predicted.push_back(model.predict(embed_text(ex.text, table, a.text)).label);
  }
  if (!a.predictions.empty()) {
    std::ostringstream lines;
    for (std::size_t p : predicted) lines << model.labels.name(p) << '\n';
    write_text(a.predictions, lines.str());
  }
  const double error = error_rate(predicted, truth);
  const auto wrong = static_cast<std::size_t>(std::llround(error * static_cast<double>(truth.size())));
  out << "error " << format_double(error) << " (" << wrong << "/" << truth.size() << ")\n";
  return kExitOk;
}

// -------------------------------------------------------------- predict

struct PredictArgs {
  std::string checkpoint, embeddings, input = "-";
  TextOptions text;
};

void add_predict(CLI::App& app, PredictArgs& a) {
  auto* cmd = app.add_subcommand("predict", "Label each input line; prints one JSON object per line");
  cmd->add_option("--checkpoint", a.checkpoint, "Model file")->required()->check(CLI::ExistingFile);
  cmd->add_option("--embeddings", a.embeddings, "word2vec-style text vectors")->required()->check(CLI::ExistingFile);
  cmd->add_option("--input", a.input, "One text per line; - reads standard input")->capture_default_str();
  a.text.add_to(*cmd);
}

int cmd_predict(const PredictArgs& a, std::istream& in, std::ostream& out) {
  const auto model = load_classifier(a.checkpoint);
  const auto table = load_table_for(a.embeddings, model);
  std::ifstream file;
  if (a.input != "-") {
    file.open(a.input);
    if (!file) throw UsageError("cannot open input " + a.input);
  }
  std::istream& src = a.input == "-" ? in : file;
  std::string line;
  while (std::getline(src, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto p = model.predict(embed_text(line, table, a.text));
    Json posterior = Json::object();
    for (std::size_t i = 0; i < model.labels.size(); ++i) posterior[model.labels.name(i)] = p.posterior[i];
    out << Json{{"label", model.labels.name(p.label)}, {"posterior", posterior}}.dump() << '\n';
  }
  return kExitOk;
}

// ------------------------------------------------------- verify-appendix

struct VerifyArgs {
  EquivalenceOptions options;
};

void add_verify(CLI::App& app, VerifyArgs& a) {
  auto* cmd = app.add_subcommand("verify-appendix",
                                 "Check the discriminative classifiers against their generative and joint-law forms");
  cmd->add_option("--trials", a.options.trials, "Random specs per check")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_option("--seed", a.options.seed, "Seed of the first trial")->capture_default_str();
  cmd->add_flag("--corrupt", a.options.corrupt_tables, "Perturb one posterior table per trial (must fail)");
}

int cmd_verify(const VerifyArgs& a, std::ostream& out) {
  const auto report = verify_discriminative_forms(a.options);
  for (const auto& check : report.checks) {
    out << check.name << ": " << check.trials << " trials, max deviation " << format_double(check.max_deviation);
    if (!check.failing_seeds.empty()) {
      out << ", failing seeds";
      for (std::size_t i = 0; i < check.failing_seeds.size() && i < 10; ++i) out << ' ' << check.failing_seeds[i];
      if (check.failing_seeds.size() > 10) out << " ...";
    }
    out << '\n';
  }
  out << (report.passed() ? "PASS" : "FAIL") << " (tolerance " << format_double(report.tolerance) << ")\n";
  return report.passed() ? kExitOk : kExitFailure;
}

// ---------------------------------------------------------------- synth

struct SynthArgs {
  int order = 1;
  std::size_t labels = 2, symbols = 4, count = 1000;
  std::size_t min_length = 5, max_length = 20;
  std::uint64_t seed = 0;
  std::optional<std::uint64_t> spec_seed;
  std::string out = "-", spec_out, vectors_out;
};

void add_synth(CLI::App& app, SynthArgs& a) {
  auto* cmd = app.add_subcommand("synth", "Sample labelled symbol sequences from a random pooled joint law");
  cmd->add_option("--order", a.order, "0, 1 or 2")->check(CLI::Range(0, 2))->capture_default_str();
  cmd->add_option("--labels", a.labels, "Number of classes")->check(CLI::Range(2, 1000))->capture_default_str();
  cmd->add_option("--symbols", a.symbols, "Alphabet size")->check(CLI::Range(1, 100000))->capture_default_str();
  cmd->add_option("--count", a.count, "Examples to draw")->capture_default_str();
  cmd->add_option("--min-length", a.min_length, "Shortest sequence")->check(CLI::PositiveNumber)->capture_default_str();
  cmd->add_option("--max-length", a.max_length, "Longest sequence")->check(CLI::PositiveNumber)->capture_default_str();
  cmd->add_option("--seed", a.seed, "Sampling seed")->capture_default_str();
  cmd->add_option("--spec-seed", a.spec_seed, "Seed of the random law (default: --seed)");
  cmd->add_option("--out", a.out, "jsonl output; - writes standard output")->capture_default_str();
  cmd->add_option("--spec-out", a.spec_out, "Also save the sampled law");
  cmd->add_option("--vectors-out", a.vectors_out, "Also write one-hot vectors for the symbols");
}

int cmd_synth(const SynthArgs& a, std::ostream& out) {
  if (a.min_length > a.max_length) throw UsageError("--min-length exceeds --max-length");
  const auto spec = random_joint_spec(a.order, a.labels, a.symbols, a.spec_seed.value_or(a.seed));
  const auto data = synth_generate(spec, a.count, {a.min_length, a.max_length}, a.seed);

  std::ostringstream lines;
  for (const auto& ex : data) {
    std::string text;
    for (std::size_t s : ex.symbols) text += (text.empty() ? "s" : " s") + std::to_string(s);
    lines << Json{{"text", text}, {"label", std::to_string(ex.label)}}.dump() << '\n';
  }
  if (a.out == "-") {
    out << lines.str();
  } else {
    write_text(a.out, lines.str());
  }
  if (!a.spec_out.empty()) save_model(a.spec_out, spec, LabelSet::numbered(a.labels));
  if (!a.vectors_out.empty()) {
    EmbeddingTable table(a.symbols);
    for (std::size_t s = 0; s < a.symbols; ++s) {
      Vector v(a.symbols, 0.0);
      v[s] = 1.0;
      table.insert("s" + std::to_string(s), v);
    }
    save_embeddings(a.vectors_out, table);
  }
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err) {
  CLI::App app{"Neural naive Bayes and pooled Markov chain classifiers", "nnb"};
  app.set_version_flag("--version", std::string(NNB_VERSION));
  app.set_config("--config", "", "TOML or INI file with one [section] per command; flags override it");
  app.require_subcommand(1);
  app.fallthrough();

  TrainArgs train_args;
  EvaluateArgs evaluate_args;
  PredictArgs predict_args;
  VerifyArgs verify_args;
  SynthArgs synth_args;
  add_train(app, train_args);
  add_evaluate(app, evaluate_args);
  add_predict(app, predict_args);
  add_verify(app, verify_args);
  add_synth(app, synth_args);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (app.got_subcommand("train")) return cmd_train(train_args, out);
    if (app.got_subcommand("evaluate")) return cmd_evaluate(evaluate_args, out);
    if (app.got_subcommand("predict")) return cmd_predict(predict_args, in, out);
    if (app.got_subcommand("verify-appendix")) return cmd_verify(verify_args, out);
    if (app.got_subcommand("synth")) return cmd_synth(synth_args, out);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace nnb::cli
