// fraudseq command-line pipeline: synthetic data generation, temporal
// splitting, HMM training, feature computation, classifier training and
// PR-AUC evaluation, driven by an INI config file.

#include <CLI11.hpp>

#include <filesystem>
#include <functional>
#include <iostream>

#include "fraudseq/pipeline.hpp"
#include "fraudseq/serialize.hpp"

namespace fs = std::filesystem;
using namespace fraudseq;

namespace {

FeatureMatrix load_feature_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open feature matrix: " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error(path + ": empty file");
  auto header = split_csv_line(line);
  if (header.size() < 3 || header.front() != "tx_id" || header.back() != "label")
    throw std::runtime_error(path + ": feature CSV must be tx_id,<features...>,label");
  FeatureMatrix m;
  m.column_names.assign(header.begin() + 1, header.end() - 1);
  std::size_t row_index = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto fields = split_csv_line(line);
    if (fields.size() != header.size())
      throw std::runtime_error(path + ": ragged row at data line " +
                               std::to_string(row_index + 1));
    std::vector<double> row;
    row.reserve(m.column_names.size());
    for (std::size_t i = 1; i + 1 < fields.size(); ++i)
      row.push_back(parse_double(fields[i]));
    m.rows.push_back(std::move(row));
    m.labels.push_back(static_cast<int>(parse_int64(fields.back())));
    m.tx_indices.push_back(row_index++);
  }
  return m;
}

std::map<std::size_t, ModelBank> load_model_dir(const std::string& dir) {
  std::map<std::size_t, ModelBank> banks;
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const std::string name = entry.path().filename().string();
    if (name.rfind("hmm_", 0) == 0 && entry.path().extension() == ".txt")
      files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  for (const auto& path : files) {
    GaussianHmm hmm = load_hmm(path.string());
    auto p = perspective_from_name(hmm.perspective);
    if (!p) throw std::runtime_error(path.string() + ": unknown perspective metadata");
    const std::size_t w = hmm.window;
    banks[w][static_cast<std::size_t>(perspective_index(*p))] = std::move(hmm);
  }
  if (banks.empty()) throw std::runtime_error("no hmm_*.txt models found in " + dir);
  for (auto& [w, bank] : banks)
    for (const auto& hmm : bank)
      if (hmm.n_states == 0)
        throw std::runtime_error("model directory " + dir +
                                 " is missing perspectives for window " +
                                 std::to_string(w));
  return banks;
}

int run_guarded(const char* stage, const std::function<void()>& body) {
  try {
    body();
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error [" << stage << "]: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-perspective HMM feature engineering for transaction fraud detection"};
  app.require_subcommand(1);

  std::string config_path, out_path, in_path, models_path, data_path;
  std::string model_path, train_path, val_path, test_path, family = "rf";
  std::int64_t seed_override = -1;
  bool use_grid = false;

  auto add_config = [&](CLI::App* cmd, bool required = true) {
    auto* opt = cmd->add_option("--config", config_path, "INI config file");
    if (required) opt->required();
  };

  auto* gen = app.add_subcommand("generate", "generate a synthetic transaction CSV");
  add_config(gen);
  gen->add_option("--out", out_path, "output CSV path")->required();
  gen->add_option("--seed", seed_override, "override generator seed");

  auto* split_cmd = app.add_subcommand("split", "partition transactions temporally");
  add_config(split_cmd);
  split_cmd->add_option("--in", in_path, "input transaction CSV")->required();
  split_cmd->add_option("--out", out_path, "output directory")->required();

  auto* hmms = app.add_subcommand("train-hmms", "train the 8 perspective HMMs per window");
  add_config(hmms);
  hmms->add_option("--in", in_path, "training-period transaction CSV")->required();
  hmms->add_option("--out", out_path, "model output directory")->required();

  auto* feat = app.add_subcommand("featurize", "compute feature matrices");
  add_config(feat);
  feat->add_option("--data", data_path, "full transaction CSV (history source)")->required();
  feat->add_option("--models", models_path, "HMM model directory")->required();
  feat->add_option("--out", out_path, "output directory")->required();

  auto* train_cmd = app.add_subcommand("train", "train a classifier on a feature matrix");
  add_config(train_cmd, false);
  train_cmd->add_option("--train", train_path, "training feature CSV")->required();
  train_cmd->add_option("--validation", val_path, "validation feature CSV (for --grid)");
  train_cmd->add_option("--out", model_path, "model output file")->required();
  train_cmd->add_option("--family", family, "rf | logreg | adaboost");
  train_cmd->add_option("--seed", seed_override, "classifier seed");
  train_cmd->add_flag("--grid", use_grid, "grid-search the reference hyperparameter grid");

  auto* eval_cmd = app.add_subcommand("evaluate", "score a feature matrix with a model");
  eval_cmd->add_option("--model", model_path, "model file")->required();
  eval_cmd->add_option("--test", test_path, "test feature CSV")->required();
  eval_cmd->add_option("--out", out_path, "PR curve CSV output");

  auto* sweep_cmd = app.add_subcommand("sweep", "window x hidden-states sweep");
  add_config(sweep_cmd);
  sweep_cmd->add_option("--out", out_path, "output directory");

  auto* report_cmd = app.add_subcommand("report", "render the comparison table");
  report_cmd->add_option("--in", in_path, "pipeline output directory")->required();

  auto* run_cmd = app.add_subcommand("run", "execute the full pipeline");
  add_config(run_cmd);
  run_cmd->add_option("--out", out_path, "override output directory");

  CLI11_PARSE(app, argc, argv);

  if (gen->parsed()) {
    return run_guarded("generate", [&] {
      GeneratorConfig g = generator_from_ini(IniConfig::parse_file(config_path));
      if (seed_override >= 0) g.seed = static_cast<std::uint64_t>(seed_override);
      save_transactions(out_path, generate(g));
      std::cout << "wrote " << out_path << '\n';
    });
  }
  if (split_cmd->parsed()) {
    return run_guarded("split", [&] {
      PipelineConfig cfg = pipeline_from_ini(IniConfig::parse_file(config_path));
      auto txs = load_transactions(in_path);
      Partition p = partition(txs, cfg.split);
      fs::create_directories(out_path);
      save_transactions(out_path + "/train.csv", p.train);
      save_transactions(out_path + "/validation.csv", p.validation);
      save_transactions(out_path + "/gap.csv", p.gap);
      save_transactions(out_path + "/test.csv", p.test);
      std::cout << "train " << p.train.size() << ", validation " << p.validation.size()
                << ", gap " << p.gap.size() << ", test " << p.test.size() << ", dropped "
                << p.dropped << '\n';
      for (const auto& w : p.warnings) std::cerr << "warning: " << w << '\n';
    });
  }
  if (hmms->parsed()) {
    return run_guarded("train-hmms", [&] {
      PipelineConfig cfg = pipeline_from_ini(IniConfig::parse_file(config_path));
      auto train_txs = load_transactions(in_path);
      const auto card_seqs = group_by_actor(train_txs, ActorKind::card_holder);
      const auto term_seqs = group_by_actor(train_txs, ActorKind::terminal);
      fs::create_directories(out_path);
      for (std::size_t w : cfg.windows) {
        const auto corpora = build_corpora(card_seqs, term_seqs, w);
        ModelBank bank = train_model_bank(corpora, cfg.hmm, cfg.hmm.n_states, w);
        for (std::size_t i = 0; i < 8; ++i) {
          const std::string file = out_path + "/hmm_" +
                                   perspective_name(corpora[i].perspective) + "_w" +
                                   std::to_string(w) + "_K" +
                                   std::to_string(cfg.hmm.n_states) + ".txt";
          save_hmm(file, bank[i]);
          std::cout << "wrote " << file << '\n';
        }
      }
    });
  }
  if (feat->parsed()) {
    return run_guarded("featurize", [&] {
      PipelineConfig cfg = pipeline_from_ini(IniConfig::parse_file(config_path));
      cfg.data_path = data_path;
      PreparedData d = prepare_data(cfg);
      auto banks = load_model_dir(models_path);
      if (!banks.count(cfg.feature_window))
        throw std::runtime_error("no models for experiment window " +
                                 std::to_string(cfg.feature_window));
      FeaturizedData f = featurize_all(d, banks);
      fs::create_directories(out_path);
      const MissingStrategy st = cfg.strategy == MissingStrategy::exclude
                                     ? MissingStrategy::exclude
                                     : MissingStrategy::default0;
      for (const std::string& set_name : cfg.feature_sets) {
        for (int pass = 0; pass < (cfg.compare_hmm ? 2 : 1); ++pass) {
          const FeatureSetSpec spec =
              parse_feature_set(pass ? set_name + "+HMM" : set_name);
          auto emit = [&](const char* tag, const std::vector<Transaction>& subset,
                          const std::vector<TxFeatureRecord>& records) {
            const std::string file = out_path + "/" + spec.name + "_w" +
                                     std::to_string(cfg.feature_window) + "_" + tag +
                                     ".csv";
            write_feature_csv(file,
                              assemble(subset, records, f.encoders, spec, st,
                                       cfg.feature_window),
                              subset);
            std::cout << "wrote " << file << '\n';
          };
          emit("train", d.part.train, f.train);
          emit("validation", d.part.validation, f.validation);
          emit("test", d.part.test, f.test);
        }
      }
    });
  }
  if (train_cmd->parsed()) {
    return run_guarded("train", [&] {
      FeatureMatrix train_m = load_feature_csv(train_path);
      FeatureMatrix val_m = val_path.empty() ? train_m : load_feature_csv(val_path);
      ClassifierConfig cc;
      if (!config_path.empty()) {
        PipelineConfig cfg = pipeline_from_ini(IniConfig::parse_file(config_path));
        cc = cfg.classifier;
      }
      cc.family = family;
      cc.use_reference_grid = use_grid;
      const std::uint64_t seed = seed_override >= 0 ? static_cast<std::uint64_t>(seed_override) : 1;
      ScoredRun run = train_and_score(cc, train_m, val_m, train_m, seed);
      std::cout << "params: " << run.params_description
                << "\ntrain PR-AUC: " << run.test_auc << '\n';
      if (!run.grid_csv.empty()) {
        std::ofstream grid(model_path + ".grid.csv");
        grid << run.grid_csv;
      }
      // refit the chosen cell and persist the model
      const Dataset ds = Dataset::from_matrix(train_m);
      if (family == "rf") {
        RfParams p = cc.rf;
        p.seed = seed;
        if (p.n_features_per_split > ds.d()) p.n_features_per_split = ds.d();
        RandomForest m;
        m.fit(ds, p);
        save_forest(model_path, m);
      } else if (family == "adaboost") {
        AdaParams p = cc.ada;
        p.seed = seed;
        AdaBoost m;
        m.fit(ds, p);
        save_adaboost(model_path, m, p);
      } else if (family == "logreg") {
        LogisticRegression m;
        m.fit(ds, cc.lr);
        save_logreg(model_path, m);
      } else {
        throw std::runtime_error("unknown classifier family: " + family);
      }
      std::cout << "wrote " << model_path << '\n';
    });
  }
  if (eval_cmd->parsed()) {
    return run_guarded("evaluate", [&] {
      FeatureMatrix test_m = load_feature_csv(test_path);
      const Dataset ds = Dataset::from_matrix(test_m);
      std::ifstream probe(model_path);
      std::string magic;
      probe >> magic;
      probe.close();
      std::vector<double> scores;
      if (magic == "fraudseq-rf")
        scores = load_forest(model_path).predict_proba_all(ds);
      else if (magic == "fraudseq-ada")
        scores = load_adaboost(model_path).predict_proba_all(ds);
      else if (magic == "fraudseq-logreg")
        scores = load_logreg(model_path).predict_proba_all(ds);
      else
        throw std::runtime_error(model_path + ": unrecognized model file");
      PrCurve curve = pr_curve(scores, test_m.labels);
      std::cout << "test PR-AUC: " << curve.auc << " (prevalence "
                << curve.prevalence << ", " << test_m.labels.size() << " rows)\n";
      if (!out_path.empty()) {
        save_pr_curve(out_path, curve);
        std::cout << "wrote " << out_path << '\n';
      }
    });
  }
  if (sweep_cmd->parsed()) {
    return run_guarded("sweep", [&] {
      IniConfig ini = IniConfig::parse_file(config_path);
      PipelineConfig cfg = pipeline_from_ini(ini);
      if (!out_path.empty()) cfg.out_dir = out_path;
      PreparedData d = prepare_data(cfg);
      SweepResult sr = run_sweep(cfg, d);
      fs::create_directories(cfg.out_dir + "/reports");
      save_sweep(cfg.out_dir + "/reports/sweep.csv", cfg.out_dir + "/reports/sweep.txt",
                 sr);
      std::ifstream txt(cfg.out_dir + "/reports/sweep.txt");
      std::cout << txt.rdbuf();
    });
  }
  if (report_cmd->parsed()) {
    return run_guarded("report", [&] {
      std::ifstream txt(in_path + "/reports/comparison.txt");
      if (!txt)
        throw std::runtime_error("no comparison table under " + in_path +
                                 " (run the pipeline first)");
      std::cout << txt.rdbuf();
    });
  }
  if (run_cmd->parsed()) {
    return run_guarded("run", [&] {
      IniConfig ini = IniConfig::parse_file(config_path);
      PipelineArtifacts artifacts = run_pipeline(ini, out_path);
      std::cout << "artifacts under " << artifacts.out_dir << '\n';
      if (!artifacts.experiment.comparison.empty())
        std::cout << render_comparison_text(artifacts.experiment.comparison);
    });
  }
  return 0;
}
