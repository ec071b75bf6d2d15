// strebm: generate synthetic mixtures, train the source-wise energy model,
// score recovered sources, or run all three experimental arms.
//
// Exit codes: 0 success, 1 usage error, 2 runtime error or divergence.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "strebm/checkpoint.hpp"
#include "strebm/errors.hpp"
#include "strebm/evaluation.hpp"
#include "strebm/pipeline.hpp"
#include "strebm/run_io.hpp"
#include "strebm/synthdata.hpp"
#include "strebm/trainer.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace strebm;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitRuntime = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string signal_csv(std::span<const double> t, const Matrix& values) {
  std::ostringstream out;
  write_signal_csv(out, t, values);
  return out.str();
}

Signal load_signal(const fs::path& path) {
  std::istringstream in(read_file(path));
  return read_signal_csv(in);
}

json match_json(const MatchReport& r) {
  json perm = json::array();
  for (std::size_t p : r.permutation) perm.push_back(p + 1);
  return {{"permutation", perm},
          {"per_pair_abs_corr", r.per_pair_abs_corr},
          {"mean_abs_corr", r.mean_abs_corr}};
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw std::runtime_error("cannot create " + dir.string());
}

// ---------------------------------------------------------------- generate

struct GenerateArgs {
  std::size_t T = 1000;
  std::size_t m = 3;
  std::string mixing = "linear";
  double noise_std = 0.0;
  std::uint64_t seed = 7;
  std::string out = ".";
};

void write_experiment(const Experiment& e, const fs::path& dir) {
  ensure_dir(dir);
  write_file_atomic(dir / "sources.csv", signal_csv(e.grid.values(), e.sources));
  write_file_atomic(dir / "observations.csv", signal_csv(e.grid.values(), e.observations));
  json mixing{{"kind", std::string(to_string(e.config.mixing))}};
  if (e.config.mixing == MixingKind::linear) mixing["A"] = matrix_to_json(e.mixing_matrix);
  else mixing["mlp"] = generator_to_json(e.mixing_mlp);
  write_file_atomic(dir / "mixing.json", mixing.dump(2) + "\n");
}

json experiment_json(const ExperimentConfig& c) {
  return {{"T", c.T},
          {"m", c.m},
          {"mixing", std::string(to_string(c.mixing))},
          {"noise_std", c.noise_std},
          {"seed", c.seed},
          {"mixing_hidden", c.mixing_hidden}};
}

int cmd_generate(const GenerateArgs& a) {
  if (a.T < 2) throw UsageError("--T must be at least 2 (observations are standardized)");
  if (a.m < 1) throw UsageError("--m must be at least 1");
  if (!(a.noise_std >= 0.0)) throw UsageError("--noise-std must be >= 0");
  ExperimentConfig cfg;
  cfg.T = a.T;
  cfg.m = a.m;
  cfg.mixing = parse_mixing_kind(a.mixing);
  cfg.noise_std = a.noise_std;
  cfg.seed = a.seed;
  const Experiment e = make_experiment(cfg);
  const fs::path dir(a.out);
  write_experiment(e, dir);
  const json ej = experiment_json(cfg);
  const json manifest{{"command", "generate"},
                      {"run_id", run_id(ej.dump())},
                      {"experiment", ej},
                      {"output_dir", dir.string()},
                      {"outputs", {"sources.csv", "observations.csv", "mixing.json"}}};
  write_file_atomic(dir / "manifest.json", manifest.dump(2) + "\n");
  std::cout << "wrote " << (dir / "observations.csv").string() << " (" << a.T << " x " << a.m
            << ")\n";
  return 0;
}

// ---------------------------------------------------------------- train

struct TrainArgs {
  std::string data;
  std::string truth;
  std::string config_file;
  std::string out = "run";
  std::string generator = "linear";
  double lambda_sep = 1.0;
  double lambda_gp = 0.0;
  double nu_y = 0.0;
  double lr = 0.0;
  std::size_t epochs = 0;
  std::uint64_t seed = 0;
  std::size_t hidden = 32;
  std::size_t monitor_every = 10;
  std::size_t log_every = 1;
};

int cmd_train(TrainArgs a, const CLI::App& sub) {
  auto given = [&](const char* flag) { return sub.count(flag) > 0; };

  TrainConfig config;
  if (!a.config_file.empty()) {
    json j;
    try {
      j = json::parse(read_file(a.config_file));
    } catch (const json::exception& e) {
      throw UsageError(std::string("--config: ") + e.what());
    }
    // A run manifest carries its config plus the options and inputs it ran with.
    if (j.contains("config") && j.contains("command")) {
      if (j.contains("options")) {
        const json& o = j["options"];
        if (!given("--monitor-every")) a.monitor_every = o.value("monitor_every", a.monitor_every);
        if (!given("--log-every")) a.log_every = o.value("log_every", a.log_every);
      }
      if (j.contains("data")) {
        const json& d = j["data"];
        if (a.data.empty() && d.contains("observations")) a.data = d["observations"].get<std::string>();
        if (a.truth.empty() && d.contains("truth") && !d["truth"].is_null())
          a.truth = d["truth"].get<std::string>();
      }
      j = j["config"];
    }
    config = config_from_json(j, config);
  }
  if (given("--generator")) config.generator.kind = parse_generator_kind(a.generator);
  if (given("--hidden")) config.generator.hidden = a.hidden;
  if (given("--lambda-sep")) config.lambda_sep = a.lambda_sep;
  if (given("--lambda-gp")) config.lambda_gp = a.lambda_gp;
  if (given("--nu-y")) config.nu_y = a.nu_y;
  if (given("--lr")) config.learning_rate = a.lr;
  if (given("--epochs")) config.epochs = a.epochs;
  if (given("--seed")) config.seed = a.seed;
  if (a.data.empty()) throw UsageError("--data is required");
  try {
    config.validate();
  } catch (const InvalidArgument& e) {
    throw UsageError(e.what());
  }

  const Signal data = load_signal(a.data);
  std::optional<Signal> truth;
  if (!a.truth.empty()) {
    truth = load_signal(a.truth);
    if (truth->values.rows() != data.values.rows() || truth->values.cols() != config.n_sources)
      throw InvalidArgument("--truth must have the same length as --data and one column per source");
  }

  const fs::path dir(a.out);
  ensure_dir(dir);
  const json cj = config_to_json(config);
  const json manifest{
      {"command", "train"},
      {"run_id", run_id(cj.dump())},
      {"config", cj},
      {"options", {{"monitor_every", a.monitor_every}, {"log_every", a.log_every}}},
      {"data",
       {{"observations", fs::absolute(a.data).string()},
        {"truth", truth ? json(fs::absolute(a.truth).string()) : json(nullptr)}}},
      {"output_dir", dir.string()},
      {"outputs", {"history.jsonl", "checkpoint.json", "recovered_sources.csv"}}};
  write_file_atomic(dir / "manifest.json", manifest.dump(2) + "\n");

  TrainState state = init_state(data.values.rows(), data.values.cols(), config);
  MonitorOptions monitor{truth ? &truth->values : nullptr, a.monitor_every};
  std::optional<std::string> failure;
  try {
    train_from(state, data.values, config, monitor);
  } catch (const TrainingDiverged& e) {
    failure = e.what();
  }
  write_file_atomic(dir / "history.jsonl", history_to_jsonl(state.history, a.log_every));
  write_file_atomic(dir / "checkpoint.json", write_checkpoint(config, state));
  write_file_atomic(dir / "recovered_sources.csv", signal_csv(data.t, state.S));
  if (failure) {
    std::cerr << "error: " << *failure << " (partial history written)\n";
    return kExitRuntime;
  }
  std::cout << "trained " << state.epoch << " epochs; ell =";
  for (double l : state.length_scales()) std::cout << ' ' << l;
  std::cout << '\n';
  if (truth) {
    const MatchReport r = permutation_match(state.S, truth->values);
    std::cout << "mean matched |corr| = " << format_double(r.mean_abs_corr) << '\n';
  }
  return 0;
}

// ---------------------------------------------------------------- eval

struct EvalArgs {
  std::string recovered;
  std::string truth;
  std::string out;
};

int cmd_eval(const EvalArgs& a) {
  const Signal rec = load_signal(a.recovered);
  const Signal ref = load_signal(a.truth);
  if (!rec.values.same_shape(ref.values))
    throw InvalidArgument("recovered and truth signals have different shapes");
  const json report = match_json(permutation_match(rec.values, ref.values));
  const fs::path out = a.out.empty() ? fs::path(a.recovered).parent_path() / "eval.json"
                                     : fs::path(a.out);
  write_file_atomic(out, report.dump(2) + "\n");
  std::cout << report.dump(2) << '\n';
  return 0;
}

// ---------------------------------------------------------------- demo

struct DemoArgs {
  bool quick = false;
  std::string out = "demo";
  std::uint64_t seed = 7;
  std::size_t T = 0;
  std::size_t epochs = 0;
  std::size_t monitor_every = 1;
};

int cmd_demo(const DemoArgs& a) {
  const std::size_t T = a.T ? a.T : (a.quick ? 400 : 1000);
  const std::size_t epochs = a.epochs ? a.epochs : (a.quick ? 1500 : 4000);
  const fs::path root(a.out);
  ensure_dir(root);
  std::vector<ArmResult> results;
  for (const ArmSpec& arm : default_arms()) {
    const ExperimentConfig data = arm_experiment_config(arm, T, a.seed);
    const TrainConfig config = arm_train_config(arm, epochs, a.seed);
    std::cout << "[" << arm.name << "] T=" << T << " epochs=" << epochs << std::flush;
    ArmResult r = run_arm(arm, data, config, a.monitor_every);
    const fs::path dir = root / arm.name;
    const Experiment e = make_experiment(data);
    write_experiment(e, dir);
    write_file_atomic(dir / "history.jsonl", history_to_jsonl(r.state.history));
    write_file_atomic(dir / "checkpoint.json", write_checkpoint(config, r.state));
    write_file_atomic(dir / "recovered_sources.csv", signal_csv(e.grid.values(), r.state.S));
    write_file_atomic(dir / "eval.json", match_json(*r.final_match).dump(2) + "\n");
    const json cj = config_to_json(config);
    const json manifest{{"command", "demo"},
                        {"arm", arm.name},
                        {"run_id", run_id(cj.dump() + experiment_json(data).dump())},
                        {"config", cj},
                        {"experiment", experiment_json(data)},
                        {"options", {{"monitor_every", a.monitor_every}, {"log_every", 1}}},
                        {"output_dir", dir.string()}};
    write_file_atomic(dir / "manifest.json", manifest.dump(2) + "\n");
    std::cout << "  corr=" << format_double(r.final_match->mean_abs_corr)
              << (r.divergence ? "  (diverged)" : "") << '\n';
    results.push_back(std::move(r));
  }
  const std::string table = summary_table_csv(results);
  write_file_atomic(root / "summary.csv", table);
  std::cout << '\n' << table;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Source-wise structured energy model for blind source separation"};
  app.require_subcommand(1);

  GenerateArgs gen;
  auto* g = app.add_subcommand("generate", "Write synthetic sources and standardized mixtures");
  g->add_option("--T", gen.T, "Number of samples")->capture_default_str();
  g->add_option("--m", gen.m, "Observed channels")->capture_default_str();
  g->add_option("--mixing", gen.mixing, "linear | nonlinear")
      ->check(CLI::IsMember({"linear", "nonlinear"}))
      ->capture_default_str();
  g->add_option("--noise-std", gen.noise_std, "Additive Gaussian noise")->capture_default_str();
  g->add_option("--seed", gen.seed, "Random seed")->capture_default_str();
  g->add_option("--out", gen.out, "Output directory")->capture_default_str();

  TrainArgs tr;
  auto* t = app.add_subcommand("train", "Fit latent sources to an observation file");
  t->add_option("--data", tr.data, "Observation CSV");
  t->add_option("--truth", tr.truth, "Ground-truth source CSV (monitoring only)");
  t->add_option("--config", tr.config_file, "Config JSON or a previous run manifest");
  t->add_option("--out", tr.out, "Output directory")->capture_default_str();
  t->add_option("--generator", tr.generator, "linear | mlp")
      ->check(CLI::IsMember({"linear", "mlp"}));
  t->add_option("--hidden", tr.hidden, "MLP hidden width");
  t->add_option("--lambda-sep", tr.lambda_sep, "Separation weight");
  t->add_option("--lambda-gp", tr.lambda_gp, "Structural energy weight");
  t->add_option("--nu-y", tr.nu_y, "Observation noise variance");
  t->add_option("--epochs", tr.epochs, "Number of full-batch epochs");
  t->add_option("--lr", tr.lr, "Adam learning rate");
  t->add_option("--seed", tr.seed, "Initialization seed");
  t->add_option("--monitor-every", tr.monitor_every, "Monitoring interval in epochs")
      ->capture_default_str();
  t->add_option("--log-every", tr.log_every, "Write every k-th epoch to history.jsonl")
      ->capture_default_str();

  EvalArgs ev;
  auto* e = app.add_subcommand("eval", "Permutation-matched correlation against ground truth");
  e->add_option("--recovered", ev.recovered, "Recovered source CSV")->required();
  e->add_option("--truth", ev.truth, "Ground-truth source CSV")->required();
  e->add_option("--out", ev.out, "Report path (default: eval.json beside --recovered)");

  DemoArgs dm;
  auto* d = app.add_subcommand("demo", "Run the three experimental arms end to end");
  d->add_flag("--quick", dm.quick, "T=400 and a shorter epoch budget");
  d->add_option("--out", dm.out, "Output directory")->capture_default_str();
  d->add_option("--seed", dm.seed, "Seed for data and initialization")->capture_default_str();
  d->add_option("--T", dm.T, "Override the number of samples");
  d->add_option("--epochs", dm.epochs, "Override the epoch budget");
  d->add_option("--monitor-every", dm.monitor_every, "Monitoring interval")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& err) {
    return app.exit(err);
  } catch (const CLI::ParseError& err) {
    app.exit(err);
    return kExitUsage;
  }

  try {
    if (g->parsed()) return cmd_generate(gen);
    if (t->parsed()) return cmd_train(tr, *t);
    if (e->parsed()) return cmd_eval(ev);
    if (d->parsed()) return cmd_demo(dm);
  } catch (const UsageError& err) {
    std::cerr << "usage error: " << err.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << '\n';
    return kExitRuntime;
  }
  return kExitUsage;
}
