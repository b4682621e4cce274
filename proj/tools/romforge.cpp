// romforge: reduced-order models for the parameterized 1-D inviscid
// Burgers problem.  Subcommands cover snapshot generation (fom), proper
// orthogonal decomposition (pod), autoencoder training (train), metric
// evaluation (eval), the Galerkin ROM (rom), and batch reconstruction
// (predict).  Every subcommand accepts --config FILE with `key = value`
// lines; command-line flags win over file values.

#include <algorithm>
#include <cstdio>
#include <exception>
#include <fstream>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "romforge/architectures.hpp"
#include "romforge/burgers.hpp"
#include "romforge/dataset.hpp"
#include "romforge/errors.hpp"
#include "romforge/evaluate.hpp"
#include "romforge/pod.hpp"
#include "romforge/train.hpp"

using namespace romforge;

namespace {

Centering centering_from_name(const std::string& name) {
  if (name == "none") return Centering::none;
  if (name == "trajectory_ic") return Centering::trajectory_ic;
  throw config_error("unknown centering: " + name);
}

void write_trajectory_csv(const Trajectory& traj, const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "wb");
  if (!f) throw io_error("cannot write " + path);
  std::fprintf(f, "t");
  for (std::size_t i = 0; i < traj.states.cols(); ++i)
    std::fprintf(f, ",x%zu", i);
  std::fprintf(f, "\n");
  for (std::size_t k = 0; k < traj.times.size(); ++k) {
    std::fprintf(f, "%.17g", traj.times[k]);
    for (std::size_t i = 0; i < traj.states.cols(); ++i)
      std::fprintf(f, ",%.17g", traj.states.at(k, i));
    std::fprintf(f, "\n");
  }
  if (std::fclose(f) != 0) throw io_error("error closing " + path);
}

void add_burgers_options(CLI::App* sub, BurgersConfig& cfg, bool with_mu) {
  sub->add_option("--a", cfg.a, "Left end of the domain")->capture_default_str();
  sub->add_option("--b", cfg.b, "Right end of the domain")->capture_default_str();
  sub->add_option("--nodes", cfg.n_nodes, "Number of grid nodes")
      ->capture_default_str();
  sub->add_option("--t-end", cfg.t_end, "Final time")->capture_default_str();
  sub->add_option("--dt", cfg.dt, "Time step")->capture_default_str();
  sub->add_option("--source-coeff", cfg.source_coeff, "Source amplitude")
      ->capture_default_str();
  if (with_mu) {
    sub->add_option("--mu1", cfg.mu1, "Inflow boundary value")
        ->capture_default_str();
    sub->add_option("--mu2", cfg.mu2, "Source exponent")->capture_default_str();
  }
}

struct FomOptions {
  BurgersConfig cfg;
  std::string out_train = "burgers_train.snp";
  std::string out_val = "burgers_val.snp";
  bool store_t0 = false;
};

int run_fom(const FomOptions& o) {
  SnapshotSet train = lattice_snapshots(true, o.cfg, o.store_t0);
  SnapshotSet val = lattice_snapshots(false, o.cfg, o.store_t0);
  write_snapshots(train, o.out_train);
  write_snapshots(val, o.out_val);
  std::printf("wrote %zu train samples to %s\n", train.n_samples(),
              o.out_train.c_str());
  std::printf("wrote %zu validation samples to %s\n", val.n_samples(),
              o.out_val.c_str());
  return 0;
}

struct PodOptions {
  std::string data;
  std::size_t n = 10;
  std::string centering = "none";
  std::string out = "basis.pod";
};

int run_pod(const PodOptions& o) {
  SnapshotSet set = read_snapshots(o.data);
  PodBasis basis = pod_fit(set, o.n, centering_from_name(o.centering));
  save_pod(basis, o.out);
  std::printf("fitted n=%zu basis from %zu samples (sigma1 %.6g), wrote %s\n",
              basis.n(), set.n_samples(), basis.singular_values[0],
              o.out.c_str());
  return 0;
}

struct TrainOptions {
  std::string data, val;
  std::string arch = "fcnn";
  std::string graph, init;
  std::size_t latent = 10;
  std::size_t depth = 4;
  std::size_t prediction_depth = 0;
  std::string mode = "joint";
  TrainConfig cfg;
  std::string out = "model.mdl";
  std::string history;
};

int run_train(const TrainOptions& o) {
  SnapshotSet train_set = read_snapshots(o.data);
  SnapshotSet val_set = read_snapshots(o.val);
  NormStats stats = fit_normalizer(train_set);
  SnapshotSet train_n = normalize(train_set, stats);
  SnapshotSet val_n = normalize(val_set, stats);

  RomNetworks nets;
  if (!o.init.empty()) {
    nets = load_model(o.init);
  } else {
    ArchitectureSpec spec;
    spec.kind = arch_from_name(o.arch);
    spec.latent = o.latent;
    spec.n_nodes = train_set.n_nodes();
    spec.n_features = train_set.n_features();
    spec.depth = o.depth;
    spec.prediction_depth = o.prediction_depth;
    spec.n_params = train_set.params.cols();
    if (spec.kind == ArchKind::gcnn)
      spec.graph = std::make_shared<Graph>(
          o.graph.empty() ? path_graph(spec.n_nodes) : read_graph(o.graph));
    nets = build_architecture(spec, o.cfg.seed);
  }

  TrainConfig cfg = o.cfg;
  cfg.mode = train_mode_from_name(o.mode);
  TrainReport report = train(nets, train_n, val_n, cfg);
  if (report.best_epoch > 0) save_model(nets, o.out);
  if (!o.history.empty()) write_history_csv(report, o.history);
  std::printf(
      "epochs %zu  best val %.8g (epoch %zu)  stop %s  median s/epoch %.3f\n",
      report.epochs, report.best_val, report.best_epoch,
      report.stopped_by.c_str(), report.median_epoch_seconds());
  if (report.stopped_by == "divergence") {
    std::fprintf(stderr, "training diverged%s\n",
                 report.best_epoch > 0 ? "; best checkpoint was saved" : "");
    return 4;
  }
  return 0;
}

struct EvalOptions {
  std::string data, train_data, model, pod;
  std::string task = "compression";
  std::string out = "metrics.csv";
  double time_per_epoch = -1.0;
  BurgersConfig burgers;
};

int run_eval(const EvalOptions& o) {
  if (o.model.empty() == o.pod.empty())
    throw config_error("eval: give exactly one of --model or --pod");
  SnapshotSet set = read_snapshots(o.data);
  EvalTask task = eval_task_from_name(o.task);
  Metrics m;
  if (!o.model.empty()) {
    if (o.train_data.empty())
      throw config_error("eval: --model requires --train-data for normalization");
    RomNetworks nets = load_model(o.model);
    NormStats stats = fit_normalizer(read_snapshots(o.train_data));
    m = evaluate_net(nets, set, stats, task);
  } else {
    PodBasis basis = load_pod(o.pod);
    if (task == EvalTask::compression) {
      m = evaluate_pod(basis, set);
    } else {
      BurgersConfig base = o.burgers;
      base.n_nodes = basis.state_len();
      m = evaluate_galerkin(basis, base, set);
    }
  }
  m.time_per_epoch_s = o.time_per_epoch;
  write_metrics_csv(m, o.out);
  std::printf("%s %s n=%zu  Rl1 %.4f%%  Rl2 %.4f%%  size %.3f kB\n",
              m.method.c_str(), m.task.c_str(), m.latent, m.rl1_pct, m.rl2_pct,
              double(m.model_bytes) / 1000.0);
  return 0;
}

struct RomOptions {
  std::string pod;
  BurgersConfig cfg;
  std::string out = "rom_trajectory.csv";
  std::size_t max_tensor_n = 64;
  std::size_t sample_every = 1;
};

int run_rom(const RomOptions& o) {
  PodBasis basis = load_pod(o.pod);
  BurgersConfig cfg = o.cfg;
  cfg.n_nodes = basis.state_len();
  BurgersGalerkinRom rom = build_galerkin(basis, cfg, o.max_tensor_n);
  Trajectory traj = galerkin_solve(rom, o.sample_every);
  write_trajectory_csv(traj, o.out);
  std::printf("integrated n=%zu ROM to t=%.6g, wrote %s\n", basis.n(),
              cfg.t_end, o.out.c_str());
  return 0;
}

struct PredictOptions {
  std::string model, data, train_data;
  std::string task = "prediction";
  std::string out = "reconstruction.csv";
};

int run_predict(const PredictOptions& o) {
  RomNetworks nets = load_model(o.model);
  SnapshotSet set = read_snapshots(o.data);
  NormStats stats = fit_normalizer(read_snapshots(o.train_data));
  SnapshotSet recon =
      reconstruct_net(nets, set, stats, eval_task_from_name(o.task));
  if (o.out.ends_with(".csv"))
    write_snapshots_csv(recon, o.out);
  else
    write_snapshots(recon, o.out);
  std::printf("reconstructed %zu samples, wrote %s\n", recon.n_samples(),
              o.out.c_str());
  return 0;
}

void enable_config(CLI::App* sub) {
  // The value is consumed in main() before parsing; the option is declared
  // here only so every subcommand's help lists it.
  static std::string sink;
  sub->add_option("--config", sink, "Read options from a key = value file");
}

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

// Expands `--config FILE` (key = value lines, # comments) into long options
// appended to the argument list.  Keys already present on the command line
// are skipped, so explicit flags always win over the file.
std::vector<std::string> expand_config_args(std::vector<std::string> args) {
  std::string path;
  std::vector<std::string> out;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config") {
      if (i + 1 == args.size())
        throw config_error("--config expects a file path");
      path = args[++i];
    } else if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
    } else {
      out.push_back(args[i]);
    }
  }
  if (path.empty()) return out;

  std::ifstream in(path);
  if (!in) throw io_error("cannot open config file: " + path);
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> extra;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    const std::string key = eq == std::string::npos ? "" : trim(line.substr(0, eq));
    if (key.empty())
      throw config_error(path + ":" + std::to_string(line_no) +
                         ": expected `key = value`");
    std::string value = trim(line.substr(eq + 1));
    if (value.size() >= 2 && (value.front() == '"' || value.front() == '\'') &&
        value.back() == value.front())
      value = value.substr(1, value.size() - 2);
    const std::string flag = "--" + key;
    bool overridden = false;
    for (const std::string& a : out)
      if (a == flag || a.rfind(flag + "=", 0) == 0) {
        overridden = true;
        break;
      }
    if (!overridden) extra.push_back(flag + "=" + value);
  }
  out.insert(out.end(), extra.begin(), extra.end());
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "reduced-order models for the parameterized 1-D Burgers problem"};
  app.require_subcommand(1);

  FomOptions fo;
  CLI::App* fom = app.add_subcommand("fom", "Generate full-order snapshots");
  add_burgers_options(fom, fo.cfg, false);
  fom->add_option("--out-train", fo.out_train, "Training snapshot file")
      ->capture_default_str();
  fom->add_option("--out-val", fo.out_val, "Validation snapshot file")
      ->capture_default_str();
  fom->add_flag("--store-t0", fo.store_t0, "Also store the initial state");
  enable_config(fom);

  PodOptions po;
  CLI::App* pod = app.add_subcommand("pod", "Fit a POD basis");
  pod->add_option("--data", po.data, "Snapshot file")->required();
  pod->add_option("--n", po.n, "Number of modes")->capture_default_str();
  pod->add_option("--centering", po.centering, "none | trajectory_ic")
      ->capture_default_str();
  pod->add_option("--out", po.out, "Basis output file")->capture_default_str();
  enable_config(pod);

  TrainOptions to;
  CLI::App* train = app.add_subcommand("train", "Train an autoencoder ROM");
  train->add_option("--data", to.data, "Training snapshot file")->required();
  train->add_option("--val", to.val, "Validation snapshot file")->required();
  train->add_option("--arch", to.arch, "fcnn | cnn | gcnn")
      ->capture_default_str();
  train->add_option("--graph", to.graph,
                    "Graph file for gcnn (default: path graph)");
  train->add_option("--init", to.init, "Warm-start from an existing model");
  train->add_option("--n", to.latent, "Latent dimension")->capture_default_str();
  train->add_option("--depth", to.depth, "Graph-conv layers per stack")
      ->capture_default_str();
  train->add_option("--prediction-depth", to.prediction_depth,
                    "Predictor layers (0 = default)")
      ->capture_default_str();
  train->add_option("--mode", to.mode, "joint | compression | predictor")
      ->capture_default_str();
  train->add_option("--lr", to.cfg.lr, "ADAM learning rate")
      ->capture_default_str();
  train->add_option("--batch", to.cfg.batch, "Batch size")
      ->capture_default_str();
  train->add_option("--early-stop", to.cfg.early_stop,
                    "Non-improving epochs before stopping")
      ->capture_default_str();
  train->add_option("--max-epochs", to.cfg.max_epochs, "Epoch cap")
      ->capture_default_str();
  train->add_option("--seed", to.cfg.seed, "Random seed")
      ->capture_default_str();
  train->add_option("--time-budget", to.cfg.time_budget_s,
                    "Wall-clock budget in seconds (0 = off)")
      ->capture_default_str();
  train->add_option("--out", to.out, "Model output file")
      ->capture_default_str();
  train->add_option("--history", to.history, "Per-epoch loss CSV");
  enable_config(train);

  EvalOptions eo;
  CLI::App* eval = app.add_subcommand("eval", "Compute reconstruction metrics");
  eval->add_option("--data", eo.data, "Snapshot file to evaluate on")
      ->required();
  eval->add_option("--model", eo.model, "Trained model file");
  eval->add_option("--pod", eo.pod, "POD basis file");
  eval->add_option("--train-data", eo.train_data,
                   "Training snapshots (normalization source for --model)");
  eval->add_option("--task", eo.task, "compression | prediction")
      ->capture_default_str();
  eval->add_option("--out", eo.out, "Metrics CSV path")->capture_default_str();
  eval->add_option("--time-per-epoch", eo.time_per_epoch,
                   "Seconds per epoch to stamp into the CSV (-1 = NA)")
      ->capture_default_str();
  add_burgers_options(eval, eo.burgers, false);
  enable_config(eval);

  RomOptions ro;
  CLI::App* rom = app.add_subcommand("rom", "Integrate the Galerkin ROM");
  rom->add_option("--pod", ro.pod, "POD basis file")->required();
  add_burgers_options(rom, ro.cfg, true);
  rom->add_option("--out", ro.out, "Trajectory CSV path")
      ->capture_default_str();
  rom->add_option("--max-tensor-n", ro.max_tensor_n,
                  "Materialize quadratic tensors up to this n")
      ->capture_default_str();
  rom->add_option("--sample-every", ro.sample_every, "Store every k-th step")
      ->capture_default_str();
  enable_config(rom);

  PredictOptions pr;
  CLI::App* predict =
      app.add_subcommand("predict", "Reconstruct states with a trained model");
  predict->add_option("--model", pr.model, "Trained model file")->required();
  predict->add_option("--data", pr.data, "Snapshot file")->required();
  predict->add_option("--train-data", pr.train_data,
                      "Training snapshots (normalization source)")
      ->required();
  predict->add_option("--task", pr.task, "compression | prediction")
      ->capture_default_str();
  predict->add_option("--out", pr.out, "Output file (.csv or snapshot)")
      ->capture_default_str();
  enable_config(predict);

  try {
    std::vector<std::string> args =
        expand_config_args(std::vector<std::string>(argv + 1, argv + argc));
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const config_error& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const io_error& e) {
    std::fprintf(stderr, "io error: %s\n", e.what());
    return 3;
  }

  try {
    if (fom->parsed()) return run_fom(fo);
    if (pod->parsed()) return run_pod(po);
    if (train->parsed()) return run_train(to);
    if (eval->parsed()) return run_eval(eo);
    if (rom->parsed()) return run_rom(ro);
    if (predict->parsed()) return run_predict(pr);
  } catch (const config_error& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const io_error& e) {
    std::fprintf(stderr, "io error: %s\n", e.what());
    return 3;
  } catch (const divergence_error& e) {
    std::fprintf(stderr, "divergence: %s\n", e.what());
    return 4;
  } catch (const convergence_error& e) {
    std::fprintf(stderr, "no convergence: %s\n", e.what());
    return 4;
  } catch (const shape_error& e) {
    std::fprintf(stderr, "shape error: %s\n", e.what());
    return 5;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 2;
}
