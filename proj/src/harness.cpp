#include "flexact/harness.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <exception>
#include <filesystem>
#include <fstream>
#include <limits>
#include <mutex>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"

#include "flexact/svg.hpp"

namespace flexact {
namespace {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

constexpr std::array<const char*, kNumActivations> kSeriesColors = {
    "#d62728", "#1f77b4", "#2ca02c", "#ff7f0e", "#9467bd"};

std::string fmt_double(double v, const char* spec = "%.17g") {
  char buf[48];
  std::snprintf(buf, sizeof(buf), spec, v);
  return buf;
}

double predict_one(const Network& net, const Matrix& X, std::size_t row,
                   Activation kind) {
  double h = net.layer.b[0];
  for (std::size_t c = 0; c < net.layer.W.cols; ++c) {
    h += net.layer.W(0, c) * X(row, c);
  }
  return activation_value(kind, h, net.layer.leaky_slope);
}

std::string iso_now() {
  const std::time_t t = std::time(nullptr);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

void write_trace_csv(const TrainTrace& trace, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << "epoch,task_loss,kl_loss,total_loss,tau,"
         "p_relu,p_sigmoid,p_tanh,p_lrelu,p_identity\n";
  for (std::size_t e = 0; e < trace.size(); ++e) {
    const EpochRecord& r = trace[e];
    out << e << ',' << fmt_double(r.task_loss) << ',' << fmt_double(r.kl_loss)
        << ',' << fmt_double(r.total_loss) << ',' << fmt_double(r.tau);
    for (double p : r.p_soft) out << ',' << fmt_double(p);
    out << '\n';
  }
}

void write_record_json(const RunRecord& rec, const std::string& path) {
  ordered_json j;
  j["truth"] = std::string(activation_name(rec.truth));
  j["model"] = rec.model.name();
  j["seed"] = rec.seed;
  j["diverged"] = rec.diverged;
  if (rec.diverged) {
    j["diverged_epoch"] = rec.diverged_epoch;
  } else {
    j["test_mse"] = rec.test_mse;
    if (rec.model.routed) {
      j["selected"] = std::string(activation_name(rec.selected));
    }
  }
  j["epochs_run"] = rec.trace.size();
  j["seconds"] = rec.seconds;
  j["final"]["W"] = rec.final_net.layer.W.data;
  j["final"]["b"] = rec.final_net.layer.b.data;
  j["final"]["logits"] = rec.final_net.layer.logits;
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << j.dump(2) << '\n';
}

}  // namespace

ModelArm ModelArm::flex(double alpha) {
  ModelArm arm;
  arm.routed = true;
  arm.alpha = alpha;
  return arm;
}

ModelArm ModelArm::fixed(Activation kind) {
  ModelArm arm;
  arm.routed = false;
  arm.fixed_kind = kind;
  return arm;
}

std::string ModelArm::name() const {
  if (routed) return "flex_a" + fmt_double(alpha, "%g");
  return "fixed_" + std::string(activation_name(fixed_kind));
}

ExperimentSpec default_grid() {
  ExperimentSpec spec;
  spec.truths.assign(kCatalog.begin(), kCatalog.end());
  spec.models = {ModelArm::flex(0.3), ModelArm::flex(0.0)};
  for (Activation kind : kCatalog) spec.models.push_back(ModelArm::fixed(kind));
  spec.seeds = {0, 1, 2, 3, 4};
  return spec;
}

ExperimentSpec parse_cli(const std::vector<std::string>& args) {
  CLI::App app{"flexact: activation-routing experiments on synthetic regression"};
  app.set_config("--config", "", "flat key=value config file; CLI flags win");

  std::string truth_s;
  std::string model_s;
  double alpha = -1.0;
  ExperimentSpec spec = default_grid();

  app.add_option("--truth", truth_s,
                 "single ground-truth activation (relu|sigmoid|tanh|lrelu|identity); "
                 "default: all five");
  app.add_option("--model", model_s,
                 "single model arm: flex, or a fixed baseline by activation name; "
                 "default: all seven");
  app.add_option("--alpha", alpha, "KL weight for the flex arm")
      ->check(CLI::NonNegativeNumber);
  app.add_option("--lambda", spec.train.lambda, "pseudo-probability scaling")
      ->check(CLI::PositiveNumber);
  app.add_option("--tau-start", spec.train.tau_start, "initial temperature")
      ->check(CLI::PositiveNumber);
  app.add_option("--tau-end", spec.train.tau_end, "final temperature")
      ->check(CLI::PositiveNumber);
  app.add_option("--epochs", spec.train.epochs, "training epochs")
      ->check(CLI::PositiveNumber);
  app.add_option("--batch-size", spec.train.batch_size, "mini-batch size")
      ->check(CLI::PositiveNumber);
  app.add_option("--lr", spec.train.learning_rate, "learning rate")
      ->check(CLI::PositiveNumber);
  app.add_option("--seeds", spec.seeds, "run seeds")->delimiter(',');
  app.add_flag("--straight-through", spec.train.straight_through,
               "one-hot forward pass with soft-relaxation gradients");
  app.add_option("--out", spec.out_dir, "output directory");
  app.add_option("--jobs", spec.jobs, "concurrent grid cells (0 = all cores)");
  app.add_option("--samples", spec.data.n_samples,
                 "dataset size before the train/test split")
      ->check(CLI::PositiveNumber);
  app.add_option("--k", spec.data.scale, "target scale constant");
  app.add_flag("--export-data", spec.export_data,
               "also write each truth's dataset as CSV");

  // CLI11 wants the arguments reversed, program name stripped.
  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    throw CliHelp(app.help());
  } catch (const CLI::ParseError& e) {
    throw std::invalid_argument(e.what());
  }

  if (!truth_s.empty()) {
    const auto truth = parse_activation(truth_s);
    if (!truth) throw std::invalid_argument("unknown --truth value: " + truth_s);
    spec.truths = {*truth};
  }
  if (!model_s.empty()) {
    if (model_s == "flex") {
      spec.models = {ModelArm::flex(alpha >= 0.0 ? alpha : 0.3)};
    } else if (const auto kind = parse_activation(model_s)) {
      spec.models = {ModelArm::fixed(*kind)};
    } else {
      throw std::invalid_argument("unknown --model value: " + model_s);
    }
  } else if (alpha >= 0.0) {
    spec.models = {ModelArm::flex(alpha)};
    for (Activation kind : kCatalog) spec.models.push_back(ModelArm::fixed(kind));
  }
  if (spec.seeds.empty()) throw std::invalid_argument("--seeds must be non-empty");
  if (spec.train.tau_end > spec.train.tau_start) {
    throw std::invalid_argument("--tau-end must not exceed --tau-start");
  }
  return spec;
}

RunRecord run_cell(Activation truth, const ModelArm& model, std::uint64_t seed,
                   const ExperimentSpec& spec) {
  const auto t0 = std::chrono::steady_clock::now();

  RunRecord rec;
  rec.truth = truth;
  rec.model = model;
  rec.seed = seed;

  DatasetSpec ds = spec.data;
  ds.truth = truth;
  ds.seed = seed;
  const Dataset full = generate(ds);
  // Split stream decoupled from the generation stream.
  const auto [train_set, test_set] =
      split(full, spec.train_fraction, seed ^ 0x2545f4914f6cdd1dULL);

  TrainConfig cfg = spec.train;
  cfg.seed = seed;
  if (model.routed) cfg.alpha = model.alpha;

  Rng init(seed);
  Network net = make_network(ds.d_in,
                             model.routed ? ModelMode::kRouted : ModelMode::kFixed,
                             model.fixed_kind, init);
  try {
    rec.trace = train(net, train_set, cfg);
    rec.test_mse = evaluate(net, test_set);
    rec.selected = model.routed ? hard_select(net.layer) : model.fixed_kind;
  } catch (const DivergenceError& e) {
    rec.diverged = true;
    rec.diverged_epoch = e.epoch;
    rec.test_mse = std::numeric_limits<double>::quiet_NaN();
  }
  rec.final_net = net;
  rec.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rec;
}

void emit_trajectory_plot(const RunRecord& record, const std::string& path) {
  if (!record.model.routed) {
    throw std::invalid_argument(
        "emit_trajectory_plot: fixed-model record has no probabilities");
  }
  std::vector<svg::Series> series(kNumActivations);
  for (std::size_t j = 0; j < kNumActivations; ++j) {
    series[j].label = activation_name(kCatalog[j]);
    series[j].color = kSeriesColors[j];
    series[j].points.reserve(record.trace.size());
    for (std::size_t e = 0; e < record.trace.size(); ++e) {
      series[j].points.emplace_back(static_cast<double>(e),
                                    record.trace[e].p_soft[j]);
    }
  }
  svg::ChartSpec chart;
  chart.title = "selection probabilities, truth=" +
                std::string(activation_name(record.truth)) +
                " seed=" + std::to_string(record.seed);
  chart.x_label = "epoch";
  chart.y_label = "probability";
  svg::write_chart(path, chart, series);
}

void emit_fit_plot(const RunRecord& record, const Dataset& test,
                   std::size_t informative_index, const std::string& path) {
  const Activation kind = record.model.routed
                              ? record.selected
                              : record.model.fixed_kind;
  svg::Series truth_series{"true", "#1f77b4", {}, true};
  svg::Series pred_series{"predicted", "#d62728", {}, true};
  for (std::size_t i = 0; i < test.X.rows; ++i) {
    const double x1 = test.X(i, informative_index);
    truth_series.points.emplace_back(x1, test.y[i]);
    pred_series.points.emplace_back(x1,
                                    predict_one(record.final_net, test.X, i, kind));
  }
  svg::ChartSpec chart;
  chart.title = record.model.name() + " on truth=" +
                std::string(activation_name(record.truth));
  chart.x_label = "x1";
  chart.y_label = "y";
  svg::write_chart(path, chart, {truth_series, pred_series});
}

void write_summary_csv(const SummaryTable& table, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << "model";
  for (Activation truth : table.truths) out << ',' << activation_name(truth);
  out << '\n';
  for (std::size_t m = 0; m < table.models.size(); ++m) {
    out << table.models[m].name();
    for (std::size_t t = 0; t < table.truths.size(); ++t) {
      if (std::isnan(table.mean_mse[m][t])) {
        out << ",diverged";
      } else {
        out << ',' << fmt_double(table.mean_mse[m][t], "%.4f") << " ± "
            << fmt_double(table.std_mse[m][t], "%.4f");
      }
    }
    out << '\n';
  }
}

void write_summary_json(const SummaryTable& table, const std::string& path) {
  ordered_json j;
  for (std::size_t m = 0; m < table.models.size(); ++m) {
    ordered_json row;
    for (std::size_t t = 0; t < table.truths.size(); ++t) {
      ordered_json cell;
      cell["mean_mse"] = table.mean_mse[m][t];
      cell["std_mse"] = table.std_mse[m][t];
      if (table.models[m].routed) {
        cell["match_fraction"] = table.match_fraction[m][t];
      }
      cell["diverged"] = table.diverged_count[m][t];
      ordered_json per_seed = ordered_json::array();
      for (const RunRecord& rec : table.runs) {
        if (rec.model.name() != table.models[m].name() ||
            rec.truth != table.truths[t]) {
          continue;
        }
        ordered_json r;
        r["seed"] = rec.seed;
        r["test_mse"] = rec.test_mse;
        if (rec.model.routed && !rec.diverged) {
          r["selected"] = std::string(activation_name(rec.selected));
        }
        r["diverged"] = rec.diverged;
        per_seed.push_back(r);
      }
      cell["runs"] = per_seed;
      row[std::string(activation_name(table.truths[t]))] = cell;
    }
    j[table.models[m].name()] = row;
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << j.dump(2) << '\n';
}

SummaryTable run_grid(const ExperimentSpec& spec) {
  if (spec.truths.empty() || spec.models.empty() || spec.seeds.empty()) {
    throw std::invalid_argument("run_grid: empty grid");
  }
  const std::string started = iso_now();

  struct Cell {
    Activation truth;
    ModelArm model;
    std::uint64_t seed;
  };
  std::vector<Cell> cells;
  for (const ModelArm& model : spec.models) {
    for (Activation truth : spec.truths) {
      for (std::uint64_t seed : spec.seeds) {
        cells.push_back({truth, model, seed});
      }
    }
  }

  std::vector<RunRecord> results(cells.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;

  unsigned jobs = spec.jobs > 0 ? static_cast<unsigned>(spec.jobs)
                                : std::max(1u, std::thread::hardware_concurrency());
  jobs = std::min<unsigned>(jobs, static_cast<unsigned>(cells.size()));

  auto worker = [&] {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= cells.size()) return;
      try {
        results[i] = run_cell(cells[i].truth, cells[i].model, cells[i].seed, spec);
      } catch (...) {
        std::scoped_lock lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < jobs; ++w) pool.emplace_back(worker);
  for (std::thread& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);

  // All file output happens single-threaded after the merge.
  const fs::path out_dir(spec.out_dir);
  fs::create_directories(out_dir / "runs");
  for (const RunRecord& rec : results) {
    const fs::path run_dir =
        out_dir / "runs" /
        (std::string(activation_name(rec.truth)) + "_" + rec.model.name() + "_" +
         std::to_string(rec.seed));
    fs::create_directories(run_dir);
    write_trace_csv(rec.trace, (run_dir / "trace.csv").string());
    write_record_json(rec, (run_dir / "record.json").string());
    if (!rec.diverged) {
      if (rec.model.routed) {
        emit_trajectory_plot(rec, (run_dir / "trajectory.svg").string());
      }
      DatasetSpec ds = spec.data;
      ds.truth = rec.truth;
      ds.seed = rec.seed;
      const auto [train_set, test_set] =
          split(generate(ds), spec.train_fraction, rec.seed ^ 0x2545f4914f6cdd1dULL);
      emit_fit_plot(rec, test_set, ds.informative_index,
                    (run_dir / "fit.svg").string());
    }
  }
  if (spec.export_data) {
    for (Activation truth : spec.truths) {
      DatasetSpec ds = spec.data;
      ds.truth = truth;
      ds.seed = spec.seeds.front();
      write_csv(generate(ds),
                (out_dir / ("data_" + std::string(activation_name(truth)) + ".csv"))
                    .string());
    }
  }

  SummaryTable table;
  table.models = spec.models;
  table.truths = spec.truths;
  const std::size_t n_models = spec.models.size();
  const std::size_t n_truths = spec.truths.size();
  table.mean_mse.assign(n_models, std::vector<double>(n_truths, 0.0));
  table.std_mse.assign(n_models, std::vector<double>(n_truths, 0.0));
  table.match_fraction.assign(n_models, std::vector<double>(n_truths, -1.0));
  table.diverged_count.assign(n_models, std::vector<int>(n_truths, 0));

  for (std::size_t m = 0; m < n_models; ++m) {
    for (std::size_t t = 0; t < n_truths; ++t) {
      std::vector<double> mses;
      int matches = 0;
      int completed = 0;
      for (const RunRecord& rec : results) {
        if (rec.model.name() != spec.models[m].name() ||
            rec.truth != spec.truths[t]) {
          continue;
        }
        if (rec.diverged) {
          ++table.diverged_count[m][t];
          continue;
        }
        mses.push_back(rec.test_mse);
        ++completed;
        if (rec.selected == rec.truth) ++matches;
      }
      if (mses.empty()) {
        table.mean_mse[m][t] = std::numeric_limits<double>::quiet_NaN();
        table.std_mse[m][t] = std::numeric_limits<double>::quiet_NaN();
        continue;
      }
      double mean = 0.0;
      for (double v : mses) mean += v;
      mean /= static_cast<double>(mses.size());
      double var = 0.0;
      for (double v : mses) var += (v - mean) * (v - mean);
      var = mses.size() > 1 ? var / static_cast<double>(mses.size() - 1) : 0.0;
      table.mean_mse[m][t] = mean;
      table.std_mse[m][t] = std::sqrt(var);
      if (spec.models[m].routed) {
        table.match_fraction[m][t] =
            static_cast<double>(matches) / static_cast<double>(completed);
      }
    }
  }
  table.runs = std::move(results);

  write_summary_csv(table, (out_dir / "summary.csv").string());
  write_summary_json(table, (out_dir / "summary.json").string());

  ordered_json meta;
  meta["started"] = started;
  meta["finished"] = iso_now();
  meta["n_runs"] = cells.size();
  meta["jobs"] = jobs;
  std::ofstream meta_out(out_dir / "metadata.json");
  meta_out << meta.dump(2) << '\n';

  return table;
}

}  // namespace flexact
