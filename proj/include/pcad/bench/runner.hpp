// Benchmark orchestration: runs (method, category) tasks, evaluates, and
// emits CSV/Markdown tables, per-sample score dumps, and a run manifest.
// All aggregation uses fixed orderings and files are written atomically
// (temp + rename), so identical configs and seeds reproduce every byte.
#pragma once

#include <atomic>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "pcad/bench/config.hpp"
#include "pcad/bench/methods.hpp"
#include "pcad/metrics/evaluate.hpp"

namespace pcad {

struct EvalCell {
  bool ok = false;
  std::string error;
  CategoryMetrics metrics;
  double seconds = 0.0;
};

struct EvalReport {
  std::vector<std::string> methods;
  std::vector<std::string> categories;
  std::vector<std::vector<EvalCell>> cells;  // [method][category]

  /// Arithmetic mean over categories with successful cells.
  CategoryMetrics average(std::size_t method_idx) const {
    CategoryMetrics avg;
    std::size_t n = 0;
    for (const EvalCell& cell : cells[method_idx]) {
      if (!cell.ok) continue;
      avg.o_auroc += cell.metrics.o_auroc;
      avg.o_aupr += cell.metrics.o_aupr;
      avg.p_auroc += cell.metrics.p_auroc;
      avg.p_aupr += cell.metrics.p_aupr;
      ++n;
    }
    if (n > 0) {
      avg.o_auroc /= n;
      avg.o_aupr /= n;
      avg.p_auroc /= n;
      avg.p_aupr /= n;
    }
    return avg;
  }

  bool all_ok() const {
    for (const auto& row : cells)
      for (const EvalCell& c : row)
        if (!c.ok) return false;
    return true;
  }
};

namespace detail {

inline void atomic_write(const std::filesystem::path& path, const std::string& contents) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw IoError("atomic_write: cannot open " + tmp.string());
    out << contents;
    if (!out) throw IoError("atomic_write: write failure on " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

inline std::string format_metric(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

inline double metric_of(const CategoryMetrics& m, int which) {
  switch (which) {
    case 0: return m.o_auroc;
    case 1: return m.o_aupr;
    case 2: return m.p_auroc;
    default: return m.p_aupr;
  }
}

inline const char* metric_name(int which) {
  switch (which) {
    case 0: return "o_auroc";
    case 1: return "o_aupr";
    case 2: return "p_auroc";
    default: return "p_aupr";
  }
}

}  // namespace detail

/// One CSV per metric: rows are categories plus an Average row, columns are
/// methods. Failed cells render as "nan".
inline std::string render_csv(const EvalReport& report, int which_metric) {
  std::string out = "category";
  for (const std::string& m : report.methods) out += "," + m;
  out += "\n";
  for (std::size_t c = 0; c < report.categories.size(); ++c) {
    out += report.categories[c];
    for (std::size_t m = 0; m < report.methods.size(); ++m) {
      const EvalCell& cell = report.cells[m][c];
      out += ",";
      out += cell.ok ? detail::format_metric(detail::metric_of(cell.metrics, which_metric)) : "nan";
    }
    out += "\n";
  }
  out += "Average";
  for (std::size_t m = 0; m < report.methods.size(); ++m)
    out += "," + detail::format_metric(detail::metric_of(report.average(m), which_metric));
  out += "\n";
  return out;
}

inline std::string render_markdown(const EvalReport& report) {
  std::string out;
  for (int metric = 0; metric < 4; ++metric) {
    out += std::string("## ") + detail::metric_name(metric) + "\n\n";
    out += "| Category |";
    for (const std::string& m : report.methods) out += " " + m + " |";
    out += "\n|---|";
    for (std::size_t m = 0; m < report.methods.size(); ++m) out += "---|";
    out += "\n";
    for (std::size_t c = 0; c < report.categories.size(); ++c) {
      out += "| " + report.categories[c] + " |";
      for (std::size_t m = 0; m < report.methods.size(); ++m) {
        const EvalCell& cell = report.cells[m][c];
        out += " " +
               (cell.ok ? detail::format_metric(detail::metric_of(cell.metrics, metric))
                        : std::string("nan")) +
               " |";
      }
      out += "\n";
    }
    out += "| **Average** |";
    for (std::size_t m = 0; m < report.methods.size(); ++m)
      out += " " + detail::format_metric(detail::metric_of(report.average(m), metric)) + " |";
    out += "\n\n";
  }
  return out;
}

/// Per-sample dump: "# object_score v", "# registration_failed 0|1", then
/// one "index score label" row per full-resolution point.
inline std::string render_score_dump(const SampleResult& sample,
                                     const std::vector<std::uint8_t>& labels) {
  std::string out;
  char buf[96];
  std::snprintf(buf, sizeof(buf), "# object_score %.17g\n", sample.object_score);
  out += buf;
  std::snprintf(buf, sizeof(buf), "# registration_failed %d\n", sample.registration_failed ? 1 : 0);
  out += buf;
  for (std::size_t i = 0; i < sample.full_scores.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%zu %.17g %d\n", i, sample.full_scores[i],
                  i < labels.size() ? int(labels[i]) : 0);
    out += buf;
  }
  return out;
}

struct BenchOutcome {
  EvalReport report;
  int exit_code = 0;  // 0 ok, 2 partial (failed cells)
};

inline EvalCell evaluate_method_on_category(MethodId method, const CategoryData& data,
                                            const MethodParams& params, std::uint64_t seed,
                                            const std::filesystem::path& dump_dir) {
  EvalCell cell;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    const std::vector<SampleResult> samples = run_method(method, data, params, seed);

    std::filesystem::create_directories(dump_dir);
    std::vector<double> object_scores;
    std::vector<std::uint8_t> object_labels;
    std::vector<std::vector<double>> point_scores;
    std::vector<std::vector<std::uint8_t>> point_labels;
    for (std::size_t t = 0; t < samples.size(); ++t) {
      object_scores.push_back(samples[t].object_score);
      object_labels.push_back(data.abnormal[t] ? 1 : 0);
      point_scores.push_back(samples[t].full_scores);
      point_labels.push_back(data.test_labels[t]);
      detail::atomic_write(dump_dir / (samples[t].name + ".txt"),
                           render_score_dump(samples[t], data.test_labels[t]));
    }
    cell.metrics = evaluate_category(object_scores, object_labels, point_scores, point_labels);
    cell.ok = true;
  } catch (const std::exception& e) {
    cell.ok = false;
    cell.error = e.what();
  }
  cell.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return cell;
}

/// Runs every configured method over every category, writes the four metric
/// tables (CSV + Markdown), per-sample score dumps, report.json, and
/// manifest.json under config.out_dir.
inline BenchOutcome run_benchmark(const BenchConfig& config) {
  namespace fs = std::filesystem;
  const DatasetIndex dataset = load_dataset(config.dataset_root);
  if (dataset.categories.empty()) throw Error("run_benchmark: dataset has no categories");
  fs::create_directories(config.out_dir);

  BenchOutcome outcome;
  EvalReport& report = outcome.report;
  for (const MethodId m : config.methods) report.methods.push_back(to_string(m));
  for (const CategoryEntry& c : dataset.categories) report.categories.push_back(c.name);
  report.cells.assign(report.methods.size(),
                      std::vector<EvalCell>(report.categories.size()));

  // Tasks are (method, category) pairs; category data is loaded once and
  // shared read-only across methods.
  std::vector<CategoryData> category_data(dataset.categories.size());
  for (std::size_t c = 0; c < dataset.categories.size(); ++c)
    category_data[c] = load_category(dataset.categories[c]);

  struct Task {
    std::size_t method_idx;
    std::size_t category_idx;
  };
  std::vector<Task> tasks;
  for (std::size_t m = 0; m < config.methods.size(); ++m)
    for (std::size_t c = 0; c < dataset.categories.size(); ++c) tasks.push_back({m, c});

  const int workers = std::max(1, config.parallelism);
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= tasks.size()) return;
      const Task task = tasks[i];
      const MethodId method = config.methods[task.method_idx];
      const CategoryData& data = category_data[task.category_idx];
      const MethodParams params = params_for_method(config, method);
      const std::uint64_t seed =
          derive_seed(config.seed, to_string(method) + "/" + data.name);
      const fs::path dump_dir = config.out_dir / "scores" / to_string(method) / data.name;
      report.cells[task.method_idx][task.category_idx] =
          evaluate_method_on_category(method, data, params, seed, dump_dir);
    }
  };
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }

  // Tables.
  for (int metric = 0; metric < 4; ++metric)
    detail::atomic_write(config.out_dir / ("report_" + std::string(detail::metric_name(metric)) +
                                           ".csv"),
                         render_csv(report, metric));
  detail::atomic_write(config.out_dir / "report.md", render_markdown(report));

  // Machine-readable report for `report` re-rendering.
  nlohmann::json jreport;
  jreport["methods"] = report.methods;
  jreport["categories"] = report.categories;
  for (std::size_t m = 0; m < report.methods.size(); ++m) {
    for (std::size_t c = 0; c < report.categories.size(); ++c) {
      const EvalCell& cell = report.cells[m][c];
      nlohmann::json jc;
      jc["ok"] = cell.ok;
      if (!cell.ok) jc["error"] = cell.error;
      jc["o_auroc"] = cell.metrics.o_auroc;
      jc["o_aupr"] = cell.metrics.o_aupr;
      jc["p_auroc"] = cell.metrics.p_auroc;
      jc["p_aupr"] = cell.metrics.p_aupr;
      jc["seconds"] = cell.seconds;
      jreport["cells"][report.methods[m]][report.categories[c]] = jc;
    }
  }
  detail::atomic_write(config.out_dir / "report.json", jreport.dump(2) + "\n");

  // Manifest: the full parameter closure needed to reproduce the run.
  nlohmann::json manifest;
  manifest["seed"] = config.seed;
  manifest["dataset_root"] = config.dataset_root.string();
  manifest["parallelism"] = config.parallelism;
  manifest["format_version"] = 1;
  for (const MethodId m : config.methods)
    manifest["methods"][to_string(m)] = method_params_to_json(params_for_method(config, m));
  double total_seconds = 0.0;
  for (const auto& row : report.cells)
    for (const EvalCell& c : row) total_seconds += c.seconds;
  manifest["total_task_seconds"] = total_seconds;
  detail::atomic_write(config.out_dir / "manifest.json", manifest.dump(2) + "\n");

  outcome.exit_code = report.all_ok() ? 0 : 2;
  return outcome;
}

}  // namespace pcad
