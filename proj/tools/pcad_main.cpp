// pcad: point-cloud anomaly-detection benchmark runner.
//
//   pcad generate --config <file> --out <dir> [--seed n]
//   pcad run      --config <file> --dataset <dir> --out <dir>
//                 [--methods a,b] [--seed n] [--parallelism n]
//   pcad eval     --scores <dir> --gt <dir> [--out <dir>]
//   pcad report   --in <dir> --format csv|md
//
// Exit codes: 0 success, 2 partial (skipped cells), 1 fatal.
#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "pcad/bench/runner.hpp"
#include "pcad/synth/suite.hpp"

namespace fs = std::filesystem;

namespace {

int cmd_generate(const std::string& config_path, const std::string& out_dir, long long seed) {
  pcad::SuiteConfig config = pcad::load_suite_config(config_path);
  if (seed >= 0) config.master_seed = static_cast<std::uint64_t>(seed);
  const pcad::DatasetIndex index = pcad::generate_suite(config, out_dir);
  std::size_t samples = 0;
  for (const auto& cat : index.categories) samples += cat.test_paths.size();
  std::cout << "generated " << index.categories.size() << " categories, " << samples
            << " test samples under " << out_dir << "\n";
  return 0;
}

int cmd_run(const std::string& config_path, const std::string& dataset, const std::string& out_dir,
            const std::string& methods_csv, long long seed, int parallelism) {
  pcad::BenchConfig config =
      config_path.empty() ? pcad::BenchConfig{} : pcad::load_bench_config(config_path);
  if (!dataset.empty()) config.dataset_root = dataset;
  if (!out_dir.empty()) config.out_dir = out_dir;
  if (seed >= 0) config.seed = static_cast<std::uint64_t>(seed);
  if (parallelism > 0) config.parallelism = parallelism;
  if (!methods_csv.empty()) {
    config.methods.clear();
    std::stringstream ss(methods_csv);
    std::string tok;
    while (std::getline(ss, tok, ',')) config.methods.push_back(pcad::method_from_string(tok));
  }
  if (config.dataset_root.empty() || config.out_dir.empty())
    throw pcad::Error("run: --dataset and --out (or config keys) are required");

  const pcad::BenchOutcome outcome = pcad::run_benchmark(config);
  for (std::size_t m = 0; m < outcome.report.methods.size(); ++m) {
    const pcad::CategoryMetrics avg = outcome.report.average(m);
    std::cout << outcome.report.methods[m] << ": o_auroc " << avg.o_auroc << "  o_aupr "
              << avg.o_aupr << "  p_auroc " << avg.p_auroc << "  p_aupr " << avg.p_aupr << "\n";
  }
  for (std::size_t m = 0; m < outcome.report.methods.size(); ++m) {
    for (std::size_t c = 0; c < outcome.report.categories.size(); ++c) {
      const pcad::EvalCell& cell = outcome.report.cells[m][c];
      if (!cell.ok)
        std::cerr << "skipped " << outcome.report.methods[m] << "/"
                  << outcome.report.categories[c] << ": " << cell.error << "\n";
    }
  }
  std::cout << "report written to " << config.out_dir << "\n";
  return outcome.exit_code;
}

struct DumpData {
  double object_score = 0.0;
  std::vector<double> scores;
  std::vector<std::uint8_t> labels;
};

DumpData read_score_dump(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw pcad::IoError("eval: cannot open " + path.string());
  DumpData dump;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::istringstream ss(line.substr(1));
      std::string key;
      ss >> key;
      if (key == "object_score") ss >> dump.object_score;
      continue;
    }
    std::istringstream ss(line);
    std::size_t index;
    double score;
    int label;
    if (!(ss >> index >> score >> label))
      throw pcad::IoError("eval: bad dump row in " + path.string());
    dump.scores.push_back(score);
    dump.labels.push_back(static_cast<std::uint8_t>(label));
  }
  return dump;
}

/// Re-scores existing dumps: scores come from the dump tree, labels from the
/// dataset gt tree when given (falling back to the labels embedded in the
/// dumps).
int cmd_eval(const std::string& scores_dir, const std::string& gt_root,
             const std::string& out_dir) {
  pcad::EvalReport report;
  std::vector<fs::path> method_dirs;
  for (const auto& e : fs::directory_iterator(scores_dir))
    if (e.is_directory()) method_dirs.push_back(e.path());
  std::sort(method_dirs.begin(), method_dirs.end());
  if (method_dirs.empty()) throw pcad::Error("eval: no method directories under " + scores_dir);

  std::map<std::string, std::size_t> category_index;
  for (const fs::path& mdir : method_dirs) {
    report.methods.push_back(mdir.filename().string());
    for (const auto& e : fs::directory_iterator(mdir))
      if (e.is_directory()) category_index.emplace(e.path().filename().string(), 0);
  }
  for (auto& [name, idx] : category_index) {
    idx = report.categories.size();
    report.categories.push_back(name);
  }
  report.cells.assign(report.methods.size(), std::vector<pcad::EvalCell>(report.categories.size()));

  for (std::size_t m = 0; m < method_dirs.size(); ++m) {
    for (const auto& [cat_name, c] : category_index) {
      const fs::path cat_dir = method_dirs[m] / cat_name;
      if (!fs::exists(cat_dir)) continue;
      pcad::EvalCell& cell = report.cells[m][c];
      try {
        std::vector<fs::path> dumps;
        for (const auto& e : fs::directory_iterator(cat_dir))
          if (e.path().extension() == ".txt") dumps.push_back(e.path());
        std::sort(dumps.begin(), dumps.end());

        std::vector<double> object_scores;
        std::vector<std::uint8_t> object_labels;
        std::vector<std::vector<double>> point_scores;
        std::vector<std::vector<std::uint8_t>> point_labels;
        for (const fs::path& dump_path : dumps) {
          DumpData dump = read_score_dump(dump_path);
          const std::string stem = dump_path.stem().string();
          if (!gt_root.empty()) {
            const fs::path gt = fs::path(gt_root) / cat_name / "gt" / (stem + ".txt");
            if (fs::exists(gt))
              dump.labels = pcad::read_labels_txt(gt, dump.scores.size());
            else if (pcad::is_normal_sample_name(stem))
              dump.labels.assign(dump.scores.size(), 0);
            else
              throw pcad::IoError("eval: no gt for abnormal sample " + stem);
          }
          std::size_t positives = 0;
          for (const auto l : dump.labels) positives += l;
          object_scores.push_back(dump.object_score);
          object_labels.push_back(positives > 0 ? 1 : 0);
          point_scores.push_back(std::move(dump.scores));
          point_labels.push_back(std::move(dump.labels));
        }
        cell.metrics =
            pcad::evaluate_category(object_scores, object_labels, point_scores, point_labels);
        cell.ok = true;
      } catch (const std::exception& e) {
        cell.error = e.what();
      }
    }
  }

  const fs::path out = out_dir.empty() ? fs::path(scores_dir).parent_path() : fs::path(out_dir);
  fs::create_directories(out);
  for (int metric = 0; metric < 4; ++metric)
    pcad::detail::atomic_write(
        out / ("report_" + std::string(pcad::detail::metric_name(metric)) + ".csv"),
        pcad::render_csv(report, metric));
  pcad::detail::atomic_write(out / "report.md", pcad::render_markdown(report));
  std::cout << pcad::render_markdown(report);
  return report.all_ok() ? 0 : 2;
}

int cmd_report(const std::string& in_dir, const std::string& format) {
  std::ifstream in(fs::path(in_dir) / "report.json");
  if (!in) throw pcad::IoError("report: cannot open report.json under " + in_dir);
  nlohmann::json j;
  in >> j;
  pcad::EvalReport report;
  report.methods = j.at("methods").get<std::vector<std::string>>();
  report.categories = j.at("categories").get<std::vector<std::string>>();
  report.cells.assign(report.methods.size(), std::vector<pcad::EvalCell>(report.categories.size()));
  for (std::size_t m = 0; m < report.methods.size(); ++m) {
    for (std::size_t c = 0; c < report.categories.size(); ++c) {
      const auto& jc = j.at("cells").at(report.methods[m]).at(report.categories[c]);
      pcad::EvalCell& cell = report.cells[m][c];
      cell.ok = jc.value("ok", false);
      cell.metrics.o_auroc = jc.value("o_auroc", 0.0);
      cell.metrics.o_aupr = jc.value("o_aupr", 0.0);
      cell.metrics.p_auroc = jc.value("p_auroc", 0.0);
      cell.metrics.p_aupr = jc.value("p_aupr", 0.0);
    }
  }
  if (format == "md") {
    std::cout << pcad::render_markdown(report);
  } else {
    for (int metric = 0; metric < 4; ++metric) {
      std::cout << "# " << pcad::detail::metric_name(metric) << "\n"
                << pcad::render_csv(report, metric) << "\n";
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"point-cloud anomaly-detection benchmark"};
  app.require_subcommand(1);

  std::string config_path, out_dir, dataset, methods_csv, scores_dir, gt_root, in_dir;
  std::string format = "md";
  long long seed = -1;
  int parallelism = 0;

  CLI::App* gen = app.add_subcommand("generate", "generate a synthetic benchmark suite");
  gen->add_option("--config", config_path, "suite config JSON")->required();
  gen->add_option("--out", out_dir, "output dataset root")->required();
  gen->add_option("--seed", seed, "override the master seed");

  CLI::App* run = app.add_subcommand("run", "run the benchmark");
  run->add_option("--config", config_path, "benchmark config JSON");
  run->add_option("--dataset", dataset, "dataset root");
  run->add_option("--out", out_dir, "output directory");
  run->add_option("--methods", methods_csv, "comma-separated method ids");
  run->add_option("--seed", seed, "override the seed");
  run->add_option("--parallelism", parallelism, "worker count");

  CLI::App* ev = app.add_subcommand("eval", "re-score existing dumps");
  ev->add_option("--scores", scores_dir, "score dump tree")->required();
  ev->add_option("--gt", gt_root, "dataset root for ground truth");
  ev->add_option("--out", out_dir, "output directory for tables");

  CLI::App* rep = app.add_subcommand("report", "re-render tables from report.json");
  rep->add_option("--in", in_dir, "directory holding report.json")->required();
  rep->add_option("--format", format, "csv or md")->check(CLI::IsMember({"csv", "md"}));

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) return cmd_generate(config_path, out_dir, seed);
    if (run->parsed()) return cmd_run(config_path, dataset, out_dir, methods_csv, seed, parallelism);
    if (ev->parsed()) return cmd_eval(scores_dir, gt_root, out_dir);
    if (rep->parsed()) return cmd_report(in_dir, format);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
