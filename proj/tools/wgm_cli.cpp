// wgm: within-group monotone post-processing of binned screening classifiers.

#include <atomic>
#include <cstdlib>
#include <fstream>
#include <future>
#include <iostream>
#include <map>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "wgm/errors.hpp"
#include "wgm/oracle.hpp"
#include "wgm/partition.hpp"
#include "wgm/pipeline.hpp"
#include "wgm/random.hpp"

namespace {

using json = nlohmann::ordered_json;

enum Exit { kOk = 0, kValidation = 1, kIo = 2 };

struct Options {
  wgm::RunConfig config;
  std::string input;
  std::string algorithms = "all";
  std::string epsilon = "auto";
  std::string out = "wgm_out";
};

std::filesystem::path output_dir(const Options& opts) {
  if (const char* env = std::getenv("WGM_OUTPUT_DIR"); env && *env) return env;
  return opts.out;
}

void add_data_flags(CLI::App& app, Options& opts) {
  app.add_option("--input", opts.input, "CSV with score, group and label columns (synthetic data when omitted)");
  app.add_option("--score-col", opts.config.schema.score_column, "Score column name")->capture_default_str();
  app.add_option("--group-col", opts.config.schema.group_column, "Group column name")->capture_default_str();
  app.add_option("--label-col", opts.config.schema.label_column, "Label column name")->capture_default_str();
}

void add_run_flags(CLI::App& app, Options& opts) {
  add_data_flags(app, opts);
  auto& c = opts.config;
  app.add_option("--records", c.generator_records, "Synthetic record count")->capture_default_str();
  app.add_option("--algorithms", opts.algorithms, "pav, optimal, calibration or all (comma separated)")
      ->capture_default_str();
  app.add_option("--tau", c.tau, "Slack: one value for every group or one per group");
  app.add_option("--epsilon", opts.epsilon, "Calibration epsilon or 'auto'")->capture_default_str();
  app.add_option("--bisect-tol", c.bisect_tol, "Epsilon search tolerance")->capture_default_str();
  app.add_option("--calibration-fraction", c.calibration_fraction, "Share of records used for estimation")
      ->capture_default_str();
  app.add_option("--pools", c.pools, "Number of test pools")->capture_default_str();
  app.add_option("-m,--pool-size", c.pool_size, "Candidates per pool")->capture_default_str();
  app.add_option("-k,--k", c.k, "Expected qualified candidates per shortlist")->capture_default_str();
  app.add_option("--min-group-count", c.min_group_count, "Records needed for a (bin, group) estimate")
      ->capture_default_str();
  app.add_option("--seed", c.seed, "Master seed")->capture_default_str();
  app.add_option("--cmp-eps", c.tol.cmp_eps, "Score comparison tolerance")->capture_default_str();
  app.add_option("--out", opts.out, "Output directory (WGM_OUTPUT_DIR overrides)")->capture_default_str();
}

void finalize(Options& opts) {
  if (!opts.input.empty()) opts.config.input = opts.input;
  opts.config.algorithms = wgm::parse_algorithms(opts.algorithms);
  if (opts.epsilon == "auto") {
    opts.config.epsilon.reset();
  } else {
    try {
      std::size_t used = 0;
      opts.config.epsilon = std::stod(opts.epsilon, &used);
      if (used != opts.epsilon.size()) throw std::invalid_argument(opts.epsilon);
    } catch (const std::exception&) {
      throw wgm::ConfigError("epsilon must be a number or 'auto', got '" + opts.epsilon + "'");
    }
  }
}

void print_summary(const json& report) {
  std::cout << "bins " << report["classifier"]["bins"].get<std::size_t>() << " (requested "
            << report["classifier"]["requested_bins"].get<std::size_t>() << ")\n";
  for (const auto& w : report["data"]["warnings"]) std::cout << "warning: " << w.get<std::string>() << "\n";
  for (const auto& entry : report["classifiers"]) {
    const std::string name = entry["name"];
    if (entry["partition"].is_null()) {
      std::cout << name << ": infeasible at epsilon " << entry["epsilon"]["epsilon"].dump() << "\n";
      continue;
    }
    std::cout << name << ": size " << entry["size"].get<std::size_t>() << ", p_d "
              << entry["unfairness"]["p_d"].get<double>();
    if (entry.contains("epsilon")) std::cout << ", epsilon " << entry["epsilon"]["epsilon"].get<double>();
    const auto& pools = report["pools"]["results"];
    if (pools.contains(name)) std::cout << ", mean shortlist " << pools[name]["mean_shortlist_size"].get<double>();
    std::cout << "\n";
  }
}

int cmd_ingest_check(Options& opts) {
  if (opts.input.empty()) throw wgm::ConfigError("--input is required");
  const auto records = wgm::ingest(std::filesystem::path(opts.input), opts.config.schema);
  std::map<std::string, std::pair<std::size_t, std::size_t>> per_group;
  for (const auto& r : records) {
    auto& [count, positive] = per_group[r.group];
    ++count;
    positive += r.qualified ? 1 : 0;
  }
  std::cout << records.size() << " records, " << per_group.size() << " groups\n";
  for (const auto& [group, stats] : per_group) {
    std::cout << "  " << group << ": " << stats.first << " records, " << stats.second << " qualified\n";
  }
  return kOk;
}

int cmd_run(Options& opts, std::size_t bins) {
  finalize(opts);
  opts.config.bins = bins;
  const json report = wgm::run_pipeline(opts.config);
  const auto dir = output_dir(opts);
  wgm::write_run_outputs(dir, report);
  print_summary(report);
  std::cout << "wrote " << (dir / "report.json").string() << "\n";
  return kOk;
}

int cmd_sweep(Options& opts, const std::vector<std::size_t>& bin_list, std::size_t repeats, std::size_t jobs) {
  finalize(opts);
  const auto records_for = [&](std::uint64_t seed) {
    wgm::RunConfig cfg = opts.config;
    cfg.seed = seed;
    return wgm::load_records(cfg);
  };

  struct Job {
    std::size_t bins;
    std::uint64_t seed;
  };
  std::vector<Job> plan;
  for (std::size_t r = 0; r < repeats; ++r)
    for (std::size_t n : bin_list) plan.push_back({n, opts.config.seed + r});

  // Records depend only on the seed, so each seed is loaded once and shared across bin counts.
  std::map<std::uint64_t, std::vector<wgm::RawRecord>> records;
  for (std::size_t r = 0; r < repeats; ++r) records.emplace(opts.config.seed + r, records_for(opts.config.seed + r));

  std::vector<json> reports(plan.size());
  const std::size_t workers = std::max<std::size_t>(1, std::min(jobs, plan.size()));
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < plan.size(); i = next++) {
      wgm::RunConfig cfg = opts.config;
      cfg.bins = plan[i].bins;
      cfg.seed = plan[i].seed;
      reports[i] = wgm::run_pipeline(cfg, records.at(plan[i].seed));
    }
  };
  std::vector<std::future<void>> running;
  for (std::size_t w = 0; w < workers; ++w) running.push_back(std::async(std::launch::async, work));
  for (auto& f : running) f.get();

  const auto dir = output_dir(opts);
  for (std::size_t i = 0; i < plan.size(); ++i) {
    const auto sub = dir / ("n" + std::to_string(plan[i].bins) + "_seed" + std::to_string(plan[i].seed));
    wgm::write_run_outputs(sub, reports[i]);
    std::cout << "n " << plan[i].bins << " seed " << plan[i].seed << ": p_d "
              << reports[i]["classifiers"][0]["unfairness"]["p_d"].get<double>() << "\n";
  }
  std::ofstream csv(dir / "plot_data.csv", std::ios::binary);
  if (!csv) throw wgm::IoError("cannot write " + (dir / "plot_data.csv").string());
  wgm::write_plot_csv(csv, reports);
  std::cout << "wrote " << plan.size() << " reports under " << dir.string() << "\n";
  return kOk;
}

int cmd_oracle_verify(std::size_t instances, std::size_t max_bins, std::size_t groups, std::uint64_t seed) {
  if (max_bins < 2 || max_bins > wgm::oracle::kMaxOptimalBins) {
    throw wgm::ConfigError("--max-bins must lie in [2, " + std::to_string(wgm::oracle::kMaxOptimalBins) + "]");
  }
  std::size_t mismatches = 0;
  std::size_t not_monotone = 0;
  for (std::size_t t = 0; t < instances; ++t) {
    const std::size_t n = 2 + t % (max_bins - 1);
    const auto c = wgm::oracle::random_instance({n, groups, 0.8}, wgm::derive_seed(seed, t));
    const auto dp = wgm::optimal_partition(c);
    const auto brute = wgm::oracle::brute_force_optimal(c);
    if (dp.size() != brute.size()) {
      ++mismatches;
      std::cout << "instance " << t << " (n=" << n << "): dp " << dp.to_string() << " brute " << brute.to_string()
                << "\n";
    }
    if (!wgm::is_within_group_monotone(c, dp).monotone() || !wgm::is_within_group_monotone(c, wgm::pav(c)).monotone()) {
      ++not_monotone;
    }
  }
  std::cout << instances << " instances, " << mismatches << " size mismatches, " << not_monotone
            << " non-monotone outputs\n";
  return mismatches == 0 && not_monotone == 0 ? kOk : kValidation;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Within-group monotone post-processing for binned screening classifiers"};
  app.require_subcommand(1);

  Options opts;

  auto* ingest = app.add_subcommand("ingest-check", "Parse a CSV and report per-group counts");
  add_data_flags(*ingest, opts);

  std::size_t run_bins = 15;
  auto* run = app.add_subcommand("run", "Bin, partition and simulate shortlists for one configuration");
  add_run_flags(*run, opts);
  run->add_option("-n,--bins", run_bins, "Number of uniform-mass bins")->capture_default_str();

  std::vector<std::size_t> sweep_bins{5, 10, 20, 40};
  std::size_t repeats = 1;
  std::size_t jobs = std::max(1u, std::thread::hardware_concurrency());
  auto* sweep = app.add_subcommand("sweep", "Run over a list of bin counts and consecutive seeds");
  add_run_flags(*sweep, opts);
  sweep->add_option("-n,--bins", sweep_bins, "Bin counts")->delimiter(',')->capture_default_str();
  sweep->add_option("--repeats", repeats, "Seeds per bin count, starting at --seed")->capture_default_str();
  sweep->add_option("-j,--jobs", jobs, "Parallel runs");

  std::size_t instances = 200;
  std::size_t max_bins = 12;
  std::size_t groups = 2;
  std::uint64_t oracle_seed = 0;
  auto* verify = app.add_subcommand("oracle-verify", "Cross-check the optimal partition against brute force");
  verify->add_option("--instances", instances, "Random instances")->capture_default_str();
  verify->add_option("--max-bins", max_bins, "Largest bin count")->capture_default_str();
  verify->add_option("--groups", groups, "Groups per instance")->capture_default_str();
  verify->add_option("--seed", oracle_seed, "Seed")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kValidation;
  }

  try {
    if (*ingest) return cmd_ingest_check(opts);
    if (*run) return cmd_run(opts, run_bins);
    if (*sweep) return cmd_sweep(opts, sweep_bins, repeats, jobs);
    if (*verify) return cmd_oracle_verify(instances, max_bins, groups, oracle_seed);
  } catch (const wgm::IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kIo;
  } catch (const wgm::IngestError& e) {
    std::cerr << "error: " << e.what() << "\n";
    for (const auto& row : e.rows()) std::cerr << "  line " << row.line << ": " << row.message << "\n";
    return kValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kValidation;
  }
  return kOk;
}
