#include "wgm/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <ostream>
#include <sstream>

#include "wgm/errors.hpp"
#include "wgm/metrics.hpp"
#include "wgm/partition.hpp"
#include "wgm/random.hpp"
#include "wgm/screening.hpp"

namespace wgm {

using json = nlohmann::ordered_json;

std::string to_string(Algorithm a) {
  switch (a) {
    case Algorithm::pav:
      return "pav";
    case Algorithm::optimal:
      return "optimal";
    case Algorithm::calibration:
      return "calibration";
  }
  return "unknown";
}

std::vector<Algorithm> parse_algorithms(const std::string& text) {
  std::vector<Algorithm> out;
  auto add = [&](Algorithm a) {
    if (std::find(out.begin(), out.end(), a) == out.end()) out.push_back(a);
  };
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item == "all") {
      add(Algorithm::pav);
      add(Algorithm::optimal);
      add(Algorithm::calibration);
    } else if (item == "pav") {
      add(Algorithm::pav);
    } else if (item == "optimal") {
      add(Algorithm::optimal);
    } else if (item == "calibration") {
      add(Algorithm::calibration);
    } else {
      throw ConfigError("unknown algorithm '" + item + "'");
    }
  }
  if (out.empty()) throw ConfigError("no algorithm selected");
  std::sort(out.begin(), out.end());
  return out;
}

void RunConfig::check() const {
  if (bins == 0) throw ConfigError("bins must be positive");
  if (algorithms.empty()) throw ConfigError("no algorithm selected");
  for (double t : tau) {
    if (!std::isfinite(t) || t < 0.0 || t > 1.0) throw ConfigError("tau values must lie in [0,1]");
  }
  if (epsilon && (!std::isfinite(*epsilon) || *epsilon < 0.0 || *epsilon > 1.0)) {
    throw ConfigError("epsilon must lie in [0,1]");
  }
  if (!(bisect_tol > 0.0)) throw ConfigError("bisect tolerance must be positive");
  if (!(calibration_fraction > 0.0 && calibration_fraction <= 1.0)) {
    throw ConfigError("calibration fraction must lie in (0,1]");
  }
  if (pools > 0 && pool_size == 0) throw ConfigError("pool size must be positive");
  if (!std::isfinite(k) || k < 0.0) throw ConfigError("k must be finite and >= 0");
  if (!input && generator_records == 0) throw ConfigError("generator record count must be positive");
  try {
    tol.check();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

namespace {

template <typename F>
auto staged(const std::string& stage, F&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const IoError& e) {
    throw IoError(stage + ": " + e.what());
  } catch (const StageError&) {
    throw;
  } catch (const IngestError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(stage, e.what());
  }
}

json number_or_null(std::optional<double> v) { return v ? json(*v) : json(nullptr); }

json partition_json(const Partition& p) {
  json cells = json::array();
  for (const Cell& c : p.cells()) cells.push_back(json::array({c.begin + 1, c.end}));
  return cells;
}

json unfairness_json(const BinnedClassifier& c, const Tolerances& tol) {
  const auto report = unfairness_probabilities(c, tol);
  json groups = json::object();
  for (std::size_t z = 0; z < c.group_count(); ++z) {
    groups[c.groups().label(z)] = {{"mass", report.group_mass[z]},
                                   {"p_d_given_z", number_or_null(report.p_given_group[z])}};
  }
  return {{"p_d", report.p_d}, {"groups", groups}};
}

json classifier_json(const BinnedClassifier& c, const BinEdges& edges) {
  json rows = json::array();
  for (std::size_t i = 0; i < c.size(); ++i) {
    json shares = json::object();
    json scores = json::object();
    for (std::size_t z = 0; z < c.group_count(); ++z) {
      shares[c.groups().label(z)] = c.share(i, z);
      scores[c.groups().label(z)] =
          c.present(i, z) ? json(c.group_score(i, z)) : json(nullptr);
    }
    rows.push_back({{"bin", i + 1},
                    {"lower_edge", i == 0 ? json(nullptr) : json(edges.upper[i - 1])},
                    {"upper_edge", i + 1 == c.size() ? json(nullptr) : json(edges.upper[i])},
                    {"score", c.score(i)},
                    {"mass", c.mass(i)},
                    {"shares", shares},
                    {"group_scores", scores}});
  }
  return rows;
}

struct Variant {
  std::string name;
  Partition partition;
};

json variant_json(const BinnedClassifier& c, const Variant& v, const Slack& slack, const Tolerances& tol) {
  const auto stats = merged_scores(c, v.partition);
  json cells = json::array();
  for (std::size_t k = 0; k < stats.size(); ++k) {
    const Cell cell = v.partition.cell(k);
    json scores = json::object();
    for (std::size_t z = 0; z < c.group_count(); ++z) {
      scores[c.groups().label(z)] = number_or_null(stats[k].group_score[z]);
    }
    cells.push_back({{"bins", json::array({cell.begin + 1, cell.end})},
                     {"score", stats[k].score},
                     {"mass", stats[k].mass},
                     {"group_scores", scores}});
  }
  const auto strict = check_within_group_monotone(stats, Slack(c.group_count(), 0.0), tol);
  const auto relaxed = check_within_group_monotone(stats, slack, tol);
  return {{"partition", partition_json(v.partition)},
          {"size", v.partition.size()},
          {"cells", cells},
          {"violations", strict.violations.size()},
          {"violations_with_slack", relaxed.violations.size()},
          {"unfairness", unfairness_json(induce(c, v.partition), tol)}};
}

std::vector<std::size_t> sample_without_replacement(std::size_t population, std::size_t count, Rng& rng) {
  std::vector<std::size_t> idx(population);
  std::iota(idx.begin(), idx.end(), 0);
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.index(population - i));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(count);
  return idx;
}

json config_json(const RunConfig& config) {
  json algorithms = json::array();
  for (auto a : config.algorithms) algorithms.push_back(to_string(a));
  return {{"input", config.input ? json(config.input->filename().string()) : json(nullptr)},
          {"generator", config.input ? json(nullptr) : json("latent_simpson_family")},
          {"generator_records", config.input ? json(nullptr) : json(config.generator_records)},
          {"columns",
           {{"score", config.schema.score_column},
            {"group", config.schema.group_column},
            {"label", config.schema.label_column}}},
          {"bins", config.bins},
          {"algorithms", algorithms},
          {"tau", config.tau},
          {"epsilon", config.epsilon ? json(*config.epsilon) : json("auto")},
          {"bisect_tol", config.bisect_tol},
          {"calibration_fraction", config.calibration_fraction},
          {"pools", config.pools},
          {"pool_size", config.pool_size},
          {"k", config.k},
          {"min_group_count", config.min_group_count},
          {"seed", config.seed},
          {"cmp_eps", config.tol.cmp_eps},
          {"mass_eps", config.tol.mass_eps}};
}

}  // namespace

std::vector<RawRecord> load_records(const RunConfig& config) {
  return staged("ingest", [&] {
    if (config.input) return ingest(*config.input, config.schema);
    return synthesize_latent(LatentModel::simpson_family(), config.generator_records,
                             derive_seed(config.seed, static_cast<std::uint64_t>(SeedStage::generator)));
  });
}

json run_pipeline(const RunConfig& config, const std::vector<RawRecord>& records) {
  staged("config", [&] { config.check(); });

  // Calibration / test split.
  std::vector<RawRecord> calibration;
  std::vector<RawRecord> test;
  staged("split", [&] {
    Rng rng(derive_seed(config.seed, static_cast<std::uint64_t>(SeedStage::split)));
    const std::size_t m = records.size();
    const auto take = static_cast<std::size_t>(std::llround(config.calibration_fraction * static_cast<double>(m)));
    auto chosen = sample_without_replacement(m, std::min(take, m), rng);
    std::sort(chosen.begin(), chosen.end());
    std::vector<bool> in_calibration(m, false);
    for (std::size_t i : chosen) in_calibration[i] = true;
    for (std::size_t i = 0; i < m; ++i) (in_calibration[i] ? calibration : test).push_back(records[i]);
    if (test.empty()) test = calibration;
  });

  const Estimate estimate = staged("binning", [&] {
    if (calibration.empty()) throw InsufficientDataError("no records");
    const BinEdges raw_edges = uniform_mass_bins(calibration, config.bins);
    // Tied scores can repeat an edge; a repeated edge would only produce an empty bin.
    BinEdges edges;
    for (double e : raw_edges.upper) {
      if (edges.upper.empty() || e > edges.upper.back()) edges.upper.push_back(e);
    }
    EstimateOptions options;
    options.min_group_count = config.min_group_count;
    options.tol = config.tol;
    auto est = estimate_classifier(calibration, edges, groups_of(calibration), options);
    if (edges.bins() < raw_edges.bins()) {
      est.warnings.insert(est.warnings.begin(), "collapsed " + std::to_string(raw_edges.bins() - edges.bins()) +
                                                     " bin(s) whose quantile edges coincide");
    }
    return est;
  });
  const BinnedClassifier& c = estimate.classifier;
  const std::size_t g = c.group_count();

  const Slack slack = staged("config", [&] {
    if (config.tau.empty()) return Slack(g, 0.0);
    if (config.tau.size() == 1) return uniform_slack(g, config.tau.front());
    if (config.tau.size() != g) {
      throw ConfigError("tau has " + std::to_string(config.tau.size()) + " values for " + std::to_string(g) +
                        " groups");
    }
    return Slack(config.tau);
  });

  const auto validation = validate_classifier(c, config.tol);
  json validation_issues = json::array();
  for (const auto& issue : validation.issues) validation_issues.push_back(issue.message);

  std::vector<Variant> variants{{"original", Partition::identity(c.size())}};
  json calibration_info = nullptr;
  staged("partition", [&] {
    for (Algorithm a : config.algorithms) {
      switch (a) {
        case Algorithm::pav:
          variants.push_back({"pav", pav(c, slack, config.tol)});
          break;
        case Algorithm::optimal:
          variants.push_back({"optimal", optimal_partition(c, slack, config.tol)});
          break;
        case Algorithm::calibration: {
          if (config.epsilon) {
            auto p = calibration_partition(c, *config.epsilon, config.tol);
            calibration_info = {{"epsilon", *config.epsilon}, {"search", "fixed"}, {"feasible", p.has_value()}};
            if (p) variants.push_back({"calibration", *p});
          } else {
            auto found = smallest_epsilon(c, config.tol, config.bisect_tol);
            calibration_info = {{"epsilon", found.epsilon}, {"search", "bisection"}, {"feasible", true}};
            variants.push_back({"calibration", found.partition});
          }
          break;
        }
      }
    }
  });

  json classifiers = json::array();
  staged("metrics", [&] {
    for (const auto& v : variants) {
      json entry = {{"name", v.name}};
      entry.update(variant_json(c, v, slack, config.tol));
      if (v.name == "calibration") entry["epsilon"] = calibration_info;
      classifiers.push_back(std::move(entry));
    }
    if (calibration_info.is_object() && !calibration_info["feasible"].get<bool>()) {
      classifiers.push_back({{"name", "calibration"}, {"partition", nullptr}, {"epsilon", calibration_info}});
    }
  });

  json pools = json::object();
  staged("pools", [&] {
    std::vector<Candidate> population;
    for (const auto& r : test) {
      const auto z = c.groups().index_of(r.group);
      if (!z) continue;
      population.push_back({estimate.edges.bin_of(r.score), *z, r.qualified});
    }
    pools = {{"count", config.pools}, {"size", config.pool_size}, {"k", config.k},
             {"source_records", population.size()}, {"results", json::object()}};
    if (config.pools == 0) return;
    if (population.size() < config.pool_size) {
      throw ConfigError("pool size " + std::to_string(config.pool_size) + " exceeds the " +
                        std::to_string(population.size()) + " available test records");
    }

    Rng rng(derive_seed(config.seed, static_cast<std::uint64_t>(SeedStage::pools)));
    std::vector<ScoreView> views;
    for (const auto& v : variants) views.push_back(ScoreView::of(c, v.partition));
    std::vector<json> sizes(variants.size(), json::array());
    std::vector<json> achieved(variants.size(), json::array());
    std::vector<json> exposure(variants.size(), json::array());
    std::vector<std::size_t> shortfalls(variants.size(), 0);
    for (std::size_t t = 0; t < config.pools; ++t) {
      std::vector<Candidate> members;
      for (std::size_t idx : sample_without_replacement(population.size(), config.pool_size, rng)) {
        members.push_back(population[idx]);
      }
      const CandidatePool pool(std::move(members));
      for (std::size_t v = 0; v < variants.size(); ++v) {
        const Shortlist s = shortlist(pool, views[v], config.k, config.tol);
        sizes[v].push_back(s.selected.size());
        achieved[v].push_back(s.achieved);
        shortfalls[v] += s.shortfall ? 1 : 0;
        exposure[v].push_back(pool_unfairness(views[v], pool, config.tol));
      }
    }
    for (std::size_t v = 0; v < variants.size(); ++v) {
      double total = 0.0;
      for (const auto& s : sizes[v]) total += s.get<double>();
      double exposed = 0.0;
      for (const auto& e : exposure[v]) exposed += e.get<double>();
      pools["results"][variants[v].name] = {
          {"shortlist_sizes", sizes[v]},
          {"mean_shortlist_size", total / static_cast<double>(config.pools)},
          {"achieved", achieved[v]},
          {"shortfalls", shortfalls[v]},
          {"pool_unfairness", exposure[v]},
          {"mean_pool_unfairness", exposed / static_cast<double>(config.pools)}};
    }
  });

  json groups = json::array();
  for (const auto& label : c.groups().labels()) groups.push_back(label);

  json report;
  report["schema_version"] = kReportSchemaVersion;
  report["config"] = config_json(config);
  report["data"] = {{"records", records.size()},
                    {"calibration_records", calibration.size()},
                    {"test_records", test.size()},
                    {"groups", groups},
                    {"warnings", estimate.warnings}};
  report["classifier"] = {{"bins", c.size()},
                          {"requested_bins", config.bins},
                          {"edges", estimate.edges.upper},
                          {"valid", validation.ok()},
                          {"validation_issues", validation_issues},
                          {"table", classifier_json(c, estimate.edges)}};
  report["slack"] = slack;
  report["classifiers"] = classifiers;
  report["pools"] = pools;
  return report;
}

json run_pipeline(const RunConfig& config) { return run_pipeline(config, load_records(config)); }

std::string dump_report(const json& report) { return report.dump(2) + "\n"; }

void write_plot_csv(std::ostream& out, const std::vector<json>& reports) {
  out << "quantity,algorithm,n,seed,group,pool,value\n";
  auto row = [&](const std::string& quantity, const std::string& algorithm, const json& report,
                 const std::string& group, const std::string& pool, const json& value) {
    out << quantity << ',' << algorithm << ',' << report["config"]["bins"].dump() << ','
        << report["config"]["seed"].dump() << ',' << group << ',' << pool << ',' << value.dump() << '\n';
  };
  for (const auto& report : reports) {
    for (const auto& entry : report["classifiers"]) {
      const std::string name = entry["name"].get<std::string>();
      if (entry["partition"].is_null()) continue;
      row("partition_size", name, report, "", "", entry["size"]);
      row("p_d", name, report, "", "", entry["unfairness"]["p_d"]);
      for (const auto& [label, stats] : entry["unfairness"]["groups"].items()) {
        if (!stats["p_d_given_z"].is_null()) row("p_d_given_z", name, report, label, "", stats["p_d_given_z"]);
      }
      if (name == "calibration") row("epsilon", name, report, "", "", entry["epsilon"]["epsilon"]);
    }
    for (const auto& [name, result] : report["pools"]["results"].items()) {
      const auto& sizes = result["shortlist_sizes"];
      const auto& exposure = result["pool_unfairness"];
      for (std::size_t t = 0; t < sizes.size(); ++t) {
        row("shortlist_size", name, report, "", std::to_string(t + 1), sizes[t]);
        row("pool_unfairness", name, report, "", std::to_string(t + 1), exposure[t]);
      }
    }
  }
}

void write_run_outputs(const std::filesystem::path& dir, const json& report) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
  {
    std::ofstream out(dir / "report.json", std::ios::binary);
    if (!out) throw IoError("cannot write " + (dir / "report.json").string());
    out << dump_report(report);
  }
  std::ofstream csv(dir / "plot_data.csv", std::ios::binary);
  if (!csv) throw IoError("cannot write " + (dir / "plot_data.csv").string());
  write_plot_csv(csv, {report});
}

}  // namespace wgm
