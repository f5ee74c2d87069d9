#include "cgmc/harness.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <mutex>
#include <thread>

#include "json.hpp"

namespace cgmc {

namespace {

using nlohmann::json;

void parallel_for(int n_tasks, int threads, const std::function<void(int)>& body) {
  if (n_tasks <= 0) return;
  int workers = threads <= 0 ? static_cast<int>(std::thread::hardware_concurrency()) : threads;
  workers = std::max(1, std::min(workers, n_tasks));

  std::atomic<int> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mutex;

  const auto worker = [&] {
    int index;
    while (!failed.load(std::memory_order_relaxed) && (index = next.fetch_add(1)) < n_tasks) {
      try {
        body(index);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        failed.store(true);
      }
    }
  };

  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers - 1));
    for (int t = 0; t < workers - 1; ++t) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();
  }
  if (error) std::rethrow_exception(error);
}

std::string g17(double x) {
  char buffer[48];
  std::snprintf(buffer, sizeof buffer, "%.17g", x);
  return buffer;
}

std::ofstream open_output(const ExperimentConfig& config, const std::string& name) {
  std::error_code ec;
  std::filesystem::create_directories(config.out_dir, ec);
  if (ec) throw IoError("cannot create output directory: " + config.out_dir);
  const std::string path = config.out_dir + "/" + name;
  std::ofstream out(path);
  if (!out) throw IoError("cannot open output file: " + path);
  return out;
}

void write_json(const ExperimentConfig& config, const std::string& name, const json& doc) {
  auto out = open_output(config, name);
  out << doc.dump(2) << "\n";
  if (!out) throw IoError("failed writing " + config.out_dir + "/" + name);
}

int guard_exit(const std::function<int()>& body) {
  try {
    return body();
  } catch (const IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return 3;
  } catch (const ConfigError& e) {
    std::cerr << "invalid configuration: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

json model_block(const ExperimentConfig& config) {
  return json{{"n", config.n},
              {"k", config.k},
              {"j", config.j},
              {"long_range", config.long_kind},
              {"range", config.long_kind == "triangle" ? (config.range == 0 ? config.n / 2 : config.range) : 0}};
}

}  // namespace

SweepResult run_sweep(const ExperimentConfig& config) {
  config.validate();
  const std::vector<double> grid = config.field_grid();
  const auto curve = coverage_curve(config.k, config.j, grid);

  const int n_methods = 1 + static_cast<int>(config.qs.size());
  const int n_points = static_cast<int>(grid.size());
  const int reps = config.replicates;
  const int n_tasks = n_points * n_methods * reps;

  std::vector<RunResult> slots(static_cast<std::size_t>(n_tasks));
  parallel_for(n_tasks, config.threads, [&](int task) {
    const int rep = task % reps;
    const int method = (task / reps) % n_methods;
    const int point = task / (reps * n_methods);

    const double h = grid[static_cast<std::size_t>(point)];
    const ModelSpec model = config.model_at(h);

    SamplerConfig sc;
    sc.kind = method == 0 ? SamplerKind::Classical : SamplerKind::Coupled;
    sc.q = method == 0 ? 1 : config.qs[static_cast<std::size_t>(method - 1)];
    sc.n_steps = config.burn_in + config.steps;
    sc.burn_in = config.burn_in;
    sc.thinning = config.thinning;
    sc.init = config.init_mode();
    sc.init_density = config.init == "exact" ? curve[static_cast<std::size_t>(point)].coverage
                                             : config.init_density;
    const int tag = method == 0 ? 0 : sc.q;
    sc.seed = chain_seed(config.seed, h, tag, rep);
    slots[static_cast<std::size_t>(task)] = run_chain(sc, model);
  });

  SweepResult result;
  result.qs = config.qs;
  result.rows.resize(static_cast<std::size_t>(n_points));
  result.error_coupled.assign(config.qs.size(), 0.0);
  result.wall_coupled.assign(config.qs.size(), 0);

  double err_cl = 0.0;
  std::vector<double> err_c(config.qs.size(), 0.0);
  for (int point = 0; point < n_points; ++point) {
    SweepRow& row = result.rows[static_cast<std::size_t>(point)];
    row.h = grid[static_cast<std::size_t>(point)];
    row.m_exact = curve[static_cast<std::size_t>(point)].coverage;
    row.jump = curve[static_cast<std::size_t>(point)].jump;
    row.tie = curve[static_cast<std::size_t>(point)].tie;
    row.coupled.resize(config.qs.size());

    for (int method = 0; method < n_methods; ++method) {
      MethodAggregate agg;
      ChainStats merged;
      double mean_sum = 0.0, var_sum = 0.0;
      for (int rep = 0; rep < reps; ++rep) {
        const RunResult& r =
            slots[static_cast<std::size_t>((point * n_methods + method) * reps + rep)];
        merged += r.stats;
        mean_sum += r.mean_coverage;
        var_sum += r.stderr_coverage * r.stderr_coverage;
      }
      agg.mean = mean_sum / reps;
      agg.se = std::sqrt(var_sum) / reps;
      agg.coarse_rate = merged.coarse_acceptance();
      agg.fine_given_coarse_rate = merged.fine_given_coarse_acceptance();
      agg.overall_rate = merged.overall_acceptance();
      agg.n_proposed = merged.n_proposed;
      agg.n_coarse_accepted = merged.n_coarse_accepted;
      agg.n_fine_accepted = merged.n_fine_accepted;
      agg.n_fine_steps = merged.n_fine_steps;
      agg.longrange_pair_evals = merged.longrange_pair_evals;
      agg.coarse_pair_evals = merged.coarse_pair_evals;
      agg.wall_nanos = merged.wall_nanos;

      const double diff = row.m_exact - agg.mean;
      if (method == 0) {
        row.classical = agg;
        err_cl += diff * diff;
        result.wall_classical += agg.wall_nanos;
      } else {
        row.coupled[static_cast<std::size_t>(method - 1)] = agg;
        err_c[static_cast<std::size_t>(method - 1)] += diff * diff;
        result.wall_coupled[static_cast<std::size_t>(method - 1)] += agg.wall_nanos;
      }
    }
  }
  result.error_classical = std::sqrt(err_cl);
  for (std::size_t i = 0; i < err_c.size(); ++i) result.error_coupled[i] = std::sqrt(err_c[i]);
  return result;
}

int cmd_exact_curve(const ExperimentConfig& config) {
  return guard_exit([&] {
    config.validate();
    const auto curve = coverage_curve(config.k, config.j, config.field_grid());
    auto out = open_output(config, "exact_curve.csv");
    out << "# cgmc exact-curve schema v1\n";
    out << "h,coverage,jump,tie\n";
    for (const auto& pt : curve)
      out << g17(pt.h) << "," << g17(pt.coverage) << "," << (pt.jump ? 1 : 0) << ","
          << (pt.tie ? 1 : 0) << "\n";
    if (!out) throw IoError("failed writing exact_curve.csv under " + config.out_dir);
    std::cout << "exact-curve: " << curve.size() << " points -> " << config.out_dir
              << "/exact_curve.csv\n";
    return 0;
  });
}

int cmd_sample(const ExperimentConfig& config) {
  return guard_exit([&] {
    config.validate();
    const ModelSpec model = config.model_at(config.h);

    SamplerConfig sc;
    sc.kind = config.sample_method == "classical" ? SamplerKind::Classical : SamplerKind::Coupled;
    sc.q = sc.kind == SamplerKind::Coupled ? config.qs.front() : 1;
    sc.n_steps = config.burn_in + config.steps;
    sc.burn_in = config.burn_in;
    sc.thinning = config.thinning;
    sc.record_series = config.record_series;
    sc.init = config.init_mode();
    sc.init_density = config.init == "exact" ? kardar_coverage(config.k, config.j, config.h).value
                                             : config.init_density;
    sc.seed = chain_seed(config.seed, config.h, sc.kind == SamplerKind::Classical ? 0 : sc.q, 0);

    const RunResult r = run_chain(sc, model);

    json doc;
    doc["schema"] = "cgmc.sample.v1";
    doc["model"] = model_block(config);
    doc["h"] = config.h;
    doc["method"] = config.sample_method;
    doc["q"] = sc.q;
    doc["seed"] = sc.seed;
    doc["steps"] = sc.n_steps;
    doc["burn_in"] = sc.burn_in;
    doc["mean_coverage"] = r.mean_coverage;
    doc["stderr_coverage"] = r.stderr_coverage;
    doc["exact_coverage"] = kardar_coverage(config.k, config.j, config.h).value;
    doc["acceptance"] = {{"coarse", r.stats.coarse_acceptance()},
                         {"fine_given_coarse", r.stats.fine_given_coarse_acceptance()},
                         {"overall", r.stats.overall_acceptance()}};
    doc["counters"] = {{"proposed", r.stats.n_proposed},
                       {"coarse_accepted", r.stats.n_coarse_accepted},
                       {"fine_accepted", r.stats.n_fine_accepted},
                       {"longrange_pair_evals", r.stats.longrange_pair_evals},
                       {"coarse_pair_evals", r.stats.coarse_pair_evals}};
    doc["wall_nanos"] = r.stats.wall_nanos;
    write_json(config, "sample.json", doc);

    if (config.record_series) {
      auto out = open_output(config, "series.csv");
      out << "# cgmc coverage series schema v1\n";
      out << "sample,coverage\n";
      for (std::size_t i = 0; i < r.series.size(); ++i) out << i << "," << g17(r.series[i]) << "\n";
      if (!out) throw IoError("failed writing series.csv under " + config.out_dir);
    }
    std::cout << "sample: mean coverage " << r.mean_coverage << " +- " << r.stderr_coverage << "\n";
    return 0;
  });
}

int cmd_sweep(const ExperimentConfig& config) {
  return guard_exit([&] {
    const SweepResult sweep = run_sweep(config);

    auto out = open_output(config, "sweep.csv");
    out << "# cgmc sweep schema v1\n";
    out << "h,m_exact,jump,tie,m_classical,se_classical,acc_classical,lr_evals_classical";
    for (int q : sweep.qs)
      out << ",m_q" << q << ",se_q" << q << ",acc_coarse_q" << q << ",acc_fine_q" << q
          << ",acc_overall_q" << q << ",lr_evals_q" << q << ",coarse_evals_q" << q;
    out << "\n";
    for (const SweepRow& row : sweep.rows) {
      out << g17(row.h) << "," << g17(row.m_exact) << "," << (row.jump ? 1 : 0) << ","
          << (row.tie ? 1 : 0) << "," << g17(row.classical.mean) << "," << g17(row.classical.se)
          << "," << g17(row.classical.overall_rate) << "," << row.classical.longrange_pair_evals;
      for (const MethodAggregate& agg : row.coupled)
        out << "," << g17(agg.mean) << "," << g17(agg.se) << "," << g17(agg.coarse_rate) << ","
            << g17(agg.fine_given_coarse_rate) << "," << g17(agg.overall_rate) << ","
            << agg.longrange_pair_evals << "," << agg.coarse_pair_evals;
      out << "\n";
    }
    if (!out) throw IoError("failed writing sweep.csv under " + config.out_dir);

    json doc;
    doc["schema"] = "cgmc.summary.v1";
    doc["model"] = model_block(config);
    doc["field"] = {{"start", config.h_start}, {"stop", config.h_stop}, {"count", config.h_count}};
    doc["sampler"] = {{"steps", config.steps},
                      {"burn_in", config.burn_in},
                      {"thinning", config.thinning},
                      {"init", config.init}};
    doc["replicates"] = config.replicates;
    doc["seed"] = config.seed;
    doc["qs"] = sweep.qs;
    doc["error_classical"] = sweep.error_classical;
    json err_c = json::object();
    json wall = {{"classical", sweep.wall_classical}};
    for (std::size_t i = 0; i < sweep.qs.size(); ++i) {
      const std::string key = "q" + std::to_string(sweep.qs[i]);
      err_c[key] = sweep.error_coupled[i];
      wall[key] = sweep.wall_coupled[i];
    }
    doc["error_coupled"] = err_c;
    // wall clock is the one non-reproducible block in this file
    doc["wall_nanos"] = wall;

    json local = json::object();
    json cl = json::array();
    for (const SweepRow& row : sweep.rows)
      cl.push_back(std::log10(std::max(std::abs(row.m_exact - row.classical.mean), 1e-300)));
    local["classical"] = cl;
    for (std::size_t i = 0; i < sweep.qs.size(); ++i) {
      json series = json::array();
      for (const SweepRow& row : sweep.rows)
        series.push_back(std::log10(std::max(std::abs(row.m_exact - row.coupled[i].mean), 1e-300)));
      local["q" + std::to_string(sweep.qs[i])] = series;
    }
    doc["local_error_log10"] = local;

    json totals = json::object();
    std::uint64_t lr_cl = 0;
    for (const SweepRow& row : sweep.rows) lr_cl += row.classical.longrange_pair_evals;
    totals["classical_longrange"] = lr_cl;
    for (std::size_t i = 0; i < sweep.qs.size(); ++i) {
      std::uint64_t lr = 0, coarse = 0;
      for (const SweepRow& row : sweep.rows) {
        lr += row.coupled[i].longrange_pair_evals;
        coarse += row.coupled[i].coarse_pair_evals;
      }
      totals["q" + std::to_string(sweep.qs[i])] = {{"longrange", lr}, {"coarse", coarse}};
    }
    doc["pair_evals"] = totals;
    write_json(config, "summary.json", doc);

    std::cout << "sweep: Error_cl = " << sweep.error_classical;
    for (std::size_t i = 0; i < sweep.qs.size(); ++i)
      std::cout << ", Error_c(q=" << sweep.qs[i] << ") = " << sweep.error_coupled[i];
    std::cout << "\n";
    return 0;
  });
}

}  // namespace cgmc
