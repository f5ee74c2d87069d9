#include "cgmc/config.hpp"

#include <set>

namespace cgmc {

ExperimentConfig ExperimentConfig::from_table(const toml::Table& table) {
  static const std::set<std::string> known = {
      "model.n",        "model.k",          "model.j",        "model.long_range", "model.range",
      "field.h",        "field.start",      "field.stop",     "field.count",      "sampler.steps",
      "sampler.burn_in", "sampler.thinning", "sampler.init",   "sampler.init_density",
      "sampler.record_series", "sampler.method", "sweep.q",    "sweep.replicates", "bench.q",
      "bench.steps",    "run.seed",         "run.threads",    "run.out"};
  for (const std::string& key : table.keys())
    if (!known.count(key)) throw ConfigError("unknown config key '" + key + "'");

  ExperimentConfig cfg;
  cfg.n = static_cast<int>(table.get_integer("model.n", cfg.n));
  cfg.k = table.get_double("model.k", cfg.k);
  cfg.j = table.get_double("model.j", cfg.j);
  cfg.long_kind = table.get_string("model.long_range", cfg.long_kind);
  cfg.range = static_cast<int>(table.get_integer("model.range", cfg.range));

  cfg.h = table.get_double("field.h", cfg.h);
  cfg.h_start = table.get_double("field.start", cfg.h_start);
  cfg.h_stop = table.get_double("field.stop", cfg.h_stop);
  cfg.h_count = static_cast<int>(table.get_integer("field.count", cfg.h_count));

  cfg.steps = table.get_integer("sampler.steps", cfg.steps);
  cfg.burn_in = table.get_integer("sampler.burn_in", cfg.burn_in);
  cfg.thinning = table.get_integer("sampler.thinning", cfg.thinning);
  cfg.init = table.get_string("sampler.init", cfg.init);
  cfg.init_density = table.get_double("sampler.init_density", cfg.init_density);
  cfg.record_series = table.get_boolean("sampler.record_series", cfg.record_series);
  cfg.sample_method = table.get_string("sampler.method", cfg.sample_method);

  const auto to_ints = [](const std::vector<std::int64_t>& in) {
    std::vector<int> out;
    for (std::int64_t v : in) out.push_back(static_cast<int>(v));
    return out;
  };
  cfg.qs = to_ints(table.get_integer_array("sweep.q", {4, 8}));
  cfg.replicates = static_cast<int>(table.get_integer("sweep.replicates", cfg.replicates));
  cfg.bench_qs = to_ints(table.get_integer_array("bench.q", {2, 4, 8, 16}));
  cfg.bench_steps = table.get_integer("bench.steps", cfg.bench_steps);

  cfg.seed = static_cast<std::uint64_t>(table.get_integer("run.seed", static_cast<std::int64_t>(cfg.seed)));
  cfg.threads = static_cast<int>(table.get_integer("run.threads", cfg.threads));
  cfg.out_dir = table.get_string("run.out", cfg.out_dir);
  return cfg;
}

ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
  return from_table(toml::Table::parse_file(path));
}

void ExperimentConfig::validate() const {
  if (n < 2) throw ConfigError("model.n must be >= 2");
  if (long_kind != "mean-field" && long_kind != "triangle")
    throw ConfigError("model.long_range must be 'mean-field' or 'triangle'");
  if (long_kind == "triangle") {
    const int effective = range == 0 ? n / 2 : range;
    if (effective < 1 || effective > n / 2)
      throw ConfigError("model.range must lie in [1, n/2]");
  }
  if (h_count < 1) throw ConfigError("field.count must be >= 1");
  if (h_count > 1 && h_stop <= h_start) throw ConfigError("field.stop must exceed field.start");
  if (steps < 1) throw ConfigError("sampler.steps must be >= 1");
  if (burn_in < 0 || burn_in >= steps) throw ConfigError("sampler.burn_in must lie in [0, steps)");
  if (thinning < 1) throw ConfigError("sampler.thinning must be >= 1");
  if (init != "all-empty" && init != "all-full" && init != "bernoulli" && init != "exact")
    throw ConfigError("sampler.init must be all-empty, all-full, bernoulli or exact");
  if (init_density < 0.0 || init_density > 1.0) throw ConfigError("sampler.init_density must lie in [0,1]");
  if (sample_method != "classical" && sample_method != "coupled")
    throw ConfigError("sampler.method must be 'classical' or 'coupled'");
  if (replicates < 1) throw ConfigError("sweep.replicates must be >= 1");
  if (qs.empty()) throw ConfigError("sweep.q must not be empty");
  for (int q : qs)
    if (q < 1 || n % q != 0)
      throw ConfigError("sweep.q entry " + std::to_string(q) + " must divide n=" + std::to_string(n));
  for (int q : bench_qs)
    if (q < 1 || n % q != 0)
      throw ConfigError("bench.q entry " + std::to_string(q) + " must divide n=" + std::to_string(n));
  if (bench_steps < 1) throw ConfigError("bench.steps must be >= 1");
  if (threads < 0) throw ConfigError("run.threads must be >= 0");
  if (out_dir.empty()) throw ConfigError("run.out must not be empty");
}

ModelSpec ExperimentConfig::model_at(double field) const {
  ModelSpec m;
  m.lattice.n = n;
  m.short_range.strength = k;
  if (long_kind == "mean-field") {
    m.long_range = MeanFieldKernel{j};
  } else {
    m.long_range = make_triangle_kernel(n, range == 0 ? n / 2 : range, j);
  }
  m.field = field;
  return m;
}

std::vector<double> ExperimentConfig::field_grid() const {
  std::vector<double> grid(static_cast<std::size_t>(h_count));
  for (int i = 0; i < h_count; ++i)
    grid[static_cast<std::size_t>(i)] =
        h_count == 1 ? h_start : h_start + (h_stop - h_start) * i / (h_count - 1);
  return grid;
}

InitMode ExperimentConfig::init_mode() const {
  if (init == "all-empty") return InitMode::AllEmpty;
  if (init == "all-full") return InitMode::AllFull;
  return InitMode::Bernoulli;  // "bernoulli" and "exact" (density chosen per point)
}

std::uint64_t chain_seed(std::uint64_t base, double field, int method_tag, int replicate) {
  return base ^ stable_hash({double_bits(field), static_cast<std::uint64_t>(method_tag),
                             static_cast<std::uint64_t>(replicate)});
}

}  // namespace cgmc
