#include "flopscope/config.hpp"

#include <cmath>
#include <stdexcept>

#include "flopscope/persistence.hpp"
#ifdef FLOPSCOPE_HAVE_CBLAS
#include "flopscope/cblas_backend.hpp"
#endif

namespace flopscope {

namespace {

std::vector<Dim> dim_list(const nlohmann::json& j) {
  if (j.is_number()) return {j.get<Dim>()};
  return j.get<std::vector<Dim>>();
}

// Accepts a number or the string "inf" (useful for zero-cost copies).
double bandwidth_value(const nlohmann::json& j) {
  if (j.is_string()) {
    if (j.get<std::string>() == "inf") return std::numeric_limits<double>::infinity();
    throw std::invalid_argument("copy_bandwidth must be a number or \"inf\"");
  }
  return j.get<double>();
}

KernelCurve curve_from_json(const nlohmann::json& j, const KernelCurve& base) {
  KernelCurve c = base;
  c.e_max = j.value("e_max", c.e_max);
  c.tau = j.value("tau", c.tau);
  if (j.contains("overrides")) {
    c.overrides.clear();
    for (const auto& pair : j.at("overrides"))
      c.overrides.emplace_back(pair.at(0).get<Dim>(), pair.at(1).get<double>());
  }
  return c;
}

nlohmann::json curve_to_json(const KernelCurve& c) {
  nlohmann::json overrides = nlohmann::json::array();
  for (const auto& [threshold, e] : c.overrides) overrides.push_back({threshold, e});
  return {{"e_max", c.e_max}, {"tau", c.tau}, {"overrides", std::move(overrides)}};
}

}  // namespace

Config Config::from_json(const nlohmann::json& j) {
  Config c;
  if (j.contains("expression")) c.expression = ExpressionKind::parse(j.at("expression").get<std::string>());
  if (j.contains("space")) {
    const auto& s = j.at("space");
    if (s.contains("lower")) c.space_lower = dim_list(s.at("lower"));
    if (s.contains("upper")) c.space_upper = dim_list(s.at("upper"));
    c.space_step = s.value("step", c.space_step);
  }
  if (j.contains("thresholds")) {
    const auto& t = j.at("thresholds");
    c.search_threshold = t.value("search", c.search_threshold);
    c.traversal_threshold = t.value("traversal", c.traversal_threshold);
  }
  if (j.contains("protocol")) {
    const auto& p = j.at("protocol");
    c.protocol.repetitions = p.value("repetitions", c.protocol.repetitions);
    c.protocol.flush_before_each_repetition =
        p.value("flush_before_each_repetition", c.protocol.flush_before_each_repetition);
    c.protocol.flush_multiplier = p.value("flush_multiplier", c.protocol.flush_multiplier);
  }
  c.backend = j.value("backend", c.backend);
  if (j.contains("profile")) {
    const auto& p = j.at("profile");
    if (p.contains("gemm")) c.profile.gemm = curve_from_json(p.at("gemm"), c.profile.gemm);
    if (p.contains("syrk")) c.profile.syrk = curve_from_json(p.at("syrk"), c.profile.syrk);
    if (p.contains("symm")) c.profile.symm = curve_from_json(p.at("symm"), c.profile.symm);
    if (p.contains("copy_bandwidth")) c.profile.copy_bandwidth = bandwidth_value(p.at("copy_bandwidth"));
    c.profile.noise_stddev = p.value("noise_stddev", c.profile.noise_stddev);
    c.profile.rng_seed = p.value("rng_seed", c.profile.rng_seed);
  }
  if (j.contains("machine")) {
    const auto& m = j.at("machine");
    c.machine.peak_flops = m.value("peak_flops", c.machine.peak_flops);
    c.machine.llc_bytes = m.value("llc_bytes", c.machine.llc_bytes);
    c.machine.thread_count = m.value("thread_count", c.machine.thread_count);
  }
  c.seed = j.value("seed", c.seed);
  c.output_dir = j.value("output_dir", c.output_dir);
  c.run_id = j.value("run_id", c.run_id);
  if (j.contains("search")) {
    const auto& s = j.at("search");
    c.target_anomalies = s.value("target_anomalies", c.target_anomalies);
    c.max_samples = s.value("max_samples", c.max_samples);
  }
  if (j.contains("bench")) {
    const auto& b = j.at("bench");
    if (b.contains("sizes")) c.bench_sizes = b.at("sizes").get<std::vector<Dim>>();
    else if (b.contains("from")) {
      const Dim from = b.at("from").get<Dim>();
      const Dim to = b.value("to", from);
      const Dim step = b.value("step", Dim{100});
      if (step < 1) throw std::invalid_argument("bench.step must be >= 1");
      std::vector<Dim> sizes;
      for (Dim s = from; s <= to; s += step) sizes.push_back(s);
      c.bench_sizes = std::move(sizes);
    }
  }
  if (j.contains("explore")) c.overshoot = j.at("explore").value("overshoot", c.overshoot);
  if (j.contains("report")) c.hist_bin_width = j.at("report").value("hist_bin_width", c.hist_bin_width);
  return c;
}

nlohmann::json Config::to_json() const {
  nlohmann::json bandwidth;
  if (std::isinf(profile.copy_bandwidth)) bandwidth = "inf";
  else bandwidth = profile.copy_bandwidth;
  std::vector<Dim> bench = bench_sizes.has_value() ? *bench_sizes : std::vector<Dim>{};
  if (!bench_sizes.has_value())
    for (Dim s = 100; s <= 2400; s += 100) bench.push_back(s);
  return {
      {"expression", expression.name()},
      {"space", {{"lower", space_lower}, {"upper", space_upper}, {"step", space_step}}},
      {"thresholds", {{"search", search_threshold}, {"traversal", traversal_threshold}}},
      {"protocol",
       {{"repetitions", protocol.repetitions},
        {"flush_before_each_repetition", protocol.flush_before_each_repetition},
        {"flush_multiplier", protocol.flush_multiplier}}},
      {"backend", backend},
      {"profile",
       {{"gemm", curve_to_json(profile.gemm)},
        {"syrk", curve_to_json(profile.syrk)},
        {"symm", curve_to_json(profile.symm)},
        {"copy_bandwidth", bandwidth},
        {"noise_stddev", profile.noise_stddev},
        {"rng_seed", profile.rng_seed}}},
      {"machine",
       {{"peak_flops", machine.peak_flops},
        {"llc_bytes", machine.llc_bytes},
        {"thread_count", machine.thread_count}}},
      {"seed", seed},
      {"output_dir", output_dir},
      {"run_id", run_id},
      {"search", {{"target_anomalies", target_anomalies}, {"max_samples", max_samples}}},
      {"bench", {{"sizes", bench}}},
      {"explore", {{"overshoot", overshoot}}},
      {"report", {{"hist_bin_width", hist_bin_width}}},
  };
}

void Config::validate() const {
  protocol.validate();
  machine.validate();
  profile.validate();
  Thresholds{search_threshold}.validate();
  Thresholds{traversal_threshold}.validate();
  search_space().validate(expression.dim_count());
  if (backend != "synthetic" && backend != "real")
    throw std::invalid_argument("backend must be \"synthetic\" or \"real\"");
  if (target_anomalies < 1) throw std::invalid_argument("search.target_anomalies must be >= 1");
  if (max_samples < target_anomalies)
    throw std::invalid_argument("search.max_samples must be >= target_anomalies");
  if (overshoot < 0) throw std::invalid_argument("explore.overshoot must be >= 0");
  if (hist_bin_width < 1) throw std::invalid_argument("report.hist_bin_width must be >= 1");
}

SearchSpace Config::search_space() const {
  auto expand = [&](const std::vector<Dim>& v) {
    if (static_cast<int>(v.size()) == expression.dim_count()) return v;
    if (v.size() == 1) return std::vector<Dim>(static_cast<size_t>(expression.dim_count()), v[0]);
    throw std::invalid_argument("space bounds must be a scalar or one value per dimension");
  };
  SearchSpace s;
  s.lower = expand(space_lower);
  s.upper = expand(space_upper);
  s.step = space_step;
  return s;
}

std::vector<Dim> Config::effective_bench_sizes() const {
  if (bench_sizes.has_value()) {
    if (bench_sizes->empty()) throw std::invalid_argument("bench size sweep is empty");
    return *bench_sizes;
  }
  std::vector<Dim> sizes;
  for (Dim s = 100; s <= 2400; s += 100) sizes.push_back(s);
  return sizes;
}

std::string Config::effective_run_id(const std::string& command) const {
  if (run_id != "auto") return run_id;
  nlohmann::json j = to_json();
  j.erase("output_dir");
  j.erase("run_id");
  j["command"] = command;
  return "run-" + stable_hash_hex(j.dump());
}

std::unique_ptr<Backend> Config::make_backend() const {
  if (backend == "synthetic") return std::make_unique<SyntheticBackend>(machine, profile);
#ifdef FLOPSCOPE_HAVE_CBLAS
  if (backend == "real") return std::make_unique<CblasBackend>(machine, seed);
#else
  if (backend == "real")
    throw BackendError(-1, "real backend not available: built without CBLAS");
#endif
  throw std::invalid_argument("unknown backend: " + backend);
}

Config load_config_file(const std::string& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument(path + ": " + e.what());
  }
  return Config::from_json(j);
}

}  // namespace flopscope
