// flopscope: enumerates the equivalent kernel-call algorithms of a dense
// linear algebra expression, measures or models their execution times, and
// maps where the minimum-FLOP choice fails to be the fastest.
//
// Subcommands:
//   bench    kernel efficiency sweep over square sizes
//   search   random anomaly search over the dimension box
//   explore  axis-aligned line traversal around known anomalies
//   predict  anomaly prediction from isolated kernel benchmarks
//   report   plot data files for a finished run
//
// Exit codes: 0 success, 1 usage, 2 backend failure, 3 I/O.

#include <filesystem>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "flopscope/config.hpp"
#include "flopscope/measure.hpp"
#include "flopscope/persistence.hpp"
#include "flopscope/report.hpp"

namespace stdfs = std::filesystem;
using namespace flopscope;

namespace {

struct CommonOpts {
  std::string config_path;
  std::string expression, backend, output_dir, run_id;
  std::uint64_t seed = 0, profile_seed = 0;
  std::vector<Dim> space_lower, space_upper, bench_sizes;
  Dim bench_from = 0, bench_to = 0, bench_step = 100;
  int space_step = 0, repetitions = 0, target_anomalies = 0, max_samples = 0, overshoot = 0,
      threads = 0;
  std::int64_t llc_bytes = 0, hist_bin_width = 0;
  double search_threshold = 0, traversal_threshold = 0, threshold = 0, flush_multiplier = 0,
         peak_flops = 0, gemm_emax = 0, gemm_tau = 0, syrk_emax = 0, syrk_tau = 0, symm_emax = 0,
         symm_tau = 0, copy_bandwidth = 0, noise_stddev = 0;
  bool flush = true;
};

void add_common_options(CLI::App* sub, CommonOpts& o) {
  sub->add_option("--config", o.config_path, "JSON configuration file");
  sub->add_option("--expression", o.expression, "expression kind: chainN or aatb");
  sub->add_option("--seed", o.seed, "RNG seed for sampling and operand fills");
  sub->add_option("--backend", o.backend, "backend: synthetic or real");
  sub->add_option("--output-dir", o.output_dir, "directory holding run directories");
  sub->add_option("--run-id", o.run_id, "run id ('auto' hashes the configuration)");
  sub->add_option("--space-lower", o.space_lower, "lower bounds (scalar or per dimension)")
      ->delimiter(',');
  sub->add_option("--space-upper", o.space_upper, "upper bounds (scalar or per dimension)")
      ->delimiter(',');
  sub->add_option("--space-step", o.space_step, "traversal stride");
  sub->add_option("--search-threshold", o.search_threshold, "time score threshold for search");
  sub->add_option("--traversal-threshold", o.traversal_threshold,
                  "time score threshold for explore/predict");
  sub->add_option("--threshold", o.threshold, "threshold for this command (overrides config)");
  sub->add_option("--repetitions", o.repetitions, "timing repetitions per measurement");
  sub->add_flag("--flush,!--no-flush", o.flush, "flush the cache before each repetition");
  sub->add_option("--flush-multiplier", o.flush_multiplier, "flush buffer = multiplier x llc_bytes");
  sub->add_option("--peak-flops", o.peak_flops, "theoretical peak FLOP/s");
  sub->add_option("--llc-bytes", o.llc_bytes, "last-level cache size in bytes");
  sub->add_option("--threads", o.threads, "kernel library thread count (documentation only)");
  sub->add_option("--gemm-emax", o.gemm_emax, "synthetic GEMM plateau efficiency");
  sub->add_option("--gemm-tau", o.gemm_tau, "synthetic GEMM ramp constant");
  sub->add_option("--syrk-emax", o.syrk_emax, "synthetic SYRK plateau efficiency");
  sub->add_option("--syrk-tau", o.syrk_tau, "synthetic SYRK ramp constant");
  sub->add_option("--symm-emax", o.symm_emax, "synthetic SYMM plateau efficiency");
  sub->add_option("--symm-tau", o.symm_tau, "synthetic SYMM ramp constant");
  sub->add_option("--copy-bandwidth", o.copy_bandwidth, "synthetic copy bandwidth, bytes/s");
  sub->add_option("--noise-stddev", o.noise_stddev, "synthetic relative timing noise");
  sub->add_option("--profile-seed", o.profile_seed, "synthetic noise RNG seed");
}

Config build_config(CLI::App* sub, CommonOpts& o, const std::string& command) {
  Config cfg = o.config_path.empty() ? Config{} : load_config_file(o.config_path);
  auto has = [&](const std::string& name) { return sub->count(name) > 0; };

  if (has("--expression")) cfg.expression = ExpressionKind::parse(o.expression);
  if (has("--seed")) cfg.seed = o.seed;
  if (has("--backend")) cfg.backend = o.backend;
  if (has("--output-dir")) cfg.output_dir = o.output_dir;
  if (has("--run-id")) cfg.run_id = o.run_id;
  if (has("--space-lower")) cfg.space_lower = o.space_lower;
  if (has("--space-upper")) cfg.space_upper = o.space_upper;
  if (has("--space-step")) cfg.space_step = o.space_step;
  if (has("--search-threshold")) cfg.search_threshold = o.search_threshold;
  if (has("--traversal-threshold")) cfg.traversal_threshold = o.traversal_threshold;
  if (has("--threshold")) {
    if (command == "search") cfg.search_threshold = o.threshold;
    else cfg.traversal_threshold = o.threshold;
  }
  if (has("--repetitions")) cfg.protocol.repetitions = o.repetitions;
  if (has("--flush") || has("--no-flush")) cfg.protocol.flush_before_each_repetition = o.flush;
  if (has("--flush-multiplier")) cfg.protocol.flush_multiplier = o.flush_multiplier;
  if (has("--peak-flops")) cfg.machine.peak_flops = o.peak_flops;
  if (has("--llc-bytes")) cfg.machine.llc_bytes = o.llc_bytes;
  if (has("--threads")) cfg.machine.thread_count = o.threads;
  if (has("--gemm-emax")) cfg.profile.gemm.e_max = o.gemm_emax;
  if (has("--gemm-tau")) cfg.profile.gemm.tau = o.gemm_tau;
  if (has("--syrk-emax")) cfg.profile.syrk.e_max = o.syrk_emax;
  if (has("--syrk-tau")) cfg.profile.syrk.tau = o.syrk_tau;
  if (has("--symm-emax")) cfg.profile.symm.e_max = o.symm_emax;
  if (has("--symm-tau")) cfg.profile.symm.tau = o.symm_tau;
  if (has("--copy-bandwidth")) cfg.profile.copy_bandwidth = o.copy_bandwidth;
  if (has("--noise-stddev")) cfg.profile.noise_stddev = o.noise_stddev;
  if (has("--profile-seed")) cfg.profile.rng_seed = o.profile_seed;
  if (has("--target-anomalies")) cfg.target_anomalies = o.target_anomalies;
  if (has("--max-samples")) cfg.max_samples = o.max_samples;
  if (has("--overshoot")) cfg.overshoot = o.overshoot;
  if (has("--hist-bin-width")) cfg.hist_bin_width = o.hist_bin_width;
  if (has("--bench-sizes")) cfg.bench_sizes = o.bench_sizes;
  else if (has("--bench-from")) {
    std::vector<Dim> sizes;
    const Dim to = has("--bench-to") ? o.bench_to : o.bench_from;
    if (o.bench_step < 1) throw std::invalid_argument("--bench-step must be >= 1");
    for (Dim s = o.bench_from; s <= to; s += o.bench_step) sizes.push_back(s);
    cfg.bench_sizes = std::move(sizes);
  }

  cfg.validate();
  return cfg;
}

RunManifest make_manifest(const Config& cfg, const std::string& command,
                          const std::string& input = "") {
  RunManifest m;
  m.run_id = cfg.effective_run_id(command);
  m.tool_version = std::string(kToolName) + " " + kToolVersion;
  m.config = cfg.to_json();
  m.config["command"] = command;
  if (!input.empty()) m.config["input"] = input;
  m.rng_seed = cfg.seed;
  m.machine = cfg.machine;
  return m;
}

stdfs::path resolve_input(const std::string& given, const char* default_name) {
  stdfs::path p(given);
  if (stdfs::is_directory(p)) return p / default_name;
  return p;
}

// ---- bench ------------------------------------------------------------------

Step square_call(const std::string& kernel, Dim s) {
  Step step;
  step.kind = step_kind_from_name(kernel);
  step.m = s;
  if (step.kind == StepKind::Gemm) step.n = step.k = s;
  if (step.kind == StepKind::Syrk) step.k = s;
  if (step.kind == StepKind::Symm) step.n = s;
  return step;
}

int run_bench(const Config& cfg) {
  const std::vector<Dim> sizes = cfg.effective_bench_sizes();
  auto backend = cfg.make_backend();
  RunWriter run(cfg.output_dir, make_manifest(cfg, "bench"));

  std::vector<BenchRecord> records;
  for (Dim s : sizes) {
    for (const char* kernel : {"gemm", "syrk", "symm"}) {
      const Step call = square_call(kernel, s);
      const TimingSample sample = measure_call_isolated(*backend, call, cfg.protocol);
      records.push_back(
          {kernel, s, call.m, call.n, call.k, sample.flops, sample.median_seconds, sample.efficiency});
    }
  }
  run.write_text("bench.csv", bench_to_csv(run.run_id(), records));
  run.finish();
  std::cout << "bench: " << records.size() << " kernel timings over " << sizes.size()
            << " sizes\nrun directory: " << run.dir().string() << "\n";
  return 0;
}

// ---- search -----------------------------------------------------------------

int run_search(const Config& cfg) {
  auto backend = cfg.make_backend();
  RunWriter run(cfg.output_dir, make_manifest(cfg, "search"));

  RandomSearchConfig rsc{cfg.seed, cfg.target_anomalies, cfg.max_samples,
                         Thresholds{cfg.search_threshold}};
  const RandomSearchResult result =
      random_search(cfg.expression, cfg.search_space(), rsc, *backend, cfg.protocol);

  std::vector<Verdict> anomalies;
  nlohmann::json anomalies_json = nlohmann::json::array();
  for (int idx : result.anomaly_indices) {
    anomalies.push_back(result.verdicts[static_cast<size_t>(idx)]);
    anomalies_json.push_back(verdict_to_json(result.verdicts[static_cast<size_t>(idx)]));
  }

  run.write_text("samples.csv", verdicts_to_csv(run.run_id(), cfg.expression, result.verdicts));
  run.write_text("anomalies.csv", verdicts_to_csv(run.run_id(), cfg.expression, anomalies));
  run.write_json("anomalies.json", anomalies_json);
  run.write_json("summary.json", {{"samples", result.sample_count},
                                  {"anomalies", anomalies.size()},
                                  {"abundance", result.abundance()},
                                  {"reached_target", result.reached_target},
                                  {"partial", !result.reached_target}});
  run.finish();

  std::cout << "search: " << result.sample_count << " samples, " << anomalies.size()
            << " anomalies (abundance " << fmt_double(100.0 * result.abundance()) << "%)"
            << (result.reached_target ? "" : " [partial: max_samples reached]") << "\n"
            << "run directory: " << run.dir().string() << "\n";
  return 0;
}

// ---- explore ----------------------------------------------------------------

void append_step_timings(std::vector<StepTimingRecord>& out, int origin_index, int dimension_index,
                         Dim position, const std::vector<Algorithm>& algorithms,
                         const LineSample& sample) {
  for (size_t a = 0; a < sample.timings.size(); ++a) {
    const AlgorithmTiming& t = sample.timings[a];
    const std::vector<Step> steps = bind_steps(algorithms[a], sample.verdict.instance);
    StepTimingRecord whole{origin_index, dimension_index, position, t.algorithm_id, -1,
                           "all", false, false, 0, 0, 0,
                           t.total.flops, t.total.median_seconds, t.total.efficiency};
    out.push_back(std::move(whole));
    for (size_t si = 0; si < t.per_step.size(); ++si) {
      const Step& s = steps.at(si);
      out.push_back({origin_index, dimension_index, position, t.algorithm_id,
                     static_cast<int>(si), step_kind_name(s.kind), s.transpose_a, s.transpose_b,
                     s.m, s.n, s.k, t.per_step[si].flops, t.per_step[si].median_seconds,
                     t.per_step[si].efficiency});
    }
  }
}

int run_explore(const Config& cfg, const std::string& input) {
  const stdfs::path input_path = resolve_input(input, "anomalies.csv");
  const VerdictFile in = read_verdicts_csv(input_path);

  auto backend = cfg.make_backend();
  RunWriter run(cfg.output_dir, make_manifest(cfg, "explore", input_path.string()));

  const SearchSpace space = cfg.search_space();
  const Thresholds thresholds{cfg.traversal_threshold};
  const TraversalOptions options{cfg.overshoot};
  const std::vector<Algorithm> algorithms = enumerate_algorithms(cfg.expression);

  std::vector<RegionRecord> regions;
  std::vector<LineSampleRecord> line_samples;
  std::vector<StepTimingRecord> step_timings;
  int origins = 0, skipped = 0;

  for (size_t i = 0; i < in.verdicts.size(); ++i) {
    const Verdict& origin = in.verdicts[i];
    if (!origin.is_anomaly) continue;  // tolerate a full samples file as input
    if (!(origin.instance.kind == cfg.expression))
      throw std::invalid_argument("input expression kind does not match configuration");
    try {
      std::vector<RegionRecord> local_regions;
      std::vector<LineSampleRecord> local_samples;
      std::vector<StepTimingRecord> local_timings;
      for (const LineTraversal& line :
           explore_regions(origin.instance, space, *backend, cfg.protocol, thresholds, options)) {
        local_regions.push_back({static_cast<int>(i), line.region});
        for (const LineSample& s : line.samples) {
          local_samples.push_back(
              {static_cast<int>(i), line.region.dimension_index, s.position, s.verdict});
          append_step_timings(local_timings, static_cast<int>(i), line.region.dimension_index,
                              s.position, algorithms, s);
        }
      }
      regions.insert(regions.end(), local_regions.begin(), local_regions.end());
      line_samples.insert(line_samples.end(), local_samples.begin(), local_samples.end());
      step_timings.insert(step_timings.end(), local_timings.begin(), local_timings.end());
      ++origins;
    } catch (const OriginNotAnomalous& e) {
      std::cerr << "warning: anomaly " << i << " skipped: " << e.what() << "\n";
      ++skipped;
    }
  }

  run.write_text("regions.csv", regions_to_csv(run.run_id(), cfg.expression, regions));
  run.write_text("line_samples.csv",
                 line_samples_to_csv(run.run_id(), cfg.expression, line_samples));
  run.write_text("step_timings.csv", step_timings_to_csv(run.run_id(), step_timings));
  run.write_json("summary.json", {{"origins", origins},
                                  {"skipped", skipped},
                                  {"regions", regions.size()},
                                  {"line_samples", line_samples.size()}});
  run.finish();

  std::cout << "explore: " << origins << " origins, " << regions.size() << " regions, "
            << line_samples.size() << " line samples"
            << (skipped ? " (" + std::to_string(skipped) + " skipped)" : "") << "\n"
            << "run directory: " << run.dir().string() << "\n";
  return 0;
}

// ---- predict ----------------------------------------------------------------

int run_predict(const Config& cfg, const std::string& input) {
  const stdfs::path input_path = resolve_input(input, "line_samples.csv");
  const std::vector<LineSampleRecord> records = read_line_samples_csv(input_path);

  auto backend = cfg.make_backend();
  RunWriter run(cfg.output_dir, make_manifest(cfg, "predict", input_path.string()));

  std::vector<Instance> instances;
  std::vector<bool> actual;
  instances.reserve(records.size());
  for (const LineSampleRecord& r : records) {
    if (!(r.verdict.instance.kind == cfg.expression))
      throw std::invalid_argument("input expression kind does not match configuration");
    instances.push_back(r.verdict.instance);
    actual.push_back(r.verdict.is_anomaly);
  }

  const PredictionResult prediction = predict_from_benchmarks(
      instances, *backend, cfg.protocol, Thresholds{cfg.traversal_threshold});

  std::vector<bool> predicted;
  std::vector<PredictionRecord> rows;
  for (size_t i = 0; i < prediction.verdicts.size(); ++i) {
    predicted.push_back(prediction.verdicts[i].is_anomaly);
    rows.push_back({static_cast<int>(i), actual[i], prediction.verdicts[i]});
  }
  const ConfusionMatrix cm = confusion(actual, predicted);
  const Metrics m = metrics(cm);

  run.write_text("predictions.csv", predictions_to_csv(run.run_id(), cfg.expression, rows));
  run.write_text("confusion.csv", confusion_to_csv(run.run_id(), cm, m));
  run.write_json("summary.json",
                 {{"samples", records.size()},
                  {"distinct_calls", prediction.distinct_calls},
                  {"tn", cm.tn},
                  {"fp", cm.fp},
                  {"fn", cm.fn},
                  {"tp", cm.tp},
                  {"recall", m.recall_defined ? nlohmann::json(m.recall) : nlohmann::json()},
                  {"precision", m.precision_defined ? nlohmann::json(m.precision) : nlohmann::json()}});
  run.finish();

  std::cout << "predict: " << records.size() << " samples, " << prediction.distinct_calls
            << " distinct calls benchmarked\n"
            << "confusion: tn=" << cm.tn << " fp=" << cm.fp << " fn=" << cm.fn << " tp=" << cm.tp
            << "\n";
  if (m.recall_defined) std::cout << "recall: " << fmt_double(m.recall) << "\n";
  if (m.precision_defined) std::cout << "precision: " << fmt_double(m.precision) << "\n";
  std::cout << "run directory: " << run.dir().string() << "\n";
  return 0;
}

// ---- report -----------------------------------------------------------------

int run_report(const Config& cfg, const std::string& run_dir_arg) {
  const stdfs::path run_dir(run_dir_arg);
  const RunManifest manifest = read_manifest(run_dir);
  const stdfs::path plots = run_dir / "plots";
  std::error_code ec;
  stdfs::create_directories(plots, ec);
  if (ec) throw IoError("cannot create " + plots.string() + ": " + ec.message());

  int files = 0;
  if (stdfs::exists(run_dir / "anomalies.csv")) {
    const VerdictFile anomalies = read_verdicts_csv(run_dir / "anomalies.csv");
    const PlotSeries scatter = emit_scatter(anomalies.verdicts);
    write_file(plots / (scatter.name + ".csv"), plot_series_to_csv(manifest.run_id, scatter));
    ++files;
  }
  if (stdfs::exists(run_dir / "regions.csv")) {
    const std::vector<RegionRecord> records = read_regions_csv(run_dir / "regions.csv");
    if (!records.empty()) {
      std::vector<Region> all;
      all.reserve(records.size());
      for (const RegionRecord& r : records) all.push_back(r.region);
      const int dim_count = records.front().region.origin.kind.dim_count();
      for (int d = 0; d < dim_count; ++d) {
        const PlotSeries hist = emit_thickness_histogram(all, d, cfg.hist_bin_width);
        write_file(plots / (hist.name + ".csv"), plot_series_to_csv(manifest.run_id, hist));
        ++files;
      }
    }
  }
  if (stdfs::exists(run_dir / "line_samples.csv") && stdfs::exists(run_dir / "step_timings.csv")) {
    const auto samples = read_line_samples_csv(run_dir / "line_samples.csv");
    const auto timings = read_step_timings_csv(run_dir / "step_timings.csv");

    // Reassemble per-line traversals: timings keyed by (origin, dim, position).
    std::map<std::pair<int, int>, std::vector<LineSample>> lines;
    std::map<std::tuple<int, int, Dim>, std::map<int, AlgorithmTiming>> by_sample;
    for (const StepTimingRecord& t : timings) {
      AlgorithmTiming& at = by_sample[{t.origin_index, t.dimension_index, t.position}][t.algorithm_id];
      at.algorithm_id = t.algorithm_id;
      TimingSample sample;
      sample.median_seconds = t.median_seconds;
      sample.flops = t.flops;
      sample.efficiency = t.efficiency;
      if (t.step_index < 0) {
        at.total = std::move(sample);
      } else {
        if (at.per_step.size() <= static_cast<size_t>(t.step_index))
          at.per_step.resize(static_cast<size_t>(t.step_index) + 1);
        at.per_step[static_cast<size_t>(t.step_index)] = std::move(sample);
      }
    }
    for (const LineSampleRecord& r : samples) {
      std::vector<AlgorithmTiming> ts;
      auto it = by_sample.find({r.origin_index, r.dimension_index, r.position});
      if (it == by_sample.end())
        throw IoError("step_timings.csv misses sample at position " + std::to_string(r.position));
      for (auto& [id, at] : it->second) ts.push_back(at);
      lines[{r.origin_index, r.dimension_index}].push_back({r.position, r.verdict, std::move(ts)});
    }
    for (auto& [key, line_samples] : lines) {
      std::sort(line_samples.begin(), line_samples.end(),
                [](const LineSample& x, const LineSample& y) { return x.position < y.position; });
      const Instance& origin = line_samples.front().verdict.instance;
      LineTraversal line{Region{origin, key.second, 0, 0, 0, {}, false, false},
                         std::move(line_samples)};
      const std::string prefix =
          "efficiency_line_o" + std::to_string(key.first) + "_d" + std::to_string(key.second);
      for (const PlotSeries& s : emit_efficiency_lines(line, prefix)) {
        write_file(plots / (s.name + ".csv"), plot_series_to_csv(manifest.run_id, s));
        ++files;
      }
    }
  }

  std::cout << "report: " << files << " plot files\nplots directory: " << plots.string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"kernel-call algorithm timing and FLOP-count anomaly mapping"};
  app.require_subcommand(1);

  CommonOpts bench_opts, search_opts, explore_opts, predict_opts, report_opts;
  std::string explore_input, predict_input, report_dir;

  CLI::App* bench = app.add_subcommand("bench", "benchmark kernel efficiency over square sizes");
  add_common_options(bench, bench_opts);
  bench->add_option("--bench-sizes", bench_opts.bench_sizes, "explicit size list")->delimiter(',');
  bench->add_option("--bench-from", bench_opts.bench_from, "sweep start");
  bench->add_option("--bench-to", bench_opts.bench_to, "sweep end (inclusive)");
  bench->add_option("--bench-step", bench_opts.bench_step, "sweep stride");

  CLI::App* search = app.add_subcommand("search", "random anomaly search");
  add_common_options(search, search_opts);
  search->add_option("--target-anomalies", search_opts.target_anomalies, "stop after this many");
  search->add_option("--max-samples", search_opts.max_samples, "sample budget");

  CLI::App* explore = app.add_subcommand("explore", "trace anomalous regions along lines");
  add_common_options(explore, explore_opts);
  explore->add_option("input", explore_input, "anomalies.csv or a search run directory")
      ->required();
  explore->add_option("--overshoot", explore_opts.overshoot, "extra samples past each boundary");

  CLI::App* predict = app.add_subcommand("predict", "predict anomalies from isolated benchmarks");
  add_common_options(predict, predict_opts);
  predict->add_option("input", predict_input, "line_samples.csv or an explore run directory")
      ->required();

  CLI::App* report = app.add_subcommand("report", "emit plot data for a run directory");
  add_common_options(report, report_opts);
  report->add_option("run_dir", report_dir, "run directory with a manifest")->required();
  report->add_option("--hist-bin-width", report_opts.hist_bin_width, "thickness histogram bins");

  try {
    app.parse(argc, argv);
    if (bench->parsed()) return run_bench(build_config(bench, bench_opts, "bench"));
    if (search->parsed()) return run_search(build_config(search, search_opts, "search"));
    if (explore->parsed())
      return run_explore(build_config(explore, explore_opts, "explore"), explore_input);
    if (predict->parsed())
      return run_predict(build_config(predict, predict_opts, "predict"), predict_input);
    if (report->parsed())
      return run_report(build_config(report, report_opts, "report"), report_dir);
    return 1;
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n";
    return 1;
  } catch (const BackendError& e) {
    std::cerr << "backend failure: " << e.what() << "\n";
    return 2;
  } catch (const IoError& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return 3;
  } catch (const stdfs::filesystem_error& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
