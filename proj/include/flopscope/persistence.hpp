// persistence.hpp
//
// Run directories and the on-disk formats. Every run gets
// <output_dir>/<run_id>/ with manifest.json written before any results;
// result CSVs carry the run id in every row. CSV numbers use '.' decimals
// and 9 significant digits, fields never contain commas (lists use '|'),
// and a header row is mandatory.

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "flopscope/anomaly.hpp"
#include "flopscope/backend.hpp"
#include "flopscope/experiments.hpp"
#include "flopscope/expr.hpp"

namespace flopscope {

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// %.9g with the C locale: stable, diffable, round-trippable to 9 digits.
std::string fmt_double(double v);

std::string iso8601_utc_now();

// FNV-1a over the string, as 16 hex chars. Used for deterministic run ids.
std::string stable_hash_hex(const std::string& s);

// ---- JSON shapes -----------------------------------------------------------

nlohmann::json instance_to_json(const Instance& inst);
Instance instance_from_json(const nlohmann::json& j);

nlohmann::json step_to_json(const Step& step);
Step step_from_json(const nlohmann::json& j);

// Bound form: steps carry concrete sizes.
nlohmann::json algorithm_to_json(int id, const std::vector<Step>& steps);

nlohmann::json verdict_to_json(const Verdict& v);
Verdict verdict_from_json(const nlohmann::json& j);

// ---- Run manifest ----------------------------------------------------------

struct RunManifest {
  std::string run_id;
  std::string tool_version;
  nlohmann::json config;  // effective configuration snapshot
  std::uint64_t rng_seed = 0;
  MachineConfig machine;
  std::string started;
  std::string finished;
};

nlohmann::json manifest_to_json(const RunManifest& m);
RunManifest manifest_from_json(const nlohmann::json& j);

// Creates <root>/<run_id>/ and writes the manifest up front; finish()
// stamps the finished time and rewrites it.
class RunWriter {
 public:
  RunWriter(std::filesystem::path root, RunManifest manifest);

  const std::filesystem::path& dir() const { return dir_; }
  const std::string& run_id() const { return manifest_.run_id; }

  void write_text(const std::string& filename, const std::string& content) const;
  void write_json(const std::string& filename, const nlohmann::json& j) const;
  void finish();

 private:
  std::filesystem::path dir_;
  RunManifest manifest_;
};

RunManifest read_manifest(const std::filesystem::path& run_dir);

// ---- CSV formats -----------------------------------------------------------

// Verdict rows: run_id,kind,d0..dK,cheapest_ids,fastest_ids,time_score,
// flop_score,is_anomaly (id lists '|'-joined, is_anomaly 0/1).
std::string verdicts_to_csv(const std::string& run_id, const ExpressionKind& kind,
                            const std::vector<Verdict>& verdicts);

struct VerdictFile {
  std::string run_id;
  std::vector<Verdict> verdicts;
};
VerdictFile read_verdicts_csv(const std::filesystem::path& path);

struct RegionRecord {
  int origin_index = 0;  // which anomaly of the input file the region belongs to
  Region region;
};
std::string regions_to_csv(const std::string& run_id, const ExpressionKind& kind,
                           const std::vector<RegionRecord>& records);
std::vector<RegionRecord> read_regions_csv(const std::filesystem::path& path);

struct LineSampleRecord {
  int origin_index = 0;
  int dimension_index = 0;
  Dim position = 0;
  Verdict verdict;
};
std::string line_samples_to_csv(const std::string& run_id, const ExpressionKind& kind,
                                const std::vector<LineSampleRecord>& records);
std::vector<LineSampleRecord> read_line_samples_csv(const std::filesystem::path& path);

// Per-step timing rows in long form; step_index -1 holds the whole
// algorithm with kernel "all".
struct StepTimingRecord {
  int origin_index = 0;
  int dimension_index = 0;
  Dim position = 0;
  int algorithm_id = 0;
  int step_index = -1;
  std::string kernel = "all";
  bool transpose_a = false, transpose_b = false;
  Dim m = 0, n = 0, k = 0;
  FlopCount flops = 0;
  double median_seconds = 0.0;
  double efficiency = 0.0;
};
std::string step_timings_to_csv(const std::string& run_id,
                                const std::vector<StepTimingRecord>& records);
std::vector<StepTimingRecord> read_step_timings_csv(const std::filesystem::path& path);

struct PredictionRecord {
  int sample_index = 0;
  bool actual_anomaly = false;
  Verdict predicted;
};
std::string predictions_to_csv(const std::string& run_id, const ExpressionKind& kind,
                               const std::vector<PredictionRecord>& records);

std::string confusion_to_csv(const std::string& run_id, const ConfusionMatrix& cm,
                             const Metrics& m);

struct BenchRecord {
  std::string kernel;
  Dim size = 0;
  Dim m = 0, n = 0, k = 0;
  FlopCount flops = 0;
  double median_seconds = 0.0;
  double efficiency = 0.0;
};
std::string bench_to_csv(const std::string& run_id, const std::vector<BenchRecord>& records);

void write_file(const std::filesystem::path& path, const std::string& content);
std::string read_file(const std::filesystem::path& path);

// Splits a CSV file into rows of fields. Checks the expected header; throws
// IoError carrying the 1-based row number on malformed rows.
std::vector<std::vector<std::string>> read_csv(const std::filesystem::path& path,
                                               const std::string& expected_header_prefix);

}  // namespace flopscope
