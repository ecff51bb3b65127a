#include "flopscope/persistence.hpp"

#include <cstdio>
#include <ctime>
#include <fstream>
#include <sstream>

namespace flopscope {

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

std::string iso8601_utc_now() {
  const std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string stable_hash_hex(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

namespace {

std::int64_t parse_int(const std::string& s) {
  size_t pos = 0;
  const long long v = std::stoll(s, &pos);
  if (pos != s.size()) throw std::invalid_argument("not an integer: '" + s + "'");
  return v;
}

double parse_double(const std::string& s) {
  size_t pos = 0;
  const double v = std::stod(s, &pos);
  if (pos != s.size()) throw std::invalid_argument("not a number: '" + s + "'");
  return v;
}

bool parse_bool(const std::string& s) {
  if (s == "1") return true;
  if (s == "0") return false;
  throw std::invalid_argument("not a 0/1 flag: '" + s + "'");
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

std::string join_ids(const std::vector<int>& ids) {
  std::string out;
  for (size_t i = 0; i < ids.size(); ++i) {
    if (i) out.push_back('|');
    out += std::to_string(ids[i]);
  }
  return out;
}

std::vector<int> parse_ids(const std::string& s) {
  std::vector<int> ids;
  if (s.empty()) return ids;
  for (const std::string& part : split(s, '|')) ids.push_back(static_cast<int>(parse_int(part)));
  return ids;
}

std::string join_dims(const std::vector<Dim>& dims) {
  std::string out;
  for (size_t i = 0; i < dims.size(); ++i) {
    if (i) out.push_back('|');
    out += std::to_string(dims[i]);
  }
  return out;
}

std::vector<Dim> parse_dim_list(const std::string& s) {
  std::vector<Dim> dims;
  if (s.empty()) return dims;
  for (const std::string& part : split(s, '|')) dims.push_back(parse_int(part));
  return dims;
}

std::string dims_header(const ExpressionKind& kind) {
  std::string out;
  for (int i = 0; i < kind.dim_count(); ++i) out += ",d" + std::to_string(i);
  return out;
}

const std::string kVerdictColumns = "cheapest_ids,fastest_ids,time_score,flop_score,is_anomaly";

void append_verdict_fields(std::string& out, const Verdict& v) {
  out += join_ids(v.cheapest_ids);
  out += ',';
  out += join_ids(v.fastest_ids);
  out += ',';
  out += fmt_double(v.time_score);
  out += ',';
  out += fmt_double(v.flop_score);
  out += ',';
  out += v.is_anomaly ? '1' : '0';
}

void append_instance_fields(std::string& out, const Instance& inst) {
  out += inst.kind.name();
  for (Dim d : inst.dims) {
    out += ',';
    out += std::to_string(d);
  }
}

// Parses "kind,d0..dK" starting at fields[at]; advances at past the dims.
Instance parse_instance_fields(const std::vector<std::string>& fields, size_t& at) {
  const ExpressionKind kind = ExpressionKind::parse(fields.at(at++));
  std::vector<Dim> dims;
  for (int i = 0; i < kind.dim_count(); ++i) dims.push_back(parse_int(fields.at(at++)));
  return Instance(kind, std::move(dims));
}

Verdict parse_verdict_fields(const std::vector<std::string>& fields, size_t& at) {
  Instance inst = parse_instance_fields(fields, at);
  std::vector<int> cheapest = parse_ids(fields.at(at++));
  std::vector<int> fastest = parse_ids(fields.at(at++));
  const double t_score = parse_double(fields.at(at++));
  const double f_score = parse_double(fields.at(at++));
  const bool anomaly = parse_bool(fields.at(at++));
  return Verdict{std::move(inst), std::move(cheapest), std::move(fastest), t_score, f_score, anomaly, {}};
}

}  // namespace

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  out << content;
  if (!out) throw IoError("write failed: " + path.string());
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::vector<std::string>> read_csv(const std::filesystem::path& path,
                                               const std::string& expected_header_prefix) {
  const std::string text = read_file(path);
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line_no == 1) {
      if (line.rfind(expected_header_prefix, 0) != 0)
        throw IoError(path.string() + ": row 1: unexpected header '" + line + "'");
      continue;
    }
    rows.push_back(split(line, ','));
  }
  if (line_no == 0) throw IoError(path.string() + ": row 1: missing header row");
  return rows;
}

// ---- JSON shapes -----------------------------------------------------------

nlohmann::json instance_to_json(const Instance& inst) {
  return {{"kind", inst.kind.name()}, {"dims", inst.dims}};
}

Instance instance_from_json(const nlohmann::json& j) {
  return Instance(ExpressionKind::parse(j.at("kind").get<std::string>()),
                  j.at("dims").get<std::vector<Dim>>());
}

nlohmann::json step_to_json(const Step& step) {
  nlohmann::json inputs = nlohmann::json::array();
  for (const OperandRef& ref : step.inputs)
    inputs.push_back({{"source", ref.source == OperandRef::Source::Operand ? "operand" : "intermediate"},
                      {"index", ref.index}});
  return {{"kind", step_kind_name(step.kind)},
          {"transpose_a", step.transpose_a},
          {"transpose_b", step.transpose_b},
          {"m", step.m},
          {"n", step.n},
          {"k", step.k},
          {"inputs", std::move(inputs)},
          {"output", step.output}};
}

Step step_from_json(const nlohmann::json& j) {
  Step s;
  s.kind = step_kind_from_name(j.at("kind").get<std::string>());
  s.transpose_a = j.at("transpose_a").get<bool>();
  s.transpose_b = j.at("transpose_b").get<bool>();
  s.m = j.at("m").get<Dim>();
  s.n = j.at("n").get<Dim>();
  s.k = j.at("k").get<Dim>();
  for (const auto& in : j.at("inputs")) {
    const std::string source = in.at("source").get<std::string>();
    const int index = in.at("index").get<int>();
    if (source == "operand") s.inputs.push_back(OperandRef::operand(index));
    else if (source == "intermediate") s.inputs.push_back(OperandRef::intermediate(index));
    else throw std::invalid_argument("unknown operand source: " + source);
  }
  s.output = j.at("output").get<int>();
  return s;
}

nlohmann::json algorithm_to_json(int id, const std::vector<Step>& steps) {
  nlohmann::json js = nlohmann::json::array();
  for (const Step& s : steps) js.push_back(step_to_json(s));
  return {{"id", id}, {"steps", std::move(js)}};
}

nlohmann::json verdict_to_json(const Verdict& v) {
  nlohmann::json per_alg = nlohmann::json::array();
  for (const AlgorithmResult& r : v.per_algorithm)
    per_alg.push_back({{"id", r.id},
                       {"flops", flops_to_int64(r.flops)},
                       {"median_seconds", r.seconds},
                       {"efficiency", r.efficiency}});
  return {{"instance", instance_to_json(v.instance)},
          {"cheapest_ids", v.cheapest_ids},
          {"fastest_ids", v.fastest_ids},
          {"time_score", v.time_score},
          {"flop_score", v.flop_score},
          {"is_anomaly", v.is_anomaly},
          {"per_algorithm", std::move(per_alg)}};
}

Verdict verdict_from_json(const nlohmann::json& j) {
  Verdict v{instance_from_json(j.at("instance")),
            j.at("cheapest_ids").get<std::vector<int>>(),
            j.at("fastest_ids").get<std::vector<int>>(),
            j.at("time_score").get<double>(),
            j.at("flop_score").get<double>(),
            j.at("is_anomaly").get<bool>(),
            {}};
  for (const auto& r : j.at("per_algorithm"))
    v.per_algorithm.push_back({r.at("id").get<int>(), r.at("flops").get<std::int64_t>(),
                               r.at("median_seconds").get<double>(), r.at("efficiency").get<double>()});
  return v;
}

// ---- Run manifest ----------------------------------------------------------

nlohmann::json manifest_to_json(const RunManifest& m) {
  return {{"run_id", m.run_id},
          {"tool_version", m.tool_version},
          {"rng_seed", m.rng_seed},
          {"machine",
           {{"peak_flops", m.machine.peak_flops},
            {"llc_bytes", m.machine.llc_bytes},
            {"thread_count", m.machine.thread_count}}},
          {"config", m.config},
          {"started", m.started},
          {"finished", m.finished}};
}

RunManifest manifest_from_json(const nlohmann::json& j) {
  RunManifest m;
  m.run_id = j.at("run_id").get<std::string>();
  m.tool_version = j.at("tool_version").get<std::string>();
  m.rng_seed = j.at("rng_seed").get<std::uint64_t>();
  m.machine.peak_flops = j.at("machine").at("peak_flops").get<double>();
  m.machine.llc_bytes = j.at("machine").at("llc_bytes").get<std::int64_t>();
  m.machine.thread_count = j.at("machine").at("thread_count").get<int>();
  m.config = j.at("config");
  m.started = j.at("started").get<std::string>();
  m.finished = j.at("finished").get<std::string>();
  return m;
}

RunWriter::RunWriter(std::filesystem::path root, RunManifest manifest)
    : dir_(root / manifest.run_id), manifest_(std::move(manifest)) {
  std::error_code ec;
  std::filesystem::create_directories(dir_, ec);
  if (ec) throw IoError("cannot create run directory " + dir_.string() + ": " + ec.message());
  if (manifest_.started.empty()) manifest_.started = iso8601_utc_now();
  write_json("manifest.json", manifest_to_json(manifest_));
}

void RunWriter::write_text(const std::string& filename, const std::string& content) const {
  write_file(dir_ / filename, content);
}

void RunWriter::write_json(const std::string& filename, const nlohmann::json& j) const {
  write_text(filename, j.dump(2) + "\n");
}

void RunWriter::finish() {
  manifest_.finished = iso8601_utc_now();
  write_json("manifest.json", manifest_to_json(manifest_));
}

RunManifest read_manifest(const std::filesystem::path& run_dir) {
  const std::string text = read_file(run_dir / "manifest.json");
  return manifest_from_json(nlohmann::json::parse(text));
}

// ---- CSV formats -----------------------------------------------------------

std::string verdicts_to_csv(const std::string& run_id, const ExpressionKind& kind,
                            const std::vector<Verdict>& verdicts) {
  std::string out = "run_id,kind" + dims_header(kind) + "," + kVerdictColumns + "\n";
  for (const Verdict& v : verdicts) {
    out += run_id;
    out += ',';
    append_instance_fields(out, v.instance);
    out += ',';
    append_verdict_fields(out, v);
    out += '\n';
  }
  return out;
}

VerdictFile read_verdicts_csv(const std::filesystem::path& path) {
  VerdictFile file;
  int row_no = 1;
  for (const auto& fields : read_csv(path, "run_id,kind")) {
    ++row_no;
    try {
      size_t at = 0;
      const std::string run_id = fields.at(at++);
      Verdict v = parse_verdict_fields(fields, at);
      if (at != fields.size()) throw std::invalid_argument("trailing fields");
      if (file.run_id.empty()) file.run_id = run_id;
      file.verdicts.push_back(std::move(v));
    } catch (const std::exception& e) {
      throw IoError(path.string() + ": row " + std::to_string(row_no) + ": " + e.what());
    }
  }
  return file;
}

std::string regions_to_csv(const std::string& run_id, const ExpressionKind& kind,
                           const std::vector<RegionRecord>& records) {
  std::string out = "run_id,origin_index,kind" + dims_header(kind) +
                    ",dimension_index,a,b,thickness,holes,hit_space_boundary_low,hit_space_boundary_high\n";
  for (const RegionRecord& rec : records) {
    const Region& r = rec.region;
    out += run_id;
    out += ',' + std::to_string(rec.origin_index) + ',';
    append_instance_fields(out, r.origin);
    out += ',' + std::to_string(r.dimension_index);
    out += ',' + std::to_string(r.a);
    out += ',' + std::to_string(r.b);
    out += ',' + std::to_string(r.thickness);
    out += ',' + join_dims(r.holes);
    out += r.hit_space_boundary_low ? ",1" : ",0";
    out += r.hit_space_boundary_high ? ",1" : ",0";
    out += '\n';
  }
  return out;
}

std::vector<RegionRecord> read_regions_csv(const std::filesystem::path& path) {
  std::vector<RegionRecord> records;
  int row_no = 1;
  for (const auto& fields : read_csv(path, "run_id,origin_index,kind")) {
    ++row_no;
    try {
      size_t at = 1;  // skip run_id
      const int origin_index = static_cast<int>(parse_int(fields.at(at++)));
      Instance origin = parse_instance_fields(fields, at);
      Region r{std::move(origin), 0, 0, 0, 0, {}, false, false};
      r.dimension_index = static_cast<int>(parse_int(fields.at(at++)));
      r.a = parse_int(fields.at(at++));
      r.b = parse_int(fields.at(at++));
      r.thickness = parse_int(fields.at(at++));
      r.holes = parse_dim_list(fields.at(at++));
      r.hit_space_boundary_low = parse_bool(fields.at(at++));
      r.hit_space_boundary_high = parse_bool(fields.at(at++));
      if (at != fields.size()) throw std::invalid_argument("trailing fields");
      records.push_back({origin_index, std::move(r)});
    } catch (const std::exception& e) {
      throw IoError(path.string() + ": row " + std::to_string(row_no) + ": " + e.what());
    }
  }
  return records;
}

std::string line_samples_to_csv(const std::string& run_id, const ExpressionKind& kind,
                                const std::vector<LineSampleRecord>& records) {
  std::string out = "run_id,origin_index,dimension_index,position,kind" + dims_header(kind) + "," +
                    kVerdictColumns + "\n";
  for (const LineSampleRecord& rec : records) {
    out += run_id;
    out += ',' + std::to_string(rec.origin_index);
    out += ',' + std::to_string(rec.dimension_index);
    out += ',' + std::to_string(rec.position) + ',';
    append_instance_fields(out, rec.verdict.instance);
    out += ',';
    append_verdict_fields(out, rec.verdict);
    out += '\n';
  }
  return out;
}

std::vector<LineSampleRecord> read_line_samples_csv(const std::filesystem::path& path) {
  std::vector<LineSampleRecord> records;
  int row_no = 1;
  for (const auto& fields : read_csv(path, "run_id,origin_index,dimension_index,position,kind")) {
    ++row_no;
    try {
      size_t at = 1;
      const int origin_index = static_cast<int>(parse_int(fields.at(at++)));
      const int dimension_index = static_cast<int>(parse_int(fields.at(at++)));
      const Dim position = parse_int(fields.at(at++));
      Verdict v = parse_verdict_fields(fields, at);
      if (at != fields.size()) throw std::invalid_argument("trailing fields");
      records.push_back({origin_index, dimension_index, position, std::move(v)});
    } catch (const std::exception& e) {
      throw IoError(path.string() + ": row " + std::to_string(row_no) + ": " + e.what());
    }
  }
  return records;
}

std::string step_timings_to_csv(const std::string& run_id,
                                const std::vector<StepTimingRecord>& records) {
  std::string out =
      "run_id,origin_index,dimension_index,position,algorithm_id,step_index,kernel,"
      "transpose_a,transpose_b,m,n,k,flops,median_seconds,efficiency\n";
  for (const StepTimingRecord& r : records) {
    out += run_id;
    out += ',' + std::to_string(r.origin_index);
    out += ',' + std::to_string(r.dimension_index);
    out += ',' + std::to_string(r.position);
    out += ',' + std::to_string(r.algorithm_id);
    out += ',' + std::to_string(r.step_index);
    out += ',' + r.kernel;
    out += r.transpose_a ? ",1" : ",0";
    out += r.transpose_b ? ",1" : ",0";
    out += ',' + std::to_string(r.m);
    out += ',' + std::to_string(r.n);
    out += ',' + std::to_string(r.k);
    out += ',' + flops_to_string(r.flops);
    out += ',' + fmt_double(r.median_seconds);
    out += ',' + fmt_double(r.efficiency);
    out += '\n';
  }
  return out;
}

std::vector<StepTimingRecord> read_step_timings_csv(const std::filesystem::path& path) {
  std::vector<StepTimingRecord> records;
  int row_no = 1;
  for (const auto& fields : read_csv(path, "run_id,origin_index,dimension_index,position,algorithm_id")) {
    ++row_no;
    try {
      if (fields.size() != 15) throw std::invalid_argument("expected 15 fields");
      StepTimingRecord r;
      r.origin_index = static_cast<int>(parse_int(fields[1]));
      r.dimension_index = static_cast<int>(parse_int(fields[2]));
      r.position = parse_int(fields[3]);
      r.algorithm_id = static_cast<int>(parse_int(fields[4]));
      r.step_index = static_cast<int>(parse_int(fields[5]));
      r.kernel = fields[6];
      r.transpose_a = parse_bool(fields[7]);
      r.transpose_b = parse_bool(fields[8]);
      r.m = parse_int(fields[9]);
      r.n = parse_int(fields[10]);
      r.k = parse_int(fields[11]);
      r.flops = parse_int(fields[12]);
      r.median_seconds = parse_double(fields[13]);
      r.efficiency = parse_double(fields[14]);
      records.push_back(std::move(r));
    } catch (const std::exception& e) {
      throw IoError(path.string() + ": row " + std::to_string(row_no) + ": " + e.what());
    }
  }
  return records;
}

std::string predictions_to_csv(const std::string& run_id, const ExpressionKind& kind,
                               const std::vector<PredictionRecord>& records) {
  std::string out = "run_id,sample_index,kind" + dims_header(kind) +
                    ",actual_anomaly,predicted_anomaly,cheapest_ids,fastest_ids,time_score,flop_score\n";
  for (const PredictionRecord& rec : records) {
    out += run_id;
    out += ',' + std::to_string(rec.sample_index) + ',';
    append_instance_fields(out, rec.predicted.instance);
    out += rec.actual_anomaly ? ",1" : ",0";
    out += rec.predicted.is_anomaly ? ",1" : ",0";
    out += ',' + join_ids(rec.predicted.cheapest_ids);
    out += ',' + join_ids(rec.predicted.fastest_ids);
    out += ',' + fmt_double(rec.predicted.time_score);
    out += ',' + fmt_double(rec.predicted.flop_score);
    out += '\n';
  }
  return out;
}

std::string confusion_to_csv(const std::string& run_id, const ConfusionMatrix& cm,
                             const Metrics& m) {
  std::string out =
      "run_id,tn,fp,fn,tp,total,recall,precision,recall_defined,precision_defined\n";
  out += run_id;
  out += ',' + std::to_string(cm.tn);
  out += ',' + std::to_string(cm.fp);
  out += ',' + std::to_string(cm.fn);
  out += ',' + std::to_string(cm.tp);
  out += ',' + std::to_string(cm.total());
  out += ',' + fmt_double(m.recall);
  out += ',' + fmt_double(m.precision);
  out += m.recall_defined ? ",1" : ",0";
  out += m.precision_defined ? ",1" : ",0";
  out += '\n';
  return out;
}

std::string bench_to_csv(const std::string& run_id, const std::vector<BenchRecord>& records) {
  std::string out = "run_id,kernel,size,m,n,k,flops,median_seconds,efficiency\n";
  for (const BenchRecord& r : records) {
    out += run_id;
    out += ',' + r.kernel;
    out += ',' + std::to_string(r.size);
    out += ',' + std::to_string(r.m);
    out += ',' + std::to_string(r.n);
    out += ',' + std::to_string(r.k);
    out += ',' + flops_to_string(r.flops);
    out += ',' + fmt_double(r.median_seconds);
    out += ',' + fmt_double(r.efficiency);
    out += '\n';
  }
  return out;
}

}  // namespace flopscope
