#include "seacgd/experiment.hpp"

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "seacgd/algorithms.hpp"
#include "seacgd/baselines.hpp"
#include "seacgd/errors.hpp"

namespace fs = std::filesystem;

namespace seacgd {

const char* to_string(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::SaddleEvasion: return "SaddleEvasion";
    case ExperimentKind::DelaySweep: return "DelaySweep";
    case ExperimentKind::Scalability: return "Scalability";
  }
  return "?";
}

const char* to_string(AlgorithmKind k) {
  switch (k) {
    case AlgorithmKind::SEACGD: return "SEACGD";
    case AlgorithmKind::SerialGD: return "SerialGD";
    case AlgorithmKind::SyncParallelPGD: return "SyncParallelPGD";
  }
  return "?";
}

const char* to_string(RunMode m) { return m == RunMode::Simulated ? "Simulated" : "Parallel"; }

namespace {

const char* victim_name(VictimPolicy v) {
  switch (v) {
    case VictimPolicy::RoundRobin: return "RoundRobin";
    case VictimPolicy::FixedWorker: return "FixedWorker";
    case VictimPolicy::RandomEachIter: return "RandomEachIter";
  }
  return "?";
}

template <class E, std::size_t N>
E parse_enum(const std::string& s, const std::pair<const char*, E> (&table)[N], const char* what) {
  for (const auto& [name, value] : table)
    if (s == name) return value;
  throw ConfigError(std::string("unknown ") + what + ": " + s);
}

AlgorithmKind parse_algorithm(const std::string& s) {
  static const std::pair<const char*, AlgorithmKind> t[] = {{"SEACGD", AlgorithmKind::SEACGD},
                                                            {"SerialGD", AlgorithmKind::SerialGD},
                                                            {"SyncParallelPGD", AlgorithmKind::SyncParallelPGD}};
  return parse_enum(s, t, "algorithm");
}

RunMode parse_mode(const std::string& s) {
  static const std::pair<const char*, RunMode> t[] = {{"Simulated", RunMode::Simulated},
                                                      {"Parallel", RunMode::Parallel}};
  return parse_enum(s, t, "mode");
}

VictimPolicy parse_victim(const std::string& s) {
  static const std::pair<const char*, VictimPolicy> t[] = {{"RoundRobin", VictimPolicy::RoundRobin},
                                                           {"FixedWorker", VictimPolicy::FixedWorker},
                                                           {"RandomEachIter", VictimPolicy::RandomEachIter}};
  return parse_enum(s, t, "victim_policy");
}

}  // namespace

ExperimentKind parse_experiment(const std::string& s) {
  static const std::pair<const char*, ExperimentKind> t[] = {{"SaddleEvasion", ExperimentKind::SaddleEvasion},
                                                             {"DelaySweep", ExperimentKind::DelaySweep},
                                                             {"Scalability", ExperimentKind::Scalability}};
  return parse_enum(s, t, "experiment");
}

ExperimentConfig ExperimentConfig::defaults(ExperimentKind kind) {
  ExperimentConfig c;
  c.experiment = kind;
  c.seeds = {0};
  switch (kind) {
    case ExperimentKind::SaddleEvasion:
      c.dims = {100, 10000, 1000000};
      c.workers = {8};
      c.expected_delays = {0.0};
      c.algorithms = {AlgorithmKind::SEACGD, AlgorithmKind::SerialGD, AlgorithmKind::SyncParallelPGD};
      break;
    case ExperimentKind::DelaySweep:
      c.dims = {1000000};
      c.workers = {8};
      c.expected_delays = {0.0, 0.01, 0.05};
      c.algorithms = {AlgorithmKind::SEACGD, AlgorithmKind::SyncParallelPGD};
      break;
    case ExperimentKind::Scalability:
      c.dims = {1000000};
      c.workers = {2, 4, 8};
      c.expected_delays = {0.0};
      c.algorithms = {AlgorithmKind::SEACGD};
      break;
  }
  return c;
}

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("experiment config must be a JSON object");
  static const std::set<std::string> known = {
      "experiment", "objective",    "objective_options", "x0",          "dims",
      "workers",    "tau",          "expected_delays",   "seeds",       "algorithms",
      "output_dir", "mode",         "eps",               "delta",       "mu",
      "victim_policy", "fixed_worker", "trace_every",    "target_tolerance_per_dim",
      "serial_gd_iters", "record_events", "event_limit", "allow_large_dims", "seconds_per_unit",
      "power_iters"};
  for (const auto& [k, _] : j.items())
    if (!known.count(k)) throw ConfigError("unknown config key: " + k);

  try {
    ExperimentConfig c =
        defaults(j.contains("experiment") ? parse_experiment(j["experiment"].get<std::string>())
                                          : ExperimentKind::SaddleEvasion);
    if (j.contains("objective")) c.objective = j["objective"].get<std::string>();
    if (j.contains("objective_options")) c.objective_options = j["objective_options"].get<ObjectiveOptions>();
    if (j.contains("x0")) c.x0 = j["x0"].get<std::string>();
    if (j.contains("dims")) c.dims = j["dims"].get<std::vector<std::size_t>>();
    if (j.contains("workers")) c.workers = j["workers"].get<std::vector<std::uint64_t>>();
    if (j.contains("tau") && !j["tau"].is_null()) c.tau = j["tau"].get<std::uint64_t>();
    if (j.contains("expected_delays")) c.expected_delays = j["expected_delays"].get<std::vector<double>>();
    if (j.contains("seeds")) c.seeds = j["seeds"].get<std::vector<std::uint64_t>>();
    if (j.contains("algorithms")) {
      c.algorithms.clear();
      for (const auto& a : j["algorithms"]) c.algorithms.push_back(parse_algorithm(a.get<std::string>()));
    }
    if (j.contains("output_dir")) c.output_dir = j["output_dir"].get<std::string>();
    if (j.contains("mode")) c.mode = parse_mode(j["mode"].get<std::string>());
    if (j.contains("eps")) c.eps = j["eps"].get<double>();
    if (j.contains("delta")) c.delta = j["delta"].get<double>();
    if (j.contains("mu")) c.mu = j["mu"].get<double>();
    if (j.contains("victim_policy")) c.victim_policy = parse_victim(j["victim_policy"].get<std::string>());
    if (j.contains("fixed_worker")) c.fixed_worker = j["fixed_worker"].get<std::uint64_t>();
    if (j.contains("trace_every")) c.trace_every = j["trace_every"].get<std::uint64_t>();
    if (j.contains("target_tolerance_per_dim"))
      c.target_tolerance_per_dim = j["target_tolerance_per_dim"].get<double>();
    if (j.contains("serial_gd_iters")) c.serial_gd_iters = j["serial_gd_iters"].get<std::uint64_t>();
    if (j.contains("record_events")) c.record_events = j["record_events"].get<bool>();
    if (j.contains("event_limit")) c.event_limit = j["event_limit"].get<std::size_t>();
    if (j.contains("allow_large_dims")) c.allow_large_dims = j["allow_large_dims"].get<bool>();
    if (j.contains("seconds_per_unit")) c.seconds_per_unit = j["seconds_per_unit"].get<double>();
    if (j.contains("power_iters")) c.power_iters = j["power_iters"].get<int>();
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad config value: ") + e.what());
  }
}

nlohmann::json ExperimentConfig::to_json() const {
  nlohmann::json algs = nlohmann::json::array();
  for (auto a : algorithms) algs.push_back(to_string(a));
  return nlohmann::json{{"experiment", to_string(experiment)},
                        {"objective", objective},
                        {"objective_options", objective_options},
                        {"x0", x0},
                        {"dims", dims},
                        {"workers", workers},
                        {"tau", tau ? nlohmann::json(*tau) : nlohmann::json(nullptr)},
                        {"expected_delays", expected_delays},
                        {"seeds", seeds},
                        {"algorithms", algs},
                        {"output_dir", output_dir},
                        {"mode", to_string(mode)},
                        {"eps", eps},
                        {"delta", delta},
                        {"mu", mu},
                        {"victim_policy", victim_name(victim_policy)},
                        {"fixed_worker", fixed_worker},
                        {"trace_every", trace_every},
                        {"target_tolerance_per_dim", target_tolerance_per_dim},
                        {"serial_gd_iters", serial_gd_iters},
                        {"record_events", record_events},
                        {"event_limit", event_limit},
                        {"allow_large_dims", allow_large_dims},
                        {"seconds_per_unit", seconds_per_unit},
                        {"power_iters", power_iters}};
}

std::uint64_t ExperimentConfig::tau_for(std::uint64_t W) const {
  if (tau) return *tau;
  if (experiment == ExperimentKind::DelaySweep) return 2 * W;
  return std::max<std::uint64_t>(W, 2) - 1;
}

void ExperimentConfig::validate() const {
  auto fail = [](const std::string& m) { throw ConfigError(m); };
  if (dims.empty() || workers.empty() || expected_delays.empty() || seeds.empty() || algorithms.empty())
    fail("dims, workers, expected_delays, seeds and algorithms must be non-empty");
  const auto names = registered_objectives();
  if (std::find(names.begin(), names.end(), objective) == names.end()) fail("unknown objective: " + objective);
  if (x0 != "saddle" && x0 != "zeros") fail("x0 must be \"saddle\" or \"zeros\"");
  if (x0 == "saddle" && objective != "paper_quartic") fail("x0 \"saddle\" needs the paper_quartic objective");
  for (auto d : dims) {
    if (d < 2) fail("every dimension must be >= 2");
    if (d > 1000000 && !allow_large_dims) fail("dimensions above 1e6 need allow_large_dims (--large)");
  }
  const std::size_t dmin = *std::min_element(dims.begin(), dims.end());
  for (auto w : workers) {
    if (w < 1) fail("workers must be >= 1");
    if (w > dmin) fail("more workers than coordinates in the smallest dimension");
    if (tau && *tau + 1 < w) fail("tau must be at least W-1 for every worker count");
  }
  if (tau && *tau < 1) fail("tau must be >= 1");
  for (double e : expected_delays)
    if (!(e >= 0.0)) fail("expected delays must be non-negative");
  if (victim_policy == VictimPolicy::FixedWorker &&
      fixed_worker >= *std::min_element(workers.begin(), workers.end()))
    fail("fixed_worker outside the worker range");
  if (!(eps >= 0.0)) fail("eps must be >= 0 (0 selects the default)");
  if (!(delta > 0.0 && delta < 1.0)) fail("delta must lie in (0,1)");
  if (!(mu >= 1.0)) fail("mu must be >= 1");
  if (!(target_tolerance_per_dim > 0.0)) fail("target_tolerance_per_dim must be positive");
  if (!(seconds_per_unit >= 0.0)) fail("seconds_per_unit must be non-negative");
  if (power_iters < 1) fail("power_iters must be positive");
}

std::string CellSpec::run_id() const {
  std::ostringstream s;
  s << to_string(algorithm) << "_d" << d << "_W" << W << "_tau" << tau << "_delay" << format_double(expected_delay)
    << "_seed" << seed;
  return s.str();
}

std::vector<CellSpec> expand_cells(const ExperimentConfig& cfg) {
  std::vector<CellSpec> cells;
  for (auto d : cfg.dims)
    for (auto alg : cfg.algorithms) {
      if (alg == AlgorithmKind::SerialGD) {
        for (auto seed : cfg.seeds) cells.push_back(CellSpec{alg, d, 1, cfg.tau_for(1), 0.0, seed});
        continue;
      }
      for (auto W : cfg.workers)
        for (double delay : cfg.expected_delays)
          for (auto seed : cfg.seeds) cells.push_back(CellSpec{alg, d, W, cfg.tau_for(W), delay, seed});
    }
  return cells;
}

namespace {

nlohmann::json certificate_json(const PointClass& pc) {
  return nlohmann::json{{"tag", to_string(pc.tag)},
                        {"grad_norm", pc.grad_norm},
                        {"min_eig_estimate", pc.min_eig_estimate},
                        {"converged", pc.converged}};
}

nlohmann::json opt_number(const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); }

}  // namespace

nlohmann::json run_cell(const ExperimentConfig& cfg, const CellSpec& cell) {
  auto f = make_objective(cfg.objective, cell.d, cfg.objective_options);
  std::vector<double> x0;
  if (cfg.x0 == "saddle") {
    const auto* q = dynamic_cast<const QuarticSaddle*>(f.get());
    if (!q) throw ConfigError("x0 \"saddle\" needs the quartic objective");
    x0 = q->saddle_point();
  } else {
    x0.assign(cell.d, 0.0);
  }
  const HyperParams hp = derive_params(make_user_inputs(*f, x0, cell.W, cell.tau, cfg.eps, cfg.delta, cfg.mu));
  const double target = f->spec().global_min_fstar + cfg.target_tolerance_per_dim * static_cast<double>(cell.d);

  ServerOptions so;
  so.trace_every = cfg.trace_every;
  so.record_worker_events = cfg.record_events;
  so.worker_event_limit = cfg.event_limit;
  so.target_f = target;

  DelayModel dm;
  dm.kind = cell.expected_delay > 0.0 ? DelayKind::ExponentialOneWorker : DelayKind::None;
  dm.expected_delay = cell.expected_delay;
  dm.victim_policy = cfg.victim_policy;
  dm.fixed_worker = cfg.fixed_worker;
  dm.seed = cell.seed;

  TerminationReport rep;
  RunTrace trace;
  bool phased = true;
  switch (cell.algorithm) {
    case AlgorithmKind::SEACGD: {
      RuntimeConfig rc;
      rc.objective = f.get();
      rc.hp = hp;
      rc.x0 = x0;
      rc.W = cell.W;
      rc.delay = dm;
      rc.scheduler_seed = cell.seed;
      rc.server = so;
      rc.seconds_per_unit = cfg.seconds_per_unit;
      SeAcgdOptions opts;
      opts.seed = cell.seed;
      opts.power_iters = cfg.power_iters;
      auto run = run_se_acgd(rc, opts, cfg.mode == RunMode::Parallel);
      rep = std::move(run.report);
      trace = std::move(run.trace);
      break;
    }
    case AlgorithmKind::SyncParallelPGD: {
      BaselineConfig bc = BaselineConfig::from(hp, BaselineKind::SyncParallelPGD, cell.seed);
      bc.power_iters = cfg.power_iters;
      auto run = run_sync_parallel_pgd(x0, *f, bc, cell.W, dm, hp.t_max, so);
      rep = std::move(run.report);
      trace = std::move(run.trace);
      break;
    }
    case AlgorithmKind::SerialGD: {
      BaselineConfig bc = BaselineConfig::from(hp, BaselineKind::SerialGD, cell.seed);
      trace = run_serial_gd(x0, *f, bc, cfg.serial_gd_iters, so);
      phased = false;
      break;
    }
  }

  const std::string id = cell.run_id();
  const fs::path dir(cfg.output_dir);
  const std::string trace_file = id + ".trace.csv";
  const std::string events_file = id + ".events.jsonl";
  trace.write_csv((dir / trace_file).string());
  trace.write_events_jsonl((dir / events_file).string());

  nlohmann::json hj;
  seacgd::to_json(hj, hp);
  nlohmann::json row{{"run_id", id},
                     {"algorithm", to_string(cell.algorithm)},
                     {"d", cell.d},
                     {"W", cell.W},
                     {"tau", cell.tau},
                     {"expected_delay", cell.expected_delay},
                     {"seed", cell.seed},
                     {"time_label", trace.time_label},
                     {"target_f", target},
                     {"reached_target", trace.time_to_target.has_value()},
                     {"time_to_target", opt_number(trace.time_to_target)},
                     {"iters_to_target",
                      trace.iters_to_target ? nlohmann::json(*trace.iters_to_target) : nlohmann::json(nullptr)},
                     {"trace_file", trace_file},
                     {"events_file", events_file},
                     {"events_truncated", trace.events_truncated},
                     {"audit", trace.header.value("audit", nlohmann::json::object())},
                     {"hp", hj}};
  if (phased) {
    row["final_f"] = rep.final_f;
    row["total_iters"] = rep.total_global_iters;
    row["escapes"] = rep.escapes;
    row["perturbations"] = rep.total_perturbations;
    row["outcome"] = to_string(rep.outcome);
    row["certificate"] = certificate_json(rep.certificate);
  } else {
    row["final_f"] = trace.samples.empty() ? f->eval(x0) : trace.samples.back().f;
    row["total_iters"] = cfg.serial_gd_iters;
    row["escapes"] = 0;
    row["perturbations"] = 0;
    row["outcome"] = "MaxIters";
    row["certificate"] = nullptr;
  }
  return row;
}

// ---------------------------------------------------------------------------

void emit_plot_data(const std::vector<std::pair<std::string, RunTrace>>& traces, const std::string& out) {
  for (const auto& [id, t] : traces)
    if (t.time_label != traces.front().second.time_label)
      throw SchemaError("traces mix time labels: " + traces.front().second.time_label + " and " + t.time_label);
  std::ofstream os(out, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot open for writing: " + out);
  os << "run_id,time,j,f,E\n";
  for (const auto& [id, t] : traces)
    for (const auto& s : t.samples)
      os << id << ',' << format_double(s.time) << ',' << s.j << ',' << format_double(s.f) << ','
         << format_double(s.E) << '\n';
  if (!os) throw IoError("write failed: " + out);
}

RunTrace load_trace_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path);
  RunTrace t;
  std::string line;
  if (!std::getline(in, line)) throw SchemaError("empty trace file " + path);
  const auto comma = line.find(',');
  const std::string first = line.substr(0, comma);
  if (first.size() < 6 || first.substr(first.size() - 5) != "_time" ||
      line.substr(comma) != ",j,f,E,grad_norm,phase")
    throw SchemaError("unexpected trace header in " + path);
  t.time_label = first.substr(0, first.size() - 5);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell[6];
    for (auto& c : cell) std::getline(ss, c, ',');
    TraceSample s;
    s.time = std::stod(cell[0]);
    s.j = std::stoull(cell[1]);
    s.f = std::stod(cell[2]);
    s.E = std::stod(cell[3]);
    s.grad_norm = std::stod(cell[4]);
    s.phase = cell[5] == "LG" ? Phase::LG : cell[5] == "PERTURB" ? Phase::PERTURB : Phase::DONE;
    t.samples.push_back(s);
  }
  return t;
}

namespace {

void ensure_writable(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory " + dir + ": " + ec.message());
  const fs::path probe = fs::path(dir) / ".write_probe";
  {
    std::ofstream os(probe);
    if (!os) throw IoError("output directory is not writable: " + dir);
  }
  fs::remove(probe, ec);
}

nlohmann::json error_row(const CellSpec& cell, const std::string& what) {
  return nlohmann::json{{"run_id", cell.run_id()}, {"algorithm", to_string(cell.algorithm)}, {"error", what}};
}

void write_summary_csv(const nlohmann::json& rows, const std::string& path) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot open for writing: " + path);
  os << "run_id,algorithm,d,W,tau,expected_delay,seed,final_f,time_to_target,iters_to_target,total_iters,escapes,"
        "outcome\n";
  auto num = [](const nlohmann::json& v) {
    if (v.is_null()) return std::string();
    if (v.is_number_float()) return format_double(v.get<double>());
    return v.dump();
  };
  for (const auto& r : rows) {
    if (r.contains("error")) {
      os << r["run_id"].get<std::string>() << ',' << r["algorithm"].get<std::string>() << ",,,,,,,,,,,error\n";
      continue;
    }
    os << r["run_id"].get<std::string>() << ',' << r["algorithm"].get<std::string>() << ',' << num(r["d"]) << ','
       << num(r["W"]) << ',' << num(r["tau"]) << ',' << num(r["expected_delay"]) << ',' << num(r["seed"]) << ','
       << num(r["final_f"]) << ',' << num(r["time_to_target"]) << ',' << num(r["iters_to_target"]) << ','
       << num(r["total_iters"]) << ',' << num(r["escapes"]) << ',' << r["outcome"].get<std::string>() << '\n';
  }
}

}  // namespace

ExperimentReport run_experiment(const ExperimentConfig& cfg, int jobs) {
  cfg.validate();
  ensure_writable(cfg.output_dir);
  const std::vector<CellSpec> cells = expand_cells(cfg);
  std::vector<nlohmann::json> rows(cells.size());
  ExperimentReport report;

  if (jobs <= 1) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      try {
        rows[i] = run_cell(cfg, cells[i]);
      } catch (const std::exception& e) {
        rows[i] = error_row(cells[i], e.what());
      }
    }
  } else {
    const fs::path dir(cfg.output_dir);
    auto result_path = [&](std::size_t i) { return (dir / (cells[i].run_id() + ".result.json")).string(); };
    std::map<pid_t, std::size_t> running;
    std::size_t next = 0;
    auto reap_one = [&] {
      int status = 0;
      const pid_t pid = ::waitpid(-1, &status, 0);
      if (pid <= 0) return;
      const std::size_t i = running.at(pid);
      running.erase(pid);
      std::ifstream in(result_path(i));
      if (in) {
        try {
          rows[i] = nlohmann::json::parse(in);
        } catch (const std::exception& e) {
          rows[i] = error_row(cells[i], std::string("unreadable result: ") + e.what());
        }
      } else {
        rows[i] = error_row(cells[i], "worker process died");
      }
      fs::remove(result_path(i));
    };
    while (next < cells.size() || !running.empty()) {
      while (next < cells.size() && static_cast<int>(running.size()) < jobs) {
        const std::size_t i = next++;
        const pid_t pid = ::fork();
        if (pid < 0) throw IoError("fork failed");
        if (pid == 0) {
          int code = 0;
          nlohmann::json row;
          try {
            row = run_cell(cfg, cells[i]);
          } catch (const std::exception& e) {
            row = error_row(cells[i], e.what());
            code = 1;
          }
          std::ofstream(result_path(i)) << row.dump();
          ::_exit(code);
        }
        running[pid] = i;
      }
      if (!running.empty()) reap_one();
    }
  }

  nlohmann::json all = nlohmann::json::array();
  std::map<std::string, std::vector<std::pair<std::string, RunTrace>>> by_label;
  const fs::path dir(cfg.output_dir);
  for (auto& r : rows) {
    if (r.contains("error")) {
      ++report.failures;
    } else {
      by_label[r["time_label"].get<std::string>()].emplace_back(
          r["run_id"].get<std::string>(), load_trace_csv((dir / r["trace_file"].get<std::string>()).string()));
    }
    all.push_back(std::move(r));
  }

  report.summary = nlohmann::json{{"experiment", to_string(cfg.experiment)},
                                  {"config", cfg.to_json()},
                                  {"failures", report.failures},
                                  {"cells", all}};
  report.summary_path = (dir / "summary.json").string();
  {
    std::ofstream os(report.summary_path, std::ios::binary | std::ios::trunc);
    if (!os) throw IoError("cannot write " + report.summary_path);
    os << report.summary.dump(2) << '\n';
  }
  write_summary_csv(all, (dir / "summary.csv").string());
  if (by_label.size() <= 1) {
    emit_plot_data(by_label.empty() ? std::vector<std::pair<std::string, RunTrace>>{} : by_label.begin()->second,
                   (dir / "plot_data.csv").string());
  } else {
    for (const auto& [label, traces] : by_label)
      emit_plot_data(traces, (dir / ("plot_data_" + label + ".csv")).string());
  }
  return report;
}

}  // namespace seacgd
