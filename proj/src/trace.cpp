#include "seacgd/trace.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace seacgd {

const char* to_string(Phase p) {
  switch (p) {
    case Phase::LG: return "LG";
    case Phase::PERTURB: return "PERTURB";
    case Phase::DONE: return "DONE";
  }
  return "?";
}

const char* to_string(WorkerEventKind k) {
  switch (k) {
    case WorkerEventKind::Fetch: return "Fetch";
    case WorkerEventKind::GradientDone: return "GradientDone";
    case WorkerEventKind::ApplyUpdate: return "ApplyUpdate";
  }
  return "?";
}

std::string format_double(double v) {
  char buf[32];
  for (int prec = 15; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  return out;
}

}  // namespace

void RunTrace::write_csv(const std::string& path) const {
  auto out = open_out(path);
  out << time_label << "_time,j,f,E,grad_norm,phase\n";
  for (const auto& s : samples) {
    out << format_double(s.time) << ',' << s.j << ',' << format_double(s.f) << ',' << format_double(s.E) << ','
        << format_double(s.grad_norm) << ',' << to_string(s.phase) << '\n';
  }
}

void RunTrace::write_events_jsonl(const std::string& path) const {
  auto out = open_out(path);
  for (const auto& e : events) {
    nlohmann::json j{{"t", e.t},         {"worker", e.worker},           {"kind", to_string(e.kind)},
                     {"j", e.j},         {"block", e.block},             {"step_sq_norm", e.step_sq_norm},
                     {"f", e.f},         {"E", e.E}};
    out << j.dump() << '\n';
  }
  for (const auto& p : phases) {
    nlohmann::json j{{"kind", "Phase"},          {"phase", to_string(p.phase)}, {"j_begin", p.j_begin},
                     {"j_end", p.j_end},         {"t", p.time},                 {"entry_E", p.entry_E},
                     {"exit_E", p.exit_E},       {"threshold_F", p.threshold_F}, {"decision", p.decision}};
    out << j.dump() << '\n';
  }
}

}  // namespace seacgd
