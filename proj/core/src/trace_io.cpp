#include "govern/sim.hpp"

#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <sstream>

namespace govern {

namespace {

StepStatus step_status_from_string(const std::string& s) {
  if (s == "ok") return StepStatus::ok;
  if (s == "max_iter") return StepStatus::max_iter;
  if (s == "numfail") return StepStatus::numerical_failure;
  if (s == "hold") return StepStatus::hold;
  throw std::runtime_error("trace: unknown status '" + s + "'");
}

}  // namespace

void write_trace_csv(const SimulationTrace& trace, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_trace_csv: cannot open " + path);
  if (trace.rows.empty()) throw std::invalid_argument("write_trace_csv: empty trace");

  const int nx = static_cast<int>(trace.rows.front().x.size());
  const int ny = static_cast<int>(trace.rows.front().y.size());
  out << "t";
  for (int i = 0; i < nx; ++i) out << ",x" << i;
  out << ",r,v";
  for (int i = 0; i < ny; ++i) out << ",y" << i;
  for (int i = 0; i < ny; ++i) out << ",eps" << i;
  out << ",status,wall_s\n";

  char buf[32];
  auto put = [&](double v) {
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    out << buf;
  };
  for (const auto& row : trace.rows) {
    out << row.t;
    for (int i = 0; i < nx; ++i) {
      out << ",";
      put(row.x[i]);
    }
    out << ",";
    put(row.r);
    out << ",";
    put(row.v);
    for (int i = 0; i < ny; ++i) {
      out << ",";
      put(row.y[i]);
    }
    for (int i = 0; i < ny; ++i) {
      out << ",";
      put(row.eps[i]);
    }
    out << "," << to_string(row.status) << ",";
    put(row.wall_s);
    out << "\n";
  }
}

SimulationTrace read_trace_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("read_trace_csv: cannot open " + path);

  std::string header;
  if (!std::getline(in, header)) throw std::runtime_error("read_trace_csv: empty file");
  int nx = 0, ny = 0;
  {
    std::stringstream ss(header);
    std::string col;
    while (std::getline(ss, col, ',')) {
      if (col.rfind('x', 0) == 0 && col != "x") ++nx;
      if (col.rfind('y', 0) == 0) ++ny;
    }
  }

  SimulationTrace trace;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (static_cast<int>(cells.size()) != 1 + nx + 2 + 2 * ny + 2) {
      throw std::runtime_error("read_trace_csv: wrong field count");
    }
    TraceRow row;
    int c = 0;
    row.t = std::stoi(cells[c++]);
    row.x.resize(nx);
    for (int i = 0; i < nx; ++i) row.x[i] = std::stod(cells[c++]);
    row.r = std::stod(cells[c++]);
    row.v = std::stod(cells[c++]);
    row.y.resize(ny);
    for (int i = 0; i < ny; ++i) row.y[i] = std::stod(cells[c++]);
    row.eps.resize(ny);
    for (int i = 0; i < ny; ++i) row.eps[i] = std::stod(cells[c++]);
    row.status = step_status_from_string(cells[c++]);
    row.wall_s = std::stod(cells[c++]);
    trace.rows.push_back(std::move(row));
  }
  return trace;
}

std::string benchmark_report_json(const BenchmarkReport& report) {
  nlohmann::json j;
  j["repeats"] = report.repeats;
  j["profile_id"] = report.profile_id;
  j["methods"] = nlohmann::json::array();
  for (const auto& e : report.entries) {
    j["methods"].push_back({{"method", e.method},
                            {"average_step_time", e.average_step_time},
                            {"worst_case_step_time", e.worst_case_step_time},
                            {"constraint_satisfied", e.constraint_satisfied},
                            {"max_violation", e.max_violation},
                            {"tracking_rmse_vs_mcg", e.tracking_rmse_vs_mcg}});
  }
  return j.dump(2) + "\n";
}

}  // namespace govern
