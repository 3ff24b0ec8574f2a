#include "govern/config.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>

namespace govern {

namespace {

using nlohmann::json;

Eigen::MatrixXd matrix_from(const std::vector<std::vector<double>>& rows, const char* what) {
  if (rows.empty()) throw ConfigError(std::string("plant: missing matrix ") + what);
  Eigen::MatrixXd M(rows.size(), rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != rows.front().size()) {
      throw ConfigError(std::string("plant: ragged matrix ") + what);
    }
    for (std::size_t j = 0; j < rows[i].size(); ++j) M(i, j) = rows[i][j];
  }
  return M;
}

Eigen::VectorXd vector_from(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

template <typename T>
void maybe(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

ProfileConfig parse_profile(const json& j, const std::string& name) {
  ProfileConfig p;
  maybe(j, "kind", p.kind);
  maybe(j, "seed", p.seed);
  maybe(j, "total_steps", p.total_steps);
  maybe(j, "levels", p.levels);
  if (j.contains("breakpoints")) {
    for (const auto& bp : j.at("breakpoints")) {
      if (!bp.is_array() || bp.size() != 2) {
        throw ConfigError("profiles." + name + ": breakpoints must be [step, level] pairs");
      }
      p.breakpoints.emplace_back(bp[0].get<int>(), bp[1].get<double>());
    }
  }
  if (p.total_steps <= 0) {
    throw ConfigError("profiles." + name + ": total_steps must be positive");
  }
  return p;
}

}  // namespace

ReferenceProfile ProfileConfig::build() const {
  if (kind == "steps") {
    return make_profile(breakpoints, total_steps);
  }
  ReferenceProfile::Kind k;
  if (kind == "prbs_steps") k = ReferenceProfile::Kind::prbs_steps;
  else if (kind == "drive_cycle_like") k = ReferenceProfile::Kind::drive_cycle_like;
  else throw ConfigError("profile: unknown kind '" + kind + "'");
  return make_profile(k, seed, total_steps, levels);
}

RunConfig parse_config_text(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }

  RunConfig c;
  try {
    if (j.contains("plant")) {
      const auto& jp = j["plant"];
      maybe(jp, "kind", c.plant.kind);
      maybe(jp, "Ts", c.plant.Ts);
      maybe(jp, "a", c.plant.a);
      maybe(jp, "b", c.plant.b);
      maybe(jp, "c", c.plant.c);
      maybe(jp, "x1_max", c.plant.x1_max);
      maybe(jp, "x2_max", c.plant.x2_max);
      maybe(jp, "v_min", c.plant.v_min);
      maybe(jp, "v_max", c.plant.v_max);
      maybe(jp, "A", c.plant.A);
      maybe(jp, "B", c.plant.B);
      maybe(jp, "C", c.plant.C);
      maybe(jp, "D", c.plant.D);
    }
    if (j.contains("governor")) {
      const auto& jg = j["governor"];
      maybe(jg, "N", c.weights.N);
      maybe(jg, "rho", c.weights.rho);
      maybe(jg, "rho_s", c.weights.rho_s);
      if (jg.contains("rho_i")) {
        std::vector<double> ri = jg.at("rho_i").get<std::vector<double>>();
        c.weights.rho_i = vector_from(ri);
      }
      if (c.weights.N < 1) throw ConfigError("governor: N must be >= 1");
    }
    if (j.contains("nn")) {
      const auto& jn = j["nn"];
      maybe(jn, "hidden_sizes", c.nn.hidden_sizes);
      maybe(jn, "trials", c.nn.trials);
      maybe(jn, "seed", c.nn.seed);
      maybe(jn, "max_epochs", c.nn.max_epochs);
      maybe(jn, "patience", c.nn.patience);
      maybe(jn, "learning_rate", c.nn.learning_rate);
      maybe(jn, "val_fraction", c.nn.val_fraction);
    }
    if (!j.contains("profiles")) throw ConfigError("config: missing profiles section");
    const auto& jprof = j["profiles"];
    c.collection = parse_profile(jprof.at("collection"), "collection");
    c.calibration = parse_profile(jprof.at("calibration"), "calibration");
    c.evaluation = parse_profile(jprof.at("evaluation"), "evaluation");

    if (j.contains("paths")) {
      const auto& jp = j["paths"];
      std::string out_dir;
      maybe(jp, "out_dir", out_dir);
      if (!out_dir.empty()) {
        c.dataset_path = out_dir + "/dataset.csv";
        c.net_path = out_dir + "/net.json";
        c.mbar_path = out_dir + "/mbar.json";
        c.trace_dir = out_dir + "/traces";
        c.report_dir = out_dir + "/reports";
      }
      maybe(jp, "dataset", c.dataset_path);
      maybe(jp, "net", c.net_path);
      maybe(jp, "mbar", c.mbar_path);
      maybe(jp, "trace_dir", c.trace_dir);
      maybe(jp, "report_dir", c.report_dir);
    }
    if (j.contains("tolerances")) {
      const auto& jt = j["tolerances"];
      maybe(jt, "viol_tol", c.viol_tol);
      maybe(jt, "increment_factor", c.increment_factor);
      maybe(jt, "calibration_max_rounds", c.calibration_max_rounds);
      maybe(jt, "nlp_tol", c.nlp_tol);
      maybe(jt, "qcqp_tol", c.qcqp_tol);
    }
    if (j.contains("benchmark")) {
      maybe(j["benchmark"], "repeats", c.benchmark_repeats);
    }
    if (j.contains("x0")) c.x0 = j["x0"].get<std::vector<double>>();
    if (j.contains("x0_command")) c.x0_command = j["x0_command"].get<double>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }

  c.resolved_text = j.dump(2);
  return c;
}

RunConfig load_config(const std::string& path, const std::vector<std::string>& overrides) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config file not found: " + path);
  std::stringstream buf;
  buf << in.rdbuf();

  json j;
  try {
    j = json::parse(buf.str());
  } catch (const json::parse_error& e) {
    throw ConfigError("config: " + path + ": " + e.what());
  }

  for (const auto& kv : overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("--set expects key=value, got '" + kv + "'");
    }
    const std::string key = kv.substr(0, eq);
    const std::string val = kv.substr(eq + 1);

    json* node = &j;
    std::stringstream ks(key);
    std::string part;
    std::vector<std::string> parts;
    while (std::getline(ks, part, '.')) parts.push_back(part);
    if (parts.empty()) throw ConfigError("--set: empty key");
    for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
      node = &(*node)[parts[i]];
    }
    json parsed;
    try {
      parsed = json::parse(val);
    } catch (const json::parse_error&) {
      parsed = val;  // plain string
    }
    (*node)[parts.back()] = parsed;
  }

  return parse_config_text(j.dump());
}

std::unique_ptr<PlantModel> make_plant(const PlantConfig& pc) {
  const InputInterval box{pc.v_min, pc.v_max};
  if (pc.kind == "pendulum" || pc.kind == "dual_pendulum") {
    PendulumPlant::Params p;
    p.Ts = pc.Ts;
    p.a = pc.a;
    p.b = pc.b;
    p.c = pc.c;
    p.x1_max = pc.x1_max;
    p.interval = box;
    if (pc.kind == "pendulum") return std::make_unique<PendulumPlant>(p);
    return std::make_unique<DualOutputPendulum>(p, pc.x2_max);
  }
  if (pc.kind == "linear") {
    try {
      return std::make_unique<LinearPlant>(matrix_from(pc.A, "A"), vector_from(pc.B),
                                           matrix_from(pc.C, "C"), vector_from(pc.D), box);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("plant: ") + e.what());
    }
  }
  throw ConfigError("plant: unknown kind '" + pc.kind + "'");
}

StateVector initial_state(const RunConfig& config, const PlantModel& plant,
                          const ReferenceProfile& profile) {
  if (config.x0) {
    if (static_cast<int>(config.x0->size()) != plant.state_dim()) {
      throw ConfigError("x0: length does not match the plant state dimension");
    }
    return vector_from(*config.x0);
  }
  const double cmd = config.x0_command ? *config.x0_command : profile.at(0);
  return equilibrium(plant, saturate(plant.input_interval(), cmd));
}

}  // namespace govern
