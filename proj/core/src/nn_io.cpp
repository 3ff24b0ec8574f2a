#include "govern/nn.hpp"

#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <sstream>

namespace govern {

namespace {

using nlohmann::json;

json vec_to_json(const Eigen::VectorXd& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

Eigen::VectorXd vec_from_json(const json& a) {
  Eigen::VectorXd v(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) v[static_cast<Eigen::Index>(i)] = a[i].get<double>();
  return v;
}

const char* act_name(Activation a) { return a == Activation::tanh_fn ? "tanh" : "linear"; }

Activation act_from_name(const std::string& s) {
  if (s == "tanh") return Activation::tanh_fn;
  if (s == "linear") return Activation::linear;
  throw std::runtime_error("net file: unknown activation '" + s + "'");
}

}  // namespace

void save_net(const FeedforwardNet& net, const std::string& path) {
  json j;
  j["input_dim"] = net.input_dim();
  j["output_dim"] = net.output_dim();
  j["normalization"] = {{"shift", vec_to_json(net.in_shift)},
                        {"scale", vec_to_json(net.in_scale)}};
  j["denormalization"] = {{"shift", vec_to_json(net.out_shift)},
                          {"scale", vec_to_json(net.out_scale)}};
  j["layers"] = json::array();
  for (const auto& l : net.layers) {
    json row_major = json::array();
    for (Eigen::Index r = 0; r < l.W.rows(); ++r)
      for (Eigen::Index c = 0; c < l.W.cols(); ++c) row_major.push_back(l.W(r, c));
    j["layers"].push_back({{"rows", l.W.rows()},
                           {"cols", l.W.cols()},
                           {"W", row_major},
                           {"b", vec_to_json(l.b)},
                           {"activation", act_name(l.act)}});
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_net: cannot open " + path);
  out << j.dump(2) << "\n";
}

FeedforwardNet load_net(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_net: cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw std::runtime_error("load_net: " + path + ": " + e.what());
  }

  FeedforwardNet net;
  try {
    const auto& norm = j.at("normalization");
    net.in_shift = vec_from_json(norm.at("shift"));
    net.in_scale = vec_from_json(norm.at("scale"));
    if (j.contains("denormalization")) {
      net.out_shift = vec_from_json(j["denormalization"].at("shift"));
      net.out_scale = vec_from_json(j["denormalization"].at("scale"));
    }
    for (const auto& jl : j.at("layers")) {
      Layer l;
      const int rows = jl.at("rows").get<int>();
      const int cols = jl.at("cols").get<int>();
      const auto& W = jl.at("W");
      if (static_cast<int>(W.size()) != rows * cols) {
        throw std::runtime_error("net file: layer W has " + std::to_string(W.size()) +
                                 " entries, expected rows*cols");
      }
      l.W.resize(rows, cols);
      for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) l.W(r, c) = W[r * cols + c].get<double>();
      l.b = vec_from_json(jl.at("b"));
      if (l.b.size() != rows) throw std::runtime_error("net file: layer b length != rows");
      l.act = act_from_name(jl.at("activation").get<std::string>());
      net.layers.push_back(std::move(l));
    }
  } catch (const json::out_of_range& e) {
    // e.what() names the missing field
    throw std::runtime_error("load_net: " + path + ": missing field: " + e.what());
  } catch (const json::type_error& e) {
    throw std::runtime_error("load_net: " + path + ": " + e.what());
  }

  if (net.layers.empty()) throw std::runtime_error("load_net: " + path + ": no layers");
  if (net.out_scale.size() == 0) {
    net.out_shift = Eigen::VectorXd::Zero(net.output_dim());
    net.out_scale = Eigen::VectorXd::Ones(net.output_dim());
  }
  const int din_declared = j.at("input_dim").get<int>();
  const int dout_declared = j.at("output_dim").get<int>();
  if (din_declared != net.input_dim() || dout_declared != net.output_dim()) {
    throw std::runtime_error("load_net: " + path + ": declared dims do not match layers");
  }
  return net;
}

void save_dataset_csv(const TrainingDataset& dataset, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_dataset_csv: cannot open " + path);
  if (dataset.records.empty()) throw std::invalid_argument("save_dataset_csv: empty dataset");

  const int nx = static_cast<int>(dataset.records.front().x.size());
  const int nv = static_cast<int>(dataset.records.front().V_star.size());
  for (int i = 0; i < nx; ++i) out << "x" << i << ",";
  out << "r";
  for (int i = 0; i < nv; ++i) out << ",v" << i;
  out << "\n";

  char buf[32];
  auto put = [&](double v) {
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    out << buf;
  };
  for (const auto& rec : dataset.records) {
    if (!rec.ok) continue;
    for (int i = 0; i < nx; ++i) {
      put(rec.x[i]);
      out << ",";
    }
    put(rec.r);
    for (int i = 0; i < nv; ++i) {
      out << ",";
      put(rec.V_star[i]);
    }
    out << "\n";
  }
}

TrainingDataset load_dataset_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_dataset_csv: cannot open " + path);

  std::string header;
  if (!std::getline(in, header)) throw std::runtime_error("load_dataset_csv: empty file " + path);

  int nx = 0, nv = 0;
  {
    std::stringstream ss(header);
    std::string col;
    while (std::getline(ss, col, ',')) {
      if (col.rfind('x', 0) == 0) ++nx;
      else if (col.rfind('v', 0) == 0) ++nv;
      else if (col != "r") throw std::runtime_error("load_dataset_csv: unexpected column " + col);
    }
  }
  if (nv == 0) throw std::runtime_error("load_dataset_csv: no v columns in header");

  TrainingDataset ds;
  std::string line;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> vals;
    while (std::getline(ss, cell, ',')) vals.push_back(std::stod(cell));
    if (static_cast<int>(vals.size()) != nx + 1 + nv) {
      throw std::runtime_error("load_dataset_csv: line " + std::to_string(lineno) +
                               ": wrong field count");
    }
    DataRecord rec;
    rec.x = Eigen::Map<Eigen::VectorXd>(vals.data(), nx);
    rec.r = vals[nx];
    rec.V_star = Eigen::Map<Eigen::VectorXd>(vals.data() + nx + 1, nv);
    ds.records.push_back(std::move(rec));
  }
  return ds;
}

}  // namespace govern
