#include "iso/problem.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "json.hpp"

namespace iso {

namespace {

using nlohmann::json;

std::vector<double> number_list(const json& j, const std::string& field) {
  if (!j.is_array()) throw problem_error(field, "expected an array of numbers");
  std::vector<double> out;
  for (const auto& v : j) {
    if (!v.is_number()) throw problem_error(field, "non-numeric entry");
    out.push_back(v.get<double>());
  }
  return out;
}

Distribution read_distribution(const json& root, const std::string& mass_field,
                               const std::string& label_field) {
  auto mass = number_list(root.at(mass_field), mass_field);
  std::vector<std::string> labels;
  if (root.contains(label_field)) {
    const auto& j = root.at(label_field);
    if (!j.is_array()) throw problem_error(label_field, "expected an array of strings");
    for (const auto& v : j) {
      if (!v.is_string()) throw problem_error(label_field, "non-string entry");
      labels.push_back(v.get<std::string>());
    }
  } else {
    for (size_t i = 0; i < mass.size(); ++i) labels.push_back(std::to_string(i));
  }
  try {
    return Distribution(std::move(labels), std::move(mass));
  } catch (const std::exception& e) {
    throw problem_error(mass_field, e.what());
  }
}

}  // namespace

ProblemSpec parse_problem_text(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw problem_error("(document)", e.what());
  }
  if (!root.is_object()) throw problem_error("(document)", "expected a JSON object");
  if (!root.contains("p_x")) throw problem_error("p_x", "missing");
  if (!root.contains("cost")) throw problem_error("cost", "missing");

  Distribution px = read_distribution(root, "p_x", "alphabet_x");
  Distribution py = root.contains("p_y") ? read_distribution(root, "p_y", "alphabet_y")
                                         : px;

  const auto& jc = root.at("cost");
  if (!jc.is_array() || jc.empty()) throw problem_error("cost", "expected a matrix");
  std::vector<std::vector<double>> rows;
  for (size_t i = 0; i < jc.size(); ++i)
    rows.push_back(number_list(jc[i], "cost[" + std::to_string(i) + "]"));
  CostMatrix cost = [&] {
    try {
      return CostMatrix(std::move(rows));
    } catch (const std::exception& e) {
      throw problem_error("cost", e.what());
    }
  }();
  if (cost.rows() != px.size())
    throw problem_error("cost", "row count does not match p_x");
  if (cost.cols() != py.size())
    throw problem_error("cost", "column count does not match p_y");

  ProblemSpec spec(std::move(px), std::move(py), std::move(cost));
  if (root.contains("metric")) {
    if (!root.at("metric").is_boolean()) throw problem_error("metric", "expected a boolean");
    spec.metric = root.at("metric").get<bool>();
    if (spec.metric && !spec.cost.is_metric())
      throw problem_error("metric", "cost table violates the metric axioms");
  }
  if (root.contains("p_exponent")) {
    if (!root.at("p_exponent").is_number()) throw problem_error("p_exponent", "expected a number");
    spec.p_exponent = root.at("p_exponent").get<double>();
    if (spec.p_exponent < 1.0) throw problem_error("p_exponent", "must be >= 1");
  }
  if (root.contains("search")) {
    const auto& js = root.at("search");
    if (!js.is_object()) throw problem_error("search", "expected an object");
    auto& s = spec.search;
    if (js.contains("grid_step")) s.grid_step = js.at("grid_step").get<double>();
    if (js.contains("multistarts")) s.multistarts = js.at("multistarts").get<int>();
    if (js.contains("ccp_iters")) s.ccp_iters = js.at("ccp_iters").get<int>();
    if (js.contains("tol")) s.tol = js.at("tol").get<double>();
    if (js.contains("seed")) s.seed = js.at("seed").get<std::uint64_t>();
    if (!(s.grid_step > 0.0 && s.grid_step <= 0.25))
      throw problem_error("search.grid_step", "must be in (0, 1/4]");
  }
  return spec;
}

ProblemSpec parse_problem(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw problem_error(path, "cannot open file");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_problem_text(ss.str());
}

std::string format_value(const ExtReal& v) {
  if (v.is_pos_inf()) return "inf";
  if (v.is_neg_inf()) return "-inf";
  std::ostringstream os;
  os << std::setprecision(17) << v.value();
  return os.str();
}

void emit_curve(const ExponentCurve& curve, const std::string& path) {
  curve.validate();
  std::ofstream out(path);
  if (!out) throw problem_error(path, "cannot open file for writing");
  out << "alpha,tau,value,method\n";
  out << std::setprecision(17);
  for (size_t i = 0; i < curve.alpha_grid.size(); ++i)
    for (size_t j = 0; j < curve.tau_grid.size(); ++j)
      out << curve.alpha_grid[i] << ',' << curve.tau_grid[j] << ','
          << format_value(curve.values[i][j]) << ',' << curve.method[i][j] << '\n';
}

ExponentCurve parse_curve(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw problem_error(path, "cannot open file");
  std::string line;
  if (!std::getline(in, line) || line != "alpha,tau,value,method")
    throw problem_error(path, "missing or malformed CSV header");
  struct Row {
    double alpha, tau;
    ExtReal value;
    std::string method;
  };
  std::vector<Row> rows;
  size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string a, t, v, m;
    if (!std::getline(ss, a, ',') || !std::getline(ss, t, ',') ||
        !std::getline(ss, v, ',') || !std::getline(ss, m))
      throw problem_error(path + ":" + std::to_string(lineno), "expected 4 fields");
    try {
      ExtReal val = v == "inf" ? ExtReal::pos_inf()
                  : v == "-inf" ? ExtReal::neg_inf()
                                : ExtReal(std::stod(v));
      rows.push_back({std::stod(a), std::stod(t), val, m});
    } catch (const std::exception&) {
      throw problem_error(path + ":" + std::to_string(lineno), "malformed number");
    }
  }
  ExponentCurve curve;
  for (const auto& r : rows) {
    if (curve.alpha_grid.empty() || curve.alpha_grid.back() != r.alpha) {
      if (std::find(curve.alpha_grid.begin(), curve.alpha_grid.end(), r.alpha) !=
          curve.alpha_grid.end())
        throw problem_error(path, "rows are not grouped by alpha");
      curve.alpha_grid.push_back(r.alpha);
      curve.values.emplace_back();
      curve.method.emplace_back();
    }
    curve.values.back().push_back(r.value);
    curve.method.back().push_back(r.method);
    if (curve.alpha_grid.size() == 1) curve.tau_grid.push_back(r.tau);
  }
  curve.validate();
  return curve;
}

std::uint64_t fnv1a(const std::string& data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : data) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t fnv1a_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw problem_error(path, "cannot open file for hashing");
  std::stringstream ss;
  ss << in.rdbuf();
  return fnv1a(ss.str());
}

void write_manifest(const std::string& dir, const std::vector<std::string>& files,
                    std::uint64_t seed) {
  nlohmann::json m;
  m["seed"] = seed;
  m["format"] = 1;
  auto& fl = m["files"] = nlohmann::json::object();
  for (const auto& f : files) {
    std::ostringstream hex;
    hex << std::hex << std::setw(16) << std::setfill('0') << fnv1a_file(dir + "/" + f);
    fl[f] = hex.str();
  }
  std::ofstream out(dir + "/manifest.json");
  if (!out) throw problem_error(dir + "/manifest.json", "cannot open for writing");
  out << m.dump(2) << '\n';
}

}  // namespace iso
