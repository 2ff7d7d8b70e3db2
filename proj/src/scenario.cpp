#include "iostab/scenario.hpp"

#include <boost/lexical_cast.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "iostab/error.hpp"

namespace iostab {

namespace pt = boost::property_tree;

namespace {

[[noreturn]] void config_error(const std::string& key, const std::string& what) {
  throw Error(ErrorKind::kConfig, "config: " + key + ": " + what);
}

std::vector<double> parse_list(const std::string& key, const std::string& text) {
  std::vector<double> out;
  std::string token;
  auto flush = [&]() {
    if (token.empty()) return;
    char* end = nullptr;
    const double v = std::strtod(token.c_str(), &end);
    if (end == token.c_str() || *end != '\0' || !std::isfinite(v)) config_error(key, "bad number '" + token + "'");
    out.push_back(v);
    token.clear();
  };
  for (char ch : text) {
    if (ch == ',' || ch == ' ' || ch == '\t') {
      flush();
    } else {
      token.push_back(ch);
    }
  }
  flush();
  return out;
}

Mat parse_matrix(const std::string& key, const std::string& text, int rows, int cols) {
  std::vector<std::vector<double>> parsed;
  std::stringstream ss(text);
  std::string row;
  while (std::getline(ss, row, ';')) parsed.push_back(parse_list(key, row));
  if (static_cast<int>(parsed.size()) != rows) {
    config_error(key, "expected " + std::to_string(rows) + " rows, got " + std::to_string(parsed.size()));
  }
  Mat out(rows, cols);
  for (int i = 0; i < rows; ++i) {
    if (static_cast<int>(parsed[static_cast<std::size_t>(i)].size()) != cols) {
      config_error(key, "row " + std::to_string(i + 1) + " needs " + std::to_string(cols) + " entries");
    }
    for (int j = 0; j < cols; ++j) out(i, j) = parsed[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  }
  return out;
}

template <typename T>
T get_or(const pt::ptree& tree, const std::string& key, T fallback) {
  const auto node = tree.get_optional<std::string>(key);
  if (!node) return fallback;
  try {
    return boost::lexical_cast<T>(*node);
  } catch (const boost::bad_lexical_cast&) {
    config_error(key, "cannot parse '" + *node + "'");
  }
}

bool get_bool(const pt::ptree& tree, const std::string& key, bool fallback) {
  const auto node = tree.get_optional<std::string>(key);
  if (!node) return fallback;
  if (*node == "true" || *node == "1" || *node == "yes") return true;
  if (*node == "false" || *node == "0" || *node == "no") return false;
  config_error(key, "expected true or false");
}

void read_plant(const pt::ptree& plant, Scenario& sc) {
  sc.n = get_or<int>(plant, "n", 0);
  sc.m = get_or<int>(plant, "m", 1);
  sc.p = get_or<int>(plant, "p", 1);
  if (sc.n < 1 || sc.m < 1 || sc.p < 1) config_error("plant", "n, m and p must be >= 1");
  sc.a_coef.clear();
  sc.b_coef.clear();
  if (plant.get_optional<std::string>("a")) {
    if (sc.m != 1 || sc.p != 1) config_error("plant.a", "scalar shorthand is for m = p = 1 only");
    const auto a = parse_list("plant.a", plant.get<std::string>("a"));
    const auto b = parse_list("plant.b", plant.get<std::string>("b", ""));
    if (static_cast<int>(a.size()) != sc.n || static_cast<int>(b.size()) != sc.n) {
      config_error("plant", "a and b need n = " + std::to_string(sc.n) + " entries each");
    }
    for (int i = 0; i < sc.n; ++i) {
      sc.a_coef.push_back(Mat::Constant(1, 1, a[static_cast<std::size_t>(i)]));
      sc.b_coef.push_back(Mat::Constant(1, 1, b[static_cast<std::size_t>(i)]));
    }
  } else {
    for (int i = 1; i <= sc.n; ++i) {
      const std::string ak = "A" + std::to_string(i);
      const std::string bk = "B" + std::to_string(i);
      const auto a = plant.get_optional<std::string>(ak);
      const auto b = plant.get_optional<std::string>(bk);
      if (!a || !b) config_error("plant", "missing " + ak + " or " + bk);
      sc.a_coef.push_back(parse_matrix("plant." + ak, *a, sc.p, sc.p));
      sc.b_coef.push_back(parse_matrix("plant." + bk, *b, sc.p, sc.m));
    }
  }
  if (const auto x0 = plant.get_optional<std::string>("x0")) {
    const auto v = parse_list("plant.x0", *x0);
    if (static_cast<int>(v.size()) != sc.p * sc.n) config_error("plant.x0", "needs p * n entries");
    sc.x0 = Eigen::Map<const Vec>(v.data(), static_cast<Eigen::Index>(v.size()));
  } else {
    sc.x0.reset();
  }
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fmt_list(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ", " : "") + fmt(v[i]);
  return out;
}

std::string fmt_matrix(const Mat& a) {
  std::string out;
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    if (i) out += "; ";
    for (Eigen::Index j = 0; j < a.cols(); ++j) out += (j ? " " : "") + fmt(a(i, j));
  }
  return out;
}

nlohmann::ordered_json matrix_json(const Mat& a) {
  auto rows = nlohmann::ordered_json::array();
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    auto row = nlohmann::ordered_json::array();
    for (Eigen::Index j = 0; j < a.cols(); ++j) row.push_back(a(i, j));
    rows.push_back(row);
  }
  return rows;
}

#define IOSTAB_POLICY_FIELDS(X) \
  X(rank_tol)                   \
  X(pinv_tol)                   \
  X(resultant_rel_tol)          \
  X(hurwitz_tol)                \
  X(pathology_tol)              \
  X(lmi_strict_rel)             \
  X(lmi_gap_rel)                \
  X(lmi_max_newton)             \
  X(stability_tol)              \
  X(filter_identity_rel)                 \
  X(decomposition_tol)

}  // namespace

DiffOpModel Scenario::model() const { return DiffOpModel(n, m, p, a_coef, b_coef); }

int Scenario::resolved_pe_order() const { return pe_order > 0 ? pe_order : default_pe_order(n, m, p); }

int Scenario::resolved_samples() const {
  return samples > 0 ? samples : default_sample_count(n, m, p);
}

Vec Scenario::resolved_x0() const {
  if (x0) return *x0;
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  std::uniform_real_distribution<double> draw(-1.0, 1.0);
  Vec out(p * n);
  for (Eigen::Index i = 0; i < out.size(); ++i) out(i) = draw(rng);
  return out;
}

Scenario parse_scenario(const std::string& text, const std::string& base_dir) {
  pt::ptree tree;
  std::istringstream in(text);
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw Error(ErrorKind::kConfig, std::string("config: ") + e.what());
  }
  Scenario sc;
  sc.name = tree.get<std::string>("name", tree.get<std::string>("run.name", "scenario"));

  const auto plant = tree.get_child_optional("plant");
  if (!plant) config_error("plant", "section missing");
  if (const auto file = plant->get_optional<std::string>("file")) {
    const std::filesystem::path path = std::filesystem::path(base_dir) / *file;
    std::ifstream f(path);
    if (!f) config_error("plant.file", "cannot open " + path.string());
    pt::ptree other;
    try {
      pt::read_ini(f, other);
    } catch (const pt::ini_parser_error& e) {
      throw Error(ErrorKind::kConfig, std::string("config: plant.file: ") + e.what());
    }
    const auto inner = other.get_child_optional("plant");
    if (!inner) config_error("plant.file", "no [plant] section in " + path.string());
    read_plant(*inner, sc);
  } else {
    read_plant(*plant, sc);
  }

  const auto filter = tree.get_child_optional("filter");
  if (!filter) config_error("filter", "section missing");
  sc.c = parse_list("filter.c", filter->get<std::string>("c", ""));
  if (static_cast<int>(sc.c.size()) != sc.n) config_error("filter.c", "needs n entries");
  sc.beta = get_or<double>(*filter, "beta", sc.beta);

  const pt::ptree empty;
  const auto& ex = tree.get_child("excitation", empty);
  sc.seed = get_or<std::uint64_t>(ex, "seed", sc.seed);
  sc.ts = get_or<double>(ex, "Ts", sc.ts);
  sc.samples = get_or<int>(ex, "N", sc.samples);
  sc.pe_order = get_or<int>(ex, "order", sc.pe_order);
  sc.amplitude = get_or<double>(ex, "amplitude", sc.amplitude);
  const std::string kind = ex.get<std::string>("kind", "uniform");
  if (kind == "uniform") {
    sc.kind = ExcitationKind::kUniform;
  } else if (kind == "constant") {
    sc.kind = ExcitationKind::kConstant;
  } else {
    config_error("excitation.kind", "expected uniform or constant");
  }
  if (!(sc.ts > 0.0)) config_error("excitation.Ts", "must be positive");
  if (!(sc.amplitude > 0.0)) config_error("excitation.amplitude", "must be positive");
  if (sc.samples < 0 || sc.pe_order < 0) config_error("excitation", "N and order must be >= 0");

  const std::string route = tree.get<std::string>("annihilator.route", "uniform-fir");
  if (route == "uniform-fir") {
    sc.route = AnnihilatorRoute::kUniformFir;
  } else if (route == "general-nullspace") {
    sc.route = AnnihilatorRoute::kGeneralNullspace;
  } else {
    config_error("annihilator.route", "expected uniform-fir or general-nullspace");
  }

  const auto& pol = tree.get_child("policy", empty);
#define IOSTAB_READ_POLICY(field) sc.policy.field = get_or<decltype(sc.policy.field)>(pol, #field, sc.policy.field);
  IOSTAB_POLICY_FIELDS(IOSTAB_READ_POLICY)
#undef IOSTAB_READ_POLICY

  sc.test_mode = get_bool(tree, "run.test_mode", sc.test_mode);
  sc.parallel = get_bool(tree, "run.parallel", sc.parallel);
  sc.fault_af = get_or<double>(tree.get_child("verify", empty), "fault_af", 0.0);
  sc.out_dir = tree.get<std::string>("output.dir", sc.out_dir);
  return sc;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kConfig, "config: cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  const auto parent = std::filesystem::path(path).parent_path();
  return parse_scenario(buf.str(), parent.empty() ? "." : parent.string());
}

Scenario demo_scenario(const std::string& which) {
  Scenario sc;
  if (which == "siso") {
    sc.name = "demo-siso";
    sc.n = 1;
    sc.a_coef = {Mat::Constant(1, 1, -1.0)};
    sc.b_coef = {Mat::Constant(1, 1, 1.0)};
    sc.c = {1.0};
    sc.beta = 2.0;
    sc.ts = 0.1;
    sc.seed = 7;
  } else if (which == "mimo") {
    sc.name = "demo-mimo";
    sc.n = 2;
    sc.m = 2;
    sc.p = 2;
    Mat a1(2, 2), a2(2, 2), b1(2, 2), b2(2, 2);
    a1 << -1.0, 0.5, 0.0, 0.3;
    a2 << 0.2, 0.0, 0.1, -0.5;
    b1 << 1.0, 0.0, 0.0, 1.0;
    b2 << 0.5, 0.2, -0.3, 1.0;
    sc.a_coef = {a1, a2};
    sc.b_coef = {b1, b2};
    sc.c = {3.0, 2.0};
    sc.beta = 1.5;
    sc.ts = 0.1;
    sc.seed = 11;
  } else {
    throw Error(ErrorKind::kConfig, "demo: unknown scenario '" + which + "' (expected siso or mimo)");
  }
  return sc;
}

nlohmann::ordered_json scenario_echo(const Scenario& sc) {
  nlohmann::ordered_json j;
  j["name"] = sc.name;
  auto& plant = j["plant"];
  plant["n"] = sc.n;
  plant["m"] = sc.m;
  plant["p"] = sc.p;
  plant["A"] = nlohmann::ordered_json::array();
  plant["B"] = nlohmann::ordered_json::array();
  for (const auto& a : sc.a_coef) plant["A"].push_back(matrix_json(a));
  for (const auto& b : sc.b_coef) plant["B"].push_back(matrix_json(b));
  const Vec x0 = sc.resolved_x0();
  plant["x0"] = std::vector<double>(x0.data(), x0.data() + x0.size());
  plant["x0_source"] = sc.x0 ? "config" : "seed";
  j["filter"] = {{"c", sc.c}, {"beta", sc.beta}};
  j["excitation"] = {{"seed", sc.seed},
                     {"Ts", sc.ts},
                     {"N", sc.resolved_samples()},
                     {"order", sc.resolved_pe_order()},
                     {"amplitude", sc.amplitude},
                     {"kind", sc.kind == ExcitationKind::kUniform ? "uniform" : "constant"}};
  j["annihilator"] = {{"route", to_string(sc.route)}};
  auto& pol = j["policy"];
#define IOSTAB_ECHO_POLICY(field) pol[#field] = sc.policy.field;
  IOSTAB_POLICY_FIELDS(IOSTAB_ECHO_POLICY)
#undef IOSTAB_ECHO_POLICY
  j["run"] = {{"test_mode", sc.test_mode}};
  j["verify"] = {{"fault_af", sc.fault_af}};
  return j;
}

std::string format_scenario(const Scenario& sc) {
  std::ostringstream out;
  out << "name = " << sc.name << "\n\n[plant]\nn = " << sc.n << "\nm = " << sc.m << "\np = " << sc.p << "\n";
  if (sc.m == 1 && sc.p == 1) {
    std::vector<double> a, b;
    for (const auto& x : sc.a_coef) a.push_back(x(0, 0));
    for (const auto& x : sc.b_coef) b.push_back(x(0, 0));
    out << "a = " << fmt_list(a) << "\nb = " << fmt_list(b) << "\n";
  } else {
    for (std::size_t i = 0; i < sc.a_coef.size(); ++i) out << "A" << i + 1 << " = " << fmt_matrix(sc.a_coef[i]) << "\n";
    for (std::size_t i = 0; i < sc.b_coef.size(); ++i) out << "B" << i + 1 << " = " << fmt_matrix(sc.b_coef[i]) << "\n";
  }
  if (sc.x0) out << "x0 = " << fmt_list(std::vector<double>(sc.x0->data(), sc.x0->data() + sc.x0->size())) << "\n";
  out << "\n[filter]\nc = " << fmt_list(sc.c) << "\nbeta = " << fmt(sc.beta) << "\n";
  out << "\n[excitation]\nseed = " << sc.seed << "\nTs = " << fmt(sc.ts) << "\nN = " << sc.samples
      << "\norder = " << sc.pe_order << "\namplitude = " << fmt(sc.amplitude)
      << "\nkind = " << (sc.kind == ExcitationKind::kUniform ? "uniform" : "constant") << "\n";
  out << "\n[annihilator]\nroute = " << to_string(sc.route) << "\n\n[policy]\n";
#define IOSTAB_WRITE_POLICY(field) out << #field << " = " << fmt(static_cast<double>(sc.policy.field)) << "\n";
  IOSTAB_POLICY_FIELDS(IOSTAB_WRITE_POLICY)
#undef IOSTAB_WRITE_POLICY
  out << "\n[run]\ntest_mode = " << (sc.test_mode ? "true" : "false")
      << "\nparallel = " << (sc.parallel ? "true" : "false") << "\n";
  out << "\n[verify]\nfault_af = " << fmt(sc.fault_af) << "\n\n[output]\ndir = " << sc.out_dir << "\n";
  return out.str();
}

void set_axis(Scenario& sc, const std::string& axis, double value) {
  if (axis == "seed") {
    if (value < 0 || value != std::floor(value)) config_error("axis.seed", "must be a non-negative integer");
    sc.seed = static_cast<std::uint64_t>(value);
  } else if (axis == "Ts" || axis == "ts") {
    if (!(value > 0.0)) config_error("axis.Ts", "must be positive");
    sc.ts = value;
  } else if (axis == "N") {
    sc.samples = static_cast<int>(std::lround(value));
  } else if (axis == "order") {
    sc.pe_order = static_cast<int>(std::lround(value));
  } else if (axis == "beta") {
    sc.beta = value;
  } else if (axis == "amplitude") {
    sc.amplitude = value;
  } else {
    config_error("axis", "unknown axis '" + axis + "' (seed, Ts, N, order, beta, amplitude)");
  }
}

std::vector<double> parse_axis_values(const std::string& spec) {
  if (spec.find(':') != std::string::npos) {
    std::vector<double> parts;
    std::stringstream ss(spec);
    std::string tok;
    while (std::getline(ss, tok, ':')) {
      const auto v = parse_list("axis", tok);
      if (v.size() != 1) config_error("axis", "range must be start:stop:step");
      parts.push_back(v[0]);
    }
    if (parts.size() != 3 || !(parts[2] > 0.0) || parts[1] < parts[0]) {
      config_error("axis", "range must be start:stop:step with step > 0 and stop >= start");
    }
    std::vector<double> out;
    const auto count = static_cast<long>(std::floor((parts[1] - parts[0]) / parts[2] + 0.5));
    if (count > 100000) config_error("axis", "too many values");
    for (long i = 0; i <= count; ++i) out.push_back(parts[0] + static_cast<double>(i) * parts[2]);
    return out;
  }
  auto out = parse_list("axis", spec);
  if (out.empty()) config_error("axis", "no values");
  return out;
}

}  // namespace iostab
