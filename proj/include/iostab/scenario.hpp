#pragma once

// Scenario configuration: INI-style text with [plant], [filter], [excitation],
// [annihilator], [policy], [run], [verify] and [output] sections.
//
// [plant]        n, m, p; SISO shorthand a = a_1 .. a_n and b = b_1 .. b_n;
//                MIMO blocks A1 .. An (p x p) and B1 .. Bn (p x m) with rows
//                separated by ';'; optional x0; optional file = other.ini whose
//                [plant] section is used instead (path relative to this file).
// [filter]       c = c_1 .. c_n, beta.
// [excitation]   seed, Ts, N (0 = default), order (0 = default), amplitude,
//                kind = uniform | constant.
// [annihilator]  route = uniform-fir | general-nullspace.
// [policy]       any NumericPolicy field by name.
// [run]          test_mode = true | false, parallel = true | false.
// [verify]       fault_af: offset added to A_f(0,0) before the filter identity check.
// [output]       dir.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "iostab/excite.hpp"
#include "iostab/matkit.hpp"
#include "iostab/plant.hpp"
#include "iostab/policy.hpp"

namespace iostab {

struct Scenario {
  std::string name = "scenario";
  int n = 1;
  int m = 1;
  int p = 1;
  std::vector<Mat> a_coef;
  std::vector<Mat> b_coef;
  std::optional<Vec> x0;

  std::vector<double> c;
  double beta = 1.0;

  std::uint64_t seed = 1;
  double ts = 0.1;
  int samples = 0;   // N; 0 selects the default
  int pe_order = 0;  // 0 selects the default
  double amplitude = 1.0;
  ExcitationKind kind = ExcitationKind::kUniform;

  AnnihilatorRoute route = AnnihilatorRoute::kUniformFir;
  NumericPolicy policy;
  bool test_mode = true;
  bool parallel = true;
  double fault_af = 0.0;
  std::string out_dir = "out";

  DiffOpModel model() const;
  int resolved_samples() const;
  int resolved_pe_order() const;
  /// x0 if given, else a deterministic draw on [-1, 1]^{pn} from the seed.
  Vec resolved_x0() const;
};

/// Throws kConfig with the offending key on any malformed entry.
Scenario load_scenario(const std::string& path);
Scenario parse_scenario(const std::string& text, const std::string& base_dir = ".");

/// Built-in scenarios: "siso" (n = 1 unstable plant) and "mimo" (m = p = 2, n = 2).
Scenario demo_scenario(const std::string& which);

/// Fully resolved echo (defaults filled in, x0 drawn) for reports.
nlohmann::ordered_json scenario_echo(const Scenario& sc);

/// Writes a config that parse_scenario reads back to the same scenario.
std::string format_scenario(const Scenario& sc);

/// Applies one sweep axis value: seed, Ts, N, beta, amplitude or order.
void set_axis(Scenario& sc, const std::string& axis, double value);

/// "v1,v2,..." or "start:stop:step" (inclusive stop, within half a step).
std::vector<double> parse_axis_values(const std::string& spec);

}  // namespace iostab
