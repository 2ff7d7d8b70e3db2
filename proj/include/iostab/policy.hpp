#pragma once

namespace iostab {

/// Every tolerance used by a rank, stability, or feasibility decision.
/// Passed explicitly so that two runs with the same policy make the same
/// decisions; a zero rank/pinv tolerance selects the automatic
/// max(rows, cols) * eps * sigma_max threshold.
struct NumericPolicy {
  double rank_tol = 0.0;
  double pinv_tol = 0.0;
  // |resultant| below this times the coefficient-norm scale counts as zero.
  double resultant_rel_tol = 1e-9;
  // q_r must satisfy max Re(root) < -hurwitz_tol.
  double hurwitz_tol = 1e-9;
  double pathology_tol = 1e-8;
  // LMI strict feasibility: t* > lmi_strict_rel * max(||Dbar||_2, ||Phibar||_2).
  double lmi_strict_rel = 1e-6;
  // Barrier path following stops once the duality-gap bound falls below
  // lmi_gap_rel times the problem scale.
  double lmi_gap_rel = 1e-9;
  int lmi_max_newton = 400;
  double stability_tol = 1e-7;
  double filter_identity_rel = 1e-8;
  double decomposition_tol = 1e-8;
};

}  // namespace iostab
