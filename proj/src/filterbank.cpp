#include "iostab/filterbank.hpp"

#include <cmath>
#include <string>

#include "iostab/error.hpp"

namespace iostab {

FilterSpec::FilterSpec(std::vector<double> c, double beta, int m, int p, const NumericPolicy& policy)
    : c_(std::move(c)), beta_(beta), m_(m), p_(p) {
  if (c_.empty()) throw Error(ErrorKind::kDimension, "FilterSpec: c must have n >= 1 entries");
  if (m < 1 || p < 1) throw Error(ErrorKind::kDimension, "FilterSpec: m and p must be >= 1");
  if (!std::isfinite(beta)) throw Error(ErrorKind::kInput, "FilterSpec: beta must be finite");
  const double max_re = spectrum(companion_bottom(c_)).max_real();
  if (!(max_re < -policy.hurwitz_tol)) {
    throw Error(ErrorKind::kAssumption,
                "FilterSpec: q_r is not Hurwitz (max real root part " + std::to_string(max_re) + ")");
  }
  if (!check_beta_admissible(q_r(), beta_, policy)) {
    throw Error(ErrorKind::kAssumption, "FilterSpec: -beta is a root of q_r");
  }
}

CompanionMatrices build_companion(const FilterSpec& spec) {
  const int n = spec.n();
  CompanionMatrices out;
  out.a_r = companion_bottom(spec.c());
  out.b_r = Mat::Zero(n, 1);
  out.b_r(n - 1, 0) = 1.0;
  const Mat im = Mat::Identity(spec.m(), spec.m());
  const Mat ip = Mat::Identity(spec.p(), spec.p());
  out.a_rm = kron_product(out.a_r, im);
  out.b_rm = kron_product(out.b_r, im);
  out.a_rp = kron_product(out.a_r, ip);
  out.b_rp = kron_product(out.b_r, ip);
  return out;
}

ExperimentSystem assemble_experiment_system(const StateSpace& plant, const FilterSpec& spec) {
  plant.validate();
  if (plant.inputs() != spec.m() || plant.outputs() != spec.p()) {
    throw Error(ErrorKind::kDimension, "assemble_experiment_system: plant has " + std::to_string(plant.inputs()) +
                                           " inputs / " + std::to_string(plant.outputs()) +
                                           " outputs, filter expects " + std::to_string(spec.m()) + " / " +
                                           std::to_string(spec.p()));
  }
  const auto cm = build_companion(spec);
  AugmentedLayout lay;
  lay.h = static_cast<int>(plant.states());
  lay.m = spec.m();
  lay.p = spec.p();
  lay.n = spec.n();
  const int q = lay.chi_dim();
  const int mn = lay.m * lay.n;
  const int pn = lay.p * lay.n;
  const double beta = spec.beta();

  ExperimentSystem out;
  out.layout = lay;
  out.beta = beta;
  Mat& a = out.sys.a;
  Mat& b = out.sys.b;
  Mat& c = out.sys.c;
  a = Mat::Zero(lay.states(), lay.states());
  b = Mat::Zero(lay.states(), lay.m);

  a.block(lay.x(), lay.x(), lay.h, lay.h) = plant.a;
  b.block(lay.x(), 0, lay.h, lay.m) = plant.b;
  a.block(lay.zeta(), lay.zeta(), mn, mn) = cm.a_rm;
  b.block(lay.zeta(), 0, mn, lay.m) = cm.b_rm;
  a.block(lay.mu(), lay.mu(), pn, pn) = cm.a_rp;
  a.block(lay.mu(), lay.x(), pn, lay.h) = cm.b_rp * plant.c;
  a.block(lay.phi(), lay.phi(), q, q) = -beta * Mat::Identity(q, q);
  a.block(lay.phi(), lay.zeta(), q, q) = Mat::Identity(q, q);  // chi = col(zeta, mu) is contiguous
  a.block(lay.upsilon(), lay.upsilon(), lay.m, lay.m) = -beta * Mat::Identity(lay.m, lay.m);
  b.block(lay.upsilon(), 0, lay.m, lay.m) = Mat::Identity(lay.m, lay.m);

  const int outputs = lay.p + mn + pn + q + lay.m + q;
  c = Mat::Zero(outputs, lay.states());
  int row = 0;
  c.block(row, lay.x(), lay.p, lay.h) = plant.c;
  row += lay.p;
  c.block(row, lay.zeta(), lay.states() - lay.h, lay.states() - lay.h).setIdentity();
  row += mn + pn + q + lay.m;
  c.block(row, lay.zeta(), q, q) = Mat::Identity(q, q);
  c.block(row, lay.phi(), q, q) = -beta * Mat::Identity(q, q);
  return out;
}

Mat ExperimentRecord::chi() const {
  Mat out(zeta.rows() + mu.rows(), zeta.cols());
  out << zeta, mu;
  return out;
}

std::pair<Mat, Mat> discretize_zoh(const Mat& a, const Mat& b, double ts) {
  const Eigen::Index d = a.rows();
  const Eigen::Index m = b.cols();
  Mat block = Mat::Zero(d + m, d + m);
  block.topLeftCorner(d, d) = a * ts;
  block.topRightCorner(d, m) = b * ts;
  const Mat e = mat_exp(block);
  return {e.topLeftCorner(d, d), e.topRightCorner(d, m)};
}

ExperimentRecord simulate_zoh(const ExperimentSystem& aug, const Vec& x0_aug, const std::vector<Vec>& inputs,
                              double ts) {
  if (!(ts > 0.0)) throw Error(ErrorKind::kInput, "simulate_zoh: T_S must be positive");
  const auto& lay = aug.layout;
  if (x0_aug.size() != lay.states()) throw Error(ErrorKind::kDimension, "simulate_zoh: x0_aug has the wrong length");
  for (const auto& d : inputs) {
    if (d.size() != lay.m) throw Error(ErrorKind::kDimension, "simulate_zoh: input vector has the wrong length");
    if (!d.allFinite()) throw Error(ErrorKind::kInput, "simulate_zoh: non-finite input");
  }
  const auto [ad, bd] = discretize_zoh(aug.sys.a, aug.sys.b, ts);
  const int samples = static_cast<int>(inputs.size()) + 1;
  const int q = lay.chi_dim();

  ExperimentRecord rec;
  rec.m = lay.m;
  rec.p = lay.p;
  rec.n = lay.n;
  rec.ts = ts;
  rec.t.resize(static_cast<std::size_t>(samples));
  rec.u = Mat::Zero(lay.m, samples);
  rec.y.resize(lay.p, samples);
  rec.zeta.resize(lay.m * lay.n, samples);
  rec.mu.resize(lay.p * lay.n, samples);
  rec.phi.resize(q, samples);
  rec.upsilon.resize(lay.m, samples);
  rec.delta.resize(q, samples);
  rec.x0 = x0_aug.segment(lay.x(), lay.h);

  Vec state = x0_aug;
  for (int k = 0; k < samples; ++k) {
    rec.t[static_cast<std::size_t>(k)] = k * ts;
    if (!inputs.empty()) rec.u.col(k) = inputs[static_cast<std::size_t>(std::min(k, samples - 2))];
    const Vec out = aug.sys.c * state;
    int row = 0;
    rec.y.col(k) = out.segment(row, lay.p);
    row += lay.p;
    rec.zeta.col(k) = out.segment(row, lay.m * lay.n);
    row += lay.m * lay.n;
    rec.mu.col(k) = out.segment(row, lay.p * lay.n);
    row += lay.p * lay.n;
    rec.phi.col(k) = out.segment(row, q);
    row += q;
    rec.upsilon.col(k) = out.segment(row, lay.m);
    // Evaluated directly rather than through the output map so the stored
    // value is bit-identical to chi - beta * phi.
    rec.delta.col(k).head(lay.m * lay.n) = rec.zeta.col(k) - aug.beta * rec.phi.col(k).head(lay.m * lay.n);
    rec.delta.col(k).tail(lay.p * lay.n) = rec.mu.col(k) - aug.beta * rec.phi.col(k).tail(lay.p * lay.n);
    if (k + 1 < samples) state = ad * state + bd * inputs[static_cast<std::size_t>(k)];
  }
  return rec;
}

ExperimentRecord simulate_experiment(const StateSpace& plant, const FilterSpec& spec, const Vec& x0,
                                     const std::vector<Vec>& inputs, double ts) {
  const auto aug = assemble_experiment_system(plant, spec);
  if (x0.size() != aug.layout.h) throw Error(ErrorKind::kDimension, "simulate_experiment: x0 has the wrong length");
  Vec x0_aug = Vec::Zero(aug.layout.states());
  x0_aug.head(aug.layout.h) = x0;
  return simulate_zoh(aug, x0_aug, inputs, ts);
}

ControllerRealization build_controller(const FilterSpec& spec, const Mat& k_f) {
  const int q = spec.chi_dim();
  const int mn = spec.m() * spec.n();
  const int pn = spec.p() * spec.n();
  if (k_f.rows() != spec.m() || k_f.cols() != q) {
    throw Error(ErrorKind::kDimension, "build_controller: K_f must be " + std::to_string(spec.m()) + "x" +
                                           std::to_string(q));
  }
  const auto cm = build_companion(spec);
  ControllerRealization ctrl;
  ctrl.k_f = k_f;
  ctrl.a = Mat::Zero(q, q);
  ctrl.a.topLeftCorner(mn, mn) = cm.a_rm;
  ctrl.a.topRows(mn) += cm.b_rm * k_f;
  ctrl.a.bottomRightCorner(pn, pn) = cm.a_rp;
  ctrl.b = Mat::Zero(q, spec.p());
  ctrl.b.bottomRows(pn) = cm.b_rp;
  ctrl.c = k_f;
  return ctrl;
}

Mat closed_loop_matrix(const StateSpace& plant, const ControllerRealization& ctrl) {
  plant.validate();
  if (ctrl.c.rows() != plant.inputs() || ctrl.b.cols() != plant.outputs()) {
    throw Error(ErrorKind::kDimension, "closed_loop_matrix: controller does not match the plant");
  }
  const Eigen::Index h = plant.states();
  const Eigen::Index q = ctrl.a.rows();
  Mat cl(h + q, h + q);
  cl.topLeftCorner(h, h) = plant.a;
  cl.topRightCorner(h, q) = plant.b * ctrl.c;
  cl.bottomLeftCorner(q, h) = ctrl.b * plant.c;
  cl.bottomRightCorner(q, q) = ctrl.a;
  return cl;
}

}  // namespace iostab
