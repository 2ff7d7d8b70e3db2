#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "iostab/filterbank.hpp"
#include "iostab/matkit.hpp"
#include "iostab/policy.hpp"

namespace iostab {

struct ExcitationPlan {
  std::vector<Vec> d;
  double ts = 0.0;
  int certified_order = 0;
  // First index of the certified window; samples before it are not counted.
  int certify_from = 0;
  std::uint64_t seed = 0;
  int attempts = 0;
};

enum class ExcitationKind { kUniform, kConstant };

struct PeRequest {
  std::uint64_t seed = 0;
  int m = 1;
  int order = 1;   // L
  int length = 1;  // N
  double amplitude = 1.0;
  double ts = 0.0;
  int certify_from = 0;
  ExcitationKind kind = ExcitationKind::kUniform;
  int max_retries = 32;
};

/// Draws d_k uniformly on [-amplitude, amplitude]^m from a seeded generator
/// and retries until the window d[certify_from..] is persistently exciting
/// of the requested order. Constant sequences are returned uncertified (their
/// achieved order is recorded instead).
ExcitationPlan gen_pe_sequence(const PeRequest& req, const NumericPolicy& policy = {});

/// Hankel rank of depth `order` equals order * m.
bool check_pe_order(std::span<const Vec> seq, int order, const NumericPolicy& policy = {});

/// Largest L with check_pe_order(seq, L) true (0 if none).
int achieved_pe_order(std::span<const Vec> seq, const NumericPolicy& policy = {});

/// Default order 2((m+p)n + m) and length max(8n+4, (m+1)L - 1 + L).
int default_pe_order(int n, int m, int p);
int default_sample_count(int n, int m, int p);

/// True when no two points of the set differ by i 2 pi h / T_S, h != 0.
bool check_sampling_pathology(const std::vector<Complex>& points, double ts, double tol = 1e-8);

/// Convenience: the set {-beta} U spec(plant A) U spec(A_r).
std::vector<Complex> pathology_points(const Mat& plant_a, const FilterSpec& spec);

enum class AnnihilatorRoute { kUniformFir, kGeneralNullspace };

const char* to_string(AnnihilatorRoute route);

struct Annihilator {
  Mat w;  // N x Nbar
  AnnihilatorRoute route = AnnihilatorRoute::kUniformFir;
  std::vector<double> fir;  // w_0 .. w_{n+1} (uniform route only)
  int n = 0;
  double beta = 0.0;
  double ts = 0.0;

  int rows() const { return static_cast<int>(w.rows()); }
  int nbar() const { return static_cast<int>(w.cols()); }
};

/// FIR coefficients of (z - e^{-beta T_S}) det(zI - e^{A_r^T T_S}), leading 1.
std::vector<double> annihilator_fir(const FilterSpec& spec, double ts);

/// Remark-3 style construction for t_i = i T_S: N x (N - n - 1) lower
/// triangular Toeplitz with first column (w_{n+1}, ..., w_0, 0, ...).
Annihilator build_w_uniform(const FilterSpec& spec, double ts, int samples);

/// Orthonormal basis of ker(Theta), Theta built from the Cayley-Hamilton
/// coordinates of e^{A_r^T t_i}.
Annihilator build_w_general(const FilterSpec& spec, std::span<const double> times, const NumericPolicy& policy = {});

Mat apply_annihilator(const Mat& data, const Annihilator& w);

/// Streams each row through the FIR filter z^-(n+1)(z^{n+1} + w_1 z^n + ... + w_{n+1})
/// and keeps outputs n+2 .. N (the first n+1 outputs see the zero prehistory).
Mat apply_fir_streaming(const Mat& data, const Annihilator& w);

}  // namespace iostab
