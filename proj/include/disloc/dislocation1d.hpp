#pragma once

#include <complex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "disloc/floquet1d.hpp"
#include "disloc/linalg/periodic_chain.hpp"
#include "disloc/potential.hpp"

namespace disloc {

// ---------------------------------------------------------------------------
// Matching condition for H_t on the whole line.

// det [[phi_-(t p), phi_+(0)], [phi_-'(t p), phi_+'(0)]], where phi_- decays
// at -infinity and phi_+ at +infinity, both from unit eigenvectors of the
// monodromy matrix. A zero means H_t has the eigenvalue E.
double mismatch(const PotentialSpec& V, double t, double E, VectorNorm norm = VectorNorm::euclidean);

// Fixed-energy mismatch, reused across many t.
class MatchingFunction {
 public:
  MatchingFunction(const PotentialSpec& V, double E, VectorNorm norm = VectorNorm::euclidean);

  double operator()(double t) const;
  // Values on an ascending grid of t in [0, 1], propagating incrementally.
  std::vector<double> scan(const std::vector<double>& ts) const;

  double energy() const { return E_; }

 private:
  double det_with(const std::array<double, 2>& left) const;

  PotentialSpec V_;
  double E_;
  std::array<double, 2> left0_{};   // phi_-(0)
  std::array<double, 2> right0_{};  // phi_+(0)
};

// ---------------------------------------------------------------------------
// Branch tracing.

struct BranchSample {
  double t = 0, E = 0;
  double residual = 0;  // |mismatch| at the root
};

struct EigenBranch {
  int k = 0;
  // Continuation order, oriented so that the first sample has the smaller t.
  std::vector<BranchSample> samples;

  double t_min() const;
  double t_max() const;
  double e_min() const;
  double e_max() const;
  // Largest |dt| and |dE| between neighbouring samples.
  std::pair<double, double> max_jump() const;
};

struct TraceOptions {
  // Energy interval to sweep; defaults to the gap shrunk by 10 * tol.
  std::optional<std::pair<double, double>> energy_range;
  double t_step = 1e-3;          // scan resolution in t
  double root_tol = 1e-10;       // bisection width in t
  double residual_tol = 1e-8;    // roots with larger |mismatch| are rejected
  double gap_tol = 1e-10;        // band edge accuracy
  VectorNorm norm = VectorNorm::euclidean;
};

struct BranchTrace {
  int k = 0;
  Gap gap;
  std::vector<double> energies;            // the energy grid
  std::vector<int> roots_per_energy;
  std::vector<double> uncovered;           // grid energies without any root
  std::vector<EigenBranch> branches;
  double continuity_budget = 0;            // matching threshold and jump bound

  // The branch with the most samples (ties: smaller starting t).
  const EigenBranch& primary() const;
};

BranchTrace trace_branch(const PotentialSpec& V, int k, int n_subintervals, const TraceOptions& opt = {});

// Eigenvalue of H_t near the branch at parameter t, by bisection in E.
double branch_energy_at(const PotentialSpec& V, const EigenBranch& branch, double t,
                        VectorNorm norm = VectorNorm::euclidean);

std::string branch_csv(const EigenBranch& branch);

// ---------------------------------------------------------------------------
// Finite periodic approximants H_{n,t} on (-(n+t) p, n p).

struct ApproximantGrid {
  int n = 0;
  double t = 0;
  double h = 0;        // effective spacing, length / cells
  int cells = 0;
  double left = 0;     // -(n + t) p
};

// cells = ceil(length / h), so the effective spacing never exceeds h; at
// least 16 cells per period.
ApproximantGrid approximant_grid(const PotentialSpec& V, int n, double t, double h);

// Three-point finite differences with cell-averaged W_t and a periodic wrap.
template <class T>
linalg::PeriodicChain<T> approximant_chain(const PotentialSpec& V, const ApproximantGrid& g);

struct ApproximantSpectrum {
  int n = 0;
  double t = 0;
  double h = 0;
  double lo = 0, hi = 0;             // window [lo, hi)
  std::vector<double> eigenvalues;   // ascending
};

ApproximantSpectrum approximant_eigenvalues(const PotentialSpec& V, int n, double t,
                                            std::pair<double, double> window, double h);

// Eigenvalues of the discretized H_{n,t} strictly below E, by inertia.
int count_below(const PotentialSpec& V, int n, double t, double E, double h);

// Default grid: 64 cells per period.
inline double default_spacing(const PotentialSpec& V) { return V.period() / 64.0; }

// ---------------------------------------------------------------------------
// Spectral flow.

struct SpectralFlowResult {
  int k = 0;
  double e_ref = 0;
  int n = 0;
  int count_t0 = 0, count_t1 = 0;
  int flow = 0;
};

SpectralFlowResult spectral_flow(const PotentialSpec& V, int k, int n, double e_ref, double h,
                                 double gap_tol = 1e-10);

nlohmann::json to_json(const SpectralFlowResult& r);

// ---------------------------------------------------------------------------
// Closeness of approximant eigenvalues to the branch.

struct ClosenessOptions {
  int cells_per_period = 64;   // Richardson pair uses this and twice this
  double window_radius = 0.05; // search radius around the branch energy
};

struct ClosenessRow {
  int n = 0;
  double t = 0;               // parameter actually used (on the grid)
  double branch_energy = 0;   // E(t) of the whole-line operator
  double approximant[2]{};    // nearest approximant eigenvalue at h and h/2
  double reference[2]{};      // eigenvalue of the infinite discrete chain at h and h/2
  double richardson = 0;      // (4 e(h/2) - e(h)) / 3
  double literal_distance = 0;  // |richardson - branch_energy|
  double distance = 0;        // Richardson-paired |approximant - reference|
  bool flagged = false;       // no approximant eigenvalue in the window
};

// t is snapped to a multiple of 1 / cells_per_period so that every n and both
// grids align with the period. Distances are computed in quadruple
// precision because they fall far below double rounding for moderate n.
std::vector<ClosenessRow> branch_vs_approximant(const PotentialSpec& V, const EigenBranch& branch, double t,
                                                const std::vector<int>& n_list,
                                                const ClosenessOptions& opt = {});

// ---------------------------------------------------------------------------
// Resolvent continuity in t.

// ||(H_t - z)^{-1} - (H_s - z)^{-1}|| (spectral norm) for the discretized
// operator with potential W_t on the fixed ring (-(n+1) p, n p), so that the
// grid does not depend on t.
double resolvent_difference(const PotentialSpec& V, int n, double t, double s, std::complex<double> z,
                            double h);

}  // namespace disloc
