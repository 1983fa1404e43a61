// Experiment drivers: the corrupted-matrix replication grid (average RSE /
// F-measure over seeded trials) and phase-transition success maps. Trials
// run on worker threads; each trial draws from its own stream derived from
// (seed, trial index) so parallel and serial execution aggregate identically.
#pragma once

#include "bifactor/solvers.hpp"
#include "bifactor/synthetic.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace bifactor {

// jobs <= 0 resolves to the BIFACTOR_JOBS environment variable, then to the
// logical core count.
int resolve_jobs(int jobs);

struct PhaseGrid {
  std::vector<Index> ranks;
  std::vector<double> corruptions;
  std::vector<double> ratios;  // rank-major: ratios[ri * corruptions + ci]
  Index size = 0;
  int trials = 0;
  std::uint64_t seed = 0;
  RpcaMethod method = RpcaMethod::SlHalf;

  double at(std::size_t rank_idx, std::size_t corr_idx) const {
    return ratios[rank_idx * corruptions.size() + corr_idx];
  }
};

// Success = RSE(L, L*) < 1e-2; d = floor(1.25 r) per cell.
PhaseGrid phase_transition(RpcaMethod method, const std::vector<Index>& ranks,
                           const std::vector<double>& corruptions, Index size,
                           int trials, std::uint64_t seed, int jobs = 0,
                           double epsilon = 1e-5);

void write_phase_csv(std::ostream& out, const PhaseGrid& grid);

struct Table3Row {
  Index size = 0;
  Index r = 0;
  RpcaMethod method = RpcaMethod::SlHalf;
  int trials = 0;
  std::uint64_t seed = 0;
  double rse_mean = 0.0;
  double fm_mean = 0.0;
  double seconds = 0.0;  // summed per-trial wall time (not written to CSV)
  std::vector<double> rse_trials;
  std::vector<double> fm_trials;
  std::vector<Index> d_used;
};

// Per size: rank r = max(5, size/50), 20% outliers, noise factor 0.5, full
// observation; d comes from rank estimation per trial; all three methods run
// on the same instances.
std::vector<Table3Row> table3_experiment(const std::vector<Index>& sizes,
                                         int trials, std::uint64_t seed,
                                         int jobs = 0);

// Deterministic CSV (timings are reported separately so repeated runs are
// byte-identical).
void write_table3_csv(std::ostream& out, const std::vector<Table3Row>& rows);

// RFC-4180 field escaping.
std::string csv_field(const std::string& value);

}  // namespace bifactor
