#pragma once

#include "projlab/report.hpp"

#include <string>
#include <vector>

namespace projlab {

/// Lower bounds for the packing dimension of line and plane projections of an
/// s-dimensional set, and the elementary bound s/2.
struct SigmaExponents {
  double s = 0.0;
  /// 1/2 + (2s - 1)^2 / (2 (12 s^2 + 4 s - 1)); NaN unless s > 1/2.
  double sigma1 = 0.0;
  /// 1 + (s - 1)^2 / (2s - 1); NaN unless s > 1.
  double sigma2 = 0.0;
  double s_half = 0.0;
  bool sigma1_applicable = false;
  bool sigma2_applicable = false;
  /// |sigma1 - s/2| < 1e-3.
  bool crossing_flag = false;
};

SigmaExponents sigma_exponents(double s);

/// Root of sigma1(s) = s/2 in (1/2, 2], by bisection to 1e-12.
double sigma_crossing();

/// Depth-adapted attractor sample: the first generation whose balls have
/// diameter at most delta, capped at the ball limit.
int depth_for_delta(const SystemSpec& spec, double delta);

/// Translation taking the points into the closed positive octant, so that a
/// dyadic cube can hold them all.
Vector3d octant_shift(const PointCloud& points);

/// Lebesgue-style occupancy of cos(theta) K + sin(theta) K + K at bin width
/// delta for a one-dimensional equicontractive system K.
struct SumsetMeasure {
  double theta = 0.0;
  double delta = 0.0;
  std::size_t bins = 0;
  std::size_t intervals = 0;
  double measure = 0.0;
};

/// Covers K by its generation-m intervals, m the first generation with
/// intervals of length at most delta, forms the sumset of the covers as a
/// merged interval union (built by self-similarity, one generation at a time)
/// and counts the width-delta bins it meets.
SumsetMeasure sumset_measure(const System1& system, double theta, double delta);

ExperimentReport run_check_curve(const ExperimentConfig& config);
ExperimentReport run_frostman(const ExperimentConfig& config);
ExperimentReport run_project(const ExperimentConfig& config);
ExperimentReport run_boxdim(const ExperimentConfig& config);
ExperimentReport run_energy(const ExperimentConfig& config);
ExperimentReport run_discrete_theorem(const ExperimentConfig& config);
ExperimentReport run_sumset(const ExperimentConfig& config);
ExperimentReport run_transversality(const ExperimentConfig& config);
ExperimentReport run_pair_projection(const ExperimentConfig& config);

/// Dispatches on config.experiment.
ExperimentReport run_experiment(const ExperimentConfig& config);

}  // namespace projlab
