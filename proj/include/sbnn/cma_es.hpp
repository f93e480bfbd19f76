#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "sbnn/rng.hpp"

namespace sbnn {

// CMA-ES in its standard form (rank-mu update, cumulative step-size
// adaptation), specialized to maximization: tell() expects raw fitness
// values where larger is better.
struct CmaState {
  int dim = 0;
  int lambda = 0;   // population size: 4 + floor(3 ln n)
  int mu = 0;       // parents: floor(lambda / 2)
  Eigen::VectorXd weights;  // mu positive recombination weights, sum 1
  double mu_eff = 0.0;
  double c_c = 0.0, c_sigma = 0.0, c1 = 0.0, c_mu = 0.0, damps = 0.0;
  double chi_n = 0.0;  // E||N(0, I)||

  Eigen::VectorXd mean;
  double sigma = 0.5;
  Eigen::MatrixXd cov;
  Eigen::VectorXd path_c, path_sigma;

  // Eigendecomposition of cov, refreshed lazily: cov = B diag(D^2) B^T.
  Eigen::MatrixXd eigen_basis;   // B
  Eigen::VectorXd eigen_scale;   // D
  long long evals_at_eigen = 0;

  long long generation = 0;
  long long evals = 0;
  Rng rng;

  CmaState() : rng(0) {}
};

// Fresh optimizer state centered at zero with step size 0.5 and identity
// covariance. Throws std::invalid_argument for dim < 1.
CmaState cma_init(int dim, std::uint64_t seed);

// Samples lambda candidates from the current search distribution.
std::vector<Eigen::VectorXd> ask(CmaState& state);

// Consumes the fitness of the batch returned by the matching ask() call
// and updates mean, paths, covariance and step size. Throws
// std::invalid_argument on batch size mismatch or non-finite fitness, and
// std::runtime_error if the covariance loses positive definiteness.
void tell(CmaState& state, const std::vector<Eigen::VectorXd>& samples,
          const std::vector<double>& fitness);

}  // namespace sbnn
