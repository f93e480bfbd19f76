#include "sbnn/cma_es.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <Eigen/Dense>

namespace sbnn {

CmaState cma_init(int dim, std::uint64_t seed) {
  if (dim < 1) throw std::invalid_argument("cma_init: dimension must be >= 1");
  CmaState s;
  const double n = dim;
  s.dim = dim;
  s.lambda = 4 + static_cast<int>(std::floor(3.0 * std::log(n)));
  s.mu = s.lambda / 2;

  // Log-decreasing positive weights, normalized to sum 1.
  s.weights.resize(s.mu);
  for (int i = 0; i < s.mu; ++i)
    s.weights[i] = std::log(s.lambda / 2.0 + 0.5) - std::log(i + 1.0);
  s.weights /= s.weights.sum();
  s.mu_eff = 1.0 / s.weights.squaredNorm();

  s.c_c = (4.0 + s.mu_eff / n) / (n + 4.0 + 2.0 * s.mu_eff / n);
  s.c_sigma = (s.mu_eff + 2.0) / (n + s.mu_eff + 5.0);
  s.c1 = 2.0 / ((n + 1.3) * (n + 1.3) + s.mu_eff);
  s.c_mu = std::min(1.0 - s.c1, 2.0 * (s.mu_eff - 2.0 + 1.0 / s.mu_eff) /
                                    ((n + 2.0) * (n + 2.0) + s.mu_eff));
  s.damps =
      1.0 + 2.0 * std::max(0.0, std::sqrt((s.mu_eff - 1.0) / (n + 1.0)) - 1.0) +
      s.c_sigma;
  s.chi_n = std::sqrt(n) * (1.0 - 1.0 / (4.0 * n) + 1.0 / (21.0 * n * n));

  s.mean = Eigen::VectorXd::Zero(dim);
  s.sigma = 0.5;
  s.cov = Eigen::MatrixXd::Identity(dim, dim);
  s.path_c = Eigen::VectorXd::Zero(dim);
  s.path_sigma = Eigen::VectorXd::Zero(dim);
  s.eigen_basis = Eigen::MatrixXd::Identity(dim, dim);
  s.eigen_scale = Eigen::VectorXd::Ones(dim);
  s.rng = Rng(seed);
  return s;
}

namespace {

void refresh_eigensystem(CmaState& s) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(s.cov);
  if (solver.info() != Eigen::Success)
    throw std::runtime_error("CMA-ES: eigendecomposition failed");
  const Eigen::VectorXd& values = solver.eigenvalues();
  if (values.minCoeff() <= 0.0)
    throw std::runtime_error("CMA-ES: covariance lost positive definiteness");
  s.eigen_basis = solver.eigenvectors();
  s.eigen_scale = values.cwiseSqrt();
  s.evals_at_eigen = s.evals;
}

}  // namespace

std::vector<Eigen::VectorXd> ask(CmaState& s) {
  // Lazy refresh: the decomposition is only O(1/(c1+cmu)) generations
  // stale, which does not affect convergence but avoids the n^3 cost on
  // every step.
  const double gap = static_cast<double>(s.lambda) /
                     ((s.c1 + s.c_mu) * static_cast<double>(s.dim) * 10.0);
  if (static_cast<double>(s.evals - s.evals_at_eigen) > gap) refresh_eigensystem(s);

  std::vector<Eigen::VectorXd> batch;
  batch.reserve(static_cast<std::size_t>(s.lambda));
  Eigen::VectorXd z(s.dim);
  for (int k = 0; k < s.lambda; ++k) {
    for (int i = 0; i < s.dim; ++i) z[i] = s.rng.normal();
    batch.push_back(s.mean +
                    s.sigma * (s.eigen_basis * s.eigen_scale.cwiseProduct(z)));
  }
  return batch;
}

void tell(CmaState& s, const std::vector<Eigen::VectorXd>& samples,
          const std::vector<double>& fitness) {
  const auto lambda = static_cast<std::size_t>(s.lambda);
  if (samples.size() != lambda || fitness.size() != lambda)
    throw std::invalid_argument("tell: batch size does not match lambda");
  for (double f : fitness)
    if (!std::isfinite(f))
      throw std::invalid_argument("tell: fitness values must be finite");
  for (const Eigen::VectorXd& x : samples)
    if (x.size() != s.dim)
      throw std::invalid_argument("tell: sample dimension mismatch");

  // Maximization: best fitness first; ties keep the earlier sample.
  std::vector<std::size_t> order(lambda);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return fitness[a] > fitness[b];
  });

  const Eigen::VectorXd old_mean = s.mean;
  s.mean.setZero();
  for (int i = 0; i < s.mu; ++i) s.mean += s.weights[i] * samples[order[static_cast<std::size_t>(i)]];

  const Eigen::VectorXd mean_shift = (s.mean - old_mean) / s.sigma;

  // C^(-1/2) from the (possibly slightly stale) eigensystem.
  const Eigen::VectorXd inv_scale = s.eigen_scale.cwiseInverse();
  const Eigen::VectorXd whitened =
      s.eigen_basis * inv_scale.cwiseProduct(s.eigen_basis.transpose() * mean_shift);

  s.path_sigma = (1.0 - s.c_sigma) * s.path_sigma +
                 std::sqrt(s.c_sigma * (2.0 - s.c_sigma) * s.mu_eff) * whitened;

  const double ps_norm = s.path_sigma.norm();
  const double expected_decay = std::sqrt(
      1.0 - std::pow(1.0 - s.c_sigma, 2.0 * static_cast<double>(s.generation + 1)));
  const bool hsig =
      ps_norm / expected_decay / s.chi_n < 1.4 + 2.0 / (s.dim + 1.0);

  s.path_c = (1.0 - s.c_c) * s.path_c;
  if (hsig)
    s.path_c += std::sqrt(s.c_c * (2.0 - s.c_c) * s.mu_eff) * mean_shift;

  Eigen::MatrixXd rank_mu = Eigen::MatrixXd::Zero(s.dim, s.dim);
  for (int i = 0; i < s.mu; ++i) {
    const Eigen::VectorXd y =
        (samples[order[static_cast<std::size_t>(i)]] - old_mean) / s.sigma;
    rank_mu.noalias() += s.weights[i] * y * y.transpose();
  }

  const double hsig_correction = hsig ? 0.0 : s.c_c * (2.0 - s.c_c);
  s.cov = (1.0 - s.c1 - s.c_mu) * s.cov +
          s.c1 * (s.path_c * s.path_c.transpose() + hsig_correction * s.cov) +
          s.c_mu * rank_mu;
  s.cov = 0.5 * (s.cov + s.cov.transpose().eval());  // keep exactly symmetric

  s.sigma *= std::exp((s.c_sigma / s.damps) * (ps_norm / s.chi_n - 1.0));
  if (!std::isfinite(s.sigma))
    throw std::runtime_error("CMA-ES: step size diverged");

  ++s.generation;
  s.evals += s.lambda;
}

}  // namespace sbnn
