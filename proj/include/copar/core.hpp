#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <stdexcept>
#include <string>

namespace copar {

using Vector = Eigen::VectorXd;
using DenseMatrix = Eigen::MatrixXd;
using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;
using Triplet = Eigen::Triplet<double>;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Shapes, sizes or meshes that do not fit together.
class StructuralError : public Error {
 public:
  using Error::Error;
};

/// Argument values outside an operation's domain.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Step size at or above the solvability threshold.
class TauGuardError : public Error {
 public:
  TauGuardError(double tau, double tau_star)
      : Error("step size tau = " + std::to_string(tau) + " is not below tau_* = " +
              std::to_string(tau_star)),
        tau_(tau),
        tau_star_(tau_star) {}
  double tau() const { return tau_; }
  double tau_star() const { return tau_star_; }

 private:
  double tau_;
  double tau_star_;
};

class SolverError : public Error {
 public:
  explicit SolverError(const std::string& what, int step = -1) : Error(what), step_(step) {}
  int step() const { return step_; }
  void set_step(int step) { step_ = step; }

 private:
  int step_;
};

/// Conjugate gradients met a direction of non-positive curvature.
class IndefiniteSystemError : public SolverError {
 public:
  using SolverError::SolverError;
};

}  // namespace copar
