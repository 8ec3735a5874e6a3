#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace sawcub {

using Index = Eigen::Index;

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using RowVector = Eigen::Matrix<Scalar, 1, Eigen::Dynamic>;

using MatrixXd = Matrix<double>;
using VectorXd = Vector<double>;

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ZeroMatrix : public Error {
 public:
  ZeroMatrix() : Error("matrix has zero Frobenius norm") {}
};

class NonFiniteEntry : public Error {
 public:
  NonFiniteEntry() : Error("matrix contains NaN or Inf entries") {}
};

class NonpositiveWeight : public Error {
 public:
  explicit NonpositiveWeight(Index at)
      : Error("weight " + std::to_string(at) + " is not strictly positive"), index(at) {}
  Index index;
};

class AlreadyContained : public Error {
 public:
  AlreadyContained() : Error("constant vector already lies in the span of the basis") {}
};

class ZeroRow : public Error {
 public:
  ZeroRow() : Error("least-squares row has zero norm") {}
};

class SingularGram : public Error {
 public:
  SingularGram() : Error("Gram matrix of the selected rows is numerically singular") {}
};

/// ECM pool exhausted before the rule became exact. `subspace` is set when
/// the failure happens inside a multi-subspace driver.
class NoConvergence : public Error {
 public:
  explicit NoConvergence(const std::string& what, std::optional<Index> sub = std::nullopt)
      : Error(sub ? "subspace " + std::to_string(*sub + 1) + ": " + what : what), subspace(sub) {}
  std::optional<Index> subspace;
};

class IllPosed : public Error {
 public:
  using Error::Error;
};

class NotOptimal : public Error {
 public:
  NotOptimal() : Error("linear program was not solved to optimality") {}
};

class DegenerateWindow : public Error {
 public:
  explicit DegenerateWindow(Index cluster)
      : Error("all snapshots of cluster " + std::to_string(cluster + 1) + " are zero") {}
};

class ParseError : public Error {
 public:
  using Error::Error;
};

class ShapeMismatch : public Error {
 public:
  using Error::Error;
};

template <typename Derived>
void require_finite(const Eigen::DenseBase<Derived>& m) {
  if (!m.allFinite()) throw NonFiniteEntry();
}

template <typename Derived>
void require_positive(const Eigen::DenseBase<Derived>& w) {
  for (Index g = 0; g < w.size(); ++g)
    if (!(w(g) > 0)) throw NonpositiveWeight(g);
}

}  // namespace sawcub
