#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>
#include <vector>

namespace cca {

using Vec3 = Eigen::Vector3d;
using VecX = Eigen::VectorXd;
using MatX = Eigen::MatrixXd;
using Mat3X = Eigen::Matrix<double, 3, Eigen::Dynamic>;
using MatX3 = Eigen::Matrix<double, Eigen::Dynamic, 3>;

// Base of every error thrown by the library. The CLI maps InputError to exit
// code 2 and anything else derived from Error to exit code 3.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed or inconsistent user input (files, dimensions, limits).
class InputError : public Error {
 public:
  using Error::Error;
};

class GeometryError : public Error {
 public:
  using Error::Error;
};

class VertexExplosionError : public GeometryError {
 public:
  VertexExplosionError(int actuators, int cap)
      : GeometryError("vertex explosion: " + std::to_string(actuators) +
                      " actuators exceeds the cap of " + std::to_string(cap) +
                      " (2^m vertices)"),
        actuators_(actuators),
        cap_(cap) {}
  int actuators() const { return actuators_; }
  int cap() const { return cap_; }

 private:
  int actuators_;
  int cap_;
};

class DegenerateHullError : public GeometryError {
 public:
  explicit DegenerateHullError(int affine_rank)
      : GeometryError("degenerate hull: input points have affine rank " +
                      std::to_string(affine_rank) + " < 3"),
        rank_(affine_rank) {}
  int affine_rank() const { return rank_; }

 private:
  int rank_;
};

class OriginNotInteriorError : public GeometryError {
 public:
  using GeometryError::GeometryError;
};

class DegenerateIntersectionError : public GeometryError {
 public:
  using GeometryError::GeometryError;
};

class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace cca
