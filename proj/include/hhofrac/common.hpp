#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <stdexcept>
#include <string>

namespace hhofrac {

using Index = std::ptrdiff_t;
using Point = Eigen::Vector2d;
using Vector2 = Eigen::Vector2d;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Base class of all errors raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Malformed or topologically invalid mesh input.
class MeshError : public Error {
public:
  using Error::Error;
};

/// Degenerate geometry detected while building local operators.
class GeometryError : public Error {
public:
  using Error::Error;
};

/// Invalid or inconsistent run configuration.
class ConfigError : public Error {
public:
  using Error::Error;
};

/// Linear solver breakdown or staggered iteration failure.
class SolverError : public Error {
public:
  using Error::Error;
};

/// File input/output failure.
class IoError : public Error {
public:
  using Error::Error;
};

/// z-component of the cross product of two plane vectors.
inline double cross(const Vector2& a, const Vector2& b) { return a.x() * b.y() - a.y() * b.x(); }

} // namespace hhofrac
