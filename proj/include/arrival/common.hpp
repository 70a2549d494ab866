#pragma once

#include <Eigen/Core>

#include <cmath>
#include <stdexcept>
#include <string>
#include <string_view>

namespace arrival {

enum class ErrorKind {
  invalid_input,
  degenerate_state,
  resolution,
  coverage,
  domain,
  normalization,
  construction,
  node_proximity,
  config,
};

std::string_view to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Physical constants of the free particle. Natural units by default.
struct Units {
  double hbar = 1.0;
  double mass = 1.0;

  double hbar_over_mass() const { return hbar / mass; }
  void validate() const;
};

/// Closed uniform grid [min, max] with `size` nodes, both ends included.
class UniformGrid {
 public:
  UniformGrid() = default;
  UniformGrid(double min, double max, Eigen::Index size);

  double min() const { return min_; }
  double max() const { return max_; }
  Eigen::Index size() const { return size_; }
  double step() const { return (max_ - min_) / static_cast<double>(size_ - 1); }
  double operator[](Eigen::Index i) const { return min_ + step() * static_cast<double>(i); }
  Eigen::ArrayXd points() const { return Eigen::ArrayXd::LinSpaced(size_, min_, max_); }
  bool contains(double v) const { return v >= min_ && v <= max_; }

  bool operator==(const UniformGrid&) const = default;

 protected:
  double min_ = 0.0;
  double max_ = 1.0;
  Eigen::Index size_ = 2;
};

/// Momentum grid. At least 16 nodes.
class KGrid : public UniformGrid {
 public:
  KGrid() = default;
  KGrid(double k_min, double k_max, Eigen::Index n_k);
  bool right_moving() const { return min_ > 0.0; }
};

/// Position grid used for configuration-space quadrature.
class XGrid : public UniformGrid {
 public:
  XGrid() = default;
  XGrid(double x_min, double x_max, Eigen::Index n_x);
};

/// Time grid. At least 64 nodes.
class TimeGrid : public UniformGrid {
 public:
  TimeGrid() = default;
  TimeGrid(double t_min, double t_max, Eigen::Index n_t);
  /// Same span, twice the resolution (2n - 1 nodes, old nodes kept).
  TimeGrid refined() const { return {min_, max_, 2 * size_ - 1}; }
};

}  // namespace arrival
