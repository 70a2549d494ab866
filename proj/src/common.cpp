#include "arrival/common.hpp"

namespace arrival {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::invalid_input: return "invalid input";
    case ErrorKind::degenerate_state: return "degenerate state";
    case ErrorKind::resolution: return "resolution";
    case ErrorKind::coverage: return "grid coverage";
    case ErrorKind::domain: return "domain";
    case ErrorKind::normalization: return "normalization";
    case ErrorKind::construction: return "construction";
    case ErrorKind::node_proximity: return "node proximity";
    case ErrorKind::config: return "config";
  }
  return "unknown";
}

void Units::validate() const {
  if (!(hbar > 0.0) || !(mass > 0.0) || !std::isfinite(hbar) || !std::isfinite(mass))
    throw Error(ErrorKind::invalid_input, "hbar and mass must be finite and positive");
}

UniformGrid::UniformGrid(double min, double max, Eigen::Index size)
    : min_(min), max_(max), size_(size) {
  if (!std::isfinite(min) || !std::isfinite(max) || !(min < max))
    throw Error(ErrorKind::invalid_input, "grid requires finite min < max");
  if (size < 4) throw Error(ErrorKind::invalid_input, "grid requires at least 4 nodes");
}

KGrid::KGrid(double k_min, double k_max, Eigen::Index n_k) : UniformGrid(k_min, k_max, n_k) {
  if (n_k < 16) throw Error(ErrorKind::invalid_input, "k grid requires n_k >= 16");
}

XGrid::XGrid(double x_min, double x_max, Eigen::Index n_x) : UniformGrid(x_min, x_max, n_x) {}

TimeGrid::TimeGrid(double t_min, double t_max, Eigen::Index n_t) : UniformGrid(t_min, t_max, n_t) {
  if (n_t < 64) throw Error(ErrorKind::invalid_input, "time grid requires n_t >= 64");
}

}  // namespace arrival
