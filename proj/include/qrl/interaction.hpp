#pragma once

#include <cstddef>
#include <functional>
#include <utility>

#include "qrl/linalg.hpp"

namespace qrl {

/// The only view of the environment the agent gets: its dimension and the
/// ability to send a state through it.
class Interaction {
 public:
  using Apply = std::function<StateVector(const StateVector&)>;

  Interaction(std::size_t dim, Apply apply) : dim_(dim), apply_(std::move(apply)) {}

  std::size_t dim() const noexcept { return dim_; }
  StateVector operator()(const StateVector& psi) const { return apply_(psi); }

 private:
  std::size_t dim_;
  Apply apply_;
};

}  // namespace qrl
