#pragma once

#include "drspcrl/robust_core.hpp"

#include <random>

namespace drspcrl {

/// Maps an observation to an executable action. Any randomness comes from the
/// caller's stream so that evaluation stays seed-isolated.
class Policy {
public:
    virtual ~Policy() = default;
    virtual Vector act(const Vector& observation, std::mt19937_64& rng) const = 0;
};

} // namespace drspcrl
