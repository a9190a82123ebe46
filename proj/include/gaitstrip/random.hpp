#pragma once

#include "gaitstrip/ecm.hpp"
#include "gaitstrip/tensor.hpp"

#include <random>

namespace gaitstrip {

// Seeded fills used by the self-test, the verification probes and the tests.
Tensor random_uniform(const Shape& shape, std::mt19937_64& rng, float lo = 0.0f, float hi = 1.0f);
Tensor random_normal(const Shape& shape, std::mt19937_64& rng, float stddev = 1.0f);

ConvKernel random_kernel(std::size_t c_out, std::size_t c_in, Extent3 extents, std::mt19937_64& rng,
                         float stddev = 1.0f, bool with_bias = true);

// Branches required by `kind`, weights ~ N(0, stddev^2), biases likewise unless disabled.
EcmParams random_ecm_params(std::size_t c_in, std::size_t c_out, BlockKind kind, std::mt19937_64& rng,
                            float stddev = 1.0f, bool with_bias = true);

} // namespace gaitstrip
