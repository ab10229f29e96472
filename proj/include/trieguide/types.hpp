#pragma once

#include <Eigen/Dense>

#include <chrono>
#include <cstdint>
#include <vector>

namespace trieguide {

/** Scalar type of every model parameter and probability. */
using scalar_t = double;

/** Dense column vector. */
using vector_t = Eigen::Matrix<scalar_t, Eigen::Dynamic, 1>;

/** Dense matrix. */
using matrix_t = Eigen::Matrix<scalar_t, Eigen::Dynamic, Eigen::Dynamic>;

/** Dense token id; vocabulary entries are 0..N-1 and N is the end-of-sequence symbol. */
using TokenId = std::int32_t;

/** Ordered token ids. */
using TokenSeq = std::vector<TokenId>;

/** Calendar day. */
using Date = std::chrono::sys_days;

/** Second-resolution point in time. */
using Timestamp = std::chrono::sys_seconds;

}  // namespace trieguide
