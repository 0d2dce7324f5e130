#pragma once

#include "landing/errors.hpp"

#include <gtest/gtest.h>

#define EXPECT_ERROR_KIND(statement, expected_kind)                                   \
  do {                                                                                \
    try {                                                                             \
      statement;                                                                      \
      ADD_FAILURE() << "expected " << landing::to_string(expected_kind) << " error"; \
    } catch (const landing::Error& e) {                                               \
      EXPECT_EQ(e.kind(), expected_kind) << e.what();                                 \
    }                                                                                 \
  } while (0)

namespace landing::testing {

inline double rel(const Vector& a, const Vector& b) { return (a - b).norm() / std::max(1.0, b.norm()); }
inline double rel(const Matrix& a, const Matrix& b) { return (a - b).norm() / std::max(1.0, b.norm()); }

inline Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Index>(v.size()));
  Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

}  // namespace landing::testing
