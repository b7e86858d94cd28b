#pragma once

#include <string>

#include "doctest.h"
#include "tempdir.hpp"
#include "mad/data.hpp"
#include "mad/error.hpp"
#include "mad/matrix.hpp"
#include "mad/rng.hpp"

namespace mad::test {

inline Matrix random_matrix(std::size_t rows, std::size_t cols, Rng& rng,
                            double lo = 0.0, double hi = 1.0) {
  Matrix m(rows, cols);
  for (double& v : m.values()) v = lo + (hi - lo) * uniform01(rng);
  return m;
}

inline std::vector<Window> random_windows(std::size_t count, std::size_t len,
                                          std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Window> out(count);
  for (std::size_t i = 0; i < count; ++i) {
    out[i].x = random_matrix(len, n, rng);
    out[i].label = static_cast<int>(i % 3 == 0);
    out[i].origin = {0, i};
  }
  return out;
}

template <class F>
ErrorKind error_kind_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected a mad::Error");
  return ErrorKind::usage;
}

template <class F>
std::string error_message_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.what();
  }
  FAIL("expected a mad::Error");
  return {};
}

}  // namespace mad::test
