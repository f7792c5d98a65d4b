// Copyright 2026 The Coreaug Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#ifndef COREAUG_TESTS_TEST_UTIL_HPP_
#define COREAUG_TESTS_TEST_UTIL_HPP_

#include <cstdint>

#include "coreaug/dataset.hpp"
#include "coreaug/linalg.hpp"
#include "coreaug/rng.hpp"

namespace coreaug::testing {

inline Matrix gaussian(std::size_t r, std::size_t c, std::uint64_t seed) {
  Rng rng(Stream::kMonteCarlo, {seed, 0x7e57});
  Matrix m(r, c);
  for (double& v : m.data()) v = rng.normal();
  return m;
}

inline Dataset unit_cube_data(std::size_t n, std::size_t d, std::size_t classes,
                              std::uint64_t seed) {
  Rng rng(Stream::kMonteCarlo, {seed, 0xda7a});
  Matrix x(n, d);
  for (double& v : x.data()) v = rng.uniform();
  std::vector<int> y(n);
  for (std::size_t i = 0; i < n; ++i) y[i] = static_cast<int>(i % classes);
  return Dataset(std::move(x), std::move(y), classes);
}

inline double max_abs_diff(const Matrix& a, const Matrix& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a.data()[i] - b.data()[i];
    m = d > m ? d : (-d > m ? -d : m);
  }
  return m;
}

}  // namespace coreaug::testing

#endif  // COREAUG_TESTS_TEST_UTIL_HPP_
