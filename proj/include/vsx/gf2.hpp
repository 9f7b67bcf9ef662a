// Copyright 2026 The vsx Authors.
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

#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace vsx {

//! Linear system over GF(2) whose right-hand sides are whole words: each
//! equation states that the XOR of its variables equals its target, which
//! solves up to 64 bit-planes at once.
class SparseSystem {
  public:
    SparseSystem() = default;
    explicit SparseSystem(std::size_t num_vars) : num_vars_(num_vars) {}

    //! Adds an equation. Repeated variables cancel in pairs. Throws
    //! std::out_of_range for indices >= num_vars().
    void add_equation(std::span<const std::uint32_t> vars, std::uint64_t target);

    [[nodiscard]] std::size_t num_vars() const noexcept { return num_vars_; }
    [[nodiscard]] std::size_t size() const noexcept { return targets_.size(); }
    [[nodiscard]] std::span<const std::uint32_t> equation(std::size_t i) const noexcept {
        return {vars_.data() + offsets_[i], offsets_[i + 1] - offsets_[i]};
    }
    [[nodiscard]] std::uint64_t target(std::size_t i) const noexcept { return targets_[i]; }

  private:
    std::size_t num_vars_ = 0;
    std::vector<std::size_t> offsets_{0};
    std::vector<std::uint32_t> vars_;
    std::vector<std::uint64_t> targets_;
};

struct Solution {
    bool solvable = false;
    std::vector<std::uint64_t> assignment;
};

//! Counters of one lazy elimination run.
struct LazyStats {
    std::size_t active = 0;  //!< variables moved to the dense system
    std::size_t solved = 0;  //!< variables paired with an equation
    std::size_t dense_equations = 0;
};

//! True iff every equation holds under `s.assignment`.
[[nodiscard]] bool verify(const SparseSystem& sys, const Solution& s);

//! Lazy Gaussian elimination.
//!
//! Variables start idle. An equation left with a single idle variable
//! solves it: the equation is set aside and XORed into every other equation
//! containing that variable, so it disappears from the rest of the system.
//! When no such equation exists, the idle variable occurring in most
//! equations (lowest index on ties) becomes active. Equations with no idle
//! variables form a dense system over the active variables, solved by
//! ordinary elimination; solved variables are then recovered from the
//! equations they were paired with. Free variables are set to zero.
[[nodiscard]] Solution lazy_gaussian_solve(const SparseSystem& sys, LazyStats* stats = nullptr);

//! Largest number of variables accepted by dense_solve_oracle.
inline constexpr std::size_t kDenseOracleMaxVars = 4096;

//! Textbook elimination on a dense bit matrix. Reference implementation for
//! tests; throws std::length_error above kDenseOracleMaxVars variables.
[[nodiscard]] Solution dense_solve_oracle(const SparseSystem& sys);

}  // namespace vsx
