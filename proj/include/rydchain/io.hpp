// Copyright 2026 The rydchain Authors
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

#include <iosfwd>
#include <vector>

#include <json.hpp>

#include "rydchain/lindblad.hpp"
#include "rydchain/meanfield.hpp"
#include "rydchain/stability.hpp"

namespace rydchain {

/// Writes "# <json>" followed by a newline. Every CSV produced by the library
/// starts with such a line.
void write_header_line(std::ostream& out, const nlohmann::json& header);

/// Reads a leading "# <json>" line; returns null when the stream does not
/// start with one.
nlohmann::json read_header_line(std::istream& in);

/// Columns: member, t, site, sx, sy, sz. \p sites empty selects every site.
void write_trajectory_rows(std::ostream& out, const Trajectory& traj, int member,
                           const std::vector<int>& sites = {});
void write_trajectory_columns(std::ostream& out);

/// Columns: scan, index, kind, sx_a .. sz_b, residual, stability, max_real and,
/// when \p eigenvalues is set, six (re, im) pairs.
void write_fixed_point_columns(std::ostream& out, bool eigenvalues);
void write_fixed_point_rows(std::ostream& out, double scan_value,
                            const std::vector<FixedPoint>& points,
                            const std::vector<StabilityReport>& reports, bool eigenvalues);

/// Columns: t, mean_sz, entropy, purity, trace_error, hermiticity, min_eigenvalue.
void write_exact_columns(std::ostream& out);
void write_exact_row(std::ostream& out, double t, const DensityMatrix& rho,
                     const InvariantReport& inv);

}  // namespace rydchain
