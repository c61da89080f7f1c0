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

#include "rydchain/io.hpp"

#include <iomanip>
#include <istream>
#include <ostream>
#include <string>

#include "rydchain/errors.hpp"

namespace rydchain {

void write_header_line(std::ostream& out, const nlohmann::json& header) {
  out << "# " << header.dump() << '\n';
}

nlohmann::json read_header_line(std::istream& in) {
  if (in.peek() != '#') return nullptr;
  std::string line;
  std::getline(in, line);
  const auto pos = line.find('{');
  if (pos == std::string::npos) return nullptr;
  try {
    return nlohmann::json::parse(line.substr(pos));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed header line: ") + e.what());
  }
}

void write_trajectory_columns(std::ostream& out) { out << "member,t,site,sx,sy,sz\n"; }

void write_trajectory_rows(std::ostream& out, const Trajectory& traj, int member,
                           const std::vector<int>& sites) {
  out << std::setprecision(12);
  for (std::size_t i = 0; i < traj.times.size(); ++i) {
    const SpinLattice& s = traj.states[i];
    auto row = [&](int j) {
      out << member << ',' << traj.times[i] << ',' << j << ',' << s.sx[j] << ',' << s.sy[j] << ','
          << s.sz[j] << '\n';
    };
    if (sites.empty()) {
      for (int j = 0; j < s.size(); ++j) row(j);
    } else {
      for (int j : sites) {
        if (j < 0 || j >= s.size()) throw ConfigError("trajectory output: site out of range");
        row(j);
      }
    }
  }
}

void write_fixed_point_columns(std::ostream& out, bool eigenvalues) {
  out << "scan,index,kind,sx_a,sy_a,sz_a,sx_b,sy_b,sz_b,residual,stability,max_real";
  if (eigenvalues) {
    for (int k = 0; k < 6; ++k) out << ",ev" << k << "_re,ev" << k << "_im";
  }
  out << '\n';
}

void write_fixed_point_rows(std::ostream& out, double scan_value,
                            const std::vector<FixedPoint>& points,
                            const std::vector<StabilityReport>& reports, bool eigenvalues) {
  if (reports.size() != points.size()) throw ConfigError("fixed-point output: report count mismatch");
  out << std::setprecision(12);
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto& f = points[i];
    const auto& a = f.state.a;
    const auto& b = f.state.b;
    out << scan_value << ',' << i << ',' << (f.uniform() ? "uniform" : "bipartite") << ','
        << a.x() << ',' << a.y() << ',' << a.z() << ',' << b.x() << ',' << b.y() << ',' << b.z()
        << ',' << f.residual << ',' << to_string(reports[i].verdict) << ','
        << reports[i].max_real;
    if (eigenvalues) {
      for (std::size_t k = 0; k < 6; ++k) {
        if (k < reports[i].eigenvalues.size()) {
          out << ',' << reports[i].eigenvalues[k].real() << ',' << reports[i].eigenvalues[k].imag();
        } else {
          out << ",,";
        }
      }
    }
    out << '\n';
  }
}

void write_exact_columns(std::ostream& out) {
  out << "t,mean_sz,entropy,purity,trace_error,hermiticity,min_eigenvalue\n";
}

void write_exact_row(std::ostream& out, double t, const DensityMatrix& rho,
                     const InvariantReport& inv) {
  out << std::setprecision(12) << t << ',' << mean_sz(rho) << ',' << von_neumann_entropy(rho)
      << ',' << purity(rho) << ',' << inv.trace_error << ',' << inv.hermiticity << ','
      << inv.min_eigenvalue << '\n';
}

}  // namespace rydchain
