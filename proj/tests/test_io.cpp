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

#include <algorithm>
#include <sstream>
#include <string>

#include <doctest.h>

#include "rydchain/io.hpp"
#include "rydchain/lindblad.hpp"
#include "rydchain/meanfield.hpp"
#include "rydchain/stability.hpp"

using namespace rydchain;

namespace {

int count_fields(const std::string& line) {
  int n = 1;
  for (char c : line) n += c == ',';
  return n;
}

}  // namespace

TEST_CASE("header line round-trips") {
  std::stringstream s;
  write_header_line(s, {{"tool", "rydchain"}, {"seed", 3}});
  s << "a,b\n";
  const auto h = read_header_line(s);
  CHECK(h.at("seed") == 3);
  std::string rest;
  std::getline(s, rest);
  CHECK(rest == "a,b");

  std::stringstream none("a,b\n");
  CHECK(read_header_line(none).is_null());
  std::getline(none, rest);
  CHECK(rest == "a,b");
}

TEST_CASE("trajectory rows select sites") {
  ModelParams p;
  p.n_sites = 4;
  p.omega = 1.0;
  IntegrateOptions io;
  io.sample_times = {0.0, 1.0, 2.0};
  const auto tr = integrate(SpinLattice::uniform(4, Bloch(0, 0, -0.5)), p, 2.0, io);
  std::ostringstream all, some;
  write_trajectory_rows(all, tr, 0);
  write_trajectory_rows(some, tr, 1, {0, 3});
  const std::string a = all.str(), b = some.str();
  CHECK(std::count(a.begin(), a.end(), '\n') == 12);
  CHECK(std::count(b.begin(), b.end(), '\n') == 6);
  CHECK(b.rfind("1,0,0,", 0) == 0);
}

TEST_CASE("fixed-point and exact rows match their column headers") {
  ModelParams p;
  p.n_sites = 2;
  p.omega = 2.0;
  p.delta = -1.15;
  p.v1 = p.v2 = 10.0;
  const auto pts = uniform_fixed_points(p);
  std::vector<StabilityReport> reps;
  for (const auto& f : pts) reps.push_back(classify(f, p));
  for (bool eig : {false, true}) {
    std::ostringstream head, rows;
    write_fixed_point_columns(head, eig);
    write_fixed_point_rows(rows, 2.0, pts, reps, eig);
    std::istringstream in(rows.str());
    std::string line;
    const int want = count_fields(head.str());
    while (std::getline(in, line)) CHECK(count_fields(line) == want);
  }
  std::ostringstream head, row;
  write_exact_columns(head);
  const auto rho = all_down_state(2);
  write_exact_row(row, 1.0, rho, check_invariants(rho));
  CHECK(count_fields(head.str()) == count_fields(row.str()));
  CHECK(row.str().rfind("1,-1,", 0) == 0);
}
