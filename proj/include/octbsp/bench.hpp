// Copyright 2026 The octbsp Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

/// Benchmark suites. Timings are wall clock on the calling thread and are
/// hardware-relative; counters (classifications, node counts) are exact.

#include <chrono>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "octbsp/bsp.hpp"
#include "octbsp/cell.hpp"
#include "octbsp/job.hpp"
#include "octbsp/workloads.hpp"

namespace octbsp::bench {

using Clock = std::chrono::steady_clock;

inline double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct PredicateRow {
  std::string op;
  int bits;
  double ns_per_op;
};

/// Times plane_from_points, intersect and classify on n random inputs with
/// coordinates at the cross-product bound for B bits.
template <int B>
std::vector<PredicateRow> predicates(std::mt19937_64& rng, int n) {
  const auto vp = static_cast<std::int64_t>(max_vertex_bound(B, true));
  const Box box{{-vp, -vp, -vp}, {vp, vp, vp}};
  std::vector<Vec3> pts(3 * static_cast<std::size_t>(n) + 3);
  for (auto& p : pts) p = uniform_point(rng, box);
  std::vector<Plane<B>> planes;
  planes.reserve(n);
  auto t0 = Clock::now();
  for (int i = 0; i < n; ++i) {
    try {
      planes.push_back(plane_from_points<B>(pts[3 * i], pts[3 * i + 1], pts[3 * i + 2]));
    } catch (const DegenerateError&) {
    }
  }
  const double t_plane = seconds_since(t0);
  const std::size_t np = planes.size();
  std::vector<HomoPoint<B>> xs;
  xs.reserve(np);
  t0 = Clock::now();
  for (std::size_t i = 0; i + 2 < np; ++i)
    if (auto x = try_intersect(planes[i], planes[i + 1], planes[i + 2])) xs.push_back(*x);
  const double t_intersect = seconds_since(t0);
  int sink = 0;
  t0 = Clock::now();
  for (std::size_t i = 0; i < xs.size(); ++i) sink += classify(xs[i], planes[(i * 7 + 3) % np]);
  const double t_classify = seconds_since(t0);
  static volatile int keep = 0;
  keep = keep + sink;
  const auto per = [](double t, std::size_t k) { return k ? 1e9 * t / static_cast<double>(k) : 0.0; };
  return {{"plane_from_points", B, per(t_plane, static_cast<std::size_t>(n))},
          {"intersect", B, per(t_intersect, np > 2 ? np - 2 : 0)},
          {"classify", B, per(t_classify, xs.size())}};
}

struct CutRow {
  int planes;
  std::uint64_t cuts;
  double mean_classified;  // vertices classified per cut with edge descent
  double mean_naive;       // live vertices per cut, the classify-all baseline
  double seconds;
  double cuts_per_second;
};

/// Linear convex BSP of n planes tangent to a sphere; the bounding cell is
/// cut by every plane in order, as extraction of that BSP does.
template <int B>
CutRow cuts(std::mt19937_64& rng, int n) {
  constexpr std::int64_t kHalf = std::int64_t{1} << 20;
  const auto planes = tangent_planes<B>(rng, n, static_cast<double>(kHalf / 2), 1 << 12);
  auto cell = ConvexCell<B>::make_box({-kHalf, -kHalf, -kHalf}, {kHalf, kHalf, kHalf});
  CutRow row{n, 0, 0, 0, 0, 0};
  std::uint64_t classified = 0, naive = 0;
  const auto t0 = Clock::now();
  for (std::size_t i = 0; i < planes.size(); ++i) {
    naive += cell.num_vertices();
    cell.clip(planes[i], static_cast<std::int32_t>(i), -1);
    classified += cell.last_classified();
    ++row.cuts;
  }
  row.seconds = seconds_since(t0);
  row.mean_classified = static_cast<double>(classified) / static_cast<double>(row.cuts);
  row.mean_naive = static_cast<double>(naive) / static_cast<double>(row.cuts);
  row.cuts_per_second = row.seconds > 0 ? static_cast<double>(row.cuts) / row.seconds : 0;
  return row;
}

struct MergeRow {
  std::size_t a_nodes, b_nodes;
  const char* op;
  std::size_t out_nodes;
  double seconds;
};

/// Random BSP pairs of 1 to max_nodes nodes under a random operation.
template <int B>
std::vector<MergeRow> merges(std::mt19937_64& rng, int pairs, int max_nodes = 200) {
  const Box box{{-4096, -4096, -4096}, {4096, 4096, 4096}};
  std::vector<MergeRow> rows;
  for (int i = 0; i < pairs; ++i) {
    const auto a = random_split_bsp<B>(rng, static_cast<int>(uniform_int(rng, 1, max_nodes)), box, 1000);
    const auto b = random_split_bsp<B>(rng, static_cast<int>(uniform_int(rng, 1, max_nodes)), box, 1000);
    const auto op = static_cast<CsgOp>(uniform_int(rng, 0, 2));
    const auto t0 = Clock::now();
    const auto r = merge(a, b, merge_function(op), box);
    rows.push_back({a.size(), b.size(), op_name(op), r.tree.size(), seconds_since(t0)});
  }
  return rows;
}

/// Carving job used for the threshold sweep: a box workpiece and `steps`
/// random convex hull subtractions.
inline JobScript carving_job(int bits, int steps, std::size_t max_bsp_size, std::uint64_t seed) {
  JobScript job;
  job.bits = bits;
  job.quant.bits = bits;
  job.params.max_bsp_size = max_bsp_size;
  job.params.seed = seed;
  job.workpiece = JobScript::Workpiece::Box;
  job.workpiece_box = {{-1000, -1000, -1000}, {1000, 1000, 1000}};
  ToolSpec t;
  t.kind = ToolSpec::Kind::RandomHulls;
  t.op = CsgOp::Subtract;
  t.line = 1;
  t.count = steps;
  t.halfwidth = 250;
  job.steps.push_back(t);
  return job;
}

struct ThresholdRow {
  std::size_t max_bsp_size;
  double seconds;
  std::size_t leaves, bsp_nodes;
};

template <int B>
ThresholdRow threshold(int steps, std::size_t max_bsp_size, std::uint64_t seed) {
  const auto t0 = Clock::now();
  const auto res = run_job<B>(carving_job(B, steps, max_bsp_size, seed));
  const auto st = res.octree.stats();
  return {max_bsp_size, seconds_since(t0), st.leaves, st.bsp_nodes};
}

}  // namespace octbsp::bench
