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

/// Iterated-CSG job scripts. One directive per line, '#' starts a comment.
/// Geometry in the script is in integer grid units; mesh files are in model
/// units and are quantized with the job's scale and offset.
///
///   bits 128|192|256
///   scale NUM/DEN                 model units to grid steps
///   offset X Y Z                  grid units
///   max_bsp_size N
///   seed N
///   root X Y Z EDGE               optional; default covers all geometry
///   extract_every N               0 disables per-step extraction
///   workpiece empty | box X0 Y0 Z0 X1 Y1 Z1 | mesh PATH
///   step OP TOOL [translate X Y Z] [rotate AXES]
///
/// OP is union, intersect or subtract. TOOL is one of
///   box X0 Y0 Z0 X1 Y1 Z1
///   hull X Y Z ...                4 to 16 points
///   mesh PATH
///   sweep PATH samples X Y Z ...  translations; one hull per triangle and pair
///   random_hulls COUNT HALFWIDTH  hulls of 8 points centred in the workpiece
///   drill RADIUS LENGTH THICKNESS STEPS REVS FEED SKEW_DEG X Y Z
/// AXES is a signed axis permutation such as +y-x+z (new x = old y, ...).

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "octbsp/meshio.hpp"
#include "octbsp/octree.hpp"
#include "octbsp/workloads.hpp"

namespace octbsp {

/// Malformed job script or tool geometry; carries the offending line.
struct JobError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// A structural invariant failed after an operation. Always a bug.
struct InvariantError : std::logic_error {
  using std::logic_error::logic_error;
};

enum class CsgOp { Union, Intersect, Subtract };

inline MergeFunction merge_function(CsgOp op) {
  switch (op) {
    case CsgOp::Union: return MergeFunction::make_union();
    case CsgOp::Intersect: return MergeFunction::make_intersection();
    case CsgOp::Subtract: return MergeFunction::make_difference();
  }
  return MergeFunction::make_union();
}

inline const char* op_name(CsgOp op) {
  return op == CsgOp::Union ? "union" : (op == CsgOp::Intersect ? "intersect" : "subtract");
}

/// +1 for even permutations of (0, 1, 2), -1 for odd ones.
inline int permutation_parity(const std::array<int, 3>& a) noexcept {
  int inv = 0;
  for (int i = 0; i < 3; ++i)
    for (int j = i + 1; j < 3; ++j) inv += a[i] > a[j];
  return inv % 2 ? -1 : 1;
}

/// Signed axis permutation followed by a translation; exact on integers.
struct RigidTransform {
  std::array<int, 3> axis{0, 1, 2};
  std::array<int, 3> sign{1, 1, 1};
  Vec3 translate{};

  Vec3 apply(const Vec3& v) const noexcept {
    return Vec3{sign[0] * v[axis[0]], sign[1] * v[axis[1]], sign[2] * v[axis[2]]} + translate;
  }

  static RigidTransform rotation(const std::string& s) {
    RigidTransform t;
    std::array<bool, 3> seen{};
    if (s.size() != 6) throw std::invalid_argument("rotation must look like +y-x+z");
    for (int i = 0; i < 3; ++i) {
      const char sg = s[2 * i], ax = s[2 * i + 1];
      if ((sg != '+' && sg != '-') || ax < 'x' || ax > 'z' || seen[ax - 'x'])
        throw std::invalid_argument("rotation must be a signed permutation of xyz");
      seen[ax - 'x'] = true;
      t.axis[i] = ax - 'x';
      t.sign[i] = sg == '+' ? 1 : -1;
    }
    return t;
  }
};

struct ToolSpec {
  enum class Kind { Box, Hull, Mesh, Sweep, RandomHulls, Drill };
  Kind kind = Kind::Box;
  CsgOp op = CsgOp::Subtract;
  std::size_t line = 0;
  std::vector<Vec3> points;
  std::string path;
  std::vector<Vec3> samples;
  int count = 0;
  std::int64_t halfwidth = 0;
  DrillParams drill;
  RigidTransform xf;
};

struct JobScript {
  int bits = 256;
  QuantizationSpec quant;
  enum class Workpiece { Empty, Box, Mesh } workpiece = Workpiece::Empty;
  Box workpiece_box;
  std::string workpiece_path;
  std::optional<Cube> root;
  OctreeParams params;
  int extract_every = 0;
  std::vector<ToolSpec> steps;
};

namespace detail {

inline std::vector<std::string> tokens(const std::string& line) {
  std::istringstream in(line.substr(0, line.find('#')));
  std::vector<std::string> out;
  for (std::string t; in >> t;) out.push_back(t);
  return out;
}

inline std::int64_t to_i64(const std::string& s) {
  std::size_t used = 0;
  const long long v = std::stoll(s, &used);
  if (used != s.size()) throw std::invalid_argument("not an integer: " + s);
  return v;
}

inline double to_f64(const std::string& s) {
  std::size_t used = 0;
  const double v = std::stod(s, &used);
  if (used != s.size()) throw std::invalid_argument("not a number: " + s);
  return v;
}

inline std::vector<Vec3> parse_points(const std::vector<std::string>& t, std::size_t from, std::size_t to) {
  if ((to - from) % 3 != 0) throw std::invalid_argument("coordinates must come in triples");
  std::vector<Vec3> out;
  for (std::size_t i = from; i < to; i += 3) out.push_back({to_i64(t[i]), to_i64(t[i + 1]), to_i64(t[i + 2])});
  return out;
}

inline std::string resolve_path(const std::string& p, const std::string& base) {
  if (p.empty() || std::filesystem::path(p).is_absolute() || base.empty()) return p;
  return (std::filesystem::path(base) / p).string();
}

inline ToolSpec parse_step(const std::vector<std::string>& t, const std::string& base) {
  ToolSpec s;
  if (t.size() < 3) throw std::invalid_argument("step needs an operation and a tool");
  if (t[1] == "union") s.op = CsgOp::Union;
  else if (t[1] == "intersect") s.op = CsgOp::Intersect;
  else if (t[1] == "subtract") s.op = CsgOp::Subtract;
  else throw std::invalid_argument("unknown operation '" + t[1] + "'");
  // Trailing transform clauses.
  std::size_t end = t.size();
  for (std::size_t i = 3; i < t.size(); ++i)
    if (t[i] == "translate" || t[i] == "rotate") {
      end = i;
      break;
    }
  for (std::size_t i = end; i < t.size();) {
    if (t[i] == "translate" && i + 3 < t.size()) {
      s.xf.translate = {to_i64(t[i + 1]), to_i64(t[i + 2]), to_i64(t[i + 3])};
      i += 4;
    } else if (t[i] == "rotate" && i + 1 < t.size()) {
      const Vec3 tr = s.xf.translate;
      s.xf = RigidTransform::rotation(t[i + 1]);
      s.xf.translate = tr;
      i += 2;
    } else {
      throw std::invalid_argument("malformed transform clause at '" + t[i] + "'");
    }
  }
  const std::string& tool = t[2];
  if (tool == "box") {
    if (end != 9) throw std::invalid_argument("box needs six coordinates");
    s.kind = ToolSpec::Kind::Box;
    s.points = parse_points(t, 3, 9);
  } else if (tool == "hull") {
    s.kind = ToolSpec::Kind::Hull;
    s.points = parse_points(t, 3, end);
    if (s.points.size() < 4 || s.points.size() > 16) throw std::invalid_argument("hull needs 4 to 16 points");
  } else if (tool == "mesh") {
    if (end != 4) throw std::invalid_argument("mesh needs one path");
    s.kind = ToolSpec::Kind::Mesh;
    s.path = resolve_path(t[3], base);
  } else if (tool == "sweep") {
    if (end < 5 || t[4] != "samples") throw std::invalid_argument("sweep needs PATH samples X Y Z ...");
    if (s.op == CsgOp::Intersect) throw std::invalid_argument("sweep cannot be intersected piecewise");
    s.kind = ToolSpec::Kind::Sweep;
    s.path = resolve_path(t[3], base);
    s.samples = parse_points(t, 5, end);
  } else if (tool == "random_hulls") {
    if (end != 5) throw std::invalid_argument("random_hulls needs COUNT HALFWIDTH");
    if (s.op == CsgOp::Intersect) throw std::invalid_argument("random_hulls cannot be intersected piecewise");
    s.kind = ToolSpec::Kind::RandomHulls;
    s.count = static_cast<int>(to_i64(t[3]));
    s.halfwidth = to_i64(t[4]);
    if (s.count < 0 || s.halfwidth < 1) throw std::invalid_argument("random_hulls needs COUNT >= 0, HALFWIDTH >= 1");
  } else if (tool == "drill") {
    if (end != 13) throw std::invalid_argument("drill needs 10 parameters");
    if (s.op == CsgOp::Intersect) throw std::invalid_argument("drill cannot be intersected piecewise");
    s.kind = ToolSpec::Kind::Drill;
    auto& d = s.drill;
    d.radius = to_i64(t[3]);
    d.length = to_i64(t[4]);
    d.thickness = to_i64(t[5]);
    d.steps_per_rev = static_cast<int>(to_i64(t[6]));
    d.revolutions = static_cast<int>(to_i64(t[7]));
    d.feed_per_rev = to_i64(t[8]);
    d.skew_deg = to_f64(t[9]);
    d.start = {to_i64(t[10]), to_i64(t[11]), to_i64(t[12])};
    if (d.radius < 1 || d.length < 1 || d.thickness < 1 || d.steps_per_rev < 3 || d.revolutions < 0)
      throw std::invalid_argument("drill dimensions must be positive, STEPS >= 3");
  } else {
    throw std::invalid_argument("unknown tool '" + tool + "'");
  }
  return s;
}

}  // namespace detail

/// Parses a job script; relative mesh paths resolve against base_dir.
inline JobScript parse_job(std::istream& in, const std::string& base_dir = {}) {
  JobScript job;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto t = detail::tokens(line);
    if (t.empty()) continue;
    try {
      const auto arity = [&](std::size_t n) {
        if (t.size() != n + 1) throw std::invalid_argument(t[0] + " takes " + std::to_string(n) + " values");
      };
      if (t[0] == "bits") {
        arity(1);
        job.bits = static_cast<int>(detail::to_i64(t[1]));
        job.quant.bits = job.bits;
        (void)max_vertex_bound(job.bits, true);
      } else if (t[0] == "scale" || t[0] == "offset") {
        const std::string keep_bits = "bits " + std::to_string(job.bits) + "\n";
        const QuantizationSpec q = parse_quantization(keep_bits + line);
        if (t[0] == "scale") {
          job.quant.scale_num = q.scale_num;
          job.quant.scale_den = q.scale_den;
        } else {
          job.quant.offset = q.offset;
        }
      } else if (t[0] == "max_bsp_size") {
        arity(1);
        const auto v = detail::to_i64(t[1]);
        if (v < 1) throw std::invalid_argument("max_bsp_size must be positive");
        job.params.max_bsp_size = static_cast<std::size_t>(v);
      } else if (t[0] == "seed") {
        arity(1);
        job.params.seed = static_cast<std::uint64_t>(std::stoull(t[1]));
      } else if (t[0] == "root") {
        arity(4);
        const Cube c{{detail::to_i64(t[1]), detail::to_i64(t[2]), detail::to_i64(t[3])}, detail::to_i64(t[4])};
        if (c.size < 2 || (c.size & (c.size - 1)) != 0) throw std::invalid_argument("root edge must be a power of two");
        job.root = c;
      } else if (t[0] == "extract_every") {
        arity(1);
        job.extract_every = static_cast<int>(detail::to_i64(t[1]));
        if (job.extract_every < 0) throw std::invalid_argument("extract_every must be >= 0");
      } else if (t[0] == "workpiece") {
        if (t.size() < 2) throw std::invalid_argument("workpiece needs a kind");
        if (t[1] == "empty") {
          arity(1);
          job.workpiece = JobScript::Workpiece::Empty;
        } else if (t[1] == "box") {
          arity(7);
          const auto p = detail::parse_points(t, 2, 8);
          job.workpiece = JobScript::Workpiece::Box;
          job.workpiece_box = {p[0], p[1]};
          for (int i = 0; i < 3; ++i)
            if (!(p[0][i] < p[1][i])) throw std::invalid_argument("workpiece box must have positive extent");
        } else if (t[1] == "mesh") {
          arity(2);
          job.workpiece = JobScript::Workpiece::Mesh;
          job.workpiece_path = detail::resolve_path(t[2], base_dir);
        } else {
          throw std::invalid_argument("unknown workpiece '" + t[1] + "'");
        }
      } else if (t[0] == "step") {
        job.steps.push_back(detail::parse_step(t, base_dir));
        job.steps.back().line = lineno;
      } else {
        throw std::invalid_argument("unknown directive '" + t[0] + "'");
      }
    } catch (const std::exception& e) {
      throw JobError("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return job;
}

inline JobScript parse_job_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::ios_base::failure("cannot open " + path);
  return parse_job(f, std::filesystem::path(path).parent_path().string());
}

/// One tool application after expansion of composite steps.
template <int B>
struct ToolApplication {
  CsgOp op;
  std::size_t line;
  std::string label;
  BspTree<B> tool;
  Box bounds;
};

namespace detail {

inline Box merge_box(const Box& a, const Box& b) {
  Box r = a;
  for (int i = 0; i < 3; ++i) {
    r.lo[i] = std::min(a.lo[i], b.lo[i]);
    r.hi[i] = std::max(a.hi[i], b.hi[i]);
  }
  return r;
}

inline std::vector<std::array<Vec3, 3>> load_quantized(const std::string& path, const QuantizationSpec& q,
                                                      std::size_t* dropped = nullptr) {
  const auto m = quantize_mesh(read_obj_file(path), q);
  if (dropped) *dropped += m.dropped;
  return m.triangles;
}

}  // namespace detail

/// Expanded tool list of a job, its geometric bounds, and skip counts.
template <int B>
struct ExpandedJob {
  std::vector<ToolApplication<B>> tools;
  std::optional<Box> bounds;
  std::vector<std::array<Vec3, 3>> workpiece_tris;
  std::size_t degenerate_skipped = 0;
  std::size_t slivers_dropped = 0;
};

/// Builds every tool BSP. Degenerate hulls inside composite steps are
/// skipped and counted; a degenerate explicit hull is an error.
template <int B>
ExpandedJob<B> expand_job(const JobScript& job) {
  ExpandedJob<B> ex;
  std::mt19937_64 rng(job.params.seed);
  const auto grow = [&](const Box& b) { ex.bounds = ex.bounds ? detail::merge_box(*ex.bounds, b) : b; };
  if (job.workpiece == JobScript::Workpiece::Box) grow(job.workpiece_box);
  if (job.workpiece == JobScript::Workpiece::Mesh) {
    ex.workpiece_tris = detail::load_quantized(job.workpiece_path, job.quant, &ex.slivers_dropped);
    if (!ex.workpiece_tris.empty()) {
      std::vector<Vec3> pts;
      for (const auto& t : ex.workpiece_tris) pts.insert(pts.end(), t.begin(), t.end());
      grow(bounding_box(pts));
    }
  }
  const Box work = ex.bounds.value_or(job.root ? job.root->box() : Box{{-1, -1, -1}, {1, 1, 1}});
  for (const auto& s : job.steps) {
    const std::string where = "line " + std::to_string(s.line) + ": ";
    const auto add_hull = [&](std::vector<Vec3> pts, const std::string& label, bool skippable) {
      for (auto& p : pts) p = s.xf.apply(p);
      try {
        ex.tools.push_back({s.op, s.line, label, build_hull_bsp<B>(pts), bounding_box(pts)});
        grow(ex.tools.back().bounds);
      } catch (const DegenerateError& e) {
        if (!skippable) throw JobError(where + "degenerate hull: " + e.what());
        ++ex.degenerate_skipped;
      }
    };
    switch (s.kind) {
      case ToolSpec::Kind::Box: {
        const Vec3 a = s.xf.apply(s.points[0]), b = s.xf.apply(s.points[1]);
        Box bx;
        for (int i = 0; i < 3; ++i) {
          bx.lo[i] = std::min(a[i], b[i]);
          bx.hi[i] = std::max(a[i], b[i]);
          if (bx.lo[i] == bx.hi[i]) throw JobError(where + "box tool has zero extent");
        }
        ex.tools.push_back({s.op, s.line, "box", make_box_bsp<B>(bx), bx});
        grow(bx);
        break;
      }
      case ToolSpec::Kind::Hull: add_hull(s.points, "hull", false); break;
      case ToolSpec::Kind::Mesh: {
        auto tris = detail::load_quantized(s.path, job.quant, &ex.slivers_dropped);
        if (tris.empty()) throw JobError(where + "tool mesh is empty");
        std::vector<Polygon<B>> polys;
        std::vector<Vec3> pts;
        for (auto& t : tris) {
          for (auto& v : t) v = s.xf.apply(v);
          // Odd-parity transforms reverse orientation.
          if (s.xf.sign[0] * s.xf.sign[1] * s.xf.sign[2] * permutation_parity(s.xf.axis) < 0) std::swap(t[1], t[2]);
          polys.push_back(make_triangle_polygon<B>(t[0], t[1], t[2]));
          pts.insert(pts.end(), t.begin(), t.end());
        }
        ex.tools.push_back({s.op, s.line, "mesh", import_polygons<B>(std::move(polys), job.params.seed), bounding_box(pts)});
        grow(ex.tools.back().bounds);
        break;
      }
      case ToolSpec::Kind::Sweep: {
        const auto tris = detail::load_quantized(s.path, job.quant, &ex.slivers_dropped);
        for (std::size_t k = 0; k + 1 < s.samples.size(); ++k)
          for (const auto& t : tris) add_hull(prism_points(t, s.samples[k], s.samples[k + 1]), "prism", true);
        break;
      }
      case ToolSpec::Kind::RandomHulls:
        for (int k = 0; k < s.count; ++k)
          add_hull(random_hull_points(rng, uniform_point(rng, work), s.halfwidth), "random_hull", true);
        break;
      case ToolSpec::Kind::Drill:
        for (auto& pts : drill_sweeps(s.drill)) add_hull(std::move(pts), "drill", true);
        break;
    }
  }
  return ex;
}

template <int B>
struct JobResult {
  OctreeBsp<B> octree;
  std::size_t applied = 0;
  std::size_t degenerate_skipped = 0;
  std::size_t slivers_dropped = 0;
  double seconds = 0;
};

/// Column layout of the per-step CSV, version 1. `seconds` is the only
/// nondeterministic column; `faces` is -1 on steps without extraction.
inline constexpr const char* kRunCsvHeader =
    "# octbsp run csv v1\nstep,line,op,tool,seconds,visited,leaves,bsp_nodes,pathological,faces\n";

/// Applies every step in order; any failure aborts with the step index.
template <int B>
JobResult<B> run_job(const JobScript& job, std::ostream* csv = nullptr) {
  if (job.bits != B) throw JobError("job requests " + std::to_string(job.bits) + " bits");
  auto ex = expand_job<B>(job);
  Cube root;
  if (job.root) {
    root = *job.root;
  } else if (ex.bounds) {
    root = covering_cube(ex.bounds->lo, ex.bounds->hi);
  } else {
    root = Cube{{-1, -1, -1}, 2};
  }
  const auto vp = max_vertex_bound(B, true);
  for (int i = 0; i < 3; ++i)
    if (root.lo[i] < -vp || root.hi()[i] > vp) throw JobError("root cube exceeds the coordinate bound for " + std::to_string(B) + " bits");
  JobResult<B> res{OctreeBsp<B>(root, job.params, false)};
  res.degenerate_skipped = ex.degenerate_skipped;
  res.slivers_dropped = ex.slivers_dropped;
  auto& o = res.octree;
  try {
    if (job.workpiece == JobScript::Workpiece::Box) {
      o.apply_tool(make_box_bsp<B>(job.workpiece_box), job.workpiece_box, MergeFunction::make_union());
    } else if (job.workpiece == JobScript::Workpiece::Mesh && !ex.workpiece_tris.empty()) {
      o = OctreeBsp<B>::import_mesh(ex.workpiece_tris, job.params, root);
    }
  } catch (const std::invalid_argument& e) {
    throw JobError(std::string("workpiece: ") + e.what());
  }
  if (csv) *csv << kRunCsvHeader;
  const auto t_job = std::chrono::steady_clock::now();
  for (std::size_t i = 0; i < ex.tools.size(); ++i) {
    const auto& ta = ex.tools[i];
    const std::string where = "step " + std::to_string(i + 1) + " (line " + std::to_string(ta.line) + "): ";
    const auto t0 = std::chrono::steady_clock::now();
    typename OctreeBsp<B>::ApplyStats st;
    try {
      st = o.apply_tool(ta.tool, ta.bounds, merge_function(ta.op));
    } catch (const std::invalid_argument& e) {
      throw JobError(where + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::string why;
    if (!o.validate(&why)) throw InvariantError(where + why);
    long long faces = -1;
    if (job.extract_every > 0 && (i + 1) % static_cast<std::size_t>(job.extract_every) == 0) {
      const auto mesh = o.extract_all();
      if (!mesh.closed(&why)) throw InvariantError(where + "extracted mesh: " + why);
      faces = static_cast<long long>(mesh.faces.size());
    }
    ++res.applied;
    if (csv) {
      const auto s = o.stats();
      char buf[64];
      std::snprintf(buf, sizeof buf, "%.6f", secs);
      *csv << (i + 1) << ',' << ta.line << ',' << op_name(ta.op) << ',' << ta.label << ',' << buf << ','
           << st.visited << ',' << s.leaves << ',' << s.bsp_nodes << ',' << s.pathological << ',' << faces << '\n';
    }
  }
  res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_job).count();
  return res;
}

/// Union of the prisms swept by each triangle between consecutive samples.
template <int B>
JobResult<B> run_sweep(const std::vector<std::array<Vec3, 3>>& tris, const std::vector<Vec3>& samples,
                       OctreeParams params) {
  std::vector<std::pair<BspTree<B>, Box>> tools;
  std::size_t skipped = 0;
  std::optional<Box> bounds;
  for (std::size_t k = 0; k + 1 < samples.size(); ++k)
    for (const auto& t : tris) {
      const auto pts = prism_points(t, samples[k], samples[k + 1]);
      try {
        tools.emplace_back(build_hull_bsp<B>(pts), bounding_box(pts));
        bounds = bounds ? detail::merge_box(*bounds, tools.back().second) : tools.back().second;
      } catch (const DegenerateError&) {
        ++skipped;
      }
    }
  const Cube root = bounds ? covering_cube(bounds->lo, bounds->hi) : Cube{{-1, -1, -1}, 2};
  JobResult<B> res{OctreeBsp<B>(root, params, false)};
  res.degenerate_skipped = skipped;
  const auto t0 = std::chrono::steady_clock::now();
  for (const auto& [tool, box] : tools) {
    res.octree.apply_tool(tool, box, MergeFunction::make_union());
    ++res.applied;
  }
  res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::string why;
  if (!res.octree.validate(&why)) throw InvariantError("sweep: " + why);
  return res;
}

}  // namespace octbsp
