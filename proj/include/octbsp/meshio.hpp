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

/// Mesh ingestion and export. Input is an ASCII OBJ subset (v and f
/// records; normals and texture coordinates are ignored). Quantization is
/// the only lossy step: model positions are scaled, rounded to the nearest
/// grid point and range-checked against the precision budget.

#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "octbsp/bsp.hpp"
#include "octbsp/planes.hpp"

namespace octbsp {

struct MeshParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A quantized coordinate fell outside ±v⁺.
struct QuantizationRangeError : std::range_error {
  using std::range_error::range_error;
};

/// Triangle soup with binary64 positions, as read from a file.
struct FloatMesh {
  std::vector<std::array<double, 3>> positions;
  std::vector<std::array<std::int32_t, 3>> triangles;
};

/// Parses the OBJ subset. Faces with more than three corners are fan
/// triangulated; negative indices count back from the latest vertex.
inline FloatMesh read_obj(std::istream& in) {
  FloatMesh m;
  std::string line;
  std::size_t lineno = 0;
  const auto fail = [&](const std::string& what) {
    throw MeshParseError("line " + std::to_string(lineno) + ": " + what);
  };
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ls(line);
    std::string tag;
    if (!(ls >> tag) || tag[0] == '#') continue;
    if (tag == "v") {
      std::array<double, 3> p{};
      if (!(ls >> p[0] >> p[1] >> p[2])) fail("vertex needs three coordinates");
      for (double c : p)
        if (!std::isfinite(c)) fail("non-finite coordinate");
      m.positions.push_back(p);
    } else if (tag == "f") {
      std::vector<std::int32_t> idx;
      std::string tok;
      while (ls >> tok) {
        const std::string head = tok.substr(0, tok.find('/'));
        long long k = 0;
        try {
          std::size_t used = 0;
          k = std::stoll(head, &used);
          if (used != head.size()) throw std::invalid_argument(head);
        } catch (const std::exception&) {
          fail("bad face index '" + tok + "'");
        }
        const auto nv = static_cast<long long>(m.positions.size());
        if (k < 0) k += nv + 1;
        if (k < 1 || k > nv) fail("face index " + tok + " out of range");
        idx.push_back(static_cast<std::int32_t>(k - 1));
      }
      if (idx.size() < 3) fail("face needs at least three corners");
      for (std::size_t i = 1; i + 1 < idx.size(); ++i) m.triangles.push_back({idx[0], idx[i], idx[i + 1]});
    }
  }
  if (in.bad()) throw std::ios_base::failure("read error");
  return m;
}

inline FloatMesh read_obj_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::ios_base::failure("cannot open " + path);
  return read_obj(f);
}

/// Grid position q = round(x * num / den) + offset, ties to even.
struct QuantizationSpec {
  int bits = 256;
  std::int64_t scale_num = 1;
  std::int64_t scale_den = 1;
  Vec3 offset{};

  /// Largest admissible |q| per coordinate.
  int128_t v_plus() const { return max_vertex_bound(bits, true); }

  /// Model-space edge length of one grid step.
  double resolution() const { return static_cast<double>(scale_den) / static_cast<double>(scale_num); }

  /// [-1, 1]^3 onto ±v⁺ for the given width.
  static QuantizationSpec unit_cube(int bits = 256) {
    QuantizationSpec s;
    s.bits = bits;
    s.scale_num = static_cast<std::int64_t>(max_vertex_bound(bits, true));
    return s;
  }

  void validate() const {
    (void)max_vertex_bound(bits, true);
    if (scale_num <= 0 || scale_den <= 0) throw std::invalid_argument("scale must be a positive fraction");
  }

  std::int64_t quantize(double x, std::int64_t off) const {
    // The product carries 64 mantissa bits; exact for grid-aligned inputs.
    const long double v = static_cast<long double>(x) * scale_num / scale_den;
    const long double r = std::nearbyintl(v) + static_cast<long double>(off);
    const auto vp = static_cast<long double>(v_plus());
    if (!(std::fabs(r) <= vp)) throw QuantizationRangeError("out of range");
    return static_cast<std::int64_t>(r);
  }
};

/// Reads "bits N", "scale NUM/DEN" and "offset X Y Z" lines; '#' starts a
/// comment. Missing keys keep their defaults.
inline QuantizationSpec parse_quantization(const std::string& text) {
  QuantizationSpec s;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    line = line.substr(0, line.find('#'));
    std::istringstream ls(line);
    std::string key;
    if (!(ls >> key)) continue;
    bool ok = true;
    if (key == "bits") {
      ok = static_cast<bool>(ls >> s.bits);
    } else if (key == "scale") {
      std::string frac;
      ok = static_cast<bool>(ls >> frac);
      if (ok) {
        const auto slash = frac.find('/');
        try {
          s.scale_num = std::stoll(frac.substr(0, slash));
          s.scale_den = slash == std::string::npos ? 1 : std::stoll(frac.substr(slash + 1));
        } catch (const std::exception&) {
          ok = false;
        }
      }
    } else if (key == "offset") {
      ok = static_cast<bool>(ls >> s.offset.x >> s.offset.y >> s.offset.z);
    } else {
      throw std::invalid_argument("unknown quantization key '" + key + "'");
    }
    if (!ok) throw std::invalid_argument("malformed quantization line '" + line + "'");
  }
  s.validate();
  return s;
}

struct QuantizedMesh {
  std::vector<std::array<Vec3, 3>> triangles;
  /// Triangles that became collinear or collapsed under rounding.
  std::size_t dropped = 0;
};

/// Rounds every vertex to the grid. Throws QuantizationRangeError naming
/// the first offending vertex and coordinate.
inline QuantizedMesh quantize_mesh(const FloatMesh& m, const QuantizationSpec& spec) {
  spec.validate();
  std::vector<Vec3> q(m.positions.size());
  static constexpr char kAxis[] = {'x', 'y', 'z'};
  for (std::size_t i = 0; i < m.positions.size(); ++i) {
    std::array<std::int64_t, 3> c{};
    const std::array<std::int64_t, 3> off{spec.offset.x, spec.offset.y, spec.offset.z};
    for (int k = 0; k < 3; ++k) {
      try {
        c[k] = spec.quantize(m.positions[i][k], off[k]);
      } catch (const QuantizationRangeError&) {
        char buf[160];
        std::snprintf(buf, sizeof buf, "vertex %zu coordinate %c = %.17g quantizes outside ±%lld", i + 1, kAxis[k],
                      m.positions[i][k], static_cast<long long>(spec.v_plus()));
        throw QuantizationRangeError(buf);
      }
    }
    q[i] = Vec3{c[0], c[1], c[2]};
  }
  QuantizedMesh out;
  out.triangles.reserve(m.triangles.size());
  for (const auto& t : m.triangles) {
    const Vec3 a = q[t[0]], b = q[t[1]], c = q[t[2]];
    const int128_t ux = b.x - a.x, uy = b.y - a.y, uz = b.z - a.z;
    const int128_t vx = c.x - a.x, vy = c.y - a.y, vz = c.z - a.z;
    if (uy * vz - uz * vy == 0 && uz * vx - ux * vz == 0 && ux * vy - uy * vx == 0) {
      ++out.dropped;
      continue;
    }
    out.triangles.push_back({a, b, c});
  }
  return out;
}

inline constexpr const char* kExportDisclaimer =
    "# Coordinates are binary64 roundings of exact rational points. The rounded\n"
    "# mesh is not guaranteed to be free of self-intersections.\n";

/// Writes polygon faces as vertex index loops; valence-2 vertices are kept.
template <int B>
void write_obj(const BoundaryMesh<B>& mesh, std::ostream& out) {
  out << "# octbsp boundary mesh\n" << kExportDisclaimer;
  char buf[96];
  for (const auto& v : mesh.vertices) {
    const auto p = v.to_double();
    std::snprintf(buf, sizeof buf, "v %.17g %.17g %.17g\n", p[0], p[1], p[2]);
    out << buf;
  }
  for (const auto& f : mesh.faces) {
    out << 'f';
    for (auto i : f.loop) out << ' ' << (i + 1);
    out << '\n';
  }
}

template <int B>
void write_obj_file(const BoundaryMesh<B>& mesh, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::ios_base::failure("cannot open " + path + " for writing");
  write_obj(mesh, f);
  f.flush();
  if (!f) throw std::ios_base::failure("write failed: " + path);
}

}  // namespace octbsp
