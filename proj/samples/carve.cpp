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

// Carves random convex hulls out of a box and writes the exact result.
//
//   carve [STEPS] [OUT.obj]

#include <cstdio>
#include <cstdlib>
#include <random>
#include <string>

#include "octbsp/meshio.hpp"
#include "octbsp/octree.hpp"
#include "octbsp/workloads.hpp"

int main(int argc, char** argv) {
  using namespace octbsp;
  const int steps = argc > 1 ? std::atoi(argv[1]) : 50;
  const std::string out = argc > 2 ? argv[2] : "carved.obj";

  OctreeParams params;
  params.max_bsp_size = 150;
  OctreeBsp<128> solid(Cube{{-2048, -2048, -2048}, 4096}, params);
  const Box work{{-1000, -1000, -1000}, {1000, 1000, 1000}};
  solid.apply_tool(make_box_bsp<128>(work), work, MergeFunction::make_union());

  std::mt19937_64 rng(1);
  int applied = 0;
  while (applied < steps) {
    const auto pts = random_hull_points(rng, uniform_point(rng, work), 250);
    try {
      solid.apply_tool(build_hull_bsp<128>(pts), bounding_box(pts), MergeFunction::make_difference());
      ++applied;
    } catch (const DegenerateError&) {
      // Coplanar samples span no volume; draw again.
    }
  }

  const auto mesh = solid.extract_all();
  write_obj_file(mesh, out);
  const auto st = solid.stats();
  std::printf("%d subtractions: %zu leaves, %zu BSP nodes, %zu faces -> %s\n", applied, st.leaves, st.bsp_nodes,
              mesh.faces.size(), out.c_str());
  return mesh.closed() ? 0 : 1;
}
