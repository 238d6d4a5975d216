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

// Imports a closed OBJ mesh and classifies grid points against it.
//
//   classify_mesh MESH.obj SCALE_NUM [X Y Z]...
//
// Points are in grid units, i.e. model units times SCALE_NUM.

#include <cstdio>
#include <cstdlib>

#include "octbsp/meshio.hpp"
#include "octbsp/octree.hpp"

int main(int argc, char** argv) {
  using namespace octbsp;
  if (argc < 3 || (argc - 3) % 3 != 0) {
    std::fprintf(stderr, "usage: %s MESH.obj SCALE_NUM [X Y Z]...\n", argv[0]);
    return 2;
  }
  QuantizationSpec spec;
  spec.bits = 128;
  spec.scale_num = std::atoll(argv[2]);
  spec.scale_den = 1;
  const auto mesh = quantize_mesh(read_obj_file(argv[1]), spec);
  const auto solid = OctreeBsp<128>::import_mesh(mesh.triangles, OctreeParams{});
  const auto st = solid.stats();
  std::printf("%zu triangles -> %zu leaves, %zu BSP nodes\n", mesh.triangles.size(), st.leaves, st.bsp_nodes);
  for (int i = 3; i + 2 < argc; i += 3) {
    const Vec3 p{std::atoll(argv[i]), std::atoll(argv[i + 1]), std::atoll(argv[i + 2])};
    const PointClass c = solid.classify_point(p);
    std::printf("(%lld, %lld, %lld): %s\n", static_cast<long long>(p.x), static_cast<long long>(p.y),
                static_cast<long long>(p.z),
                c == PointClass::In ? "in" : (c == PointClass::Out ? "out" : "on"));
  }
  return 0;
}
