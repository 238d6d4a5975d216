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

// Command-line front end. run_cli is the whole program minus process
// entry, so tests drive it in-process.
//
// Exit codes: 0 ok, 2 input error, 3 invariant violation, 4 I/O error.

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "octbsp/bench.hpp"
#include "octbsp/job.hpp"
#include "octbsp/meshio.hpp"
#include "octbsp/octree.hpp"
#include "octbsp/persist.hpp"

namespace octbsp::cli {

enum Exit : int { kOk = 0, kInputError = 2, kInvariant = 3, kIoError = 4 };

struct Options {
  int bits = 256;
  bool bits_set = false;
  std::size_t max_bsp_size = 150;
  bool max_bsp_set = false;
  std::size_t tri_threshold = 32;
  std::uint64_t seed = 1;
  bool seed_set = false;
  std::string out;
  std::string csv;
  std::string input;
  std::string quant_file;
  std::string scale;
  std::vector<std::int64_t> offset;
  std::string samples;
  std::string suite;
  int reps = 0;
};

template <typename Fn>
decltype(auto) with_bits(int bits, Fn&& fn) {
  switch (bits) {
    case 128: return fn(std::integral_constant<int, 128>{});
    case 192: return fn(std::integral_constant<int, 192>{});
    case 256: return fn(std::integral_constant<int, 256>{});
  }
  throw std::invalid_argument("--bits must be 128, 192 or 256");
}

inline OctreeParams params_of(const Options& o) {
  OctreeParams p;
  p.max_bsp_size = o.max_bsp_size;
  p.tri_threshold = o.tri_threshold;
  p.seed = o.seed;
  return p;
}

inline QuantizationSpec quant_of(const Options& o) {
  QuantizationSpec q = QuantizationSpec::unit_cube(o.bits);
  if (!o.quant_file.empty()) {
    std::ifstream f(o.quant_file);
    if (!f) throw std::ios_base::failure("cannot open " + o.quant_file);
    std::stringstream ss;
    ss << "bits " << o.bits << '\n' << f.rdbuf();
    q = parse_quantization(ss.str());
    if (q.bits != o.bits) throw std::invalid_argument("quantization block and --bits disagree");
  }
  if (!o.scale.empty()) {
    const auto s = parse_quantization("bits " + std::to_string(o.bits) + "\nscale " + o.scale);
    q.scale_num = s.scale_num;
    q.scale_den = s.scale_den;
  }
  if (!o.offset.empty()) {
    if (o.offset.size() != 3) throw std::invalid_argument("--offset takes three integers");
    q.offset = {o.offset[0], o.offset[1], o.offset[2]};
  }
  q.validate();
  return q;
}

template <int B>
void print_stats(const OctreeBsp<B>& o, std::ostream& out) {
  const auto s = o.stats();
  const Cube& r = o.root_cube();
  out << "bits: " << B << '\n'
      << "root: " << r.lo.x << ' ' << r.lo.y << ' ' << r.lo.z << " edge " << r.size << '\n'
      << "max_bsp_size: " << o.params().max_bsp_size << '\n'
      << "leaves: " << s.leaves << '\n'
      << "internal: " << s.internal << '\n'
      << "depth: " << s.depth << '\n'
      << "bsp_nodes: " << s.bsp_nodes << '\n'
      << "max_leaf_bsp: " << s.max_leaf_bsp << '\n'
      << "pathological: " << s.pathological << '\n'
      << "palette_planes: " << s.palette_planes << '\n'
      << "memory_bytes: " << o.memory_bytes() << '\n';
}

/// Writes the container, reloads it and checks the reload is identical.
template <int B>
void persist_checked(const OctreeBsp<B>& o, const std::string& path, std::ostream& out) {
  std::string why;
  if (!o.validate(&why)) throw InvariantError("result octree: " + why);
  const std::string bytes = save_container(o);
  write_container_file(o, path);
  const std::string back = read_file_bytes(path);
  if (back != bytes) throw std::ios_base::failure("container read back differs from what was written: " + path);
  OctreeBsp<B> re;
  try {
    re = load_container<B>(back);
  } catch (const FormatError& e) {
    throw InvariantError(std::string("written container does not load: ") + e.what());
  }
  if (save_container(re) != bytes) throw InvariantError("container does not round-trip");
  out << "container: " << path << " (" << bytes.size() << " bytes)\n";
}

template <int B>
OctreeBsp<B> load_from(const std::string& path) {
  return load_container<B>(read_file_bytes(path));
}

inline int container_bits_of(const std::string& path) { return container_bits(read_file_bytes(path)); }

template <int B>
int cmd_import(const Options& opt, std::ostream& out) {
  const auto q = quant_of(opt);
  const auto mesh = quantize_mesh(read_obj_file(opt.input), q);
  out << "triangles: " << mesh.triangles.size() << '\n' << "dropped_slivers: " << mesh.dropped << '\n';
  const auto o = OctreeBsp<B>::import_mesh(mesh.triangles, params_of(opt));
  print_stats(o, out);
  persist_checked(o, opt.out, out);
  return kOk;
}

template <int B>
int cmd_run(const Options& opt, JobScript job, std::ostream& out) {
  std::optional<std::ofstream> csv;
  if (!opt.csv.empty()) {
    csv.emplace(opt.csv);
    if (!*csv) throw std::ios_base::failure("cannot open " + opt.csv + " for writing");
  }
  const auto res = run_job<B>(job, csv ? &*csv : nullptr);
  if (csv) {
    csv->flush();
    if (!*csv) throw std::ios_base::failure("write failed: " + opt.csv);
  }
  out << "steps_applied: " << res.applied << '\n'
      << "degenerate_skipped: " << res.degenerate_skipped << '\n'
      << "dropped_slivers: " << res.slivers_dropped << '\n'
      << "seconds: " << res.seconds << '\n';
  print_stats(res.octree, out);
  persist_checked(res.octree, opt.out, out);
  return kOk;
}

inline std::vector<Vec3> read_samples(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::ios_base::failure("cannot open " + path);
  std::vector<Vec3> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    const auto t = detail::tokens(line);
    if (t.empty()) continue;
    if (t.size() != 3) throw std::invalid_argument("samples line " + std::to_string(lineno) + ": need X Y Z");
    out.push_back(detail::parse_points(t, 0, 3)[0]);
  }
  return out;
}

template <int B>
int cmd_sweep(const Options& opt, std::ostream& out) {
  const auto q = quant_of(opt);
  const auto mesh = quantize_mesh(read_obj_file(opt.input), q);
  const auto samples = read_samples(opt.samples);
  const auto res = run_sweep<B>(mesh.triangles, samples, params_of(opt));
  out << "prisms: " << res.applied << '\n'
      << "degenerate_skipped: " << res.degenerate_skipped << '\n'
      << "dropped_slivers: " << mesh.dropped << '\n'
      << "seconds: " << res.seconds << '\n';
  print_stats(res.octree, out);
  persist_checked(res.octree, opt.out, out);
  return kOk;
}

template <int B>
int cmd_extract(const Options& opt, std::ostream& out) {
  const auto o = load_from<B>(opt.input);
  const auto mesh = o.extract_all();
  std::string why;
  // Touching geometry may leave non-manifold edges; an open boundary is a bug.
  if (!mesh.closed(&why)) throw InvariantError("extracted mesh: " + why);
  const bool manifold = mesh.closed_manifold();
  write_obj_file(mesh, opt.out);
  // Read the file back so a truncated write is reported.
  const auto back = read_obj_file(opt.out);
  if (back.positions.size() != mesh.vertices.size()) throw std::ios_base::failure("mesh read back differs: " + opt.out);
  out << "vertices: " << mesh.vertices.size() << '\n'
      << "faces: " << mesh.faces.size() << '\n'
      << "manifold: " << (manifold ? "yes" : "no") << '\n';
  return kOk;
}

template <int B>
int cmd_stats(const Options& opt, std::ostream& out) {
  const auto o = load_from<B>(opt.input);
  print_stats(o, out);
  out << "container_bytes: " << read_file_bytes(opt.input).size() << '\n';
  return kOk;
}

/// Each suite writes one CSV table to `out`; the header names the suite.
template <int B>
int cmd_bench(const Options& opt, std::ostream& out) {
  std::mt19937_64 rng(opt.seed);
  std::ostringstream t;
  t << std::setprecision(6);
  if (opt.suite == "predicates") {
    const int n = opt.reps > 0 ? opt.reps : 200000;
    t << "# octbsp bench predicates v1\nop,bits,ns_per_op\n";
    for (const auto& r : bench::predicates<B>(rng, n)) t << r.op << ',' << r.bits << ',' << r.ns_per_op << '\n';
  } else if (opt.suite == "cuts") {
    t << "# octbsp bench cuts v1\nplanes,cuts,mean_classified,mean_naive,seconds,cuts_per_second\n";
    for (int n : {50, 100, 250, 500, 1000, 2000}) {
      const auto r = bench::cuts<B>(rng, n);
      t << r.planes << ',' << r.cuts << ',' << r.mean_classified << ',' << r.mean_naive << ',' << r.seconds << ','
        << r.cuts_per_second << '\n';
    }
  } else if (opt.suite == "merge") {
    const int pairs = opt.reps > 0 ? opt.reps : 200;
    t << "# octbsp bench merge v1\na_nodes,b_nodes,op,out_nodes,seconds,nodes_per_second\n";
    for (const auto& r : bench::merges<B>(rng, pairs))
      t << r.a_nodes << ',' << r.b_nodes << ',' << r.op << ',' << r.out_nodes << ',' << r.seconds << ','
        << (r.seconds > 0 ? static_cast<double>(r.out_nodes) / r.seconds : 0.0) << '\n';
  } else if (opt.suite == "sweep-threshold") {
    const int steps = opt.reps > 0 ? opt.reps : 200;
    t << "# octbsp bench sweep-threshold v1\nmax_bsp_size,seconds,leaves,bsp_nodes\n";
    for (std::size_t m : {10, 40, 80, 150, 300, 1000, 5000}) {
      const auto r = bench::threshold<B>(steps, m, opt.seed);
      t << r.max_bsp_size << ',' << r.seconds << ',' << r.leaves << ',' << r.bsp_nodes << '\n';
    }
  } else {
    throw std::invalid_argument("unknown suite '" + opt.suite + "'");
  }
  if (opt.csv.empty()) {
    out << t.str();
  } else {
    std::ofstream f(opt.csv);
    f << t.str();
    f.flush();
    if (!f) throw std::ios_base::failure("cannot write " + opt.csv);
    out << "csv: " << opt.csv << '\n';
  }
  return kOk;
}

/// Parses argv and runs one subcommand.
inline int run_cli(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"octbsp: exact iterated CSG on octree-embedded BSPs"};
  app.require_subcommand(1);
  Options opt;
  const auto common = [&](CLI::App* sc, bool with_out) {
    sc->add_option("--bits", opt.bits, "Arithmetic width: 128, 192 or 256")
        ->check(CLI::IsMember({128, 192, 256}))
        ->each([&](const std::string&) { opt.bits_set = true; });
    sc->add_option("--max-bsp-size", opt.max_bsp_size, "Leaf BSP node threshold")
        ->check(CLI::PositiveNumber)
        ->each([&](const std::string&) { opt.max_bsp_set = true; });
    sc->add_option("--seed", opt.seed, "Random seed")->each([&](const std::string&) { opt.seed_set = true; });
    if (with_out) sc->add_option("--out", opt.out, "Output path")->required();
  };
  const auto quant = [&](CLI::App* sc) {
    sc->add_option("--quant", opt.quant_file, "Quantization block file (bits, scale, offset)");
    sc->add_option("--scale", opt.scale, "Model units to grid steps as NUM/DEN");
    sc->add_option("--offset", opt.offset, "Grid offset X Y Z")->expected(3);
  };

  auto* imp = app.add_subcommand("import", "Quantize an OBJ mesh and import it into a container");
  imp->add_option("mesh", opt.input, "Input OBJ mesh")->required();
  imp->add_option("--tri-threshold", opt.tri_threshold, "Triangles per cell before the import pre-split");
  common(imp, true);
  quant(imp);

  auto* run = app.add_subcommand("run", "Run an iterated-CSG job script");
  run->add_option("job", opt.input, "Job script")->required();
  run->add_option("--csv", opt.csv, "Per-step CSV output");
  common(run, true);

  auto* sweep = app.add_subcommand("sweep", "Sweep a triangle mesh along translation samples");
  sweep->add_option("shape", opt.input, "Shape OBJ mesh")->required();
  sweep->add_option("--samples", opt.samples, "File with one X Y Z translation per line")->required();
  common(sweep, true);
  quant(sweep);

  auto* ext = app.add_subcommand("extract", "Extract the boundary mesh of a container as OBJ");
  ext->add_option("container", opt.input, "Input container")->required();
  ext->add_option("--out", opt.out, "Output OBJ path")->required();

  auto* stats = app.add_subcommand("stats", "Print container statistics");
  stats->add_option("container", opt.input, "Input container")->required();

  auto* bench = app.add_subcommand("bench", "Run a benchmark suite");
  bench->add_option("suite", opt.suite, "predicates, cuts, merge or sweep-threshold")
      ->required()
      ->check(CLI::IsMember({"predicates", "cuts", "merge", "sweep-threshold"}));
  bench->add_option("--csv", opt.csv, "CSV output path (default stdout)");
  bench->add_option("--reps", opt.reps, "Suite size override");
  common(bench, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kInputError;
  }

  try {
    if (imp->parsed()) return with_bits(opt.bits, [&](auto b) { return cmd_import<decltype(b)::value>(opt, out); });
    if (run->parsed()) {
      JobScript job = parse_job_file(opt.input);
      if (opt.bits_set) {
        job.bits = opt.bits;
        job.quant.bits = opt.bits;
      }
      if (opt.max_bsp_set) job.params.max_bsp_size = opt.max_bsp_size;
      if (opt.seed_set) job.params.seed = opt.seed;
      return with_bits(job.bits, [&](auto b) { return cmd_run<decltype(b)::value>(opt, job, out); });
    }
    if (sweep->parsed()) return with_bits(opt.bits, [&](auto b) { return cmd_sweep<decltype(b)::value>(opt, out); });
    if (ext->parsed())
      return with_bits(container_bits_of(opt.input), [&](auto b) { return cmd_extract<decltype(b)::value>(opt, out); });
    if (stats->parsed())
      return with_bits(container_bits_of(opt.input), [&](auto b) { return cmd_stats<decltype(b)::value>(opt, out); });
    if (bench->parsed()) return with_bits(opt.bits, [&](auto b) { return cmd_bench<decltype(b)::value>(opt, out); });
  } catch (const InvariantError& e) {
    err << "invariant violation: " << e.what() << '\n';
    return kInvariant;
  } catch (const OverflowError& e) {
    err << "invariant violation: " << e.what() << '\n';
    return kInvariant;
  } catch (const std::ios_base::failure& e) {
    err << "I/O error: " << e.what() << '\n';
    return kIoError;
  } catch (const std::exception& e) {
    err << "input error: " << e.what() << '\n';
    return kInputError;
  }
  return kInputError;
}

}  // namespace octbsp::cli
