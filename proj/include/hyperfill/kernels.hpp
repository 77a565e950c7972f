#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "hyperfill/types.hpp"

// Data-parallel kernels behind the filling. Each has a serial reference and
// an OpenMP version computing bit-identical output; tests compare the two and
// bench/bench_kernels.cpp times them.
namespace hyperfill::kernels {

enum class Exec { serial, parallel };

// Compressed rows: row i is items[offsets[i] .. offsets[i + 1]).
struct Csr {
  std::vector<std::uint32_t> offsets{0};
  std::vector<std::uint32_t> items;

  std::size_t rows() const { return offsets.size() - 1; }
  std::span<const std::uint32_t> row(std::size_t i) const {
    return {items.data() + offsets[i], offsets[i + 1] - offsets[i]};
  }
  static Csr from_rows(const std::vector<std::vector<std::uint32_t>>& rows);
};

// Row-major V x V hop counts. 255 marks "unreachable"; fillings never come
// close to that depth.
struct DistanceTable {
  std::size_t n = 0;
  std::vector<std::uint8_t> hops;

  static constexpr std::uint8_t kUnreachable = 255;
  std::uint8_t at(VertexId a, VertexId b) const { return hops[static_cast<std::size_t>(a) * n + b]; }
};

// Adjacency of the incidence graph. Vertices v and w are joined when their
// levels differ by at most one and some point lies in both balls. `balls`
// maps vertex -> sorted member points, `containing` maps point -> sorted
// vertices whose ball holds it. Output rows are sorted.
Csr witness_edges(std::span<const int> levels, const Csr& balls, const Csr& containing, Exec exec);

// Breadth-first search from every vertex.
DistanceTable all_pairs_bfs(const Csr& adjacency, Exec exec);

struct FourPointResult {
  double delta = 0.0;
  std::uint64_t triples = 0;
  std::array<VertexId, 3> worst{0, 0, 0};
};

// max over (v, w, u) of min((v|u), (u|w)) - (v|w) with base point `base`,
// clamped at 0. Ties keep the lexicographically smallest triple.
FourPointResult four_point_root(const DistanceTable& table, VertexId base, Exec exec);

}  // namespace hyperfill::kernels
