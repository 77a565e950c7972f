#include "hyperfill/kernels.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

#include <omp.h>

namespace hyperfill::kernels {

Csr Csr::from_rows(const std::vector<std::vector<std::uint32_t>>& rows) {
  Csr out;
  out.offsets.reserve(rows.size() + 1);
  std::size_t total = 0;
  for (const auto& r : rows) total += r.size();
  out.items.reserve(total);
  for (const auto& r : rows) {
    out.items.insert(out.items.end(), r.begin(), r.end());
    out.offsets.push_back(static_cast<std::uint32_t>(out.items.size()));
  }
  return out;
}

namespace {

// First vertex id of each level; levels must be non-decreasing in id order.
std::vector<std::uint32_t> level_starts(std::span<const int> levels) {
  const int top = levels.empty() ? 0 : levels.back();
  std::vector<std::uint32_t> start(static_cast<std::size_t>(top) + 3, static_cast<std::uint32_t>(levels.size()));
  for (std::size_t v = levels.size(); v-- > 0;) {
    if (v > 0 && levels[v - 1] > levels[v]) throw std::invalid_argument("witness_edges: levels must be sorted");
    start[static_cast<std::size_t>(levels[v])] = static_cast<std::uint32_t>(v);
  }
  for (std::size_t l = start.size() - 1; l-- > 0;) start[l] = std::min(start[l], start[l + 1]);
  return start;
}

void edges_of(VertexId v, std::span<const int> levels, const std::vector<std::uint32_t>& start,
              const Csr& balls, const Csr& containing, std::vector<char>& mark,
              std::vector<std::uint32_t>& row) {
  row.clear();
  const auto l = static_cast<std::size_t>(levels[v]);
  const std::uint32_t lo = start[l == 0 ? 0 : l - 1];
  const std::uint32_t hi = start[std::min(l + 2, start.size() - 1)];
  for (std::uint32_t p : balls.row(v)) {
    auto r = containing.row(p);
    auto it = std::lower_bound(r.begin(), r.end(), lo);
    for (; it != r.end() && *it < hi; ++it) {
      const std::uint32_t w = *it;
      if (w != v && !mark[w]) {
        mark[w] = 1;
        row.push_back(w);
      }
    }
  }
  for (std::uint32_t w : row) mark[w] = 0;
  std::sort(row.begin(), row.end());
}

void bfs_row(const Csr& adj, VertexId src, std::uint8_t* out, std::vector<std::uint32_t>& queue) {
  const std::size_t n = adj.rows();
  std::fill(out, out + n, DistanceTable::kUnreachable);
  queue.clear();
  out[src] = 0;
  queue.push_back(src);
  for (std::size_t head = 0; head < queue.size(); ++head) {
    const std::uint32_t u = queue[head];
    const std::uint8_t next = static_cast<std::uint8_t>(out[u] + 1);
    if (next == DistanceTable::kUnreachable) throw std::overflow_error("all_pairs_bfs: graph too deep");
    for (std::uint32_t w : adj.row(u)) {
      if (out[w] == DistanceTable::kUnreachable) {
        out[w] = next;
        queue.push_back(w);
      }
    }
  }
}

struct Best {
  int twice = std::numeric_limits<int>::min();
  std::array<VertexId, 3> triple{0, 0, 0};
  std::uint64_t count = 0;

  void offer(int value, VertexId v, VertexId w, VertexId u) {
    const std::array<VertexId, 3> t{v, w, u};
    if (value > twice || (value == twice && t < triple)) {
      twice = value;
      triple = t;
    }
  }
  void merge(const Best& o) {
    count += o.count;
    if (o.twice > twice || (o.twice == twice && o.triple < triple)) {
      twice = o.twice;
      triple = o.triple;
    }
  }
};

// Twice the Gromov products keeps everything in integers.
void four_point_from(const DistanceTable& t, const std::vector<int>& d0, VertexId v, Best& best) {
  const std::size_t n = t.n;
  const std::uint8_t* dv = &t.hops[static_cast<std::size_t>(v) * n];
  for (VertexId w = 0; w < n; ++w) {
    const int gvw = d0[v] + d0[w] - dv[w];
    const std::uint8_t* dw = &t.hops[static_cast<std::size_t>(w) * n];
    for (VertexId u = 0; u < n; ++u) {
      const int gvu = d0[v] + d0[u] - dv[u];
      const int guw = d0[u] + d0[w] - dw[u];
      best.offer(std::min(gvu, guw) - gvw, v, w, u);
    }
    best.count += n;
  }
}

}  // namespace

Csr witness_edges(std::span<const int> levels, const Csr& balls, const Csr& containing, Exec exec) {
  const std::size_t nv = levels.size();
  const auto start = level_starts(levels);
  std::vector<std::vector<std::uint32_t>> rows(nv);
  if (exec == Exec::serial) {
    std::vector<char> mark(nv, 0);
    for (VertexId v = 0; v < nv; ++v) edges_of(v, levels, start, balls, containing, mark, rows[v]);
  } else {
#pragma omp parallel
    {
      std::vector<char> mark(nv, 0);
#pragma omp for schedule(dynamic, 16)
      for (std::int64_t v = 0; v < static_cast<std::int64_t>(nv); ++v) {
        edges_of(static_cast<VertexId>(v), levels, start, balls, containing, mark, rows[v]);
      }
    }
  }
  return Csr::from_rows(rows);
}

DistanceTable all_pairs_bfs(const Csr& adjacency, Exec exec) {
  DistanceTable t;
  t.n = adjacency.rows();
  t.hops.assign(t.n * t.n, DistanceTable::kUnreachable);
  if (exec == Exec::serial) {
    std::vector<std::uint32_t> queue;
    for (VertexId s = 0; s < t.n; ++s) bfs_row(adjacency, s, &t.hops[s * t.n], queue);
  } else {
#pragma omp parallel
    {
      std::vector<std::uint32_t> queue;
#pragma omp for schedule(dynamic, 8)
      for (std::int64_t s = 0; s < static_cast<std::int64_t>(t.n); ++s) {
        bfs_row(adjacency, static_cast<VertexId>(s), &t.hops[static_cast<std::size_t>(s) * t.n], queue);
      }
    }
  }
  return t;
}

FourPointResult four_point_root(const DistanceTable& table, VertexId base, Exec exec) {
  const std::size_t n = table.n;
  std::vector<int> d0(n);
  for (VertexId v = 0; v < n; ++v) d0[v] = table.at(base, v);
  Best best;
  if (exec == Exec::serial) {
    for (VertexId v = 0; v < n; ++v) four_point_from(table, d0, v, best);
  } else {
#pragma omp parallel
    {
      Best local;
#pragma omp for schedule(dynamic, 4) nowait
      for (std::int64_t v = 0; v < static_cast<std::int64_t>(n); ++v) {
        four_point_from(table, d0, static_cast<VertexId>(v), local);
      }
#pragma omp critical
      best.merge(local);
    }
  }
  FourPointResult r;
  r.triples = best.count;
  r.worst = best.triple;
  r.delta = std::max(0, best.twice) / 2.0;
  return r;
}

}  // namespace hyperfill::kernels
