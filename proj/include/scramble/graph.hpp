#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace scramble {

using Vertex = std::uint32_t;

struct Edge {
  Vertex u;
  Vertex v;

  friend bool operator==(const Edge&, const Edge&) = default;
};

/// Immutable simple undirected graph with CSR adjacency.
///
/// Construction validates: indices in range, no self-loops, no duplicate edges,
/// and (unless explicitly allowed) connectedness.
class Graph {
 public:
  Graph() = default;

  static Graph from_edges(std::size_t num_vertices, std::vector<Edge> edges,
                          bool allow_disconnected = false);

  std::size_t num_vertices() const noexcept { return num_vertices_; }
  std::size_t num_edges() const noexcept { return edges_.size(); }
  std::span<const Edge> edges() const noexcept { return edges_; }
  const Edge& edge(std::size_t i) const { return edges_[i]; }

  std::span<const Vertex> neighbors(Vertex v) const {
    return {adjacency_.data() + offsets_[v], adjacency_.data() + offsets_[v + 1]};
  }
  std::size_t degree(Vertex v) const { return offsets_[v + 1] - offsets_[v]; }
  std::size_t max_degree() const noexcept;
  bool is_connected() const;
  bool has_edge(Vertex a, Vertex b) const;

 private:
  std::size_t num_vertices_ = 0;
  std::vector<Edge> edges_;
  std::vector<std::size_t> offsets_{0};
  std::vector<Vertex> adjacency_;
};

/// Bipartition of a graph's vertices. side_a is non-empty and proper.
class Cut {
 public:
  Cut(const Graph& g, std::vector<Vertex> side_a);

  std::span<const Vertex> side_a() const noexcept { return side_a_; }
  std::vector<Vertex> side_b() const;
  bool in_a(Vertex v) const { return in_a_[v] != 0; }
  std::size_t size_a() const noexcept { return side_a_.size(); }
  std::size_t size_b() const noexcept { return in_a_.size() - side_a_.size(); }
  std::size_t smaller_side() const noexcept { return std::min(size_a(), size_b()); }
  std::size_t num_vertices() const noexcept { return in_a_.size(); }
  Cut complement(const Graph& g) const { return Cut(g, side_b()); }

 private:
  std::vector<Vertex> side_a_;
  std::vector<std::uint8_t> in_a_;
};

// Generators. All throw SizeError when the vertex or edge count would not fit
// in Vertex.

/// Perfect binary tree in heap order: root 0, children of i are 2i+1 and 2i+2.
Graph build_binary_tree(int depth);
/// Perfect z-ary tree in heap order: children of i are z*i+1 .. z*i+z.
Graph build_zary_tree(int z, int depth);
/// Open-boundary grid, row-major indexing (last dimension varies fastest).
Graph build_lattice(std::span<const int> dims);
/// Two copies of K_m on [0,m) and [m,2m), bridged by the edge (m-1, m).
Graph build_dumbbell(int m);
Graph build_complete(int n);
/// Hub 0 joined to leaves 1..n-1.
Graph build_star(int n);

/// Vertices of the subtree rooted at `root` in a heap-ordered z-ary tree.
std::vector<Vertex> zary_subtree(const Graph& tree, int z, Vertex root);

Graph load_edge_list(std::string_view text, bool allow_disconnected = false);
std::string save_edge_list(const Graph& g);

inline constexpr std::uint32_t kUnreachable = UINT32_MAX;

/// Hop counts from `source`; kUnreachable for vertices in other components.
std::vector<std::uint32_t> bfs_distances(const Graph& g, Vertex source);
std::uint32_t distance(const Graph& g, Vertex x, Vertex y);
std::uint32_t diameter(const Graph& g);
/// Lexicographically smallest (u, v), u < v, attaining the diameter.
/// A single-vertex graph returns (0, 0).
std::pair<Vertex, Vertex> farthest_pair(const Graph& g);

std::size_t cut_size(const Graph& g, const Cut& cut);

/// Degree hypothesis of the linear light-cone bound: max degree <= d^2.
bool satisfies_degree_bound(const Graph& g, int local_dim);

}  // namespace scramble
