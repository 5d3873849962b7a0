#include "scramble/graph.hpp"

#include <algorithm>
#include <charconv>
#include <limits>
#include <queue>
#include <sstream>

#include "scramble/errors.hpp"

namespace scramble {
namespace {

constexpr std::size_t kMaxVertices = std::numeric_limits<Vertex>::max() - 1;

std::size_t checked_mul(std::size_t a, std::size_t b, const char* what) {
  std::size_t out = 0;
  if (__builtin_mul_overflow(a, b, &out) || out > kMaxVertices) {
    throw SizeError(std::string(what) + ": vertex count overflows the index type");
  }
  return out;
}

std::size_t checked_add(std::size_t a, std::size_t b, const char* what) {
  std::size_t out = 0;
  if (__builtin_add_overflow(a, b, &out) || out > kMaxVertices) {
    throw SizeError(std::string(what) + ": vertex count overflows the index type");
  }
  return out;
}

std::uint64_t edge_key(Vertex a, Vertex b) {
  if (a > b) std::swap(a, b);
  return (static_cast<std::uint64_t>(a) << 32) | b;
}

}  // namespace

Graph Graph::from_edges(std::size_t num_vertices, std::vector<Edge> edges,
                        bool allow_disconnected) {
  if (num_vertices == 0) throw ValidationError("graph must have at least one vertex");
  if (num_vertices > kMaxVertices) throw SizeError("graph: too many vertices");

  std::vector<std::uint64_t> keys;
  keys.reserve(edges.size());
  for (const Edge& e : edges) {
    if (e.u >= num_vertices || e.v >= num_vertices) {
      throw ValidationError("edge (" + std::to_string(e.u) + ", " + std::to_string(e.v) +
                            ") has a vertex index out of range");
    }
    if (e.u == e.v) throw ValidationError("self-loop at vertex " + std::to_string(e.u));
    keys.push_back(edge_key(e.u, e.v));
  }
  std::sort(keys.begin(), keys.end());
  if (auto it = std::adjacent_find(keys.begin(), keys.end()); it != keys.end()) {
    throw ValidationError("duplicate edge (" + std::to_string(*it >> 32) + ", " +
                          std::to_string(*it & 0xffffffffu) + ")");
  }

  Graph g;
  g.num_vertices_ = num_vertices;
  g.edges_ = std::move(edges);
  g.offsets_.assign(num_vertices + 1, 0);
  for (const Edge& e : g.edges_) {
    ++g.offsets_[e.u + 1];
    ++g.offsets_[e.v + 1];
  }
  for (std::size_t i = 0; i < num_vertices; ++i) g.offsets_[i + 1] += g.offsets_[i];
  g.adjacency_.resize(g.offsets_.back());
  std::vector<std::size_t> fill(g.offsets_.begin(), g.offsets_.end() - 1);
  for (const Edge& e : g.edges_) {
    g.adjacency_[fill[e.u]++] = e.v;
    g.adjacency_[fill[e.v]++] = e.u;
  }
  for (std::size_t v = 0; v < num_vertices; ++v) {
    std::sort(g.adjacency_.begin() + g.offsets_[v], g.adjacency_.begin() + g.offsets_[v + 1]);
  }
  if (!allow_disconnected && !g.is_connected()) {
    throw ValidationError("graph is disconnected");
  }
  return g;
}

std::size_t Graph::max_degree() const noexcept {
  std::size_t best = 0;
  for (std::size_t v = 0; v < num_vertices_; ++v) best = std::max(best, offsets_[v + 1] - offsets_[v]);
  return best;
}

bool Graph::is_connected() const {
  const auto dist = bfs_distances(*this, 0);
  return std::none_of(dist.begin(), dist.end(), [](std::uint32_t d) { return d == kUnreachable; });
}

bool Graph::has_edge(Vertex a, Vertex b) const {
  if (a >= num_vertices_ || b >= num_vertices_) return false;
  auto nb = neighbors(a);
  return std::binary_search(nb.begin(), nb.end(), b);
}

Cut::Cut(const Graph& g, std::vector<Vertex> side_a) : side_a_(std::move(side_a)) {
  std::sort(side_a_.begin(), side_a_.end());
  side_a_.erase(std::unique(side_a_.begin(), side_a_.end()), side_a_.end());
  const std::size_t n = g.num_vertices();
  if (side_a_.empty()) throw ValidationError("cut: side A is empty");
  if (side_a_.back() >= n) throw ValidationError("cut: vertex index out of range");
  if (side_a_.size() == n) throw ValidationError("cut: side A contains every vertex");
  in_a_.assign(n, 0);
  for (Vertex v : side_a_) in_a_[v] = 1;
}

std::vector<Vertex> Cut::side_b() const {
  std::vector<Vertex> out;
  out.reserve(size_b());
  for (std::size_t v = 0; v < in_a_.size(); ++v) {
    if (!in_a_[v]) out.push_back(static_cast<Vertex>(v));
  }
  return out;
}

Graph build_binary_tree(int depth) { return build_zary_tree(2, depth); }

Graph build_zary_tree(int z, int depth) {
  if (z < 2) throw ValidationError("z-ary tree: z must be at least 2");
  if (depth < 0) throw ValidationError("tree depth must be non-negative");
  // (z^(depth+1) - 1) / (z - 1), accumulated level by level.
  std::size_t count = 1;
  std::size_t level = 1;
  for (int h = 1; h <= depth; ++h) {
    level = checked_mul(level, static_cast<std::size_t>(z), "tree");
    count = checked_add(count, level, "tree");
  }
  std::vector<Edge> edges;
  edges.reserve(count - 1);
  for (std::size_t child = 1; child < count; ++child) {
    edges.push_back({static_cast<Vertex>((child - 1) / z), static_cast<Vertex>(child)});
  }
  return Graph::from_edges(count, std::move(edges));
}

Graph build_lattice(std::span<const int> dims) {
  if (dims.empty()) throw ValidationError("lattice: at least one dimension required");
  std::size_t count = 1;
  for (int side : dims) {
    if (side < 1) throw ValidationError("lattice: side lengths must be at least 1");
    count = checked_mul(count, static_cast<std::size_t>(side), "lattice");
  }
  // Row-major: stride of the last dimension is 1.
  std::vector<std::size_t> stride(dims.size(), 1);
  for (std::size_t k = dims.size() - 1; k > 0; --k) stride[k - 1] = stride[k] * dims[k];

  std::vector<Edge> edges;
  for (std::size_t v = 0; v < count; ++v) {
    for (std::size_t k = 0; k < dims.size(); ++k) {
      const std::size_t coord = (v / stride[k]) % dims[k];
      if (coord + 1 < static_cast<std::size_t>(dims[k])) {
        edges.push_back({static_cast<Vertex>(v), static_cast<Vertex>(v + stride[k])});
      }
    }
  }
  return Graph::from_edges(count, std::move(edges));
}

Graph build_dumbbell(int m) {
  if (m < 2) throw ValidationError("dumbbell: m must be at least 2");
  const std::size_t n = checked_mul(2, static_cast<std::size_t>(m), "dumbbell");
  std::vector<Edge> edges;
  edges.reserve(static_cast<std::size_t>(m) * (m - 1) + 1);
  for (int half = 0; half < 2; ++half) {
    const Vertex base = static_cast<Vertex>(half * m);
    for (int a = 0; a < m; ++a) {
      for (int b = a + 1; b < m; ++b) edges.push_back({base + a, base + b});
    }
  }
  edges.push_back({static_cast<Vertex>(m - 1), static_cast<Vertex>(m)});
  return Graph::from_edges(n, std::move(edges));
}

Graph build_complete(int n) {
  if (n < 2) throw ValidationError("complete graph: n must be at least 2");
  checked_mul(static_cast<std::size_t>(n), static_cast<std::size_t>(n - 1) / 2 + 1, "complete graph");
  std::vector<Edge> edges;
  edges.reserve(static_cast<std::size_t>(n) * (n - 1) / 2);
  for (int a = 0; a < n; ++a) {
    for (int b = a + 1; b < n; ++b) edges.push_back({static_cast<Vertex>(a), static_cast<Vertex>(b)});
  }
  return Graph::from_edges(n, std::move(edges));
}

Graph build_star(int n) {
  if (n < 2) throw ValidationError("star: n must be at least 2");
  if (static_cast<std::size_t>(n) > kMaxVertices) throw SizeError("star: vertex count overflows");
  std::vector<Edge> edges;
  edges.reserve(n - 1);
  for (int leaf = 1; leaf < n; ++leaf) edges.push_back({0, static_cast<Vertex>(leaf)});
  return Graph::from_edges(n, std::move(edges));
}

std::vector<Vertex> zary_subtree(const Graph& tree, int z, Vertex root) {
  std::vector<Vertex> out;
  std::vector<Vertex> frontier{root};
  const std::size_t n = tree.num_vertices();
  while (!frontier.empty()) {
    std::vector<Vertex> next;
    for (Vertex v : frontier) {
      out.push_back(v);
      for (int c = 1; c <= z; ++c) {
        const std::size_t child = static_cast<std::size_t>(v) * z + c;
        if (child < n) next.push_back(static_cast<Vertex>(child));
      }
    }
    frontier = std::move(next);
  }
  std::sort(out.begin(), out.end());
  return out;
}

Graph load_edge_list(std::string_view text, bool allow_disconnected) {
  std::size_t line_no = 0;
  std::size_t num_vertices = 0;
  bool have_header = false;
  std::vector<Edge> edges;
  std::vector<std::uint64_t> seen;

  auto parse_uint = [&](std::string_view tok) {
    std::uint64_t value = 0;
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
    if (ec != std::errc{} || ptr != tok.data() + tok.size()) {
      throw ParseError(line_no, "expected a non-negative integer, got '" + std::string(tok) + "'");
    }
    return value;
  };

  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t end = std::min(text.find('\n', pos), text.size());
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    line = line.substr(0, line.find('#'));

    std::vector<std::string_view> tokens;
    std::size_t i = 0;
    while (i < line.size()) {
      while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
      std::size_t j = i;
      while (j < line.size() && line[j] != ' ' && line[j] != '\t') ++j;
      if (j > i) tokens.push_back(line.substr(i, j - i));
      i = j;
    }
    if (tokens.empty()) {
      if (end == text.size()) break;
      continue;
    }

    if (!have_header) {
      if (tokens.size() != 2 || tokens[0] != "p") {
        throw ParseError(line_no, "expected header 'p <num_vertices>'");
      }
      const auto n = parse_uint(tokens[1]);
      if (n == 0) throw ParseError(line_no, "vertex count must be positive");
      if (n > kMaxVertices) throw ParseError(line_no, "vertex count overflows the index type");
      num_vertices = n;
      have_header = true;
    } else {
      if (tokens.size() != 2) throw ParseError(line_no, "expected an edge line 'u v'");
      const auto u = parse_uint(tokens[0]);
      const auto v = parse_uint(tokens[1]);
      if (u >= num_vertices || v >= num_vertices) {
        throw ParseError(line_no, "vertex index out of range [0, " + std::to_string(num_vertices) + ")");
      }
      if (u == v) throw ParseError(line_no, "self-loop at vertex " + std::to_string(u));
      const auto key = edge_key(static_cast<Vertex>(u), static_cast<Vertex>(v));
      auto it = std::lower_bound(seen.begin(), seen.end(), key);
      if (it != seen.end() && *it == key) throw ParseError(line_no, "duplicate edge");
      seen.insert(it, key);
      edges.push_back({static_cast<Vertex>(u), static_cast<Vertex>(v)});
    }
    if (end == text.size()) break;
  }
  if (!have_header) throw ParseError(line_no, "missing header 'p <num_vertices>'");
  return Graph::from_edges(num_vertices, std::move(edges), allow_disconnected);
}

std::string save_edge_list(const Graph& g) {
  std::ostringstream out;
  out << "p " << g.num_vertices() << '\n';
  for (const Edge& e : g.edges()) out << e.u << ' ' << e.v << '\n';
  return out.str();
}

std::vector<std::uint32_t> bfs_distances(const Graph& g, Vertex source) {
  std::vector<std::uint32_t> dist(g.num_vertices(), kUnreachable);
  std::vector<Vertex> queue;
  queue.reserve(g.num_vertices());
  dist[source] = 0;
  queue.push_back(source);
  for (std::size_t head = 0; head < queue.size(); ++head) {
    const Vertex v = queue[head];
    for (Vertex w : g.neighbors(v)) {
      if (dist[w] == kUnreachable) {
        dist[w] = dist[v] + 1;
        queue.push_back(w);
      }
    }
  }
  return dist;
}

std::uint32_t distance(const Graph& g, Vertex x, Vertex y) {
  if (x >= g.num_vertices() || y >= g.num_vertices()) throw ContractError("distance: vertex out of range");
  return bfs_distances(g, x)[y];
}

std::pair<Vertex, Vertex> farthest_pair(const Graph& g) {
  std::pair<Vertex, Vertex> best{0, 0};
  std::uint32_t best_dist = 0;
  for (Vertex u = 0; u < g.num_vertices(); ++u) {
    const auto dist = bfs_distances(g, u);
    for (Vertex v = u + 1; v < g.num_vertices(); ++v) {
      if (dist[v] != kUnreachable && dist[v] > best_dist) {
        best_dist = dist[v];
        best = {u, v};
      }
    }
  }
  return best;
}

std::uint32_t diameter(const Graph& g) {
  const auto [u, v] = farthest_pair(g);
  return u == v ? 0 : distance(g, u, v);
}

std::size_t cut_size(const Graph& g, const Cut& cut) {
  if (cut.num_vertices() != g.num_vertices()) throw ValidationError("cut does not belong to this graph");
  std::size_t count = 0;
  for (const Edge& e : g.edges()) count += cut.in_a(e.u) != cut.in_a(e.v);
  return count;
}

bool satisfies_degree_bound(const Graph& g, int local_dim) {
  return g.max_degree() <= static_cast<std::size_t>(local_dim) * local_dim;
}

}  // namespace scramble
