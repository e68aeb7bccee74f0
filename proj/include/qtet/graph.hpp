#ifndef QTET_GRAPH_HPP
#define QTET_GRAPH_HPP

#include <algorithm>
#include <array>
#include <deque>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "qtet/types.hpp"

namespace qtet {

/// Simple undirected connected graph with vertices 0..n-1 and sorted
/// neighbor lists.
struct Graph {
    int n = 0;
    std::vector<std::vector<int>> adj;

    int edge_count() const {
        std::size_t deg = 0;
        for (const auto& nb : adj) deg += nb.size();
        return static_cast<int>(deg / 2);
    }
};

/// Intersection numbers of a distance-regular graph: the full tensor
/// p[h][i][j] plus the standard c/a/b abbreviations, valency k and diameter D.
struct IntersectionData {
    int D = 0;
    int k = 0;
    std::vector<std::vector<std::vector<int>>> p; // p[h][i][j], 0 <= h,i,j <= D
    std::vector<int> c, a, b;                     // length D+1, c[0] = 0, b[D] = 0

    std::string intersection_array() const {
        std::ostringstream os;
        os << "{";
        for (int i = 0; i < D; ++i) os << b[i] << (i + 1 < D ? "," : "");
        os << ";";
        for (int i = 1; i <= D; ++i) os << c[i] << (i < D ? "," : "");
        os << "}";
        return os.str();
    }
};

namespace detail {

inline Graph graph_from_edges(int n, const std::set<std::pair<int, int>>& edges) {
    Graph g;
    g.n = n;
    g.adj.assign(n, {});
    for (auto [u, v] : edges) {
        g.adj[u].push_back(v);
        g.adj[v].push_back(u);
    }
    for (auto& nb : g.adj) std::sort(nb.begin(), nb.end());
    return g;
}

inline std::vector<int> bfs_distances(const Graph& g, int src) {
    std::vector<int> dist(g.n, -1);
    std::deque<int> queue{src};
    dist[src] = 0;
    while (!queue.empty()) {
        int v = queue.front();
        queue.pop_front();
        for (int w : g.adj[v])
            if (dist[w] < 0) {
                dist[w] = dist[v] + 1;
                queue.push_back(w);
            }
    }
    return dist;
}

} // namespace detail

/// Parse an edge list: one edge per line, two 0-based vertex ids separated by
/// whitespace; '#' starts a comment line.
inline Graph load_edge_list(const std::string& text) {
    std::set<std::pair<int, int>> edges;
    int max_vertex = -1;
    std::istringstream stream(text);
    std::string line;
    int lineno = 0;
    while (std::getline(stream, line)) {
        ++lineno;
        std::string trimmed = line;
        trimmed.erase(0, trimmed.find_first_not_of(" \t\r"));
        if (trimmed.empty() || trimmed[0] == '#') continue;
        std::istringstream ls(trimmed);
        long long u, v;
        if (!(ls >> u >> v))
            throw ParseError("edge list line " + std::to_string(lineno) + ": expected two vertex ids");
        std::string rest;
        if (ls >> rest)
            throw ParseError("edge list line " + std::to_string(lineno) + ": trailing content '" + rest + "'");
        if (u < 0 || v < 0)
            throw ParseError("edge list line " + std::to_string(lineno) + ": negative vertex id");
        if (u == v)
            throw ParseError("edge list line " + std::to_string(lineno) + ": loop at vertex " + std::to_string(u));
        auto e = std::minmax(static_cast<int>(u), static_cast<int>(v));
        if (!edges.insert({e.first, e.second}).second)
            throw ParseError("edge list line " + std::to_string(lineno) + ": duplicate edge");
        max_vertex = std::max(max_vertex, e.second);
    }
    if (edges.empty()) throw ParseError("edge list is empty");

    Graph g = detail::graph_from_edges(max_vertex + 1, edges);
    auto dist = detail::bfs_distances(g, 0);
    for (int v = 0; v < g.n; ++v)
        if (dist[v] < 0)
            throw ParseError("graph is disconnected (vertex " + std::to_string(v) + " unreachable from 0)");
    return g;
}

/// Cycle on n >= 4 vertices.
inline Graph make_cycle(int n) {
    if (n < 4) throw ParseError("cycle:n requires n >= 4");
    std::set<std::pair<int, int>> edges;
    for (int i = 0; i < n; ++i) edges.insert({std::min(i, (i + 1) % n), std::max(i, (i + 1) % n)});
    return detail::graph_from_edges(n, edges);
}

/// Hypercube graph on 2^d vertices, d >= 1.
inline Graph make_hypercube(int d) {
    if (d < 1 || d > 20) throw ParseError("hypercube:d requires 1 <= d <= 20");
    int n = 1 << d;
    std::set<std::pair<int, int>> edges;
    for (int v = 0; v < n; ++v)
        for (int bit = 0; bit < d; ++bit) {
            int w = v ^ (1 << bit);
            edges.insert({std::min(v, w), std::max(v, w)});
        }
    return detail::graph_from_edges(n, edges);
}

/// Generator spec grammar: name ':' integer. Known names: cycle, hypercube.
inline Graph load_graph_spec(const std::string& spec) {
    auto colon = spec.find(':');
    if (colon == std::string::npos)
        throw ParseError("graph spec '" + spec + "': expected name:integer");
    std::string name = spec.substr(0, colon);
    int arg;
    try {
        std::size_t used = 0;
        arg = std::stoi(spec.substr(colon + 1), &used);
        if (used != spec.size() - colon - 1) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
        throw ParseError("graph spec '" + spec + "': bad integer argument");
    }
    if (name == "cycle") return make_cycle(arg);
    if (name == "hypercube") return make_hypercube(arg);
    throw ParseError("graph spec '" + spec + "': unknown generator '" + name + "'");
}

/// All-pairs path-length distances by BFS from every vertex.
inline Eigen::MatrixXi distances(const Graph& g) {
    Eigen::MatrixXi dist(g.n, g.n);
    for (int v = 0; v < g.n; ++v) {
        auto row = detail::bfs_distances(g, v);
        for (int w = 0; w < g.n; ++w) dist(v, w) = row[w];
    }
    return dist;
}

inline int diameter(const Eigen::MatrixXi& dist) { return dist.maxCoeff(); }

/// Certify distance-regularity by exhaustive verification over all ordered
/// vertex pairs; returns the full intersection-number tensor.
/// Throws NotDistanceRegularError with a witness pair on failure.
inline IntersectionData check_distance_regular(const Graph& g, const Eigen::MatrixXi& dist) {
    const int n = g.n;
    const int D = diameter(dist);
    IntersectionData data;
    data.D = D;
    data.p.assign(D + 1, std::vector<std::vector<int>>(D + 1, std::vector<int>(D + 1, -1)));
    std::vector<std::array<int, 2>> first_pair((D + 1), {-1, -1});

    // bucket vertices by distance from x once per x
    std::vector<std::vector<int>> count(n);
    for (int x = 0; x < n; ++x)
        for (int y = 0; y < n; ++y) {
            int h = dist(x, y);
            std::vector<std::vector<int>> cnt(D + 1, std::vector<int>(D + 1, 0));
            for (int z = 0; z < n; ++z) ++cnt[dist(x, z)][dist(z, y)];
            for (int i = 0; i <= D; ++i)
                for (int j = 0; j <= D; ++j) {
                    int& ref = data.p[h][i][j];
                    if (ref < 0) {
                        ref = cnt[i][j];
                        first_pair[h] = {x, y};
                    } else if (ref != cnt[i][j]) {
                        std::ostringstream os;
                        os << "not distance-regular: p^" << h << "_{" << i << "," << j
                           << "} differs between pairs (" << first_pair[h][0] << ","
                           << first_pair[h][1] << ") count " << ref << " and (" << x << "," << y
                           << ") count " << cnt[i][j];
                        throw NotDistanceRegularError(os.str());
                    }
                }
        }

    data.k = data.p[0][1][1]; // k = b0 = number of neighbors
    data.c.assign(D + 1, 0);
    data.a.assign(D + 1, 0);
    data.b.assign(D + 1, 0);
    for (int i = 0; i <= D; ++i) {
        if (i >= 1) data.c[i] = data.p[i][1][i - 1];
        data.a[i] = data.p[i][1][i];
        if (i < D) data.b[i] = data.p[i][1][i + 1];
    }
    return data;
}

} // namespace qtet

#endif
