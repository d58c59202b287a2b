#pragma once

#include <algorithm>
#include <cstdint>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "qac/rng.hpp"

namespace qac {

/// Error from the plain-text loaders, carrying the 1-based input line.
class ParseError : public std::runtime_error {
public:
    ParseError(int line, const std::string& message)
        : std::runtime_error("line " + std::to_string(line) + ": " + message), line_(line) {}

    int line() const { return line_; }

private:
    int line_ = 0;
};

/// Static directed graph. Node ids are 0-based internally; all file formats
/// and printed output use 1-based ids.
///
/// Direction convention: an edge (s, r) means s transmits to r, i.e. r is an
/// out-neighbor of s and s is an in-neighbor of r. The file format reads
/// "s -> r" the same way. Edge order is preserved from the input: the
/// position of r in out_adj[s] seeds the default round-robin priority.
struct Digraph {
    int n = 0;
    std::vector<std::pair<int, int>> edges;  // (sender, receiver), input order
    std::vector<std::vector<int>> out_adj;
    std::vector<std::vector<int>> in_adj;

    int out_degree(int j) const { return static_cast<int>(out_adj[j].size()); }
    int in_degree(int j) const { return static_cast<int>(in_adj[j].size()); }

    bool has_edge(int s, int r) const {
        const auto& adj = out_adj[s];
        return std::find(adj.begin(), adj.end(), r) != adj.end();
    }
};

inline bool operator==(const Digraph& a, const Digraph& b) {
    return a.n == b.n && a.edges == b.edges;
}

/// Build a digraph from an ordered edge list (0-based ids). Rejects
/// self-edges, duplicates and out-of-range endpoints.
inline Digraph make_digraph(int n, const std::vector<std::pair<int, int>>& edges) {
    if (n < 2) throw std::invalid_argument("digraph: need at least 2 nodes");
    Digraph g;
    g.n = n;
    g.out_adj.resize(n);
    g.in_adj.resize(n);
    for (const auto& [s, r] : edges) {
        if (s < 0 || s >= n || r < 0 || r >= n)
            throw std::invalid_argument("digraph: edge endpoint out of range");
        if (s == r) throw std::invalid_argument("digraph: self-edge");
        if (g.has_edge(s, r)) throw std::invalid_argument("digraph: duplicate edge");
        g.edges.emplace_back(s, r);
        g.out_adj[s].push_back(r);
        g.in_adj[r].push_back(s);
    }
    return g;
}

namespace detail {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

inline bool parse_int(std::string_view s, long long& out) {
    if (s.empty()) return false;
    std::size_t i = 0;
    bool neg = false;
    if (s[0] == '-' || s[0] == '+') {
        neg = s[0] == '-';
        i = 1;
        if (s.size() == 1) return false;
    }
    long long v = 0;
    for (; i < s.size(); ++i) {
        if (s[i] < '0' || s[i] > '9') return false;
        v = v * 10 + (s[i] - '0');
        if (v > (1ll << 40)) return false;  // node counts never get near this
    }
    out = neg ? -v : v;
    return true;
}

} // namespace detail

/// Parse the edge-list format:
///
///   # comment
///   nodes N
///   a -> b
///
/// with 1-based node ids. Errors report the offending line number.
inline Digraph parse_edge_list(std::string_view text) {
    std::vector<std::pair<int, int>> edges;
    int n = -1;
    int line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t eol = text.find('\n', pos);
        std::string_view line = text.substr(pos, eol == std::string_view::npos ? text.size() - pos : eol - pos);
        pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
        ++line_no;
        line = detail::trim(line);
        if (line.empty() || line.front() == '#') continue;

        if (n < 0) {
            if (line.substr(0, 6) != "nodes ")
                throw ParseError(line_no, "expected header 'nodes N'");
            long long count = 0;
            if (!detail::parse_int(detail::trim(line.substr(6)), count) || count < 2)
                throw ParseError(line_no, "node count must be an integer >= 2");
            n = static_cast<int>(count);
            continue;
        }

        std::size_t arrow = line.find("->");
        if (arrow == std::string_view::npos)
            throw ParseError(line_no, "expected 'a -> b'");
        long long a = 0, b = 0;
        if (!detail::parse_int(detail::trim(line.substr(0, arrow)), a) ||
            !detail::parse_int(detail::trim(line.substr(arrow + 2)), b))
            throw ParseError(line_no, "expected 'a -> b'");
        if (a < 1 || a > n || b < 1 || b > n)
            throw ParseError(line_no, "node id out of range 1.." + std::to_string(n));
        if (a == b) throw ParseError(line_no, "self-edge " + std::to_string(a) + " -> " + std::to_string(b));
        std::pair<int, int> e{static_cast<int>(a - 1), static_cast<int>(b - 1)};
        if (std::find(edges.begin(), edges.end(), e) != edges.end())
            throw ParseError(line_no, "duplicate edge " + std::to_string(a) + " -> " + std::to_string(b));
        edges.push_back(e);
    }
    if (n < 0) throw ParseError(line_no, "missing 'nodes N' header");
    return make_digraph(n, edges);
}

/// Canonical serialization; parse_edge_list(serialize_edge_list(g)) == g and
/// the text round-trips byte-for-byte.
inline std::string serialize_edge_list(const Digraph& g) {
    std::ostringstream out;
    out << "nodes " << g.n << "\n";
    for (const auto& [s, r] : g.edges) out << (s + 1) << " -> " << (r + 1) << "\n";
    return out.str();
}

namespace detail {

inline std::vector<bool> reachable(int n, const std::vector<std::vector<int>>& adj, int root) {
    std::vector<bool> seen(n, false);
    std::vector<int> stack{root};
    seen[root] = true;
    while (!stack.empty()) {
        int v = stack.back();
        stack.pop_back();
        for (int w : adj[v]) {
            if (!seen[w]) {
                seen[w] = true;
                stack.push_back(w);
            }
        }
    }
    return seen;
}

} // namespace detail

/// True iff every node reaches every other along directed edges: forward
/// reachability from node 0 plus reachability in the reversed graph.
inline bool is_strongly_connected(const Digraph& g) {
    if (g.n == 0) return false;
    auto fwd = detail::reachable(g.n, g.out_adj, 0);
    auto bwd = detail::reachable(g.n, g.in_adj, 0);
    for (int v = 0; v < g.n; ++v)
        if (!fwd[v] || !bwd[v]) return false;
    return true;
}

/// Strongly connected by construction: a directed Hamiltonian cycle over a
/// seeded permutation, then every remaining ordered pair independently with
/// probability `density`. Deterministic for fixed (n, density, seed).
inline Digraph random_strongly_connected(int n, double density, std::uint64_t seed) {
    if (n < 2) throw std::invalid_argument("random_strongly_connected: n must be >= 2");
    SplitMix64 gen{substream_seed(seed, 0)};

    std::vector<int> perm(n);
    for (int i = 0; i < n; ++i) perm[i] = i;
    for (int i = n - 1; i > 0; --i) {
        int j = static_cast<int>(gen.next_below(static_cast<std::uint64_t>(i) + 1));
        std::swap(perm[i], perm[j]);
    }

    std::vector<std::pair<int, int>> edges;
    for (int i = 0; i < n; ++i) edges.emplace_back(perm[i], perm[(i + 1) % n]);

    // Extra pairs are visited in fixed (sender, receiver) order; cycle edges
    // are skipped without consuming a draw. Only the first n entries can
    // collide, so the scan stays over the cycle prefix.
    for (int s = 0; s < n; ++s) {
        for (int r = 0; r < n; ++r) {
            if (s == r) continue;
            if (std::find(edges.begin(), edges.begin() + n, std::pair<int, int>{s, r}) != edges.begin() + n)
                continue;
            if (gen.next_double() < density) edges.emplace_back(s, r);
        }
    }
    return make_digraph(n, edges);
}

} // namespace qac
