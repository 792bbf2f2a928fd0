#include "threadforge/data/graph.hpp"

#include <unordered_map>

#include "threadforge/common/error.hpp"

namespace threadforge {

AdjacencyStructure build_propagation_graph(const Thread& thread) {
    if (auto problem = check_thread(thread); !problem.empty()) {
        throw DataError("thread " + thread.thread_id + ": " + problem);
    }
    AdjacencyStructure adj;
    adj.n = thread.tweets.size();
    adj.node_order.reserve(adj.n);
    std::unordered_map<TweetId, std::size_t> index;
    for (std::size_t i = 0; i < adj.n; ++i) {
        index.emplace(thread.tweets[i].id, i);
        adj.node_order.push_back(thread.tweets[i].id);
    }
    adj.edges.reserve(adj.n > 0 ? adj.n - 1 : 0);
    for (std::size_t i = 1; i < adj.n; ++i) {
        adj.edges.emplace_back(index.at(*thread.tweets[i].parent_id), i);
    }
    return adj;
}

std::string check_adjacency(const AdjacencyStructure& adjacency) {
    const std::size_t n = adjacency.n;
    if (n == 0) {
        return "empty graph";
    }
    if (adjacency.edges.size() != n - 1) {
        return "expected " + std::to_string(n - 1) + " edges, found " + std::to_string(adjacency.edges.size());
    }
    std::vector<std::vector<std::size_t>> children(n);
    std::vector<int> in_degree(n, 0);
    for (auto [p, c] : adjacency.edges) {
        if (p >= n || c >= n) {
            return "edge endpoint out of range";
        }
        children[p].push_back(c);
        ++in_degree[c];
    }
    if (in_degree[0] != 0) {
        return "node 0 has a parent";
    }
    for (std::size_t i = 1; i < n; ++i) {
        if (in_degree[i] != 1) {
            return "node " + std::to_string(i) + " has in-degree " + std::to_string(in_degree[i]);
        }
    }
    std::vector<bool> seen(n, false);
    std::vector<std::size_t> stack{0};
    seen[0] = true;
    std::size_t visited = 0;
    while (!stack.empty()) {
        std::size_t u = stack.back();
        stack.pop_back();
        ++visited;
        for (std::size_t v : children[u]) {
            if (!seen[v]) {
                seen[v] = true;
                stack.push_back(v);
            }
        }
    }
    if (visited != n) {
        return "only " + std::to_string(visited) + " of " + std::to_string(n) + " nodes reachable from node 0";
    }
    return {};
}

}  // namespace threadforge
