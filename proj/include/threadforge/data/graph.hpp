#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "threadforge/data/types.hpp"

namespace threadforge {

// Top-down propagation tree of one thread. Node i is thread.tweets[i].
struct AdjacencyStructure {
    std::size_t n = 0;
    std::vector<std::pair<std::size_t, std::size_t>> edges;  // (parent, child)
    std::vector<TweetId> node_order;

    friend bool operator==(const AdjacencyStructure&, const AdjacencyStructure&) = default;
};

// Throws DataError naming the offending tweet when the thread is not a valid tree.
AdjacencyStructure build_propagation_graph(const Thread& thread);

// Empty string when n-1 edges form a tree rooted at node 0, otherwise the reason.
std::string check_adjacency(const AdjacencyStructure& adjacency);

}  // namespace threadforge
