#pragma once

#include "crnkit/network.hpp"

#include <span>
#include <vector>

namespace crn {

/// A partition of vertex indices into blocks. Blocks are ordered by their
/// smallest member and members are sorted, so partitions compare by value.
struct Partition {
  std::vector<std::vector<int>> blocks;
  std::vector<int> block_of;  // vertex -> block index

  int size() const { return static_cast<int>(blocks.size()); }
  friend bool operator==(const Partition&, const Partition&) = default;
};

/// Connected components of the underlying undirected graph.
Partition weak_components(int num_vertices, std::span<const Reaction> edges);

/// Strongly connected components (Tarjan).
Partition strong_components(int num_vertices, std::span<const Reaction> edges);

/// Every weak component is a single strong component.
bool weakly_reversible(int num_vertices, std::span<const Reaction> edges);

}  // namespace crn
