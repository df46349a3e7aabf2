#include "crnkit/graph.hpp"

#include <algorithm>
#include <numeric>

namespace crn {

namespace {

Partition canonical(std::vector<int> label, int num_labels) {
  std::vector<std::vector<int>> blocks(static_cast<std::size_t>(num_labels));
  for (std::size_t v = 0; v < label.size(); ++v)
    blocks[static_cast<std::size_t>(label[v])].push_back(static_cast<int>(v));
  blocks.erase(std::remove_if(blocks.begin(), blocks.end(), [](const auto& b) { return b.empty(); }),
               blocks.end());
  std::sort(blocks.begin(), blocks.end(), [](const auto& a, const auto& b) { return a.front() < b.front(); });

  Partition p;
  p.block_of.assign(label.size(), -1);
  for (std::size_t b = 0; b < blocks.size(); ++b)
    for (int v : blocks[b]) p.block_of[static_cast<std::size_t>(v)] = static_cast<int>(b);
  p.blocks = std::move(blocks);
  return p;
}

}  // namespace

Partition weak_components(int num_vertices, std::span<const Reaction> edges) {
  std::vector<int> parent(static_cast<std::size_t>(num_vertices));
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int v) {
    while (parent[static_cast<std::size_t>(v)] != v) {
      auto& p = parent[static_cast<std::size_t>(v)];
      p = parent[static_cast<std::size_t>(p)];
      v = p;
    }
    return v;
  };
  for (const auto& e : edges) {
    const int a = find(e.source);
    const int b = find(e.target);
    if (a != b) parent[static_cast<std::size_t>(std::max(a, b))] = std::min(a, b);
  }
  std::vector<int> label(static_cast<std::size_t>(num_vertices));
  for (int v = 0; v < num_vertices; ++v) label[static_cast<std::size_t>(v)] = find(v);
  return canonical(std::move(label), num_vertices);
}

Partition strong_components(int num_vertices, std::span<const Reaction> edges) {
  const auto n = static_cast<std::size_t>(num_vertices);
  std::vector<std::vector<int>> adj(n);
  for (const auto& e : edges) adj[static_cast<std::size_t>(e.source)].push_back(e.target);

  std::vector<int> index(n, -1), low(n, 0), label(n, -1);
  std::vector<bool> on_stack(n, false);
  std::vector<int> stack;
  int counter = 0;
  int components = 0;

  // Iterative Tarjan: frames hold (vertex, next neighbour position).
  std::vector<std::pair<int, std::size_t>> frames;
  for (int root = 0; root < num_vertices; ++root) {
    if (index[static_cast<std::size_t>(root)] >= 0) continue;
    frames.push_back({root, 0});
    while (!frames.empty()) {
      auto& [v, next] = frames.back();
      const auto vs = static_cast<std::size_t>(v);
      if (next == 0 && index[vs] < 0) {
        index[vs] = low[vs] = counter++;
        stack.push_back(v);
        on_stack[vs] = true;
      }
      if (next < adj[vs].size()) {
        const int w = adj[vs][next++];
        const auto ws = static_cast<std::size_t>(w);
        if (index[ws] < 0) {
          frames.push_back({w, 0});
        } else if (on_stack[ws]) {
          low[vs] = std::min(low[vs], index[ws]);
        }
        continue;
      }
      if (low[vs] == index[vs]) {
        int w;
        do {
          w = stack.back();
          stack.pop_back();
          on_stack[static_cast<std::size_t>(w)] = false;
          label[static_cast<std::size_t>(w)] = components;
        } while (w != v);
        ++components;
      }
      const int finished = v;
      frames.pop_back();
      if (!frames.empty()) {
        const auto ps = static_cast<std::size_t>(frames.back().first);
        low[ps] = std::min(low[ps], low[static_cast<std::size_t>(finished)]);
      }
    }
  }
  return canonical(std::move(label), components);
}

bool weakly_reversible(int num_vertices, std::span<const Reaction> edges) {
  return weak_components(num_vertices, edges) == strong_components(num_vertices, edges);
}

}  // namespace crn
