#include "switchrep/graph.hpp"

#include <string>
#include <unordered_set>
#include <vector>

#include "switchrep/errors.hpp"

namespace switchrep {

namespace {

// One stub-pairing attempt; false on self-loop or multi-edge.
bool try_pairing(int n, int k, Xoshiro256pp& rng, std::vector<std::int32_t>& adjacency,
                 std::vector<std::int32_t>& stubs, std::vector<int>& fill,
                 std::unordered_set<std::uint64_t>& seen) {
  stubs.clear();
  for (std::int32_t v = 0; v < n; ++v)
    for (int i = 0; i < k; ++i) stubs.push_back(v);
  // Fisher-Yates
  for (std::size_t i = stubs.size() - 1; i > 0; --i) {
    const std::size_t j = static_cast<std::size_t>(rng.next_below(i + 1));
    std::swap(stubs[i], stubs[j]);
  }
  seen.clear();
  fill.assign(n, 0);
  for (std::size_t e = 0; e + 1 < stubs.size(); e += 2) {
    const std::int32_t a = stubs[e];
    const std::int32_t b = stubs[e + 1];
    if (a == b) return false;
    const std::uint64_t key = a < b
        ? static_cast<std::uint64_t>(a) * n + b
        : static_cast<std::uint64_t>(b) * n + a;
    if (!seen.insert(key).second) return false;
    adjacency[static_cast<std::size_t>(a) * k + fill[a]++] = b;
    adjacency[static_cast<std::size_t>(b) * k + fill[b]++] = a;
  }
  return true;
}

}  // namespace

RegularGraph RegularGraph::random(int n, int k, Xoshiro256pp& rng, int max_attempts) {
  if (k <= 2) throw InvalidParams("graph degree must exceed 2");
  if (n <= k) throw InvalidParams("a " + std::to_string(k) +
                                  "-regular graph needs more than " +
                                  std::to_string(k) + " nodes");
  if ((static_cast<long long>(n) * k) % 2 != 0)
    throw InvalidParams("degree sequence infeasible: n*k must be even");

  RegularGraph g(n, k);
  std::vector<std::int32_t> stubs;
  std::vector<int> fill;
  std::unordered_set<std::uint64_t> seen;
  seen.reserve(static_cast<std::size_t>(n) * k);
  for (int attempt = 0; attempt < max_attempts; ++attempt) {
    if (!try_pairing(n, k, rng, g.adjacency_, stubs, fill, seen)) continue;
    if (g.is_connected()) return g;
  }
  throw GraphGenerationFailed("no simple connected " + std::to_string(k) +
                              "-regular graph on " + std::to_string(n) +
                              " nodes after " + std::to_string(max_attempts) +
                              " attempts");
}

RegularGraph RegularGraph::random(int n, int k, std::uint64_t seed, int max_attempts) {
  Xoshiro256pp rng(seed);
  return random(n, k, rng, max_attempts);
}

bool RegularGraph::is_connected() const {
  if (n_ == 0) return false;
  std::vector<char> visited(n_, 0);
  std::vector<std::int32_t> stack{0};
  visited[0] = 1;
  int count = 1;
  while (!stack.empty()) {
    const std::int32_t v = stack.back();
    stack.pop_back();
    for (std::int32_t u : neighbors(v)) {
      if (!visited[u]) {
        visited[u] = 1;
        ++count;
        stack.push_back(u);
      }
    }
  }
  return count == n_;
}

}  // namespace switchrep
