#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "switchrep/rng.hpp"

namespace switchrep {

/// Connected k-regular simple graph with flat adjacency storage.
class RegularGraph {
 public:
  // Uniform-ish random k-regular graph via stub pairing; any self-loop,
  // multi-edge or disconnected outcome triggers a full restart. Throws
  // InvalidParams for an infeasible degree sequence (n <= k, k <= 2 or n*k
  // odd) and GraphGenerationFailed after `max_attempts` restarts.
  static RegularGraph random(int n, int k, Xoshiro256pp& rng,
                             int max_attempts = 1000);
  static RegularGraph random(int n, int k, std::uint64_t seed,
                             int max_attempts = 1000);

  int node_count() const { return n_; }
  int degree() const { return k_; }
  int edge_count() const { return n_ * k_ / 2; }

  std::span<const std::int32_t> neighbors(int v) const {
    return {adjacency_.data() + static_cast<std::size_t>(v) * k_,
            static_cast<std::size_t>(k_)};
  }

  bool is_connected() const;

 private:
  RegularGraph(int n, int k) : n_(n), k_(k), adjacency_(static_cast<std::size_t>(n) * k) {}

  int n_ = 0;
  int k_ = 0;
  std::vector<std::int32_t> adjacency_;
};

}  // namespace switchrep
