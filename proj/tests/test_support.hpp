#pragma once

// Shared test helpers: empirical statistics and independent brute-force
// oracles for the quantities the library computes by its own paths.

#include <cmath>
#include <cstdint>
#include <map>
#include <vector>

#include "infocomp/cpj.hpp"
#include "infocomp/dist.hpp"

namespace testsupport {

/// Statistical distance between empirical counts and an exact distribution.
inline double empirical_distance(const std::vector<std::uint64_t>& counts,
                                 const infocomp::Dist& exact) {
  std::uint64_t total = 0;
  for (auto c : counts) total += c;
  double sd = 0.0;
  for (std::size_t i = 0; i < exact.size(); ++i) {
    const double freq = total ? static_cast<double>(counts[i]) / static_cast<double>(total) : 0.0;
    sd += std::abs(freq - exact(i));
  }
  return 0.5 * sd;
}

/// Brute-force leaf distribution of a CPJ instance: walks every
/// root-to-leaf path with an explicit stack, multiplying owner-side
/// probabilities. Independent of correct_distribution's recursion.
inline std::vector<double> enumerate_leaf_probs(const infocomp::CpjNode& root) {
  std::vector<double> probs;
  struct Item {
    const infocomp::CpjNode* node;
    double p;
  };
  std::vector<Item> stack{{&root, 1.0}};
  // Explicit DFS, children pushed in reverse so leaves come out in
  // left-to-right order.
  while (!stack.empty()) {
    const Item it = stack.back();
    stack.pop_back();
    if (it.node->is_leaf()) {
      probs.push_back(it.p);
      continue;
    }
    const infocomp::Dist& own =
        it.node->owner == infocomp::Owner::a ? *it.node->dist_a : *it.node->dist_b;
    for (std::size_t i = it.node->children.size(); i-- > 0;)
      stack.push_back(Item{&it.node->children[i], it.p * own(i)});
  }
  return probs;
}

/// Brute-force expected path divergence cost over the correct
/// distribution, via full path enumeration.
inline double enumerate_divergence(const infocomp::CpjNode& root) {
  struct Item {
    const infocomp::CpjNode* node;
    double p;
    double cost;
  };
  double total = 0.0;
  std::vector<Item> stack{{&root, 1.0, 0.0}};
  while (!stack.empty()) {
    const Item it = stack.back();
    stack.pop_back();
    if (it.node->is_leaf()) {
      total += it.p * it.cost;
      continue;
    }
    const infocomp::Dist& own =
        it.node->owner == infocomp::Owner::a ? *it.node->dist_a : *it.node->dist_b;
    for (std::size_t i = it.node->children.size(); i-- > 0;) {
      const double p = own(i);
      if (p == 0.0) continue;
      stack.push_back(
          Item{&it.node->children[i], it.p * p, it.cost + infocomp::edge_divergence(*it.node, i)});
    }
  }
  return total;
}

}  // namespace testsupport
