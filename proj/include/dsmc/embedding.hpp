#pragma once

// Two-column straight-line drawings of a bipartite wire layer and a
// brute-force crossing counter used as an independent check on the closed-form
// crossing counts.

#include <cstdint>
#include <utility>
#include <vector>

namespace dsmc {

class Topology;

// (left port, right port)
using Wire = std::pair<int, int>;

struct Segment {
  double y_left = 0.0;
  double y_right = 0.0;
};

struct Embedding {
  std::vector<Segment> segments;
};

// Left port left_order[i] sits at y = i, likewise on the right.
// Throws std::invalid_argument on duplicate ports or wires to unplaced ports.
Embedding canonical_embedding(const std::vector<Wire>& wires, const std::vector<int>& left_order,
                              const std::vector<int>& right_order);

// Unordered segment pairs (a->b, c->d) with (y_a - y_c)(y_b - y_d) < 0.
std::int64_t count_crossings_geometric(const Embedding& e);

std::vector<Wire> full_bipartite_wires(int n, int k);
std::vector<Wire> identity_wires(int n);
std::vector<Wire> reversal_wires(int n);
std::vector<int> natural_order(int n);

// Master -> slave-port layer of a flat crossbar, in natural port order.
Embedding flat_crossbar_embedding(const Topology& t);

}  // namespace dsmc
