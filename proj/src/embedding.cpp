#include "dsmc/embedding.hpp"

#include <numeric>
#include <stdexcept>
#include <string>
#include <unordered_map>

#include "dsmc/topology.hpp"

namespace dsmc {

namespace {

std::unordered_map<int, int> positions(const std::vector<int>& order, const char* side) {
  std::unordered_map<int, int> pos;
  for (int i = 0; i < static_cast<int>(order.size()); ++i) {
    if (!pos.emplace(order[i], i).second) {
      throw std::invalid_argument(std::string("duplicate ") + side + " port " + std::to_string(order[i]));
    }
  }
  return pos;
}

}  // namespace

Embedding canonical_embedding(const std::vector<Wire>& wires, const std::vector<int>& left_order,
                              const std::vector<int>& right_order) {
  const auto left = positions(left_order, "left");
  const auto right = positions(right_order, "right");
  Embedding e;
  e.segments.reserve(wires.size());
  for (const auto& [a, b] : wires) {
    const auto la = left.find(a);
    const auto rb = right.find(b);
    if (la == left.end() || rb == right.end()) {
      throw std::invalid_argument("wire " + std::to_string(a) + "->" + std::to_string(b) + " uses an unplaced port");
    }
    e.segments.push_back({static_cast<double>(la->second), static_cast<double>(rb->second)});
  }
  return e;
}

std::int64_t count_crossings_geometric(const Embedding& e) {
  const auto& s = e.segments;
  std::int64_t count = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    for (std::size_t j = i + 1; j < s.size(); ++j) {
      if ((s[i].y_left - s[j].y_left) * (s[i].y_right - s[j].y_right) < 0.0) ++count;
    }
  }
  return count;
}

std::vector<Wire> full_bipartite_wires(int n, int k) {
  std::vector<Wire> w;
  w.reserve(static_cast<std::size_t>(n) * k);
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < k; ++b) w.emplace_back(a, b);
  }
  return w;
}

std::vector<Wire> identity_wires(int n) {
  std::vector<Wire> w;
  for (int i = 0; i < n; ++i) w.emplace_back(i, i);
  return w;
}

std::vector<Wire> reversal_wires(int n) {
  std::vector<Wire> w;
  for (int i = 0; i < n; ++i) w.emplace_back(i, n - 1 - i);
  return w;
}

std::vector<int> natural_order(int n) {
  std::vector<int> o(n);
  std::iota(o.begin(), o.end(), 0);
  return o;
}

Embedding flat_crossbar_embedding(const Topology& t) {
  if (t.kind() != TopologyKind::FlatCrossbar) throw std::invalid_argument("not a flat crossbar");
  std::vector<Wire> wires;
  for (const Link& l : t.links()) {
    wires.emplace_back(t.nodes()[l.src.node].index, t.nodes()[l.dst.node].index);
  }
  return canonical_embedding(wires, natural_order(t.port_count()), natural_order(t.slave_port_count()));
}

}  // namespace dsmc
