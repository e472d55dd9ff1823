#include "actordb/txn/graph.hpp"

#include <algorithm>

namespace actordb::txn {

InvocationGraph::InvocationGraph() {
  segments_.push_back(Segment{0, {}, {}});
  nodes_.push_back(Node{0, 0, false, {}});
}

SegmentId InvocationGraph::new_segment(NodeId node, std::vector<SegmentId> preds) {
  auto id = static_cast<SegmentId>(segments_.size());
  segments_.push_back(Segment{node, std::move(preds), {}});
  return id;
}

NodeId InvocationGraph::add_child(NodeId parent) {
  auto child = static_cast<NodeId>(nodes_.size());
  SegmentId fork = nodes_[parent].current;
  SegmentId first = new_segment(child, {fork});
  nodes_.push_back(Node{parent, first, false, {}});
  // The caller continues in a fresh segment concurrent with the child.
  nodes_[parent].current = new_segment(parent, {fork});
  nodes_[parent].pending.push_back(child);
  return child;
}

void InvocationGraph::synchronize(NodeId waiter, NodeId child) {
  auto& pending = nodes_[waiter].pending;
  auto it = std::find(pending.begin(), pending.end(), child);
  if (it == pending.end()) return;
  pending.erase(it);
  nodes_[waiter].current = new_segment(waiter, {nodes_[waiter].current, nodes_[child].current});
}

void InvocationGraph::finish(NodeId node) {
  auto pending = nodes_[node].pending;
  for (NodeId c : pending) synchronize(node, c);
  nodes_[node].finished = true;
}

void InvocationGraph::record(NodeId node, const rel::SlotKey& slot, Access access) {
  segments_[nodes_[node].current].footprint[slot] |= access;
}

std::vector<std::vector<std::uint64_t>> InvocationGraph::closure() const {
  const std::size_t n = segments_.size();
  const std::size_t words = (n + 63) / 64;
  std::vector<std::vector<std::uint64_t>> reach(n, std::vector<std::uint64_t>(words, 0));
  for (std::size_t s = 0; s < n; ++s) {
    for (SegmentId p : segments_[s].preds) {
      for (std::size_t w = 0; w < words; ++w) reach[s][w] |= reach[p][w];
      reach[s][p / 64] |= 1ULL << (p % 64);
    }
  }
  return reach;
}

bool InvocationGraph::ordered(SegmentId a, SegmentId b) const {
  if (a == b) return true;
  auto reach = closure();
  return (reach[b][a / 64] >> (a % 64) & 1) || (reach[a][b / 64] >> (b % 64) & 1);
}

std::optional<InvocationGraph::Witness> InvocationGraph::find_race() const {
  // Gather, per slot, the segments touching it; only slots seen from two segments matter.
  std::unordered_map<rel::SlotKey, std::vector<std::pair<SegmentId, std::uint8_t>>, rel::SlotKeyHash> touches;
  for (SegmentId s = 0; s < segments_.size(); ++s)
    for (const auto& [slot, mode] : segments_[s].footprint) touches[slot].emplace_back(s, mode);

  std::vector<std::vector<std::uint64_t>> reach;
  std::vector<std::pair<rel::SlotKey, const std::vector<std::pair<SegmentId, std::uint8_t>>*>> shared;
  for (const auto& [slot, list] : touches)
    if (list.size() > 1) shared.emplace_back(slot, &list);
  if (shared.empty()) return std::nullopt;
  std::sort(shared.begin(), shared.end(), [](const auto& a, const auto& b) { return a.first < b.first; });

  reach = closure();
  auto before = [&](SegmentId a, SegmentId b) { return (reach[b][a / 64] >> (a % 64)) & 1; };

  for (const auto& [slot, list] : shared) {
    for (std::size_t i = 0; i < list->size(); ++i) {
      for (std::size_t j = i + 1; j < list->size(); ++j) {
        auto [sa, ma] = (*list)[i];
        auto [sb, mb] = (*list)[j];
        bool conflict = slot.is_record() ? ((ma | mb) & kWrite) && !(ma == kRead && mb == kRead)
                                         : ((ma & kWrite) && (mb & kRead)) || ((mb & kWrite) && (ma & kRead));
        if (!conflict) continue;
        if (before(sa, sb) || before(sb, sa)) continue;
        return Witness{segments_[sa].node, segments_[sb].node, slot};
      }
    }
  }
  return std::nullopt;
}

}  // namespace actordb::txn
