#pragma once

#include <cstdint>
#include <optional>
#include <unordered_map>
#include <vector>

#include "actordb/relstore/slot.hpp"

namespace actordb::txn {

using NodeId = std::uint32_t;
using SegmentId = std::uint32_t;

enum Access : std::uint8_t { kRead = 1, kWrite = 2 };

/// Happens-before structure of one root transaction. Each invocation node executes as a chain
/// of segments; invoking a child forks a segment, synchronizing on a child's future joins the
/// child's last segment into a fresh segment of the waiter. Segment ids are allocated in
/// creation order, so every edge points from a smaller id to a larger one.
class InvocationGraph {
 public:
  struct Witness {
    NodeId first;
    NodeId second;
    rel::SlotKey slot;
  };

  InvocationGraph();

  static constexpr NodeId root() { return 0; }

  NodeId add_child(NodeId parent);
  /// Records that `waiter` observed the completion of `child`. No-op if already synchronized.
  void synchronize(NodeId waiter, NodeId child);
  /// Marks `node` complete; its still-unsynchronized children are joined into its final segment.
  void finish(NodeId node);

  bool finished(NodeId node) const { return nodes_[node].finished; }
  NodeId parent(NodeId node) const { return nodes_[node].parent; }
  std::vector<NodeId> unsynchronized_children(NodeId node) const { return nodes_[node].pending; }

  void record(NodeId node, const rel::SlotKey& slot, Access access);

  /// Two accesses conflict when they touch the same slot from segments unordered by the graph
  /// and at least one writes. On structural slots only scan-versus-insert conflicts; inserts
  /// among themselves commute.
  std::optional<Witness> find_race() const;

  std::size_t node_count() const { return nodes_.size(); }
  std::size_t segment_count() const { return segments_.size(); }
  /// True iff segment `a` happens before segment `b` (used by tests).
  bool ordered(SegmentId a, SegmentId b) const;
  SegmentId current_segment(NodeId node) const { return nodes_[node].current; }

 private:
  struct Segment {
    NodeId node;
    std::vector<SegmentId> preds;
    std::unordered_map<rel::SlotKey, std::uint8_t, rel::SlotKeyHash> footprint;
  };
  struct Node {
    NodeId parent;
    SegmentId current;
    bool finished = false;
    std::vector<NodeId> pending;
  };

  SegmentId new_segment(NodeId node, std::vector<SegmentId> preds);
  std::vector<std::vector<std::uint64_t>> closure() const;

  std::vector<Segment> segments_;
  std::vector<Node> nodes_;
};

}  // namespace actordb::txn
