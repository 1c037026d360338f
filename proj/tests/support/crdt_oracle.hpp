#pragma once

// Test-only reference model and workload generators for the sequence CRDT.
// The oracle rebuilds the document as a tree (each insert hangs off its
// origin, siblings ordered by descending (lamport, replica)) and reads it in
// pre-order. It shares no code with TextDoc's list integration.

#include <algorithm>
#include <map>
#include <random>
#include <set>
#include <tuple>
#include <vector>

#include "docsync/crdt/text_doc.hpp"

namespace docsync::testing {

inline std::u32string tree_oracle(const std::vector<Op>& ops) {
  std::map<std::optional<OpId>, std::vector<InsertOp>> children;
  std::set<OpId> deleted;
  for (const Op& op : ops) {
    if (const auto* ins = std::get_if<InsertOp>(&op)) {
      std::optional<OpId> parent;
      if (!ins->origin.is_head()) parent = ins->origin.element();
      children[parent].push_back(*ins);
    } else {
      deleted.insert(std::get<DeleteOp>(op).target);
    }
  }
  for (auto& [_, list] : children) {
    std::sort(list.begin(), list.end(), [](const InsertOp& a, const InsertOp& b) {
      return std::tie(a.lamport, a.id.replica) > std::tie(b.lamport, b.id.replica);
    });
  }
  std::u32string out;
  // Iterative pre-order: push children in reverse so the first child pops first.
  std::vector<const InsertOp*> work;
  auto push_children = [&](const std::optional<OpId>& parent) {
    auto it = children.find(parent);
    if (it == children.end()) return;
    for (auto rit = it->second.rbegin(); rit != it->second.rend(); ++rit) work.push_back(&*rit);
  };
  push_children(std::nullopt);
  while (!work.empty()) {
    const InsertOp* node = work.back();
    work.pop_back();
    if (!deleted.contains(node->id)) out.push_back(node->codepoint);
    push_children(node->id);
  }
  return out;
}

/// Dependencies an op needs before it can be integrated.
inline std::vector<OpId> dependencies(const Op& op) {
  std::vector<OpId> deps;
  const OpId& id = op_id(op);
  if (id.seq > 1) deps.push_back(OpId{id.replica, id.seq - 1});
  if (const auto* ins = std::get_if<InsertOp>(&op)) {
    if (!ins->origin.is_head()) deps.push_back(ins->origin.element());
  } else {
    deps.push_back(std::get<DeleteOp>(op).target);
  }
  return deps;
}

inline bool causally_valid(const std::vector<Op>& order) {
  std::set<OpId> seen;
  for (const Op& op : order) {
    for (const OpId& d : dependencies(op)) {
      if (!seen.contains(d)) return false;
    }
    seen.insert(op_id(op));
  }
  return true;
}

/// Random topological order of `ops`.
template <class Rng>
std::vector<Op> random_causal_order(const std::vector<Op>& ops, Rng& rng) {
  std::vector<Op> remaining = ops;
  std::vector<Op> out;
  std::set<OpId> seen;
  while (!remaining.empty()) {
    std::vector<std::size_t> ready;
    for (std::size_t i = 0; i < remaining.size(); ++i) {
      auto deps = dependencies(remaining[i]);
      if (std::all_of(deps.begin(), deps.end(), [&](const OpId& d) { return seen.contains(d); })) {
        ready.push_back(i);
      }
    }
    std::size_t pick = ready[std::uniform_int_distribution<std::size_t>(0, ready.size() - 1)(rng)];
    seen.insert(op_id(remaining[pick]));
    out.push_back(remaining[pick]);
    remaining.erase(remaining.begin() + static_cast<std::ptrdiff_t>(pick));
  }
  return out;
}

/// Produces a concurrent op history: replicas make random local edits and
/// occasionally pull everything another replica has. Returns every op made.
template <class Rng>
std::vector<Op> random_history(Rng& rng, std::size_t replicas, std::size_t op_count) {
  std::vector<TextDoc> docs;
  for (std::size_t r = 0; r < replicas; ++r) docs.emplace_back(r + 1);
  std::vector<Op> all;
  std::uniform_int_distribution<std::size_t> pick_replica(0, replicas - 1);
  std::uniform_int_distribution<int> percent(0, 99);
  std::uniform_int_distribution<int> letter(0, 25);
  while (all.size() < op_count) {
    TextDoc& doc = docs[pick_replica(rng)];
    int roll = percent(rng);
    if (roll < 20 && replicas > 1) {
      const TextDoc& from = docs[pick_replica(rng)];
      for (const Op& op : from.ops_since(doc.version())) doc.integrate(op);
    } else if (roll < 35 && doc.length() > 0) {
      std::uniform_int_distribution<std::size_t> idx(0, doc.length() - 1);
      all.emplace_back(doc.local_delete(idx(rng)));
    } else {
      std::uniform_int_distribution<std::size_t> idx(0, doc.length());
      all.emplace_back(doc.local_insert(idx(rng), static_cast<char32_t>(U'a' + letter(rng))));
    }
  }
  return all;
}

inline TextDoc replay(const std::vector<Op>& ops, ReplicaId replica = 99) {
  TextDoc doc(replica);
  for (const Op& op : ops) doc.integrate(op);
  return doc;
}

}  // namespace docsync::testing
