#pragma once

#include <cstddef>
#include <initializer_list>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace pmod::policy {

// A threshold gate or an attribute leaf. Leaves have threshold 1 and no
// children; gates satisfy 1 <= threshold <= children.size().
class PolicyNode {
 public:
  static PolicyNode leaf(std::string attribute);
  static PolicyNode gate(std::size_t threshold, std::vector<PolicyNode> children);
  static PolicyNode all_of(std::vector<PolicyNode> children);
  static PolicyNode any_of(std::vector<PolicyNode> children);

  bool is_leaf() const { return children_.empty(); }
  const std::string& attribute() const { return attribute_; }
  std::size_t threshold() const { return threshold_; }
  const std::vector<PolicyNode>& children() const { return children_; }
  // Preorder position in the owning AccessTree (root = 0).
  std::size_t id() const { return id_; }

  friend bool operator==(const PolicyNode& a, const PolicyNode& b);

 private:
  friend class AccessTree;
  PolicyNode() = default;

  std::string attribute_;
  std::size_t threshold_ = 1;
  std::vector<PolicyNode> children_;
  std::size_t id_ = 0;
};

// Immutable access tree. Copies share the node storage.
class AccessTree {
 public:
  // Validates the invariants and numbers nodes in preorder.
  explicit AccessTree(PolicyNode root, std::optional<std::size_t> level_hint = std::nullopt);

  const PolicyNode& root() const { return *root_; }
  const PolicyNode& node(std::size_t id) const { return *index_.at(id); }
  std::size_t node_count() const { return index_.size(); }
  // Leaves in preorder.
  const std::vector<const PolicyNode*>& leaves() const { return leaves_; }
  std::size_t leaf_count() const { return leaves_.size(); }
  std::optional<std::size_t> level_hint() const { return level_hint_; }
  // Parent id per node; the root maps to itself.
  std::size_t parent(std::size_t id) const { return parents_.at(id); }

  // Structural equality (thresholds, order, labels); ignores the level hint.
  friend bool operator==(const AccessTree& a, const AccessTree& b) { return a.root() == b.root(); }

 private:
  std::shared_ptr<const PolicyNode> root_;
  std::vector<const PolicyNode*> index_;
  std::vector<const PolicyNode*> leaves_;
  std::vector<std::size_t> parents_;
  std::optional<std::size_t> level_hint_;
};

// A user's attributes; sorted, no duplicates.
class AttributeSet {
 public:
  AttributeSet() = default;
  AttributeSet(std::initializer_list<std::string> attrs);
  explicit AttributeSet(std::vector<std::string> attrs);

  bool contains(std::string_view a) const { return attrs_.find(std::string(a)) != attrs_.end(); }
  void insert(std::string a);
  std::size_t size() const { return attrs_.size(); }
  bool empty() const { return attrs_.empty(); }
  auto begin() const { return attrs_.begin(); }
  auto end() const { return attrs_.end(); }

  friend bool operator==(const AttributeSet&, const AttributeSet&) = default;

 private:
  std::set<std::string> attrs_;
};

bool is_valid_attribute(std::string_view a);

// Minimal selection proving a tree satisfied.
struct SatisfyingSet {
  std::vector<std::size_t> leaves;    // node ids, ascending
  std::vector<std::size_t> interior;  // node ids of selected gates (the set S), ascending
  // Gate id -> 1-based indices of its selected children, ascending.
  std::map<std::size_t, std::vector<std::size_t>> selected_children;

  std::size_t leaf_count() const { return leaves.size(); }
  bool contains(std::size_t node_id) const;
};

// Absent iff attrs does not satisfy tree. When present, the selection has the
// fewest leaves; ties go to the leftmost children.
std::optional<SatisfyingSet> satisfies(const AccessTree& tree, const AttributeSet& attrs);

}  // namespace pmod::policy
