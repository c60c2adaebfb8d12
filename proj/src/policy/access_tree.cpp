#include "pmod/policy/access_tree.hpp"

#include <algorithm>
#include <functional>

#include "pmod/common/error.hpp"

namespace pmod::policy {

PolicyNode PolicyNode::leaf(std::string attribute) {
  if (!is_valid_attribute(attribute))
    throw InvalidArgument("invalid attribute label '" + attribute + "'");
  PolicyNode n;
  n.attribute_ = std::move(attribute);
  return n;
}

PolicyNode PolicyNode::gate(std::size_t threshold, std::vector<PolicyNode> children) {
  if (children.empty()) throw InvalidArgument("gate has no children");
  if (threshold < 1 || threshold > children.size())
    throw InvalidArgument("threshold " + std::to_string(threshold) + " out of range for " +
                          std::to_string(children.size()) + " children");
  PolicyNode n;
  n.threshold_ = threshold;
  n.children_ = std::move(children);
  return n;
}

PolicyNode PolicyNode::all_of(std::vector<PolicyNode> children) {
  const auto n = children.size();
  return gate(n, std::move(children));
}

PolicyNode PolicyNode::any_of(std::vector<PolicyNode> children) {
  return gate(1, std::move(children));
}

bool operator==(const PolicyNode& a, const PolicyNode& b) {
  return a.attribute_ == b.attribute_ && a.threshold_ == b.threshold_ && a.children_ == b.children_;
}

AccessTree::AccessTree(PolicyNode root, std::optional<std::size_t> level_hint)
    : level_hint_(level_hint) {
  std::size_t next = 0;
  std::function<void(PolicyNode&)> number = [&](PolicyNode& n) {
    n.id_ = next++;
    if (n.is_leaf() && !is_valid_attribute(n.attribute_))
      throw InvalidArgument("leaf without a valid attribute label");
    for (auto& c : n.children_) number(c);
  };
  number(root);
  root_ = std::make_shared<const PolicyNode>(std::move(root));

  index_.resize(next);
  parents_.resize(next);
  std::function<void(const PolicyNode&, std::size_t)> walk = [&](const PolicyNode& n,
                                                                  std::size_t parent) {
    index_[n.id()] = &n;
    parents_[n.id()] = parent;
    if (n.is_leaf()) leaves_.push_back(&n);
    for (const auto& c : n.children()) walk(c, n.id());
  };
  walk(*root_, 0);
}

AttributeSet::AttributeSet(std::initializer_list<std::string> attrs) {
  for (const auto& a : attrs) insert(a);
}

AttributeSet::AttributeSet(std::vector<std::string> attrs) {
  for (auto& a : attrs) insert(std::move(a));
}

void AttributeSet::insert(std::string a) {
  if (!is_valid_attribute(a)) throw InvalidArgument("invalid attribute label '" + a + "'");
  attrs_.insert(std::move(a));
}

bool is_valid_attribute(std::string_view a) {
  if (a.empty()) return false;
  return std::all_of(a.begin(), a.end(), [](char c) {
    return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') ||
           c == '_' || c == ':' || c == '-';
  });
}

bool SatisfyingSet::contains(std::size_t node_id) const {
  return std::binary_search(leaves.begin(), leaves.end(), node_id) ||
         std::binary_search(interior.begin(), interior.end(), node_id);
}

namespace {

struct Solver {
  const AccessTree& tree;
  const AttributeSet& attrs;
  std::vector<std::optional<std::size_t>> cost;
  // Per gate: child positions (0-based) in selection order.
  std::vector<std::vector<std::size_t>> picks;

  std::optional<std::size_t> solve(const PolicyNode& n) {
    std::optional<std::size_t> result;
    if (n.is_leaf()) {
      if (attrs.contains(n.attribute())) result = 1;
    } else {
      std::vector<std::pair<std::size_t, std::size_t>> ok;  // (cost, position)
      for (std::size_t i = 0; i < n.children().size(); ++i)
        if (auto c = solve(n.children()[i])) ok.emplace_back(*c, i);
      if (ok.size() >= n.threshold()) {
        std::stable_sort(ok.begin(), ok.end(),
                         [](const auto& a, const auto& b) { return a.first < b.first; });
        std::size_t total = 0;
        auto& chosen = picks[n.id()];
        for (std::size_t i = 0; i < n.threshold(); ++i) {
          total += ok[i].first;
          chosen.push_back(ok[i].second);
        }
        std::sort(chosen.begin(), chosen.end());
        result = total;
      }
    }
    cost[n.id()] = result;
    return result;
  }

  void collect(const PolicyNode& n, SatisfyingSet& out) const {
    if (n.is_leaf()) {
      out.leaves.push_back(n.id());
      return;
    }
    out.interior.push_back(n.id());
    auto& indices = out.selected_children[n.id()];
    for (auto pos : picks[n.id()]) {
      indices.push_back(pos + 1);
      collect(n.children()[pos], out);
    }
  }
};

}  // namespace

std::optional<SatisfyingSet> satisfies(const AccessTree& tree, const AttributeSet& attrs) {
  Solver s{tree, attrs, std::vector<std::optional<std::size_t>>(tree.node_count()),
           std::vector<std::vector<std::size_t>>(tree.node_count())};
  if (!s.solve(tree.root())) return std::nullopt;
  SatisfyingSet out;
  s.collect(tree.root(), out);
  std::sort(out.leaves.begin(), out.leaves.end());
  std::sort(out.interior.begin(), out.interior.end());
  return out;
}

}  // namespace pmod::policy
