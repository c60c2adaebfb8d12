#pragma once

#include <string>
#include <string_view>

#include <nlohmann/json_fwd.hpp>

#include "pmod/policy/access_tree.hpp"

namespace pmod::policy {

// Grammar:
//   expr    := and_expr ("OR" and_expr)*
//   and_expr:= primary ("AND" primary)*
//   primary := attr | "(" expr ")" | "T" "(" k ";" expr ("," expr)* ")"
//   attr    := [A-Za-z0-9_:-]+
// AND binds tighter than OR; a chain of the same operator becomes one n-ary
// gate. Keywords are case-insensitive. Throws ParseError with a byte offset.
AccessTree parse_policy(std::string_view text);

// Prints a policy that parses back to a structurally identical tree.
std::string to_policy_string(const AccessTree& tree);

// Canonical JSON form:
//   {"kind":"leaf","attribute":"A"}
//   {"kind":"gate","threshold":k,"children":[...]}
nlohmann::json to_json(const AccessTree& tree);
AccessTree tree_from_json(const nlohmann::json& j);
std::string to_canonical_json(const AccessTree& tree);

}  // namespace pmod::policy
