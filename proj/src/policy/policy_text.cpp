#include "pmod/policy/policy_text.hpp"

#include <cctype>

#include <nlohmann/json.hpp>

#include "pmod/common/error.hpp"

namespace pmod::policy {
namespace {

enum class Tok { attr, kw_and, kw_or, lparen, rparen, semicolon, comma, end };

struct Token {
  Tok kind;
  std::string text;
  std::size_t pos;
};

bool attr_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == ':' || c == '-';
}

std::string upper(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return s;
}

std::vector<Token> tokenize(std::string_view text) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < text.size()) {
    char c = text[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    switch (c) {
      case '(': out.push_back({Tok::lparen, "(", i++}); continue;
      case ')': out.push_back({Tok::rparen, ")", i++}); continue;
      case ';': out.push_back({Tok::semicolon, ";", i++}); continue;
      case ',': out.push_back({Tok::comma, ",", i++}); continue;
      default: break;
    }
    if (!attr_char(c)) throw ParseError(i, std::string("unexpected character '") + c + "'");
    std::size_t start = i;
    while (i < text.size() && attr_char(text[i])) ++i;
    std::string word(text.substr(start, i - start));
    const std::string kw = upper(word);
    if (kw == "AND")
      out.push_back({Tok::kw_and, word, start});
    else if (kw == "OR")
      out.push_back({Tok::kw_or, word, start});
    else
      out.push_back({Tok::attr, word, start});
  }
  out.push_back({Tok::end, "", text.size()});
  return out;
}

class Parser {
 public:
  explicit Parser(std::vector<Token> toks) : toks_(std::move(toks)) {}

  PolicyNode parse() {
    auto n = expr();
    if (peek().kind != Tok::end) throw ParseError(peek().pos, "unexpected '" + peek().text + "'");
    return n;
  }

 private:
  const Token& peek() const { return toks_[pos_]; }
  const Token& take() { return toks_[pos_++]; }
  void expect(Tok kind, const char* what) {
    if (peek().kind != kind) throw ParseError(peek().pos, std::string("expected ") + what);
    ++pos_;
  }

  PolicyNode expr() {
    std::vector<PolicyNode> terms;
    terms.push_back(and_expr());
    while (peek().kind == Tok::kw_or) {
      take();
      terms.push_back(and_expr());
    }
    if (terms.size() == 1) return std::move(terms.front());
    return PolicyNode::any_of(std::move(terms));
  }

  PolicyNode and_expr() {
    std::vector<PolicyNode> terms;
    terms.push_back(primary());
    while (peek().kind == Tok::kw_and) {
      take();
      terms.push_back(primary());
    }
    if (terms.size() == 1) return std::move(terms.front());
    return PolicyNode::all_of(std::move(terms));
  }

  PolicyNode primary() {
    const Token& t = peek();
    if (t.kind == Tok::lparen) {
      take();
      auto n = expr();
      expect(Tok::rparen, "')'");
      return n;
    }
    if (t.kind != Tok::attr) throw ParseError(t.pos, "expected an attribute, '(' or T(k; ...)");
    if (t.text == "T" && toks_[pos_ + 1].kind == Tok::lparen) return threshold_gate();
    return PolicyNode::leaf(take().text);
  }

  PolicyNode threshold_gate() {
    const std::size_t start = take().pos;
    expect(Tok::lparen, "'('");
    const Token& k_tok = peek();
    if (k_tok.kind != Tok::attr || k_tok.text.empty() ||
        k_tok.text.find_first_not_of("0123456789") != std::string::npos)
      throw ParseError(k_tok.pos, "expected a threshold number");
    if (k_tok.text.size() > 9) throw ParseError(k_tok.pos, "threshold too large");
    const std::size_t k = std::stoul(take().text);
    expect(Tok::semicolon, "';'");
    std::vector<PolicyNode> children;
    if (peek().kind == Tok::rparen) throw ParseError(peek().pos, "empty child list");
    children.push_back(expr());
    while (peek().kind == Tok::comma) {
      take();
      children.push_back(expr());
    }
    expect(Tok::rparen, "')'");
    if (k < 1 || k > children.size())
      throw ParseError(start, "threshold " + std::to_string(k) + " out of range for " +
                                  std::to_string(children.size()) + " children");
    return PolicyNode::gate(k, std::move(children));
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
};

void print(const PolicyNode& n, bool nested, std::string& out) {
  if (n.is_leaf()) {
    out += n.attribute();
    return;
  }
  const auto arity = n.children().size();
  const char* op = nullptr;
  if (arity >= 2 && n.threshold() == arity) op = " AND ";
  if (arity >= 2 && n.threshold() == 1) op = " OR ";
  if (op == nullptr) {
    out += "T(" + std::to_string(n.threshold()) + "; ";
    for (std::size_t i = 0; i < arity; ++i) {
      if (i) out += ", ";
      print(n.children()[i], false, out);
    }
    out += ")";
    return;
  }
  if (nested) out += "(";
  for (std::size_t i = 0; i < arity; ++i) {
    if (i) out += op;
    print(n.children()[i], true, out);
  }
  if (nested) out += ")";
}

nlohmann::json node_json(const PolicyNode& n) {
  if (n.is_leaf()) return {{"kind", "leaf"}, {"attribute", n.attribute()}};
  auto children = nlohmann::json::array();
  for (const auto& c : n.children()) children.push_back(node_json(c));
  return {{"kind", "gate"}, {"threshold", n.threshold()}, {"children", std::move(children)}};
}

PolicyNode node_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("kind")) throw FormatError("policy node is not an object");
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "leaf") return PolicyNode::leaf(j.at("attribute").get<std::string>());
  if (kind != "gate") throw FormatError("unknown policy node kind '" + kind + "'");
  std::vector<PolicyNode> children;
  for (const auto& c : j.at("children")) children.push_back(node_from_json(c));
  return PolicyNode::gate(j.at("threshold").get<std::size_t>(), std::move(children));
}

}  // namespace

AccessTree parse_policy(std::string_view text) {
  Parser p(tokenize(text));
  return AccessTree(p.parse());
}

std::string to_policy_string(const AccessTree& tree) {
  std::string out;
  print(tree.root(), false, out);
  return out;
}

nlohmann::json to_json(const AccessTree& tree) { return node_json(tree.root()); }

AccessTree tree_from_json(const nlohmann::json& j) {
  try {
    return AccessTree(node_from_json(j));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("bad policy JSON: ") + e.what());
  } catch (const InvalidArgument& e) {
    throw FormatError(std::string("bad policy JSON: ") + e.what());
  }
}

std::string to_canonical_json(const AccessTree& tree) { return to_json(tree).dump(); }

}  // namespace pmod::policy
