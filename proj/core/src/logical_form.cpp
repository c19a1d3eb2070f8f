#include "semboot/logical_form.hpp"

#include <algorithm>
#include <cctype>
#include <functional>
#include <map>
#include <unordered_map>

namespace semboot {

// ---------------------------------------------------------------------------
// Term

struct Term::Node {
  Kind kind;
  int index = 0;
  std::string tag;
  std::string symbol;
  std::string hint;
  std::optional<Term> first;   // function or lambda body
  std::optional<Term> second;  // argument
  int size = 0;
  int open_depth = 0;
  bool redex = false;
  std::string key;
};

Term Term::var(int index) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Var;
  n->index = index;
  n->size = 1;
  n->open_depth = index + 1;
  n->key = "#" + std::to_string(index);
  return Term(std::move(n));
}

Term Term::constant(std::string tag, std::string symbol) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Const;
  n->key = tag.empty() ? symbol : tag + "|" + symbol;
  n->tag = std::move(tag);
  n->symbol = std::move(symbol);
  n->size = 1;
  return Term(std::move(n));
}

Term Term::app(Term function, Term argument) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::App;
  n->size = function.size() + argument.size();
  n->open_depth = std::max(function.open_depth(), argument.open_depth());
  n->redex = function.is_lam() || function.has_beta_redex() || argument.has_beta_redex();
  n->key.reserve(function.key().size() + argument.key().size() + 3);
  n->key += '(';
  n->key += function.key();
  n->key += ' ';
  n->key += argument.key();
  n->key += ')';
  n->first = std::move(function);
  n->second = std::move(argument);
  return Term(std::move(n));
}

Term Term::lam(Term body, std::string hint) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Lam;
  n->size = body.size();
  n->open_depth = std::max(0, body.open_depth() - 1);
  n->redex = body.has_beta_redex();
  n->key = "\\." + body.key();
  n->hint = std::move(hint);
  n->first = std::move(body);
  return Term(std::move(n));
}

Term Term::apply(Term head, const std::vector<Term>& args) {
  for (const auto& a : args) head = app(std::move(head), a);
  return head;
}

Term::Kind Term::kind() const { return node_->kind; }
int Term::index() const { return node_->index; }
const std::string& Term::tag() const { return node_->tag; }
const std::string& Term::symbol() const { return node_->symbol; }
const Term& Term::function() const { return *node_->first; }
const Term& Term::argument() const { return *node_->second; }
const Term& Term::body() const { return *node_->first; }
const std::string& Term::hint() const { return node_->hint; }
int Term::size() const { return node_->size; }
int Term::open_depth() const { return node_->open_depth; }
bool Term::has_beta_redex() const { return node_->redex; }
const std::string& Term::key() const { return node_->key; }

bool Term::mentions_tag(std::string_view tag) const {
  switch (kind()) {
    case Kind::Var: return false;
    case Kind::Const: return node_->tag == tag;
    case Kind::App: return function().mentions_tag(tag) || argument().mentions_tag(tag);
    case Kind::Lam: return body().mentions_tag(tag);
  }
  return false;
}

// ---------------------------------------------------------------------------
// SemType

SemType SemType::e() { return SemType(); }

SemType SemType::t() {
  SemType s;
  s.kind_ = Kind::T;
  return s;
}

SemType SemType::fn(SemType argument, SemType result) {
  SemType s;
  s.kind_ = Kind::Fn;
  s.argument_ = std::make_shared<const SemType>(std::move(argument));
  s.result_ = std::make_shared<const SemType>(std::move(result));
  return s;
}

const SemType& SemType::argument() const {
  if (!argument_) throw std::logic_error("SemType::argument on atomic type");
  return *argument_;
}

const SemType& SemType::result() const {
  if (!result_) throw std::logic_error("SemType::result on atomic type");
  return *result_;
}

int SemType::arity() const { return is_fn() ? 1 + result_->arity() : 0; }

std::string SemType::str() const {
  switch (kind_) {
    case Kind::E: return "e";
    case Kind::T: return "t";
    case Kind::Fn: return "<" + argument_->str() + "," + result_->str() + ">";
  }
  return {};
}

bool SemType::operator==(const SemType& other) const {
  if (kind_ != other.kind_) return false;
  if (kind_ != Kind::Fn) return true;
  return *argument_ == *other.argument_ && *result_ == *other.result_;
}

namespace {

SemType parse_sem_type_at(std::string_view text, std::size_t& pos) {
  while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
  if (pos >= text.size()) throw std::invalid_argument("truncated semantic type");
  char c = text[pos];
  if (c == 'e') {
    ++pos;
    return SemType::e();
  }
  if (c == 't') {
    ++pos;
    return SemType::t();
  }
  if (c != '<') throw std::invalid_argument("bad semantic type: " + std::string(text));
  ++pos;
  SemType a = parse_sem_type_at(text, pos);
  while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
  if (pos >= text.size() || text[pos] != ',') throw std::invalid_argument("expected ',' in type");
  ++pos;
  SemType r = parse_sem_type_at(text, pos);
  while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
  if (pos >= text.size() || text[pos] != '>') throw std::invalid_argument("expected '>' in type");
  ++pos;
  return SemType::fn(std::move(a), std::move(r));
}

}  // namespace

SemType parse_sem_type(std::string_view text) {
  std::size_t pos = 0;
  SemType s = parse_sem_type_at(text, pos);
  while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
  if (pos != text.size()) throw std::invalid_argument("trailing text in type: " + std::string(text));
  return s;
}

// ---------------------------------------------------------------------------
// Tag tables

namespace {

struct TagInfo {
  std::vector<std::string> types;  // empty: not considered
  bool schematic = false;
  std::string marking;
};

const std::map<std::string, TagInfo, std::less<>>& tag_table() {
  static const std::map<std::string, TagInfo, std::less<>> table = {
      {"adj", {{"<<e,t>,<e,t>>"}, false, "adj"}},
      {"adv", {{}, false, "adv"}},
      {"adv:int", {{}, false, "adv"}},
      {"adv:tem", {{}, false, "adv"}},
      {"aux", {{}, false, "aux"}},
      {"conj", {{}, true, "connect"}},
      {"coord", {{}, true, "connect"}},
      {"cop", {{"<e,<e,t>>", "<e,t>"}, false, "cop"}},
      {"det", {{"<<e,t>,e>"}, false, "quant"}},
      {"det:art", {{"<<e,t>,e>"}, false, "quant"}},
      {"det:dem", {{"<<e,t>,e>"}, false, "quant"}},
      {"det:int", {{"<<e,t>,e>"}, false, "quant"}},
      {"det:num", {{"<<e,t>,e>"}, false, "quant"}},
      {"det:poss", {{"<<e,t>,e>"}, false, "quant"}},
      {"mod", {{"<t,t>", "<<<e,t>,<e,t>>,<e,t>>"}, false, "raise"}},
      {"mod:aux", {{"<<e,t>,e>"}, false, "quant"}},
      {"n", {{"<e,t>"}, false, "noun"}},
      {"n:pt", {{"<e,t>"}, false, "noun"}},
      {"n:gerund", {{"e"}, false, "entity"}},
      {"n:let", {{"e"}, false, "entity"}},
      {"n:prop", {{"e"}, false, "entity"}},
      {"neg", {{"<t,t>", "<<e,t>,<e,t>>", "<<e,<e,t>>,<e,<e,t>>>"}, false, "neg"}},
      {"prep", {{"<<e,t>,<e,t>>"}, false, "prep"}},
      {"pro:dem", {{"e"}, false, "entity"}},
      {"pro:det", {{"<<e,t>,e>"}, false, "quant"}},
      {"pro:indef", {{"e"}, false, "entity"}},
      {"pro:int", {{"e"}, false, "WH"}},
      {"pro:obj", {{"e"}, false, "entity"}},
      {"pro:per", {{"e"}, false, "entity"}},
      {"pro:poss", {{"<e,t>"}, false, "quant"}},
      {"pro:refl", {{"e"}, false, "entity"}},
      {"pro:sub", {{"e"}, false, "entity"}},
      {"qn", {{"<e,t>", "<<e,t>,e>"}, false, "quant"}},
      {"v", {{"<e,<e,t>>", "<e,t>", "<e,<e,<e,t>>>"}, false, "vconst"}},
      {"Q", {{"<t,t>"}, false, "Q"}},
  };
  return table;
}

struct TypedTag {
  std::vector<SemType> types;
};

const std::map<std::string, TypedTag, std::less<>>& typed_tags() {
  static const std::map<std::string, TypedTag, std::less<>> typed = [] {
    std::map<std::string, TypedTag, std::less<>> m;
    for (const auto& [tag, info] : tag_table()) {
      TypedTag tt;
      for (const auto& s : info.types) tt.types.push_back(parse_sem_type(s));
      m.emplace(tag, std::move(tt));
    }
    return m;
  }();
  return typed;
}

}  // namespace

bool is_known_tag(std::string_view tag) { return tag_table().count(tag) > 0; }

bool is_schematic_tag(std::string_view tag) {
  auto it = tag_table().find(tag);
  return it != tag_table().end() && it->second.schematic;
}

const std::vector<SemType>& tag_types(std::string_view tag) {
  auto it = typed_tags().find(tag);
  if (it == typed_tags().end()) throw UnknownTagError("unknown POS tag '" + std::string(tag) + "'");
  if (it->second.types.empty() && !is_schematic_tag(tag))
    throw UnknownTagError("POS tag '" + std::string(tag) + "' has no semantic type (not considered)");
  return it->second.types;
}

const std::string& shell_marking(std::string_view tag) {
  auto it = tag_table().find(tag);
  if (it == tag_table().end()) throw UnknownTagError("no shell marking for tag '" + std::string(tag) + "'");
  return it->second.marking;
}

// ---------------------------------------------------------------------------
// Parsing and rendering

namespace {

bool is_ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool is_ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }
bool is_word_char(char c) {
  return !std::isspace(static_cast<unsigned char>(c)) && c != '(' && c != ')';
}

class LfParser {
 public:
  explicit LfParser(std::string_view text) : text_(text) {}

  Term parse() {
    Term t = parse_term();
    skip_ws();
    if (pos_ != text_.size()) throw LfSyntaxError("unexpected trailing input", pos_);
    return t;
  }

 private:
  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  Term parse_term() {
    skip_ws();
    if (pos_ >= text_.size()) throw LfSyntaxError("unexpected end of input", pos_);
    char c = text_[pos_];
    if (c == ')') throw LfSyntaxError("unexpected ')'", pos_);
    if (c == '(') {
      std::size_t open = pos_;
      ++pos_;
      std::vector<Term> items;
      while (true) {
        skip_ws();
        if (pos_ >= text_.size()) throw LfSyntaxError("unclosed '('", open);
        if (text_[pos_] == ')') {
          ++pos_;
          break;
        }
        items.push_back(parse_term());
      }
      if (items.empty()) throw LfSyntaxError("empty application", open);
      Term head = items.front();
      return Term::apply(head, std::vector<Term>(items.begin() + 1, items.end()));
    }
    std::size_t start = pos_;
    if (text_.compare(pos_, 3, "lam") == 0 &&
        (pos_ + 3 >= text_.size() || std::isspace(static_cast<unsigned char>(text_[pos_ + 3])))) {
      pos_ += 3;
      skip_ws();
      if (pos_ >= text_.size() || !is_ident_start(text_[pos_]))
        throw LfSyntaxError("expected variable after 'lam'", pos_);
      std::size_t vstart = pos_;
      while (pos_ < text_.size() && is_ident_char(text_[pos_])) ++pos_;
      std::string name(text_.substr(vstart, pos_ - vstart));
      skip_ws();
      if (pos_ >= text_.size() || text_[pos_] != '.') throw LfSyntaxError("expected '.' after binder", pos_);
      ++pos_;
      binders_.push_back(name);
      Term body = parse_term();
      binders_.pop_back();
      return Term::lam(std::move(body), name);
    }
    while (pos_ < text_.size() && is_word_char(text_[pos_])) ++pos_;
    std::string word(text_.substr(start, pos_ - start));
    auto bar = word.find('|');
    if (bar != std::string::npos) {
      std::string tag = word.substr(0, bar);
      std::string symbol = word.substr(bar + 1);
      if (tag.empty() || symbol.empty()) throw LfSyntaxError("malformed constant '" + word + "'", start);
      if (!is_known_tag(tag)) throw UnknownTagError("unknown POS tag '" + tag + "' in constant '" + word + "'");
      return Term::constant(std::move(tag), std::move(symbol));
    }
    if (word.empty() || !is_ident_start(word[0]) ||
        !std::all_of(word.begin(), word.end(), is_ident_char))
      throw LfSyntaxError("bad token '" + word + "'", start);
    if (word == "lam") throw LfSyntaxError("'lam' used as a variable", start);
    for (std::size_t i = binders_.size(); i-- > 0;) {
      if (binders_[i] == word) return Term::var(static_cast<int>(binders_.size() - 1 - i));
    }
    throw UnboundVariableError("unbound variable '" + word + "'");
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  std::vector<std::string> binders_;
};

void render_into(const Term& t, int depth, std::string& out);

void render_arg(const Term& t, int depth, std::string& out) {
  if (t.is_lam()) {
    out += '(';
    render_into(t, depth, out);
    out += ')';
  } else {
    render_into(t, depth, out);
  }
}

void render_into(const Term& t, int depth, std::string& out) {
  switch (t.kind()) {
    case Term::Kind::Var: {
      int level = depth - 1 - t.index();
      if (level >= 0) {
        out += 'x';
        out += std::to_string(level);
      } else {
        out += "_free";
        out += std::to_string(-level - 1);
      }
      return;
    }
    case Term::Kind::Const:
      out += t.key();
      return;
    case Term::Kind::Lam:
      out += "lam x";
      out += std::to_string(depth);
      out += '.';
      render_into(t.body(), depth + 1, out);
      return;
    case Term::Kind::App: {
      std::vector<const Term*> args;
      const Term* head = &t;
      while (head->is_app()) {
        args.push_back(&head->argument());
        head = &head->function();
      }
      out += '(';
      render_arg(*head, depth, out);
      for (auto it = args.rbegin(); it != args.rend(); ++it) {
        out += ' ';
        render_arg(**it, depth, out);
      }
      out += ')';
      return;
    }
  }
}

}  // namespace

Term parse_lf(std::string_view text) { return beta_reduce(LfParser(text).parse()); }

std::string render_lf(const Term& t) {
  std::string out;
  render_into(t, 0, out);
  return out;
}

// ---------------------------------------------------------------------------
// Substitution and reduction

Term shift(const Term& t, int amount, int cutoff) {
  if (amount == 0 || t.open_depth() <= cutoff) return t;
  switch (t.kind()) {
    case Term::Kind::Var:
      return t.index() >= cutoff ? Term::var(t.index() + amount) : t;
    case Term::Kind::Const:
      return t;
    case Term::Kind::App:
      return Term::app(shift(t.function(), amount, cutoff), shift(t.argument(), amount, cutoff));
    case Term::Kind::Lam:
      return Term::lam(shift(t.body(), amount, cutoff + 1), t.hint());
  }
  return t;
}

Term substitute(const Term& t, int index, const Term& value) {
  if (t.open_depth() <= index) return t;
  switch (t.kind()) {
    case Term::Kind::Var:
      return t.index() == index ? value : t;
    case Term::Kind::Const:
      return t;
    case Term::Kind::App:
      return Term::app(substitute(t.function(), index, value), substitute(t.argument(), index, value));
    case Term::Kind::Lam:
      return Term::lam(substitute(t.body(), index + 1, shift(value, 1)), t.hint());
  }
  return t;
}

namespace {

constexpr int kMaxReductionSteps = 100000;

Term reduce(const Term& t, int& budget) {
  if (!t.has_beta_redex()) return t;
  if (--budget < 0) throw std::runtime_error("beta reduction exceeded step budget (malformed term?)");
  switch (t.kind()) {
    case Term::Kind::Var:
    case Term::Kind::Const:
      return t;
    case Term::Kind::Lam:
      return Term::lam(reduce(t.body(), budget), t.hint());
    case Term::Kind::App: {
      Term f = reduce(t.function(), budget);
      if (f.is_lam()) {
        Term contracted = shift(substitute(f.body(), 0, shift(t.argument(), 1)), -1);
        return reduce(contracted, budget);
      }
      return Term::app(std::move(f), reduce(t.argument(), budget));
    }
  }
  return t;
}

}  // namespace

Term beta_reduce(const Term& t) {
  int budget = kMaxReductionSteps;
  return reduce(t, budget);
}

namespace {

bool occurs_free(const Term& t, int index) {
  if (t.open_depth() <= index) return false;
  switch (t.kind()) {
    case Term::Kind::Var: return t.index() == index;
    case Term::Kind::Const: return false;
    case Term::Kind::App: return occurs_free(t.function(), index) || occurs_free(t.argument(), index);
    case Term::Kind::Lam: return occurs_free(t.body(), index + 1);
  }
  return false;
}

}  // namespace

Term eta_reduce(const Term& t) {
  switch (t.kind()) {
    case Term::Kind::Var:
    case Term::Kind::Const: return t;
    case Term::Kind::App: {
      Term f = eta_reduce(t.function());
      Term a = eta_reduce(t.argument());
      if (f == t.function() && a == t.argument()) return t;
      return Term::app(std::move(f), std::move(a));
    }
    case Term::Kind::Lam: {
      Term body = eta_reduce(t.body());
      if (body.is_app() && body.argument().is_var() && body.argument().index() == 0 &&
          !occurs_free(body.function(), 0)) {
        return shift(body.function(), -1);
      }
      if (body == t.body()) return t;
      return Term::lam(std::move(body), t.hint());
    }
  }
  return t;
}

Term normalize_lf(const Term& t) { return eta_reduce(beta_reduce(t)); }

Term eta_expand(const Term& t, const SemType& ty) {
  if (!ty.is_fn()) return t;
  if (t.is_lam()) return Term::lam(eta_expand(t.body(), ty.result()), t.hint());
  return Term::lam(eta_expand(Term::app(shift(t, 1), Term::var(0)), ty.result()));
}

bool alpha_equal(const Term& a, const Term& b) { return a.key() == b.key(); }

bool lf_equivalent(const Term& a, const Term& b) {
  return alpha_equal(a, b) || alpha_equal(normalize_lf(a), normalize_lf(b));
}

int lambda_depth(const Term& t) {
  int d = 0;
  const Term* cur = &t;
  while (cur->is_lam()) {
    ++d;
    cur = &cur->body();
  }
  return d;
}

// ---------------------------------------------------------------------------
// Type inference: unification over type variables with backtracking across
// the candidate types of polymorphic tags.

namespace {

struct Ty;
using TyP = std::shared_ptr<const Ty>;
struct Ty {
  enum K : std::uint8_t { E, T, Fn, Var } k;
  int var = -1;
  TyP a, r;
};

const TyP& ty_e() {
  static const TyP p = std::make_shared<const Ty>(Ty{Ty::E, -1, nullptr, nullptr});
  return p;
}
const TyP& ty_t() {
  static const TyP p = std::make_shared<const Ty>(Ty{Ty::T, -1, nullptr, nullptr});
  return p;
}
TyP ty_fn(TyP a, TyP r) { return std::make_shared<const Ty>(Ty{Ty::Fn, -1, std::move(a), std::move(r)}); }
TyP ty_var(int v) { return std::make_shared<const Ty>(Ty{Ty::Var, v, nullptr, nullptr}); }

TyP from_sem(const SemType& s) {
  switch (s.kind()) {
    case SemType::Kind::E: return ty_e();
    case SemType::Kind::T: return ty_t();
    case SemType::Kind::Fn: return ty_fn(from_sem(s.argument()), from_sem(s.result()));
  }
  return ty_e();
}

using Subst = std::vector<TyP>;

TyP walk(TyP t, const Subst& s) {
  while (t->k == Ty::Var && t->var < static_cast<int>(s.size()) && s[t->var]) t = s[t->var];
  return t;
}

bool occurs(int v, const TyP& t, const Subst& s) {
  TyP w = walk(t, s);
  if (w->k == Ty::Var) return w->var == v;
  if (w->k == Ty::Fn) return occurs(v, w->a, s) || occurs(v, w->r, s);
  return false;
}

bool unify(const TyP& x, const TyP& y, Subst& s) {
  TyP a = walk(x, s);
  TyP b = walk(y, s);
  if (a == b) return true;
  if (a->k == Ty::Var) {
    if (b->k == Ty::Var && b->var == a->var) return true;
    if (occurs(a->var, b, s)) return false;
    if (a->var >= static_cast<int>(s.size())) s.resize(a->var + 1);
    s[a->var] = b;
    return true;
  }
  if (b->k == Ty::Var) return unify(b, a, s);
  if (a->k != b->k) return false;
  if (a->k == Ty::Fn) return unify(a->a, b->a, s) && unify(a->r, b->r, s);
  return true;
}

SemType resolve(const TyP& t, const Subst& s) {
  TyP w = walk(t, s);
  switch (w->k) {
    case Ty::E: return SemType::e();
    case Ty::T: return SemType::t();
    case Ty::Var: return SemType::t();
    case Ty::Fn: return SemType::fn(resolve(w->a, s), resolve(w->r, s));
  }
  return SemType::t();
}

struct Solution {
  Subst subst;
  TyP type;
  std::vector<TyP> nodes;  // pre-order
};

constexpr std::size_t kMaxSolutions = 64;

class Inferencer {
 public:
  std::vector<Solution> infer(const Term& t, std::vector<TyP>& env, const Subst& subst) {
    switch (t.kind()) {
      case Term::Kind::Var: {
        int idx = static_cast<int>(env.size()) - 1 - t.index();
        if (idx < 0) throw TypeError("free variable in term being typed");
        return {Solution{subst, env[idx], {env[idx]}}};
      }
      case Term::Kind::Const: {
        std::vector<Solution> out;
        if (is_schematic_tag(t.tag())) {
          TyP x = fresh();
          TyP ty = ty_fn(x, ty_fn(x, x));
          out.push_back(Solution{subst, ty, {ty}});
          return out;
        }
        for (const auto& cand : tag_types(t.tag())) {
          TyP ty = from_sem(cand);
          out.push_back(Solution{subst, ty, {ty}});
        }
        return out;
      }
      case Term::Kind::Lam: {
        TyP a = fresh();
        env.push_back(a);
        auto body = infer(t.body(), env, subst);
        env.pop_back();
        std::vector<Solution> out;
        for (auto& b : body) {
          TyP ty = ty_fn(a, b.type);
          std::vector<TyP> nodes;
          nodes.reserve(b.nodes.size() + 1);
          nodes.push_back(ty);
          nodes.insert(nodes.end(), b.nodes.begin(), b.nodes.end());
          out.push_back(Solution{std::move(b.subst), ty, std::move(nodes)});
        }
        return out;
      }
      case Term::Kind::App: {
        std::vector<Solution> out;
        auto fs = infer(t.function(), env, subst);
        for (auto& f : fs) {
          auto as = infer(t.argument(), env, f.subst);
          for (auto& a : as) {
            TyP result = fresh();
            Subst s = a.subst;
            if (!unify(f.type, ty_fn(a.type, result), s)) continue;
            std::vector<TyP> nodes;
            nodes.reserve(1 + f.nodes.size() + a.nodes.size());
            nodes.push_back(result);
            nodes.insert(nodes.end(), f.nodes.begin(), f.nodes.end());
            nodes.insert(nodes.end(), a.nodes.begin(), a.nodes.end());
            out.push_back(Solution{std::move(s), result, std::move(nodes)});
            if (out.size() >= kMaxSolutions) return out;
          }
        }
        return out;
      }
    }
    return {};
  }

 private:
  TyP fresh() { return ty_var(next_++); }
  int next_ = 0;
};

std::vector<Solution> solve(const Term& t) {
  if (!t.closed()) throw TypeError("cannot type an open term");
  Inferencer inf;
  std::vector<TyP> env;
  return inf.infer(t, env, Subst{});
}

}  // namespace

SemType sem_type_of(const Term& t) {
  auto sols = solve(t);
  if (sols.empty()) throw TypeError("type clash in " + render_lf(t));
  // Tags with several types admit partial applications, e.g. a transitive
  // reading of (v|fall x) typed <e,t>. The smallest type is the saturated one.
  std::optional<SemType> best;
  std::size_t best_len = 0;
  for (const auto& sol : sols) {
    SemType ty = resolve(sol.type, sol.subst);
    std::size_t len = ty.str().size();
    if (!best || len < best_len) {
      best = ty;
      best_len = len;
    }
  }
  return *best;
}

bool has_type(const Term& t, const SemType& target) {
  if (!t.closed()) return false;
  std::vector<Solution> sols;
  try {
    sols = solve(t);
  } catch (const UnknownTagError&) {
    return false;
  }
  TyP want = from_sem(target);
  for (auto& s : sols) {
    Subst sub = s.subst;
    if (unify(s.type, want, sub)) return true;
  }
  return false;
}

std::optional<std::vector<SemType>> node_types(const Term& t, const SemType& target) {
  if (!t.closed()) return std::nullopt;
  std::vector<Solution> sols;
  try {
    sols = solve(t);
  } catch (const UnknownTagError&) {
    return std::nullopt;
  }
  TyP want = from_sem(target);
  for (auto& s : sols) {
    Subst sub = s.subst;
    if (!unify(s.type, want, sub)) continue;
    std::vector<SemType> out;
    out.reserve(s.nodes.size());
    for (const auto& n : s.nodes) out.push_back(resolve(n, sub));
    return out;
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Shells

namespace {

Term shellify_term(const Term& t) {
  switch (t.kind()) {
    case Term::Kind::Var: return t;
    case Term::Kind::Const: return Term::constant("", shell_marking(t.tag()));
    case Term::Kind::App: return Term::app(shellify_term(t.function()), shellify_term(t.argument()));
    case Term::Kind::Lam: return Term::lam(shellify_term(t.body()), t.hint());
  }
  return t;
}

}  // namespace

ShellTerm shellify(const Term& t) { return ShellTerm{shellify_term(t)}; }

// ---------------------------------------------------------------------------
// Subterms and paths

namespace {

void collect_subterms(const Term& t, TermPath& path, std::size_t& preorder,
                      std::vector<SubtermGroup>& groups, std::unordered_map<std::string, std::size_t>& index) {
  std::size_t here = preorder++;
  if (t.closed()) {
    auto [it, inserted] = index.emplace(t.key(), groups.size());
    if (inserted) groups.push_back(SubtermGroup{t, {}, here});
    groups[it->second].occurrences.push_back(path);
  }
  switch (t.kind()) {
    case Term::Kind::Var:
    case Term::Kind::Const:
      return;
    case Term::Kind::App:
      path.push_back(0);
      collect_subterms(t.function(), path, preorder, groups, index);
      path.back() = 1;
      collect_subterms(t.argument(), path, preorder, groups, index);
      path.pop_back();
      return;
    case Term::Kind::Lam:
      path.push_back(2);
      collect_subterms(t.body(), path, preorder, groups, index);
      path.pop_back();
      return;
  }
}

}  // namespace

std::vector<SubtermGroup> enumerate_subterms(const Term& t) {
  std::vector<SubtermGroup> groups;
  std::unordered_map<std::string, std::size_t> index;
  TermPath path;
  std::size_t preorder = 0;
  collect_subterms(t, path, preorder, groups, index);
  return groups;
}

const Term& subterm_at(const Term& t, const TermPath& path) {
  const Term* cur = &t;
  for (auto step : path) {
    switch (step) {
      case 0: cur = &cur->function(); break;
      case 1: cur = &cur->argument(); break;
      default: cur = &cur->body(); break;
    }
  }
  return *cur;
}

int binder_depth(const Term& t, const TermPath& path) {
  (void)t;
  return static_cast<int>(std::count(path.begin(), path.end(), std::uint8_t{2}));
}

namespace {

std::size_t node_count(const Term& x) {
  switch (x.kind()) {
    case Term::Kind::Var:
    case Term::Kind::Const: return 1;
    case Term::Kind::App: return 1 + node_count(x.function()) + node_count(x.argument());
    case Term::Kind::Lam: return 1 + node_count(x.body());
  }
  return 1;
}

}  // namespace

std::size_t preorder_index(const Term& t, const TermPath& path) {
  std::size_t idx = 0;
  const Term* cur = &t;
  for (auto step : path) {
    ++idx;
    if (step == 1) {
      idx += node_count(cur->function());
      cur = &cur->argument();
    } else if (step == 0) {
      cur = &cur->function();
    } else {
      cur = &cur->body();
    }
  }
  return idx;
}

}  // namespace semboot
