#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace semboot {

// Lambda-calculus logical forms. Variables are stored as de Bruijn indices, so
// alpha-equivalent terms are structurally identical and share one canonical
// rendering (binders named x0, x1, ... by nesting depth).

class LfSyntaxError : public std::runtime_error {
 public:
  LfSyntaxError(const std::string& what, std::size_t position)
      : std::runtime_error(what + " at position " + std::to_string(position)), position_(position) {}
  std::size_t position() const { return position_; }

 private:
  std::size_t position_;
};

class UnboundVariableError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class UnknownTagError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class TypeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class Term {
 public:
  enum class Kind : std::uint8_t { Var, Const, App, Lam };

  static Term var(int index);
  static Term constant(std::string tag, std::string symbol);
  static Term app(Term function, Term argument);
  static Term lam(Term body, std::string hint = {});
  // Curried application of `head` to each element of `args` in order.
  static Term apply(Term head, const std::vector<Term>& args);

  Kind kind() const;
  bool is_var() const { return kind() == Kind::Var; }
  bool is_const() const { return kind() == Kind::Const; }
  bool is_app() const { return kind() == Kind::App; }
  bool is_lam() const { return kind() == Kind::Lam; }

  int index() const;
  const std::string& tag() const;
  const std::string& symbol() const;
  const Term& function() const;
  const Term& argument() const;
  const Term& body() const;
  const std::string& hint() const;

  // Number of variable occurrences plus constants.
  int size() const;
  // Number of enclosing binders a term needs to be closed; 0 means closed.
  int open_depth() const;
  bool closed() const { return open_depth() == 0; }
  // True when a constant with this tag occurs anywhere.
  bool mentions_tag(std::string_view tag) const;
  bool has_beta_redex() const;

  // Canonical text, stable under alpha renaming; used as the hashing key.
  const std::string& key() const;

  bool operator==(const Term& other) const { return key() == other.key(); }
  bool operator!=(const Term& other) const { return !(*this == other); }

 private:
  struct Node;
  explicit Term(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  std::shared_ptr<const Node> node_;
};

// Shell logical form: every constant replaced by its functional marking.
struct ShellTerm {
  Term term;
  const std::string& key() const { return term.key(); }
  bool operator==(const ShellTerm& other) const { return term == other.term; }
};

class SemType {
 public:
  enum class Kind : std::uint8_t { E, T, Fn };

  static SemType e();
  static SemType t();
  static SemType fn(SemType argument, SemType result);

  Kind kind() const { return kind_; }
  bool is_fn() const { return kind_ == Kind::Fn; }
  const SemType& argument() const;
  const SemType& result() const;
  int arity() const;

  std::string str() const;
  bool operator==(const SemType& other) const;
  bool operator!=(const SemType& other) const { return !(*this == other); }
  bool operator<(const SemType& other) const { return str() < other.str(); }

 private:
  Kind kind_ = Kind::E;
  std::shared_ptr<const SemType> argument_;
  std::shared_ptr<const SemType> result_;
};

// Parses "<a,<b,c>>", "e", "t".
SemType parse_sem_type(std::string_view text);

// --- part-of-speech tables -------------------------------------------------

bool is_known_tag(std::string_view tag);
// Semantic-type candidates for a tag. Schematic entries use the placeholder
// marker returned by is_schematic_tag(). Throws UnknownTagError for tags whose
// type row is "not considered" or missing.
bool is_schematic_tag(std::string_view tag);
const std::vector<SemType>& tag_types(std::string_view tag);
// Shell marking for a tag (vconst, entity, quant, ...). Throws UnknownTagError.
const std::string& shell_marking(std::string_view tag);

inline constexpr std::string_view kWhTag = "pro:int";
inline constexpr std::string_view kQuestionTag = "Q";

// --- operations ------------------------------------------------------------

// Parses LF text, rejecting unbound variables and unknown tags. The result is
// beta-normal.
Term parse_lf(std::string_view text);
std::string render_lf(const Term& t);

Term beta_reduce(const Term& t);
// Removes every eta redex (lam x.M x with x not free in M). Keeps beta-normal
// input beta-normal.
Term eta_reduce(const Term& t);
// Beta-eta normal form; the canonical shape for derived and compared LFs.
Term normalize_lf(const Term& t);
bool alpha_equal(const Term& a, const Term& b);
// Adds outer lambdas until `t` has as many leading binders as `ty` has
// arguments. Inner subterms are left as they are.
Term eta_expand(const Term& t, const SemType& ty);
// Equality up to alpha, beta and eta.
bool lf_equivalent(const Term& a, const Term& b);

// Smallest type over all typings (ambiguous tags can also type partial
// applications); unresolved type variables default to t.
SemType sem_type_of(const Term& t);
// True iff some typing of the closed term `t` has type `target`.
bool has_type(const Term& t, const SemType& target);
// Types of every node in pre-order, under the first typing compatible with
// `target`; std::nullopt when none exists.
std::optional<std::vector<SemType>> node_types(const Term& t, const SemType& target);

ShellTerm shellify(const Term& t);

// Path into a term: 0 = function, 1 = argument, 2 = lambda body.
using TermPath = std::vector<std::uint8_t>;

struct SubtermGroup {
  Term subterm;
  std::vector<TermPath> occurrences;
  // Pre-order index of the first occurrence (for looking up node types).
  std::size_t first_preorder = 0;
};

// Closed proper-or-whole subterms grouped by alpha-equivalence, in pre-order
// of first occurrence. Subterms mentioning externally bound variables are
// excluded. Bound variables and the term itself are included only when closed.
std::vector<SubtermGroup> enumerate_subterms(const Term& t);

const Term& subterm_at(const Term& t, const TermPath& path);
// Number of lambdas crossed along `path`.
int binder_depth(const Term& t, const TermPath& path);
// Pre-order index of the node at `path`.
std::size_t preorder_index(const Term& t, const TermPath& path);

// Shifts free variables with index >= cutoff by `amount`.
Term shift(const Term& t, int amount, int cutoff = 0);
// Substitutes `value` for variable `index` (value lives outside the binders).
Term substitute(const Term& t, int index, const Term& value);

// Number of leading lambdas.
int lambda_depth(const Term& t);

}  // namespace semboot
