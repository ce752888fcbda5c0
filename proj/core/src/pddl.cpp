#include "nstamp/pddl.hpp"

#include <algorithm>
#include <cstdint>
#include <deque>
#include <map>
#include <unordered_map>
#include <utility>

namespace nstamp::pddl {

namespace {

std::string position_message(std::size_t line, std::size_t column,
                             const std::string& what) {
  return "line " + std::to_string(line) + ", col " + std::to_string(column) +
         ": " + what;
}

}  // namespace

SyntaxError::SyntaxError(std::size_t line_, std::size_t column_,
                         const std::string& what)
    : std::runtime_error(position_message(line_, column_, what)),
      line(line_),
      column(column_) {}

bool is_valid_proposition_name(std::string_view name) {
  if (name.empty()) return false;
  if (name.front() < 'a' || name.front() > 'z') return false;
  for (char c : name) {
    bool ok = (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_';
    if (!ok) return false;
  }
  return true;
}

Proposition::Proposition(std::string n) : name(std::move(n)) {
  if (!is_valid_proposition_name(name)) {
    throw std::invalid_argument("invalid proposition name: '" + name + "'");
  }
}

GroundState::GroundState(std::initializer_list<std::string> names) {
  for (const auto& n : names) props_.insert(Proposition(n));
}

GroundState GroundState::with(const Proposition& p) const {
  auto props = props_;
  props.insert(p);
  return GroundState(std::move(props));
}

GroundState GroundState::without(const Proposition& p) const {
  auto props = props_;
  props.erase(p);
  return GroundState(std::move(props));
}

const ActionSchema* Domain::find_action(std::string_view action_name) const {
  for (const auto& a : actions) {
    if (a.name == action_name) return &a;
  }
  return nullptr;
}

// ---------------------------------------------------------------------------
// Parsing

namespace {

struct Token {
  enum class Kind { lparen, rparen, symbol, eof };
  Kind kind;
  std::string text;
  std::size_t line;
  std::size_t column;
};

class Lexer {
 public:
  explicit Lexer(std::string_view text) : text_(text) { advance(); }

  const Token& peek() const { return current_; }

  Token take() {
    Token t = current_;
    advance();
    return t;
  }

 private:
  void advance() {
    skip_space_and_comments();
    current_.line = line_;
    current_.column = column_;
    if (pos_ >= text_.size()) {
      current_.kind = Token::Kind::eof;
      current_.text = "<eof>";
      return;
    }
    char c = text_[pos_];
    if (c == '(') {
      current_ = {Token::Kind::lparen, "(", line_, column_};
      consume();
      return;
    }
    if (c == ')') {
      current_ = {Token::Kind::rparen, ")", line_, column_};
      consume();
      return;
    }
    std::string sym;
    while (pos_ < text_.size() && !is_delim(text_[pos_])) {
      sym.push_back(text_[pos_]);
      consume();
    }
    current_ = {Token::Kind::symbol, std::move(sym), current_.line,
                current_.column};
  }

  static bool is_delim(char c) {
    return c == '(' || c == ')' || c == ';' || c == ' ' || c == '\t' ||
           c == '\r' || c == '\n';
  }

  void consume() {
    if (text_[pos_] == '\n') {
      ++line_;
      column_ = 1;
    } else {
      ++column_;
    }
    ++pos_;
  }

  void skip_space_and_comments() {
    while (pos_ < text_.size()) {
      char c = text_[pos_];
      if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
        consume();
      } else if (c == ';') {
        while (pos_ < text_.size() && text_[pos_] != '\n') consume();
      } else {
        break;
      }
    }
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
  std::size_t column_ = 1;
  Token current_;
};

class Parser {
 public:
  explicit Parser(std::string_view text) : lex_(text) {}

  Domain parse_domain_document() {
    expect_lparen();
    expect_symbol("define");
    expect_lparen();
    expect_symbol("domain");
    Domain domain;
    domain.name = take_identifier("domain name");
    expect_rparen();

    parse_predicates(domain);
    while (lex_.peek().kind == Token::Kind::lparen) {
      domain.actions.push_back(parse_action(domain));
    }
    expect_rparen();
    expect_eof();
    return domain;
  }

  Problem parse_problem_document(const Domain& domain) {
    expect_lparen();
    expect_symbol("define");
    expect_lparen();
    expect_symbol("problem");
    Problem problem;
    problem.name = take_identifier("problem name");
    expect_rparen();

    expect_lparen();
    expect_symbol(":domain");
    problem.domain_name = take_identifier("domain name");
    expect_rparen();
    if (problem.domain_name != domain.name) {
      throw SemanticError("problem references domain '" + problem.domain_name +
                          "' but '" + domain.name + "' was supplied");
    }

    expect_lparen();
    expect_symbol(":init");
    while (lex_.peek().kind == Token::Kind::lparen) {
      Token at = lex_.peek();
      Literal lit = parse_literal();
      if (!lit.positive) {
        throw SyntaxError(at.line, at.column,
                          "negative literals are not allowed in :init");
      }
      check_declared(domain, lit.prop);
      problem.init = problem.init.with(lit.prop);
    }
    expect_rparen();

    expect_lparen();
    expect_symbol(":goal");
    problem.goal = parse_condition_list("goal");
    for (const auto& lit : problem.goal) check_declared(domain, lit.prop);
    expect_rparen();

    expect_rparen();
    expect_eof();
    return problem;
  }

 private:
  void parse_predicates(Domain& domain) {
    expect_lparen();
    expect_symbol(":predicates");
    while (lex_.peek().kind == Token::Kind::lparen) {
      Token open = lex_.take();
      Token name = expect_any_symbol("predicate name");
      if (!is_valid_proposition_name(name.text)) {
        throw SemanticError("invalid predicate name '" + name.text + "'");
      }
      Proposition p(name.text);
      if (std::find(domain.predicates.begin(), domain.predicates.end(), p) !=
          domain.predicates.end()) {
        throw SemanticError("duplicate predicate declaration '" + name.text +
                            "'");
      }
      domain.predicates.push_back(std::move(p));
      expect_rparen();
      (void)open;
    }
    expect_rparen();
  }

  ActionSchema parse_action(const Domain& domain) {
    expect_lparen();
    expect_symbol(":action");
    ActionSchema action;
    action.name = take_identifier("action name");
    for (const auto& existing : domain.actions) {
      if (existing.name == action.name) {
        throw SemanticError("duplicate action name '" + action.name + "'");
      }
    }
    expect_symbol(":precondition");
    action.preconditions = parse_condition_list("precondition");
    expect_symbol(":effect");
    action.effects = parse_condition_list("effect");
    expect_rparen();

    for (const auto& lit : action.preconditions) check_declared(domain, lit.prop);
    for (const auto& lit : action.effects) check_declared(domain, lit.prop);
    return action;
  }

  // (and L...) possibly empty; duplicates collapse, contradictions are
  // rejected.
  std::vector<Literal> parse_condition_list(const std::string& context) {
    expect_lparen();
    expect_symbol("and");
    std::vector<Literal> lits;
    while (lex_.peek().kind == Token::Kind::lparen) {
      Literal lit = parse_literal();
      auto same_prop = [&](const Literal& l) { return l.prop == lit.prop; };
      auto it = std::find_if(lits.begin(), lits.end(), same_prop);
      if (it != lits.end()) {
        if (it->positive != lit.positive) {
          throw SemanticError("contradictory literals for '" + lit.prop.name +
                              "' in " + context);
        }
        continue;  // duplicate, set semantics
      }
      lits.push_back(std::move(lit));
    }
    expect_rparen();
    return lits;
  }

  Literal parse_literal() {
    expect_lparen();
    Token head = expect_any_symbol("predicate or 'not'");
    if (head.text == "not") {
      expect_lparen();
      Token name = expect_any_symbol("predicate name");
      expect_rparen();
      expect_rparen();
      return {make_prop(name), false};
    }
    expect_rparen();
    return {make_prop(head), true};
  }

  static Proposition make_prop(const Token& token) {
    if (!is_valid_proposition_name(token.text)) {
      throw SemanticError("invalid predicate name '" + token.text + "'");
    }
    return Proposition(token.text);
  }

  static void check_declared(const Domain& domain, const Proposition& p) {
    if (std::find(domain.predicates.begin(), domain.predicates.end(), p) ==
        domain.predicates.end()) {
      throw SemanticError("undeclared predicate '" + p.name + "'");
    }
  }

  void expect_lparen() {
    Token t = lex_.take();
    if (t.kind != Token::Kind::lparen) {
      throw SyntaxError(t.line, t.column, "expected '(', got '" + t.text + "'");
    }
  }

  void expect_rparen() {
    Token t = lex_.take();
    if (t.kind != Token::Kind::rparen) {
      throw SyntaxError(t.line, t.column, "expected ')', got '" + t.text + "'");
    }
  }

  void expect_symbol(const std::string& sym) {
    Token t = lex_.take();
    if (t.kind != Token::Kind::symbol || t.text != sym) {
      throw SyntaxError(t.line, t.column,
                        "expected '" + sym + "', got '" + t.text + "'");
    }
  }

  Token expect_any_symbol(const std::string& what) {
    Token t = lex_.take();
    if (t.kind != Token::Kind::symbol) {
      throw SyntaxError(t.line, t.column,
                        "expected " + what + ", got '" + t.text + "'");
    }
    return t;
  }

  std::string take_identifier(const std::string& what) {
    return expect_any_symbol(what).text;
  }

  void expect_eof() {
    Token t = lex_.take();
    if (t.kind != Token::Kind::eof) {
      throw SyntaxError(t.line, t.column,
                        "expected end of input, got '" + t.text + "'");
    }
  }

  Lexer lex_;
};

}  // namespace

Domain parse_domain(std::string_view text) {
  return Parser(text).parse_domain_document();
}

Problem parse_problem(std::string_view text, const Domain& domain) {
  return Parser(text).parse_problem_document(domain);
}

// ---------------------------------------------------------------------------
// Semantics

bool satisfies(const GroundState& state, std::span<const Literal> conds) {
  for (const auto& lit : conds) {
    if (state.contains(lit.prop) != lit.positive) return false;
  }
  return true;
}

GroundState apply(const GroundState& state, const ActionSchema& action) {
  if (!satisfies(state, action.preconditions)) {
    throw PreconditionViolation("preconditions of '" + action.name +
                                "' not satisfied");
  }
  GroundState next = state;
  for (const auto& eff : action.effects) {
    next = eff.positive ? next.with(eff.prop) : next.without(eff.prop);
  }
  return next;
}

// ---------------------------------------------------------------------------
// Planning

namespace {

// Interns propositions into bit positions so BFS runs over uint64 masks.
class PropIndex {
 public:
  uint64_t bit(const Proposition& p) {
    auto [it, inserted] = index_.emplace(p.name, index_.size());
    if (inserted && index_.size() > 64) {
      throw std::invalid_argument("planner supports at most 64 propositions");
    }
    return uint64_t{1} << it->second;
  }

 private:
  std::unordered_map<std::string, std::size_t> index_;
};

struct MaskedAction {
  uint64_t pre_pos = 0, pre_neg = 0, add = 0, del = 0;
};

struct MaskedCondition {
  uint64_t pos = 0, neg = 0;
};

uint64_t mask_state(PropIndex& idx, const GroundState& state) {
  uint64_t m = 0;
  for (const auto& p : state) m |= idx.bit(p);
  return m;
}

MaskedCondition mask_condition(PropIndex& idx, std::span<const Literal> conds) {
  MaskedCondition m;
  for (const auto& lit : conds) {
    (lit.positive ? m.pos : m.neg) |= idx.bit(lit.prop);
  }
  return m;
}

}  // namespace

std::optional<Plan> plan(const GroundState& init, std::span<const Literal> goal,
                         std::span<const ActionSchema> actions) {
  PropIndex idx;
  const uint64_t start = mask_state(idx, init);
  const MaskedCondition goal_mask = mask_condition(idx, goal);

  std::vector<MaskedAction> acts;
  acts.reserve(actions.size());
  for (const auto& a : actions) {
    MaskedAction m;
    const MaskedCondition pre = mask_condition(idx, a.preconditions);
    m.pre_pos = pre.pos;
    m.pre_neg = pre.neg;
    const MaskedCondition eff = mask_condition(idx, a.effects);
    m.add = eff.pos;
    m.del = eff.neg;
    acts.push_back(m);
  }

  auto is_goal = [&](uint64_t s) {
    return (s & goal_mask.pos) == goal_mask.pos && (s & goal_mask.neg) == 0;
  };

  // parent/action links for path reconstruction; visited doubles as the map
  struct Link {
    uint64_t parent;
    std::size_t action;
  };
  std::map<uint64_t, Link> visited;
  visited.emplace(start, Link{start, actions.size()});

  std::deque<uint64_t> frontier{start};
  std::optional<uint64_t> reached;
  if (is_goal(start)) reached = start;

  while (!reached && !frontier.empty()) {
    const uint64_t s = frontier.front();
    frontier.pop_front();
    for (std::size_t i = 0; i < acts.size(); ++i) {
      const auto& a = acts[i];
      if ((s & a.pre_pos) != a.pre_pos || (s & a.pre_neg) != 0) continue;
      const uint64_t t = (s & ~a.del) | a.add;
      if (visited.count(t)) continue;
      visited.emplace(t, Link{s, i});
      if (is_goal(t)) {
        reached = t;
        break;
      }
      frontier.push_back(t);
    }
  }

  if (!reached) return std::nullopt;

  Plan result;
  for (uint64_t s = *reached; s != start;) {
    const Link& link = visited.at(s);
    result.steps.push_back(actions[link.action].name);
    s = link.parent;
  }
  std::reverse(result.steps.begin(), result.steps.end());
  return result;
}

bool validate_plan(const GroundState& init, std::span<const Literal> goal,
                   const Plan& p, std::span<const ActionSchema> actions) {
  GroundState state = init;
  for (const auto& step : p.steps) {
    const ActionSchema* schema = nullptr;
    for (const auto& a : actions) {
      if (a.name == step) {
        schema = &a;
        break;
      }
    }
    if (schema == nullptr) {
      throw UnknownAction("unknown action '" + step + "'");
    }
    if (!satisfies(state, schema->preconditions)) return false;
    state = apply(state, *schema);
  }
  return satisfies(state, goal);
}

// ---------------------------------------------------------------------------
// Builtin disassembly domain

std::string_view disassembly_domain_text() {
  static constexpr std::string_view kText = R"((define (domain disassembly)
  (:predicates
    (have_coarse_pose)
    (pattern)
    (near_screw)
    (above_screw)
    (disassembled)
    (target_aim)
    (socketed))

  (:action Move
    :precondition (and (have_coarse_pose) (not (near_screw)))
    :effect (and (near_screw) (above_screw)))

  (:action Mate_vision
    :precondition (and (not (pattern)) (near_screw) (not (target_aim)))
    :effect (and (pattern) (above_screw) (target_aim)))

  (:action Mate_force
    :precondition (and (pattern) (near_screw) (not (above_screw)) (not (target_aim)))
    :effect (and (not (pattern)) (above_screw) (target_aim)))

  (:action Insert
    :precondition (and (target_aim) (above_screw))
    :effect (and (socketed) (not (above_screw))))

  (:action Disassemble
    :precondition (and (socketed) (not (disassembled)))
    :effect (and (disassembled))))
)";
  return kText;
}

const Domain& disassembly_domain() {
  static const Domain domain = parse_domain(disassembly_domain_text());
  return domain;
}

}  // namespace nstamp::pddl
