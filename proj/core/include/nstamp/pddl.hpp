#pragma once

#include <compare>
#include <cstddef>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace nstamp::pddl {

// Grounded proposition. Names are lowercase identifiers
// ([a-z][a-z0-9_]*); equality and ordering are by name.
struct Proposition {
  std::string name;

  Proposition() = default;
  explicit Proposition(std::string n);

  auto operator<=>(const Proposition&) const = default;
};

bool is_valid_proposition_name(std::string_view name);

struct Literal {
  Proposition prop;
  bool positive = true;

  auto operator<=>(const Literal&) const = default;
};

inline Literal pos(std::string name) { return {Proposition(std::move(name)), true}; }
inline Literal neg(std::string name) { return {Proposition(std::move(name)), false}; }

// Closed-world symbolic state: the set of true propositions. Anything
// absent is false.
class GroundState {
 public:
  GroundState() = default;
  GroundState(std::initializer_list<std::string> names);
  explicit GroundState(std::set<Proposition> props) : props_(std::move(props)) {}

  bool contains(const Proposition& p) const { return props_.count(p) > 0; }
  bool contains(std::string_view name) const {
    return props_.count(Proposition(std::string(name))) > 0;
  }

  GroundState with(const Proposition& p) const;
  GroundState without(const Proposition& p) const;

  std::size_t size() const { return props_.size(); }
  bool empty() const { return props_.empty(); }
  auto begin() const { return props_.begin(); }
  auto end() const { return props_.end(); }

  bool operator==(const GroundState&) const = default;

 private:
  std::set<Proposition> props_;
};

struct ActionSchema {
  std::string name;
  std::vector<Literal> preconditions;
  std::vector<Literal> effects;
};

struct Domain {
  std::string name;
  std::vector<Proposition> predicates;  // declaration order is significant
  std::vector<ActionSchema> actions;

  const ActionSchema* find_action(std::string_view action_name) const;
};

struct Problem {
  std::string name;
  std::string domain_name;
  GroundState init;
  std::vector<Literal> goal;
};

struct Plan {
  std::vector<std::string> steps;

  bool operator==(const Plan&) const = default;
};

struct SyntaxError : std::runtime_error {
  SyntaxError(std::size_t line, std::size_t column, const std::string& what);
  std::size_t line;
  std::size_t column;
};

struct SemanticError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct PreconditionViolation : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct UnknownAction : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Parses the s-expression domain grammar:
//   (define (domain NAME)
//     (:predicates (p1) (p2) ...)
//     (:action NAME :precondition (and L...) :effect (and L...)) ...)
// where L is (p) or (not (p)). Throws SyntaxError with the offending
// position, or SemanticError for undeclared predicates, duplicate
// action names, and contradictory literal sets.
Domain parse_domain(std::string_view text);

// Parses (define (problem NAME) (:domain NAME) (:init (p)...)
// (:goal (and L...))), cross-checked against the domain.
Problem parse_problem(std::string_view text, const Domain& domain);

// True iff every positive literal holds in the state and every negative
// literal's proposition is absent (closed world).
bool satisfies(const GroundState& state, std::span<const Literal> conds);

// STRIPS application: (state \ delete-effects) ∪ add-effects.
// Throws PreconditionViolation when the preconditions do not hold.
GroundState apply(const GroundState& state, const ActionSchema& action);

// Shortest plan by breadth-first search over ground states, expanding
// actions in declaration order (deterministic tie-breaking). Returns
// nullopt when the goal is unreachable.
std::optional<Plan> plan(const GroundState& init, std::span<const Literal> goal,
                         std::span<const ActionSchema> actions);

// True iff each step's preconditions hold in sequence and the final
// state satisfies the goal. Throws UnknownAction for unresolvable names.
bool validate_plan(const GroundState& init, std::span<const Literal> goal,
                   const Plan& plan, std::span<const ActionSchema> actions);

// The screw-disassembly domain shipped with the project. Identical to
// assets/disassembly.pddl.
std::string_view disassembly_domain_text();
const Domain& disassembly_domain();

}  // namespace nstamp::pddl
