#ifndef SPI_TYPING_HPP_
#define SPI_TYPING_HPP_

#include <stdexcept>
#include <string>

#include "spi/syntax.hpp"

namespace spi {

/// A violated typing-rule premise. `rule` is the rule name (e.g. "T-Serv").
class TypeError : public std::runtime_error {
public:
  TypeError(std::string rule, std::string message, SourceLoc loc = {}, Process subterm = nullptr);

  const std::string& rule() const { return rule_; }
  const std::string& message() const { return message_; }
  SourceLoc loc() const { return loc_; }
  const Process& subterm() const { return subterm_; }

private:
  std::string rule_;
  std::string message_;
  SourceLoc loc_;
  Process subterm_;
};

struct CheckOptions {
  /// Standard service rule: the body may use sessions other than the one the
  /// service opens; they are passed through to the conclusion.
  bool relaxed_service_rule = false;
  /// Free non-session names missing from the service environment get an
  /// inferred sort instead of an "unbound name" error.
  bool infer_free_names = false;
};

struct Typing {
  SessionEnv delta;
  /// Sorts inferred for free names absent from the given environment.
  ServiceEnv inferred;
};

SessionType dual(const SessionType& a);

/// Sort of an expression. Throws TypeError on unbound names or operand
/// mismatches.
Sort type_expr(const ServiceEnv& g, const Expr& e);

/// Parallel composition of session environments: a channel present on both
/// sides must have dual types there and becomes bottom. Throws TypeError.
SessionEnv compose(const SessionEnv& d1, const SessionEnv& d2);

/// Synthesizes the minimal session environment of `p`. Unconstrained parts
/// default to `end` (session types), `int` (sorts), and to the labels
/// actually used (selections).
Typing check(const ServiceEnv& g, const Process& p, const CheckOptions& opts = {});

/// Checks `p` against a given session environment: every channel of
/// `expected` must get exactly that entry and every other channel must be
/// closable with `end`.
Typing check_against(const ServiceEnv& g, const Process& p, const SessionEnv& expected,
                     const CheckOptions& opts = {});

bool well_typed(const ServiceEnv& g, const Process& p, const CheckOptions& opts = {});

/// Equality of session environments ignoring entries of type `end`.
bool env_equal_mod_end(const SessionEnv& a, const SessionEnv& b);

/// No free session channels and no session restriction that binds anything.
bool is_program(const Process& p);

} // namespace spi

#endif // SPI_TYPING_HPP_
