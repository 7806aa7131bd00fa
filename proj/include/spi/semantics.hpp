#ifndef SPI_SEMANTICS_HPP_
#define SPI_SEMANTICS_HPP_

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "spi/congruence.hpp"
#include "spi/syntax.hpp"

namespace spi {

class EvalError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class StaleRedex : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Closed expressions only; service names evaluate to themselves.
Value eval_expr(const Expr& e);

enum class Rule { RInit, Init, Com, Del, Sel, IfT, IfF };

const char* to_string(Rule r);

/// An enabled reduction of a normal form. `first` is the service, receiver,
/// branching or conditional thread; `second` its partner (-1 for IfT/IfF).
struct Redex {
  Rule rule = Rule::Com;
  int first = 0;
  int second = -1;
  Value value;         // Com
  std::string label;   // Sel
  Name delegated;      // Del
};

std::vector<Redex> redexes(const NormalForm& nf);
std::vector<Redex> redexes(const Process& p);

/// Fires `r` on the normal form of `p` and renormalizes. Throws StaleRedex if
/// `r` is not enabled there.
Process step(const Process& p, const Redex& r);
Process step(const NormalForm& nf, const Redex& r);

/// Deduplication key: equal keys mean the processes are equal up to
/// alpha-renaming, thread order and renaming of restricted channels.
std::string canonical_key(const Process& p);

struct TraceStep {
  Process before;
  Redex redex;
};

struct Trace {
  std::vector<TraceStep> steps;
  Process final;
};

struct Exploration {
  std::vector<Process> states;  // breadth-first order, normal forms
  std::vector<int> depth;       // distance from the start
  /// Every state within the bound was expanded and nothing lay beyond it.
  bool complete = true;
  bool state_limit_hit = false;
};

Exploration explore_all(const Process& p, int depth, std::size_t max_states = 200000);

/// One maximal run of at most `depth` steps, each redex drawn uniformly with
/// a generator seeded by `seed`.
Trace explore_seeded(const Process& p, int depth, std::uint64_t seed);

std::string describe(const Redex& r, const NormalForm& nf);
std::string trace_to_text(const Trace& t);

} // namespace spi

#endif // SPI_SEMANTICS_HPP_
