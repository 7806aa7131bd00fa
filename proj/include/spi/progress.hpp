#ifndef SPI_PROGRESS_HPP_
#define SPI_PROGRESS_HPP_

#include <optional>
#include <string>
#include <vector>

#include "spi/depgraph.hpp"
#include "spi/semantics.hpp"
#include "spi/typing.hpp"

namespace spi {

struct Inhabitant {
  Process process;
  /// Fresh service names the inhabitant sends, with their sorts.
  ServiceEnv extension;
};

/// The canonical process that uses `k` exactly as `a` prescribes. Basic
/// payloads are sent as 1, true or "1"; choices select their first label;
/// service payloads are fresh names `#inh0`, `#inh1`, ... not used in `avoid`.
Inhabitant inhabit(const SessionType& a, Name k, const ServiceEnv& avoid = {});

struct Partner {
  Process process;
  ServiceEnv extension;
  /// 1: the partner answers a pending request; 2: it closes an open session.
  int construction = 0;
  Name channel;  // the request's service or the open session
};

/// A stuck, well-typed process whose composition with `p` can reduce. In the
/// second construction the session is, when possible, one a thread of `p` is
/// blocked on.
/// Requires `p` well typed under `g`, irreducible and with live channels
/// (std::invalid_argument otherwise). Returns nothing when no request is
/// pending and every session of `p` is closed.
std::optional<Partner> construct_partner(const ServiceEnv& g, const Process& p);

enum class ProgressKind { Certificate, Counterexample, Inconclusive, IllTyped };

const char* to_string(ProgressKind k);

struct ProgressResult {
  ProgressKind kind = ProgressKind::Certificate;
  std::size_t states = 0;
  std::size_t decompositions = 0;
  /// All reachable states were explored (no depth or state cut-off).
  bool exploration_complete = true;
  bool transparent = true;

  // Counterexample / Inconclusive
  Process state;
  std::vector<int> subset;  // thread indices of the state's normal form
  Process sub;              // the sub-process under test
  std::optional<Partner> partner;
  /// "a".."d" for a failed condition, "partner" when none could be built.
  std::string condition;
  std::string message;

  std::optional<TypeError> error;  // IllTyped
};

struct ProgressOptions {
  int depth = 10;
  /// Sub-processes examined per state. Sub-processes that contain both
  /// threads of a redex, or a conditional, reduce by themselves and are not
  /// enumerated.
  std::size_t subset_budget = 4096;
  std::size_t max_states = 20000;
};

ProgressResult check_progress(const ServiceEnv& g, const Process& p, const ProgressOptions& opts = {});

} // namespace spi

#endif // SPI_PROGRESS_HPP_
