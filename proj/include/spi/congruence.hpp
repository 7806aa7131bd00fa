#ifndef SPI_CONGRUENCE_HPP_
#define SPI_CONGRUENCE_HPP_

#include <vector>

#include "spi/syntax.hpp"

namespace spi {

/// A process in the shape (new k1)...(new kn)(g1 | ... | gm): restrictions
/// hoisted to the top, parallel flattened, inactive parts dropped. Every
/// thread is a prefix.
struct NormalForm {
  std::vector<Name> restricted;  // outermost first
  std::vector<Process> threads;
};

/// Restrictions are renamed apart when two of them share an identity or one
/// would capture a free channel of a sibling; unused restrictions are erased.
NormalForm flatten(const Process& p);
Process assemble(const NormalForm& nf);
Process normal_form(const Process& p);

/// The normal form of `p`, followed by the normal form of every prefix
/// continuation, branch arm or conditional branch whose normal form has at
/// least two threads, in preorder.
std::vector<Process> maximal_parallel_subterms(const Process& p);

/// True iff some session channel occurs outside the scope of every service
/// prefix (requests count as occurrences of their bound channel).
bool has_live_channels(const Process& p);

} // namespace spi

#endif // SPI_CONGRUENCE_HPP_
