#ifndef SPI_SURFACE_HPP_
#define SPI_SURFACE_HPP_

#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "spi/syntax.hpp"

namespace spi {

/// Concrete syntax of `.spi` files.
///
///   sessions k, k';                      // optional: free session channels
///   env buy : <![int].end>, x : int;     // optional: free service names / variables
///   buy<k>.k!(5).0 | *buy(k).k?(x).0     // the process
///
/// Process forms: `0`, `P | Q`, `new k . P`, `*a(k).P`, `a(k).P`, `a<k>.P`,
/// `k?(x).P`, `k!(e).P`, `k?((k')).P`, `k!((k')).P`, `k >> { l: P, ... }`,
/// `k << l . P`, `if e then P else Q`. A missing `.P` continuation means `.0`.
/// Types: `?[T].A`, `![T].A`, `&{l: A, ...}`, `+{l: A, ...}`, `end`, with
/// payloads `int`, `bool`, `string`, `<A>` or a session type. A missing `.A`
/// continuation means `.end`.
struct SourceFile {
  std::vector<Name> sessions;
  ServiceEnv env;
  Process body;
};

class ParseError : public std::runtime_error {
public:
  ParseError(int line, int column, const std::string& message);
  int line() const { return line_; }
  int column() const { return column_; }
  const std::string& message() const { return message_; }

private:
  int line_;
  int column_;
  std::string message_;
};

SourceFile parse_source(std::string_view text);
/// Parses a whole source (header and env block allowed) and returns the body.
Process parse_process(std::string_view text);
SessionType parse_type(std::string_view text);
Sort parse_sort(std::string_view text);

/// Naming hooks for the printer. `free_name` may override how a free name is
/// shown; `canonical_binders` replaces every binder by `_0`, `_1`, ... in
/// traversal order.
struct PrintOptions {
  std::function<std::optional<std::string>(Name)> free_name;
  bool canonical_binders = false;
};

std::string print_process(const Process& p, const PrintOptions& opts = {});
std::string print_type(const SessionType& t);
std::string print_sort(const Sort& s);
std::string print_value(const Value& v);
std::string print_expr(const Expr& e);
std::string print_source(const SourceFile& f);
std::string print_session_env(const SessionEnv& d);
std::string print_service_env(const ServiceEnv& g);

/// A source file for `p`: header = fsc(p), env = entries of `gamma` for the
/// free non-session names of `p`.
SourceFile source_for(const Process& p, const ServiceEnv& gamma);

} // namespace spi

#endif // SPI_SURFACE_HPP_
