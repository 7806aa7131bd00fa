#ifndef SPI_TESTS_GENERATOR_HPP_
#define SPI_TESTS_GENERATOR_HPP_

#include <cstdint>
#include <random>
#include <vector>

#include "spi/syntax.hpp"

namespace spi::testing {

struct GenConfig {
  int max_type_depth = 3;
  /// Optional constructs (splits, requests, conditionals) each cost one unit.
  int budget = 8;
  /// Two shared sessions per split with this probability, which allows
  /// cyclic dependency graphs.
  double p_cycle = 0.0;
  /// Probability that a top-level free session gets only one endpoint.
  double p_free_half = 0.5;
  /// Probability that a request has no server at all.
  double p_orphan_request = 0.1;
};

struct Generated {
  Process process;
  ServiceEnv gamma;
};

/// Random session types and well-typed processes. Processes are built
/// type-first: every session channel is created with a type and its users are
/// generated from that type, so the result is well typed by construction.
class Generator {
public:
  Generator(std::uint64_t seed, GenConfig config = {});

  SessionType type(int depth);
  SessionType type() { return type(config_.max_type_depth); }

  /// A process with free sessions, restrictions and services.
  Generated process();
  /// A program: clients and replicated servers, no restrictions and no free
  /// session channels.
  Generated program();

  std::mt19937_64& rng() { return rng_; }

private:
  struct Owned {
    Name chan;
    SessionType type;
  };
  struct Var {
    Name name;
    BasicSort sort;
  };

  Process gen(std::vector<Owned> owned, std::vector<Var> vars, int budget);
  Process act(std::vector<Owned> owned, std::size_t which, std::vector<Var> vars, int budget);
  Process request(std::vector<Owned> owned, std::vector<Var> vars, int budget);
  Process split(std::vector<Owned> owned, std::vector<Var> vars, int budget);
  Process server(Name a, const SessionType& body_type, int budget, bool replicated);
  Name service_of(const SessionType& t);
  Expr value_of(BasicSort s, const std::vector<Var>& vars);
  Expr bool_guard(const std::vector<Var>& vars);

  bool coin(double p);
  int pick(int n);

  std::mt19937_64 rng_;
  GenConfig config_;
  bool program_mode_ = false;
  bool in_server_ = false;  // service bodies may not use outside sessions
  ServiceEnv gamma_;
  std::vector<Process> servers_;
  std::vector<std::pair<Name, SessionType>> served_;  // replicated services, reusable
  int next_service_ = 0;
  int next_free_ = 0;
};

} // namespace spi::testing

#endif // SPI_TESTS_GENERATOR_HPP_
