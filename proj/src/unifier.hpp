#ifndef SPI_UNIFIER_HPP_
#define SPI_UNIFIER_HPP_

#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "spi/syntax.hpp"

namespace spi::detail {

/// A session type under construction: a node of the unifier's arena, read
/// dually when `flip` is set. Taking the dual is therefore free, and a type
/// variable and its dual always stay linked.
struct Term {
  int node = 0;
  bool flip = false;
};

inline Term dual(Term t) { return {t.node, !t.flip}; }

struct PayloadRef {
  bool session = false;
  int sort = -1;  // value payloads
  Term type;      // session payloads
};

class UnifyError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// First-order unification over session types and sorts with union-find.
/// Choice rows may be open (a selection whose other labels are still
/// unknown); rows merge by label union. Cyclic solutions are reported by
/// `zonk`.
class Unifier {
public:
  Unifier();

  Term end() const { return {0, false}; }
  Term var();
  Term io(bool input, PayloadRef payload, Term cont);
  Term choice(bool branch, std::vector<std::pair<std::string, Term>> arms, bool open);

  int sort_var();
  int sort_basic(BasicSort b);
  int sort_service(Term t);

  Term from_type(const SessionType& t);
  int from_sort(const Sort& s);

  void unify(Term a, Term b);
  void unify_sort(int a, int b);

  /// Resolved type; variables become `end`, open rows close.
  SessionType zonk(Term t);
  Sort zonk_sort(int s);

  std::string show(Term t);
  std::string show_sort(int s);

private:
  enum class Kind { Var, End, In, Out, Branch, Select };
  struct Node {
    Kind kind = Kind::Var;
    PayloadRef payload;
    Term cont;
    std::vector<std::pair<std::string, Term>> arms;
    bool open = false;
    int parent = -1;
    bool parity = false;
  };
  enum class SortKind { Var, Basic, Service };
  struct SortNode {
    SortKind kind = SortKind::Var;
    BasicSort basic = BasicSort::Int;
    Term type;
    int parent = -1;
  };
  struct Task {
    bool sort;
    Term a, b;
    int sa, sb;
  };

  static Kind flip_kind(Kind k, bool flip);
  std::pair<int, bool> find(int n);
  int find_sort(int s);
  void step(Term a, Term b, std::vector<Task>& work);
  void step_sort(int a, int b, std::vector<Task>& work);
  void check_rows(const Node& a, const Node& b, Term ta, Term tb);
  SessionType zonk_rec(Term t, std::vector<char>& on_stack);
  Sort zonk_sort_rec(int s, std::vector<char>& on_stack);
  void show_rec(std::string& out, Term t, int depth);
  void show_sort_rec(std::string& out, int s, int depth);

  std::vector<Node> nodes_;
  std::vector<SortNode> sorts_;
  std::map<std::pair<int, bool>, SessionType> memo_;
};

} // namespace spi::detail

#endif // SPI_UNIFIER_HPP_
