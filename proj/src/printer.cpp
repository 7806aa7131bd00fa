#include <algorithm>
#include <set>
#include <sstream>
#include <unordered_map>

#include "spi/surface.hpp"

namespace spi {
namespace {

std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      default: out += c;
    }
  }
  out += '"';
  return out;
}

const char* op_text(BinOp op) {
  switch (op) {
    case BinOp::Add: return "+";
    case BinOp::Sub: return "-";
    case BinOp::Mul: return "*";
    case BinOp::Le: return "<=";
    case BinOp::Eq: return "=";
    case BinOp::And: return "&&";
  }
  return "?";
}

void print_type_to(std::string& out, const SessionType& t);

void print_payload_to(std::string& out, const Payload& p) {
  switch (p.kind) {
    case PayloadKind::Basic: out += to_string(p.basic); break;
    case PayloadKind::Service:
      out += '<';
      print_type_to(out, p.type);
      out += '>';
      break;
    case PayloadKind::Session: print_type_to(out, p.type); break;
  }
}

void print_type_to(std::string& out, const SessionType& t) {
  switch (t->kind) {
    case TypeKind::End: out += "end"; break;
    case TypeKind::In:
    case TypeKind::Out:
      out += t->kind == TypeKind::In ? "?[" : "![";
      print_payload_to(out, t->payload);
      out += "].";
      print_type_to(out, t->cont);
      break;
    case TypeKind::Branch:
    case TypeKind::Select: {
      out += t->kind == TypeKind::Branch ? "&{" : "+{";
      bool first = true;
      for (const auto& arm : t->arms) {
        if (!first) out += ", ";
        first = false;
        out += arm.label;
        out += ": ";
        print_type_to(out, arm.type);
      }
      out += '}';
      break;
    }
  }
}

/// Chooses display names. Free names get their text, suffixed when two
/// distinct free names share a text; binders are suffixed only when they would
/// shadow a name visible at that point.
class Printer {
public:
  Printer(const PrintOptions& opts, const std::vector<Name>& free_names) : opts_(opts) {
    std::map<std::string, std::vector<Name>> by_text;
    for (Name n : free_names) by_text[n.text()].push_back(n);
    std::set<std::string> taken;
    for (auto& [text, names] : by_text) taken.insert(text);
    for (auto& [text, names] : by_text) {
      std::stable_sort(names.begin(), names.end(), [](Name a, Name b) {
        if (a.interned() != b.interned()) return a.interned();
        return a.id() < b.id();
      });
      names.erase(std::unique(names.begin(), names.end()), names.end());
      for (std::size_t i = 0; i < names.size(); ++i) {
        std::string display = text;
        if (i > 0) {
          for (int s = 1;; ++s) {
            display = text + "_" + std::to_string(s);
            if (!taken.count(display)) break;
          }
          taken.insert(display);
        }
        free_display_[names[i]] = display;
      }
    }
    for (auto& [n, text] : free_display_) {
      if (opts_.free_name) {
        if (auto o = opts_.free_name(n)) text = *o;
      }
      ++visible_[text];
    }
  }

  void process(std::string& out, const Process& p, bool in_par) {
    const ProcessNode& n = *p;
    switch (n.kind) {
      case ProcKind::Inact: out += '0'; return;
      case ProcKind::Par: {
        if (!in_par) out += '(';
        bool first = true;
        for (const auto& c : n.children) {
          if (!first) out += " | ";
          first = false;
          process(out, c, false);
        }
        if (!in_par) out += ')';
        return;
      }
      case ProcKind::Restrict: {
        auto d = bind(n.binder);
        out += "new " + d + " . ";
        process(out, n.body(), false);
        unbind(n.binder, d);
        return;
      }
      case ProcKind::Service:
      case ProcKind::Request: {
        if (n.replicated) out += '*';
        out += show(n.subject);
        auto d = bind(n.binder);
        out += n.kind == ProcKind::Service ? "(" + d + ")" : "<" + d + ">";
        cont(out, n.body());
        unbind(n.binder, d);
        return;
      }
      case ProcKind::Input: {
        out += show(n.subject);
        auto d = bind(n.binder);
        out += "?(" + d + ")";
        cont(out, n.body());
        unbind(n.binder, d);
        return;
      }
      case ProcKind::InputSession: {
        out += show(n.subject);
        auto d = bind(n.binder);
        out += "?((" + d + "))";
        cont(out, n.body());
        unbind(n.binder, d);
        return;
      }
      case ProcKind::Output:
        out += show(n.subject) + "!(";
        expr(out, n.expr);
        out += ')';
        cont(out, n.body());
        return;
      case ProcKind::Delegate:
        out += show(n.subject) + "!((" + show(n.object) + "))";
        cont(out, n.body());
        return;
      case ProcKind::Branch: {
        out += show(n.subject) + " >> { ";
        for (std::size_t i = 0; i < n.children.size(); ++i) {
          if (i) out += ", ";
          out += n.labels[i] + ": ";
          process(out, n.children[i], true);
        }
        out += " }";
        return;
      }
      case ProcKind::Select:
        out += show(n.subject) + " << " + n.label;
        cont(out, n.body());
        return;
      case ProcKind::Cond:
        out += "if ";
        expr(out, n.expr);
        out += " then ";
        process(out, n.children[0], false);
        out += " else ";
        process(out, n.children[1], false);
        return;
    }
  }

  void expr(std::string& out, const Expr& e) {
    switch (e->kind) {
      case ExprKind::Literal:
        if (e->value.is_service()) out += show(e->value.as_service());
        else out += print_value(e->value);
        return;
      case ExprKind::Var: out += show(e->var); return;
      case ExprKind::Binary:
        operand(out, e->lhs);
        out += ' ';
        out += op_text(e->op);
        out += ' ';
        operand(out, e->rhs);
        return;
      case ExprKind::Not:
        out += "not ";
        operand(out, e->lhs);
        return;
    }
  }

  std::string show(Name n) const {
    auto b = bound_.find(n);
    if (b != bound_.end()) return b->second;
    auto f = free_display_.find(n);
    if (f != free_display_.end()) return f->second;
    return n.text();
  }

private:
  void cont(std::string& out, const Process& body) {
    out += '.';
    process(out, body, false);
  }

  void operand(std::string& out, const Expr& e) {
    bool paren = e->kind == ExprKind::Binary ||
                 (e->kind == ExprKind::Literal && e->value.is_int() && e->value.as_int() < 0);
    if (paren) out += '(';
    expr(out, e);
    if (paren) out += ')';
  }

  std::string bind(Name n) {
    std::string d;
    if (opts_.canonical_binders) {
      d = "_" + std::to_string(counter_++);
    } else {
      d = n.text();
      if (visible_.count(d) && visible_[d] > 0) {
        for (int s = 1;; ++s) {
          d = n.text() + "_" + std::to_string(s);
          if (!visible_.count(d) || visible_[d] == 0) break;
        }
      }
    }
    ++visible_[d];
    saved_.push_back(bound_.count(n) ? std::optional<std::string>(bound_[n]) : std::nullopt);
    bound_[n] = d;
    return d;
  }

  void unbind(Name n, const std::string& d) {
    --visible_[d];
    auto prev = saved_.back();
    saved_.pop_back();
    if (prev) bound_[n] = *prev;
    else bound_.erase(n);
  }

  const PrintOptions& opts_;
  std::unordered_map<Name, std::string> free_display_;
  std::unordered_map<Name, std::string> bound_;
  std::vector<std::optional<std::string>> saved_;
  std::unordered_map<std::string, int> visible_;
  int counter_ = 0;
};

std::vector<Name> all_free(const Process& p) {
  std::vector<Name> v = free_session_channels(p);
  auto vals = free_value_names(p);
  v.insert(v.end(), vals.begin(), vals.end());
  return v;
}

} // namespace

std::string print_type(const SessionType& t) {
  std::string out;
  print_type_to(out, t);
  return out;
}

std::string print_sort(const Sort& s) {
  if (!s.is_service) return to_string(s.basic);
  return "<" + print_type(s.type) + ">";
}

std::string print_value(const Value& v) {
  if (v.is_int()) return std::to_string(v.as_int());
  if (v.is_bool()) return v.as_bool() ? "true" : "false";
  if (v.is_string()) return quote(v.as_string());
  return v.as_service().text();
}

std::string print_expr(const Expr& e) {
  PrintOptions opts;
  Printer pr(opts, {});
  std::string out;
  pr.expr(out, e);
  return out;
}

std::string print_process(const Process& p, const PrintOptions& opts) {
  Printer pr(opts, all_free(p));
  std::string out;
  pr.process(out, p, true);
  return out;
}

std::string print_source(const SourceFile& f) {
  std::vector<Name> names = all_free(f.body);
  names.insert(names.end(), f.sessions.begin(), f.sessions.end());
  for (const auto& [n, s] : f.env) names.push_back(n);
  PrintOptions opts;
  Printer pr(opts, names);
  std::string out;
  if (!f.sessions.empty()) {
    std::vector<Name> sorted = f.sessions;
    std::sort(sorted.begin(), sorted.end(), NameTextLess{});
    out += "sessions ";
    for (std::size_t i = 0; i < sorted.size(); ++i) {
      if (i) out += ", ";
      out += pr.show(sorted[i]);
    }
    out += ";\n";
  }
  if (!f.env.empty()) {
    std::vector<std::pair<Name, const Sort*>> sorted;
    for (const auto& [n, s] : f.env) sorted.emplace_back(n, &s);
    std::sort(sorted.begin(), sorted.end(),
              [](const auto& a, const auto& b) { return NameTextLess{}(a.first, b.first); });
    out += "env ";
    for (std::size_t i = 0; i < sorted.size(); ++i) {
      if (i) out += ", ";
      out += pr.show(sorted[i].first) + " : " + print_sort(*sorted[i].second);
    }
    out += ";\n";
  }
  pr.process(out, f.body, true);
  out += '\n';
  return out;
}

std::string print_session_env(const SessionEnv& d) {
  std::vector<std::pair<Name, const SessionEntry*>> sorted;
  for (const auto& [n, e] : d) sorted.emplace_back(n, &e);
  std::sort(sorted.begin(), sorted.end(),
            [](const auto& a, const auto& b) { return NameTextLess{}(a.first, b.first); });
  std::string out = "{";
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    if (i) out += ", ";
    out += sorted[i].first.text() + ": ";
    out += sorted[i].second->is_bottom() ? "bot" : print_type(sorted[i].second->type());
  }
  return out + "}";
}

std::string print_service_env(const ServiceEnv& g) {
  std::vector<std::pair<Name, const Sort*>> sorted;
  for (const auto& [n, s] : g) sorted.emplace_back(n, &s);
  std::sort(sorted.begin(), sorted.end(),
            [](const auto& a, const auto& b) { return NameTextLess{}(a.first, b.first); });
  std::string out = "{";
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    if (i) out += ", ";
    out += sorted[i].first.text() + ": " + print_sort(*sorted[i].second);
  }
  return out + "}";
}

SourceFile source_for(const Process& p, const ServiceEnv& gamma) {
  SourceFile f;
  f.body = p;
  f.sessions = free_session_channels(p);
  for (Name n : free_value_names(p)) {
    auto it = gamma.find(n);
    if (it != gamma.end()) f.env.emplace(n, it->second);
  }
  return f;
}

} // namespace spi
