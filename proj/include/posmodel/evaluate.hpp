#ifndef POSMODEL_EVALUATE_HPP
#define POSMODEL_EVALUATE_HPP

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "posmodel/error.hpp"
#include "posmodel/formula.hpp"
#include "posmodel/structure.hpp"

namespace posmodel {

using Assignment = std::map<std::string, Elem>;

/// A formula resolved against a signature, with variables mapped to environment slots.
/// Slots 0..params-1 hold the parameters given at compile time; bound variables get
/// fresh slots above them.
class CompiledFormula {
 public:
  CompiledFormula() = default;

  CompiledFormula(const Formula& f, const Signature& sig, std::span<const std::string> params)
      : sig_(sig), params_(params.begin(), params.end()) {
    std::vector<std::pair<std::string, int>> scope;
    for (std::size_t i = 0; i < params.size(); ++i) scope.emplace_back(params[i], static_cast<int>(i));
    slots_ = static_cast<int>(params.size());
    root_ = compile(f, scope);
  }

  std::size_t param_count() const { return params_.size(); }
  const std::vector<std::string>& params() const { return params_; }
  const Signature& signature() const { return sig_; }

  /// `params` supplies one element per compile-time parameter.
  bool holds(const Structure& m, std::span<const Elem> params) const {
    if (params.size() != params_.size()) throw InputError("wrong number of parameters");
    env_.assign(static_cast<std::size_t>(slots_), Elem{0});
    std::copy(params.begin(), params.end(), env_.begin());
    return eval(m, root_);
  }

 private:
  struct CTerm {
    Term::Kind kind;
    int index;
    std::vector<CTerm> args;
  };
  struct CNode {
    Formula::Kind kind;
    int index = -1;
    std::vector<CTerm> terms;
    std::vector<CNode> children;
  };

  CTerm compile_term(const Term& t, const std::vector<std::pair<std::string, int>>& scope) {
    switch (t.kind) {
      case Term::Kind::Var:
        for (auto it = scope.rbegin(); it != scope.rend(); ++it)
          if (it->first == t.name) return {Term::Kind::Var, it->second, {}};
        if (auto c = sig_.constant_index(t.name)) return {Term::Kind::Const, static_cast<int>(*c), {}};
        throw InputError("unbound free variable '" + t.name + "'");
      case Term::Kind::Const: {
        auto c = sig_.constant_index(t.name);
        if (!c) throw InputError("signature mismatch: unknown constant '" + t.name + "'");
        return {Term::Kind::Const, static_cast<int>(*c), {}};
      }
      case Term::Kind::App: {
        auto fn = sig_.function_index(t.name);
        if (!fn) throw InputError("signature mismatch: unknown function '" + t.name + "'");
        if (static_cast<std::size_t>(sig_.functions[*fn].second) != t.args.size())
          throw InputError("signature mismatch: arity of '" + t.name + "'");
        CTerm out{Term::Kind::App, static_cast<int>(*fn), {}};
        for (const auto& a : t.args) out.args.push_back(compile_term(a, scope));
        return out;
      }
    }
    throw InputError("bad term");
  }

  CNode compile(const Formula& f, std::vector<std::pair<std::string, int>>& scope) {
    CNode node{f.kind, -1, {}, {}};
    if (f.kind == Formula::Kind::Rel) {
      auto r = sig_.relation_index(f.symbol);
      if (!r) throw InputError("signature mismatch: unknown relation '" + f.symbol + "'");
      if (static_cast<std::size_t>(sig_.relations[*r].second) != f.terms.size())
        throw InputError("signature mismatch: arity of '" + f.symbol + "'");
      node.index = static_cast<int>(*r);
    }
    for (const auto& t : f.terms) node.terms.push_back(compile_term(t, scope));
    if (f.is_quantifier()) {
      node.index = slots_++;
      scope.emplace_back(f.symbol, node.index);
      node.children.push_back(compile(f.children[0], scope));
      scope.pop_back();
      return node;
    }
    for (const auto& c : f.children) node.children.push_back(compile(c, scope));
    return node;
  }

  Elem eval_term(const Structure& m, const CTerm& t) const {
    switch (t.kind) {
      case Term::Kind::Var: return env_[static_cast<std::size_t>(t.index)];
      case Term::Kind::Const: return m.constant(static_cast<std::size_t>(t.index));
      case Term::Kind::App: {
        Elem args[8];
        std::vector<Elem> big;
        std::span<Elem> view;
        if (t.args.size() <= 8) {
          view = std::span<Elem>(args, t.args.size());
        } else {
          big.resize(t.args.size());
          view = big;
        }
        for (std::size_t i = 0; i < t.args.size(); ++i) view[i] = eval_term(m, t.args[i]);
        return m.apply(static_cast<std::size_t>(t.index), view);
      }
    }
    return 0;
  }

  bool eval(const Structure& m, const CNode& n) const {
    using K = Formula::Kind;
    switch (n.kind) {
      case K::False: return false;
      case K::True: return true;
      case K::Eq: return eval_term(m, n.terms[0]) == eval_term(m, n.terms[1]);
      case K::Rel: {
        Elem args[8];
        std::vector<Elem> big;
        std::span<Elem> view;
        if (n.terms.size() <= 8) {
          view = std::span<Elem>(args, n.terms.size());
        } else {
          big.resize(n.terms.size());
          view = big;
        }
        for (std::size_t i = 0; i < n.terms.size(); ++i) view[i] = eval_term(m, n.terms[i]);
        return m.holds(static_cast<std::size_t>(n.index), view);
      }
      case K::And: return eval(m, n.children[0]) && eval(m, n.children[1]);
      case K::Or: return eval(m, n.children[0]) || eval(m, n.children[1]);
      case K::Implies: return !eval(m, n.children[0]) || eval(m, n.children[1]);
      case K::Not: return !eval(m, n.children[0]);
      case K::Exists:
      case K::Forall: {
        const bool want = n.kind == K::Exists;
        Elem& slot = env_[static_cast<std::size_t>(n.index)];
        const Elem saved = slot;
        bool result = !want;
        for (std::size_t v = 0; v < m.size(); ++v) {
          slot = static_cast<Elem>(v);
          if (eval(m, n.children[0]) == want) {
            result = want;
            break;
          }
        }
        slot = saved;
        return result;
      }
    }
    return false;
  }

  Signature sig_;
  std::vector<std::string> params_;
  int slots_ = 0;
  CNode root_{Formula::Kind::False, -1, {}, {}};
  mutable std::vector<Elem> env_;
};

/// Tarskian satisfaction. Every free variable must be bound by `alpha`.
inline bool evaluate(const Structure& m, const Formula& f, const Assignment& alpha = {}) {
  std::vector<std::string> names;
  std::vector<Elem> values;
  for (const auto& v : free_variables(f)) {
    auto it = alpha.find(v);
    if (it == alpha.end()) {
      if (m.signature().constant_index(v)) continue;
      throw InputError("unbound free variable '" + v + "'");
    }
    if (it->second < 0 || static_cast<std::size_t>(it->second) >= m.size())
      throw InputError("assignment of '" + v + "' leaves the universe");
    names.push_back(v);
    values.push_back(it->second);
  }
  return CompiledFormula(f, m.signature(), names).holds(m, values);
}

/// Calls `visit(tuple)` for every tuple in {0..n-1}^k, in lexicographic order.
template <class Visit>
void for_each_tuple(std::size_t n, std::size_t k, Visit&& visit) {
  std::vector<Elem> tuple(k, 0);
  if (n == 0 && k > 0) return;
  while (true) {
    visit(static_cast<const std::vector<Elem>&>(tuple));
    std::size_t i = k;
    while (i > 0) {
      --i;
      if (static_cast<std::size_t>(++tuple[i]) < n) break;
      tuple[i] = 0;
      if (i == 0) return;
    }
    if (k == 0) return;
  }
}

}  // namespace posmodel

#endif  // POSMODEL_EVALUATE_HPP
