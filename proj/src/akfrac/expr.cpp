/*
 Copyright 2026 The akfrac Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/

#include "akfrac/expr.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "akfrac/error.hpp"

namespace akfrac {

enum class Op { Num, Var, Add, Sub, Mul, Div, Pow, Neg, Exp, Ln, Sin, Cos, Sqrt, Abs };

struct Expr::Node {
  Op op = Op::Num;
  double value = 0.0;
  VarKind kind = VarKind::T;
  std::size_t index = 0;  // 0-based component for x, u, lam, v
  std::size_t slot = 0;
  std::shared_ptr<const Node> a, b;
};

std::size_t Dims::slot(VarKind kind, std::size_t index) const {
  switch (kind) {
    case VarKind::T: return 0;
    case VarKind::X: return 1 + index;
    case VarKind::U: return 1 + n + index;
    case VarKind::Lam: return 1 + n + m + index;
    case VarKind::V: return 1 + n + m + lam + index;
  }
  return 0;
}

namespace {

using NodePtr = std::shared_ptr<const Expr::Node>;

struct FnName {
  const char* name;
  Op op;
};
constexpr FnName kFunctions[] = {{"exp", Op::Exp},   {"ln", Op::Ln},     {"sin", Op::Sin},
                                 {"cos", Op::Cos},   {"sqrt", Op::Sqrt}, {"abs", Op::Abs}};

const char* fn_name(Op op) {
  for (const auto& f : kFunctions)
    if (f.op == op) return f.name;
  return "?";
}

NodePtr make(Op op, NodePtr a = nullptr, NodePtr b = nullptr) {
  auto n = std::make_shared<Expr::Node>();
  n->op = op;
  n->a = std::move(a);
  n->b = std::move(b);
  return n;
}

class Parser {
 public:
  Parser(std::string_view src, const Dims& dims) : s_(src), dims_(dims) {}

  NodePtr parse() {
    skip();
    if (pos_ >= s_.size()) fail("empty expression");
    NodePtr e = expr();
    skip();
    if (pos_ < s_.size()) fail(std::string("unexpected '") + s_[pos_] + "'");
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const { fail_at(pos_, msg); }
  [[noreturn]] void fail_at(std::size_t at, const std::string& msg) const {
    std::ostringstream os;
    os << "syntax error at offset " << at << ": " << msg;
    throw ValidationError(os.str());
  }

  void skip() {
    while (pos_ < s_.size() && (s_[pos_] == ' ' || s_[pos_] == '\t' || s_[pos_] == '\n' || s_[pos_] == '\r'))
      ++pos_;
  }

  bool accept(char c) {
    skip();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!accept(c)) fail(std::string("expected '") + c + "'");
  }

  NodePtr expr() {
    NodePtr lhs = term();
    for (;;) {
      if (accept('+')) lhs = make(Op::Add, lhs, term());
      else if (accept('-')) lhs = make(Op::Sub, lhs, term());
      else return lhs;
    }
  }

  NodePtr term() {
    NodePtr lhs = unary();
    for (;;) {
      if (accept('*')) lhs = make(Op::Mul, lhs, unary());
      else if (accept('/')) lhs = make(Op::Div, lhs, unary());
      else return lhs;
    }
  }

  NodePtr unary() {
    if (accept('-')) return make(Op::Neg, unary());
    if (accept('+')) return unary();
    return power();
  }

  // Right-associative; the exponent may carry its own unary minus.
  NodePtr power() {
    NodePtr base = primary();
    if (accept('^')) return make(Op::Pow, base, exponent());
    return base;
  }

  NodePtr exponent() {
    if (accept('-')) return make(Op::Neg, exponent());
    if (accept('+')) return exponent();
    return power();
  }

  NodePtr primary() {
    skip();
    if (pos_ >= s_.size()) fail("expected expression");
    const char c = s_[pos_];
    if (c == '(') {
      ++pos_;
      NodePtr e = expr();
      expect(')');
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return identifier();
    fail(std::string("unexpected '") + c + "'");
  }

  NodePtr number() {
    const std::size_t start = pos_;
    while (pos_ < s_.size() && (std::isdigit(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '.')) ++pos_;
    if (pos_ < s_.size() && (s_[pos_] == 'e' || s_[pos_] == 'E')) {
      std::size_t p = pos_ + 1;
      if (p < s_.size() && (s_[p] == '+' || s_[p] == '-')) ++p;
      if (p < s_.size() && std::isdigit(static_cast<unsigned char>(s_[p]))) {
        pos_ = p;
        while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
      }
    }
    double v = 0.0;
    const auto res = std::from_chars(s_.data() + start, s_.data() + pos_, v);
    if (res.ec != std::errc() || res.ptr != s_.data() + pos_) fail_at(start, "malformed number");
    if (!std::isfinite(v)) fail_at(start, "number out of range");
    auto n = std::make_shared<Expr::Node>();
    n->op = Op::Num;
    n->value = v;
    return n;
  }

  NodePtr identifier() {
    const std::size_t start = pos_;
    while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) ++pos_;
    const std::string id(s_.substr(start, pos_ - start));

    skip();
    if (pos_ < s_.size() && s_[pos_] == '(') {
      ++pos_;
      if (id == "pow") {
        NodePtr a = expr();
        expect(',');
        NodePtr b = expr();
        expect(')');
        return make(Op::Pow, a, b);
      }
      for (const auto& f : kFunctions) {
        if (id == f.name) {
          NodePtr a = expr();
          expect(')');
          return make(f.op, a);
        }
      }
      fail_at(start, "unknown function '" + id + "'");
    }

    if (id == "t") return variable(VarKind::T, 0);
    if (id == "pi") {
      auto n = std::make_shared<Expr::Node>();
      n->value = M_PI;
      return n;
    }
    struct Prefix {
      const char* p;
      VarKind kind;
      std::size_t limit;
    };
    const Prefix prefixes[] = {{"lam", VarKind::Lam, dims_.lam},
                               {"x", VarKind::X, dims_.n},
                               {"u", VarKind::U, dims_.m},
                               {"v", VarKind::V, dims_.v}};
    for (const auto& p : prefixes) {
      const std::string_view pre(p.p);
      if (id.size() > pre.size() && id.compare(0, pre.size(), pre) == 0) {
        std::size_t idx = 0;
        const char* first = id.data() + pre.size();
        const char* last = id.data() + id.size();
        const auto res = std::from_chars(first, last, idx);
        if (res.ec != std::errc() || res.ptr != last || *first == '0') continue;
        if (idx < 1 || idx > p.limit) {
          std::ostringstream os;
          os << "variable '" << id << "' is outside the declared dimension " << p.limit;
          fail_at(start, os.str());
        }
        return variable(p.kind, idx - 1);
      }
    }
    fail_at(start, "unknown identifier '" + id + "'");
  }

  NodePtr variable(VarKind kind, std::size_t index) {
    auto n = std::make_shared<Expr::Node>();
    n->op = Op::Var;
    n->kind = kind;
    n->index = index;
    n->slot = dims_.slot(kind, index);
    return n;
  }

  std::string_view s_;
  Dims dims_;
  std::size_t pos_ = 0;
};

[[noreturn]] void domain_fault(const char* what) {
  throw NumericalError(std::string("expression domain fault: ") + what);
}

double checked(double v) {
  if (!std::isfinite(v)) domain_fault("non-finite result");
  return v;
}

bool is_integer(double v) { return std::nearbyint(v) == v; }

double pow_value(double a, double b) {
  if (a == 0.0 && b < 0.0) domain_fault("0 raised to a negative power");
  if (a < 0.0 && !is_integer(b)) domain_fault("negative base with non-integer exponent");
  return std::pow(a, b);
}

double eval_node(const Expr::Node& n, std::span<const double> env) {
  switch (n.op) {
    case Op::Num: return n.value;
    case Op::Var: return env[n.slot];
    case Op::Add: return checked(eval_node(*n.a, env) + eval_node(*n.b, env));
    case Op::Sub: return checked(eval_node(*n.a, env) - eval_node(*n.b, env));
    case Op::Mul: return checked(eval_node(*n.a, env) * eval_node(*n.b, env));
    case Op::Div: {
      const double a = eval_node(*n.a, env), b = eval_node(*n.b, env);
      if (b == 0.0) domain_fault("division by zero");
      return checked(a / b);
    }
    case Op::Pow: return checked(pow_value(eval_node(*n.a, env), eval_node(*n.b, env)));
    case Op::Neg: return -eval_node(*n.a, env);
    case Op::Exp: return checked(std::exp(eval_node(*n.a, env)));
    case Op::Ln: {
      const double a = eval_node(*n.a, env);
      if (!(a > 0.0)) domain_fault("ln of a non-positive value");
      return std::log(a);
    }
    case Op::Sin: return std::sin(eval_node(*n.a, env));
    case Op::Cos: return std::cos(eval_node(*n.a, env));
    case Op::Sqrt: {
      const double a = eval_node(*n.a, env);
      if (a < 0.0) domain_fault("sqrt of a negative value");
      return std::sqrt(a);
    }
    case Op::Abs: return std::fabs(eval_node(*n.a, env));
  }
  return 0.0;
}

// Dual number with a dense gradient over the requested slots.
struct Dual {
  double v = 0.0;
  std::vector<double> d;
};

bool all_zero(const std::vector<double>& d) {
  for (double x : d)
    if (x != 0.0) return false;
  return true;
}

[[noreturn]] void not_differentiable(const char* what) {
  throw NumericalError(std::string("expression is not differentiable here: ") + what);
}

void check_grad(const Dual& r) {
  for (double x : r.d)
    if (!std::isfinite(x)) domain_fault("non-finite derivative");
}

Dual dual_node(const Expr::Node& n, std::span<const double> env, std::span<const std::size_t> wrt) {
  const std::size_t k = wrt.size();
  switch (n.op) {
    case Op::Num: return {n.value, std::vector<double>(k, 0.0)};
    case Op::Var: {
      Dual r{env[n.slot], std::vector<double>(k, 0.0)};
      for (std::size_t i = 0; i < k; ++i)
        if (wrt[i] == n.slot) r.d[i] = 1.0;
      return r;
    }
    default: break;
  }
  Dual a = dual_node(*n.a, env, wrt);
  Dual r;
  switch (n.op) {
    case Op::Add:
    case Op::Sub:
    case Op::Mul:
    case Op::Div:
    case Op::Pow: {
      const Dual b = dual_node(*n.b, env, wrt);
      r.d.resize(k);
      if (n.op == Op::Add) {
        r.v = a.v + b.v;
        for (std::size_t i = 0; i < k; ++i) r.d[i] = a.d[i] + b.d[i];
      } else if (n.op == Op::Sub) {
        r.v = a.v - b.v;
        for (std::size_t i = 0; i < k; ++i) r.d[i] = a.d[i] - b.d[i];
      } else if (n.op == Op::Mul) {
        r.v = a.v * b.v;
        for (std::size_t i = 0; i < k; ++i) r.d[i] = a.d[i] * b.v + a.v * b.d[i];
      } else if (n.op == Op::Div) {
        if (b.v == 0.0) domain_fault("division by zero");
        r.v = a.v / b.v;
        for (std::size_t i = 0; i < k; ++i) r.d[i] = (a.d[i] - r.v * b.d[i]) / b.v;
      } else {
        r.v = pow_value(a.v, b.v);
        if (all_zero(b.d)) {
          if (b.v == 0.0 || all_zero(a.d)) {
            std::fill(r.d.begin(), r.d.end(), 0.0);
          } else {
            if (a.v == 0.0 && b.v < 1.0) not_differentiable("power at 0 with exponent below 1");
            const double f = b.v * std::pow(a.v, b.v - 1.0);
            for (std::size_t i = 0; i < k; ++i) r.d[i] = f * a.d[i];
          }
        } else {
          if (!(a.v > 0.0)) not_differentiable("variable exponent needs a positive base");
          const double la = std::log(a.v);
          for (std::size_t i = 0; i < k; ++i) r.d[i] = r.v * (b.d[i] * la + b.v * a.d[i] / a.v);
        }
      }
      break;
    }
    case Op::Neg:
      r.v = -a.v;
      r.d = std::move(a.d);
      for (double& x : r.d) x = -x;
      break;
    case Op::Exp:
      r.v = std::exp(a.v);
      r.d = std::move(a.d);
      for (double& x : r.d) x *= r.v;
      break;
    case Op::Ln:
      if (!(a.v > 0.0)) domain_fault("ln of a non-positive value");
      r.v = std::log(a.v);
      r.d = std::move(a.d);
      for (double& x : r.d) x /= a.v;
      break;
    case Op::Sin: {
      r.v = std::sin(a.v);
      const double c = std::cos(a.v);
      r.d = std::move(a.d);
      for (double& x : r.d) x *= c;
      break;
    }
    case Op::Cos: {
      r.v = std::cos(a.v);
      const double s = -std::sin(a.v);
      r.d = std::move(a.d);
      for (double& x : r.d) x *= s;
      break;
    }
    case Op::Sqrt:
      if (a.v < 0.0) domain_fault("sqrt of a negative value");
      if (a.v == 0.0) not_differentiable("sqrt at 0");
      r.v = std::sqrt(a.v);
      r.d = std::move(a.d);
      for (double& x : r.d) x /= 2.0 * r.v;
      break;
    case Op::Abs: {
      if (a.v == 0.0) not_differentiable("abs at 0");
      r.v = std::fabs(a.v);
      const double s = a.v > 0.0 ? 1.0 : -1.0;
      r.d = std::move(a.d);
      for (double& x : r.d) x *= s;
      break;
    }
    default: break;
  }
  checked(r.v);
  check_grad(r);
  return r;
}

int precedence(const Expr::Node& n) {
  switch (n.op) {
    case Op::Add:
    case Op::Sub: return 1;
    case Op::Mul:
    case Op::Div: return 2;
    case Op::Neg: return 3;
    case Op::Pow: return 4;
    default: return 5;
  }
}

void print(const Expr::Node& n, int min_prec, std::string& out) {
  const bool paren = precedence(n) < min_prec;
  if (paren) out += '(';
  switch (n.op) {
    case Op::Num: {
      char buf[40];
      std::snprintf(buf, sizeof buf, "%.17g", n.value);
      out += buf;
      break;
    }
    case Op::Var: {
      static const char* names[] = {"t", "x", "u", "lam", "v"};
      out += names[static_cast<int>(n.kind)];
      if (n.kind != VarKind::T) out += std::to_string(n.index + 1);
      break;
    }
    case Op::Add:
    case Op::Sub:
      print(*n.a, 1, out);
      out += n.op == Op::Add ? " + " : " - ";
      print(*n.b, 2, out);
      break;
    case Op::Mul:
    case Op::Div:
      print(*n.a, 2, out);
      out += n.op == Op::Mul ? "*" : "/";
      print(*n.b, 3, out);
      break;
    case Op::Neg:
      out += '-';
      print(*n.a, 3, out);
      break;
    case Op::Pow:
      print(*n.a, 5, out);
      out += '^';
      print(*n.b, 3, out);
      break;
    default:
      out += fn_name(n.op);
      out += '(';
      print(*n.a, 0, out);
      out += ')';
      break;
  }
  if (paren) out += ')';
}

bool same(const Expr::Node* x, const Expr::Node* y) {
  if (!x || !y) return x == y;
  if (x->op != y->op) return false;
  if (x->op == Op::Num) return x->value == y->value;
  if (x->op == Op::Var) return x->slot == y->slot && x->kind == y->kind;
  return same(x->a.get(), y->a.get()) && same(x->b.get(), y->b.get());
}

bool uses(const Expr::Node* n, VarKind kind) {
  if (!n) return false;
  if (n->op == Op::Var) return n->kind == kind;
  return uses(n->a.get(), kind) || uses(n->b.get(), kind);
}

}  // namespace

Expr Expr::parse(std::string_view src, const Dims& dims) {
  Parser p(src, dims);
  return Expr(p.parse(), dims);
}

double Expr::eval(std::span<const double> env) const {
  if (env.size() < dims_.size()) throw ValidationError("expression environment is missing variables");
  return eval_node(*root_, env);
}

double Expr::gradient(std::span<const double> env, std::span<const std::size_t> wrt,
                      std::span<double> out) const {
  if (env.size() < dims_.size()) throw ValidationError("expression environment is missing variables");
  if (out.size() < wrt.size()) throw ValidationError("gradient output is too small");
  for (std::size_t s : wrt)
    if (s >= dims_.size()) throw ValidationError("gradient slot outside the declared variables");
  const Dual r = dual_node(*root_, env, wrt);
  std::copy(r.d.begin(), r.d.end(), out.begin());
  return r.v;
}

std::vector<double> Expr::derive(std::span<const double> env, std::span<const std::size_t> wrt) const {
  std::vector<double> out(wrt.size());
  gradient(env, wrt, out);
  return out;
}

std::string Expr::to_string() const {
  std::string out;
  print(*root_, 0, out);
  return out;
}

bool Expr::same_tree(const Expr& other) const { return same(root_.get(), other.root_.get()); }

bool Expr::depends_on(VarKind kind) const { return uses(root_.get(), kind); }

namespace {

std::size_t kind_size(const Dims& d, VarKind k) {
  switch (k) {
    case VarKind::T: return 1;
    case VarKind::X: return d.n;
    case VarKind::U: return d.m;
    case VarKind::Lam: return d.lam;
    case VarKind::V: return d.v;
  }
  return 0;
}

NodePtr remap_node(const NodePtr& node, const Dims& target, VarKind from, VarKind to) {
  if (!node) return node;
  auto out = std::make_shared<Expr::Node>(*node);
  if (node->op == Op::Var) {
    if (node->kind == from) out->kind = to;
    if (out->kind != VarKind::T && out->index >= kind_size(target, out->kind))
      throw ValidationError("remap: variable index exceeds the target dimensions");
    out->slot = target.slot(out->kind, out->index);
    return out;
  }
  out->a = remap_node(node->a, target, from, to);
  out->b = remap_node(node->b, target, from, to);
  return out;
}

}  // namespace

Expr Expr::remap(const Dims& target, VarKind from, VarKind to) const {
  return Expr(remap_node(root_, target, from, to), target);
}

}  // namespace akfrac
