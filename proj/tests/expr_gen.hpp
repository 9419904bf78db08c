#pragma once

#include <cstdio>
#include <string>

#include "support.hpp"

namespace akfrac::testing {

inline std::string literal(Gen& g) {
  char buf[40];
  switch (g.integer(0, 2)) {
    case 0: std::snprintf(buf, sizeof buf, "%d", g.integer(0, 9)); break;
    case 1: std::snprintf(buf, sizeof buf, "%.3f", g.uniform(0.0, 3.0)); break;
    default: std::snprintf(buf, sizeof buf, "%.17g", g.uniform(0.0, 2.0)); break;
  }
  return buf;
}

inline std::string variable(Gen& g) {
  static const char* names[] = {"t", "x1", "x2", "u1", "u2", "lam1", "v1"};
  return names[g.integer(0, 6)];
}

// Arbitrary syntax, no care for domains: for parser round trips.
inline std::string any_expr(Gen& g, int depth) {
  if (depth == 0 || g.integer(0, 4) == 0) return g.coin() ? literal(g) : variable(g);
  const int d = depth - 1;
  switch (g.integer(0, 12)) {
    case 0: return any_expr(g, d) + " + " + any_expr(g, d);
    case 1: return any_expr(g, d) + "-" + any_expr(g, d);
    case 2: return any_expr(g, d) + "*" + any_expr(g, d);
    case 3: return any_expr(g, d) + " / " + any_expr(g, d);
    case 4: return any_expr(g, d) + "^" + any_expr(g, d);
    case 5: return "-" + any_expr(g, d);
    case 6: return "(" + any_expr(g, d) + ")";
    case 7: return "pow(" + any_expr(g, d) + ", " + any_expr(g, d) + ")";
    case 8: return "exp(" + any_expr(g, d) + ")";
    case 9: return "ln(" + any_expr(g, d) + ")";
    case 10: return "sqrt(" + any_expr(g, d) + ")";
    case 11: return "abs(" + any_expr(g, d) + ")";
    default: return (g.coin() ? "sin(" : "cos(") + any_expr(g, d) + ")";
  }
}

// Smooth everywhere, with every domain guarded by construction. Products and
// powers act on squashed operands so intermediate values stay moderate and the
// finite-difference oracle remains meaningful.
inline std::string smooth_expr(Gen& g, int depth) {
  if (depth == 0 || g.integer(0, 5) == 0) return g.coin() ? literal(g) : variable(g);
  const int d = depth - 1;
  const std::string a = "(" + smooth_expr(g, d) + ")";
  switch (g.integer(0, 11)) {
    case 0: return a + " + " + smooth_expr(g, d);
    case 1: return a + " - (" + smooth_expr(g, d) + ")";
    case 2: return a + "*sin(" + smooth_expr(g, d) + ")";
    case 3: return a + "/(" + a + "^2 + 1)";
    case 4: return "sin" + a + "^" + std::to_string(g.integer(2, 3));
    case 5: return "(sin" + a + "^2 + 1)^(0.5*sin(" + smooth_expr(g, d) + "))";
    case 6: return "-" + a;
    case 7: return "exp(sin" + a + ")";
    case 8: return "ln(" + a + "^2 + 1)";
    case 9: return "sqrt(" + a + "^2 + 1)";
    case 10: return "abs(sin" + a + " + 1.5)";
    default: return (g.coin() ? "sin" : "cos") + a;
  }
}

}  // namespace akfrac::testing
