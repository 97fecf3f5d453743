#pragma once

// Built-in example systems with their published characteristic points and
// extreme points. `printed` keeps the digits or closed form as published;
// `value` is its numeric reading.

#include <cmath>
#include <optional>
#include <string>
#include <vector>

namespace charpoint {

struct ExpectedCoordinate {
  std::string printed;
  double value;
};

struct ExpectedPoint {
  std::vector<ExpectedCoordinate> coords;  // a, b_1, ..., b_m
  double tolerance;
  std::optional<bool> eigenpoint;
};

struct ExpectedExtreme {
  std::string method;  // "eigenpoint" or "boundary-estimated"
  std::vector<ExpectedCoordinate> coords;  // rho, tau_1, ..., tau_m; empty when unpublished
  double tolerance;
  std::optional<double> lambda;
  double lambda_tolerance = 1e-6;
};

struct RegistryEntry {
  std::string key;
  std::string title;
  std::string text;
  std::optional<std::size_t> point_count;  // unset when no count is published
  std::vector<ExpectedPoint> points;
  std::optional<ExpectedExtreme> extreme;
};

inline const std::vector<RegistryEntry>& registry() {
  const double r2 = std::sqrt(2.0), r3 = std::sqrt(3.0), r5 = std::sqrt(5.0);
  static const std::vector<RegistryEntry> entries = {
      {"ex-3.1",
       "y = x(1 + y^2); interior characteristic point",
       "y = x*(1 + y^2);\n",
       1,
       {{{{"1/2", 0.5}, {"1", 1.0}}, 1e-9, true}},
       ExpectedExtreme{"eigenpoint", {{"1/2", 0.5}, {"1", 1.0}}, 1e-9, 1.0}},
      {"ex-3.1-mod",
       "y = S(x)(1 + y^2)/2 with S the solution of y = x(1 + y^2); characteristic point on the boundary",
       "let S = solve { y = x*(1 + y^2); };\ny = 1/2*S*(1 + y^2);\n",
       1,
       {{{{"1/2", 0.5}, {"1", 1.0}}, 1e-6, true}},
       ExpectedExtreme{"eigenpoint", {{"1/2", 0.5}, {"1", 1.0}}, 1e-6, 1.0, 1e-4}},
      {"ex-3.2",
       "y = x(1 + 2y + 2y^2)",
       "y = x*(1 + 2*y + 2*y^2);\n",
       1,
       {{{{"(sqrt(2)-1)/2", (r2 - 1) / 2}, {"sqrt(2)/2", r2 / 2}}, 1e-9, true}},
       ExpectedExtreme{"eigenpoint", {{"(sqrt(2)-1)/2", (r2 - 1) / 2}, {"sqrt(2)/2", r2 / 2}}, 1e-9, 1.0}},
      {"ex-3.2-mod",
       "y = x(1 + S(x) + y + 2y^2) with S the solution of ex-3.2; no characteristic point",
       "let S = solve { y = x*(1 + 2*y + 2*y^2); };\ny = x*(1 + S + y + 2*y^2);\n",
       0,
       {},
       // Lambda = rho(1 + 4 tau)
       ExpectedExtreme{"boundary-estimated",
                       {{"(sqrt(2)-1)/2", (r2 - 1) / 2}, {"sqrt(2)/2", r2 / 2}},
                       1e-6,
                       (r2 - 1) / 2 * (1 + 2 * r2),
                       1e-5}},
      {"meir-moon",
       "y = A(x) e^y with A(x) = (1/6) sum x^n/n^2; no characteristic point",
       "y = 1/6*polylog(2, x)*exp(y);\n",
       0,
       {},
       // at the boundary Lambda = A(1) e^tau = tau
       ExpectedExtreme{"boundary-estimated", {{"1.00", 1.0}, {"0.41529", 0.41529}}, 5e-4, 0.41529, 5e-4}},
      {"ex-3.6",
       "a=0, b=9, c1=0, c2=1, d=1: boundary eigenpoint and an interior characteristic point",
       "let A = solve { y = x*(1 + 9*y^2); };\ny1 = A*(1 + y2 + y1^2);\ny2 = A*(1 + y1 + y2^2);\n",
       2,
       {{{{"1/6", 1.0 / 6}, {"1", 1.0}, {"1", 1.0}}, 1e-6, true},
        {{{"(1+16*sqrt(2))/146", (1 + 16 * r2) / 146}, {"1+sqrt(2)", 1 + r2}, {"1+sqrt(2)", 1 + r2}}, 1e-6, false}},
       ExpectedExtreme{"eigenpoint", {{"1/6", 1.0 / 6}, {"1", 1.0}, {"1", 1.0}}, 1e-6, 1.0, 1e-4}},
      {"ex-3.7",
       "a=0, b=16, c1=1, c2=1, d=1: extreme point is not a characteristic point",
       "let A = solve { y = x*(1 + 16*y^2); };\nlet T = solve { y = A*(1 + 2*y + y^2); };\n"
       "y1 = A*(1 + T + y2 + y1^2);\ny2 = A*(1 + T + y1 + y2^2);\n",
       1,
       {{{{"(30+17*sqrt(5))/545", (30 + 17 * r5) / 545}, {"(3+sqrt(5))/2", (3 + r5) / 2}, {"(3+sqrt(5))/2", (3 + r5) / 2}},
         1e-6,
         false}},
       ExpectedExtreme{"boundary-estimated", {{"1/8", 0.125}, {"1", 1.0}, {"1", 1.0}}, 1e-6, 0.75}},
      {"ex-4.1",
       "symmetric polynomial system with two characteristic points",
       "y1 = x*(1 + y2 + 2*y1^2);\ny2 = x*(1 + y1 + 2*y2^2);\n",
       2,
       {{{{"(2*sqrt(2)-1)/7", (2 * r2 - 1) / 7}, {"1/sqrt(2)", 1 / r2}, {"1/sqrt(2)", 1 / r2}}, 1e-6, true},
        {{{"(2*sqrt(3)-1)/11", (2 * r3 - 1) / 11}, {"(1+sqrt(3))/2", (1 + r3) / 2}, {"(1+sqrt(3))/2", (1 + r3) / 2}},
         1e-6,
         false}},
       ExpectedExtreme{"eigenpoint",
                       {{"(2*sqrt(2)-1)/7", (2 * r2 - 1) / 7}, {"1/sqrt(2)", 1 / r2}, {"1/sqrt(2)", 1 / r2}},
                       1e-6,
                       1.0}},
      {"ex-5.4",
       "polynomial system with four characteristic points",
       "y1 = x*(1 + 2*y1^3 + 2*x^3*y1^3*y2);\ny2 = x*(1 + x^3*y2 + 2*y1^3*y2^2);\n",
       4,
       {{{{"0.4153198", 0.4153198}, {"0.6217456", 0.6217456}, {"0.4743552", 0.4743552}}, 1e-5, true},
        {{{"0.3867644", 0.3867644}, {"0.6661246", 0.6661246}, {"3.834789", 3.834789}}, 1e-5, false},
        {{{"0.2640956", 0.2640956}, {"1.210710", 1.210710}, {"0.5353688", 0.5353688}}, 1e-5, false},
        {{{"0.1818598", 0.1818598}, {"1.556545", 1.556545}, {"0.3647603", 0.3647603}}, 1e-5, false}},
       ExpectedExtreme{"eigenpoint", {{"0.4153198", 0.4153198}, {"0.6217456", 0.6217456}, {"0.4743552", 0.4743552}},
                       1e-5, 1.0}},
      {"sec-4.1",
       "irreducible 4-equation system whose Jacobian keeps structural zeros under iteration",
       "y1 = x*(1 + y2^2 + y4^2);\ny2 = x*(1 + y1^2 + y3^2);\ny3 = x*(1 + y4^2);\ny4 = x*(1 + y1^2);\n",
       std::nullopt,
       {},
       // polynomial and irreducible, so the extreme point is an eigenpoint
       ExpectedExtreme{"eigenpoint", {}, 0.0, 1.0}},
  };
  return entries;
}

inline const RegistryEntry* find_registry_entry(const std::string& key) {
  for (const auto& e : registry())
    if (e.key == key) return &e;
  return nullptr;
}

}  // namespace charpoint
