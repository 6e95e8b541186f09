#pragma once

// Stock towers for well-known polynomials, used by the tests and the CLI.
// The quadratic ones are grown level by level from their seed lamination;
// the others carry hand-checked class lists up to a fixed depth.

#include <string>
#include <vector>

#include "lamina/tower.hpp"

namespace lamina::fixtures {

struct FixtureInfo {
  std::string name;
  std::string summary;
  int degree = 2;
  int default_depth = 2;
  // Deepest level available; -1 when the tower can be grown to any depth.
  int max_depth = -1;
  PuzzleTower (*build)(int depth) = nullptr;
};

const std::vector<FixtureInfo>& catalog();

// Build a catalog fixture by name; depth -1 means its default depth.
// Throws std::invalid_argument for unknown names or unavailable depths.
PuzzleTower build(const std::string& name, int depth = -1);

// z^2 - 1: superattracting 2-cycle 0 <-> -1.
PuzzleTower basilica(int depth = 3);
// z^2 + c, c = -0.122561 + 0.744862i: superattracting 3-cycle, one ray triple fixed.
PuzzleTower rabbit(int depth = 2);
// z^2 + c, c = -1.754878: real superattracting 3-cycle.
PuzzleTower airplane(int depth = 4);
// z^3 + 3z/2: fixed critical points +-i/sqrt(2); rays 0 and 1/2 land together.
PuzzleTower cubic_odd(int depth = 2);
// z^4 - 1: superattracting 2-cycle 0 <-> -1 with fourfold ray symmetry.
PuzzleTower quartic(int depth = 2);
// a z^3 - (a+1) z^2 + 1, a = -1/4: 2-cycle {0,1}; free critical point falls onto it.
PuzzleTower cubic_capture(int depth = 2);
// Same family, a = (11 - 3 sqrt(17))/4: free critical point hits the repelling
// fixed point where the two basin closures meet, welding ray classes together.
PuzzleTower cubic_pinched(int depth = 2);
// Odd degree-7 hyperbolic polynomial: critical 2-cycle +-i plus captured companions.
PuzzleTower septic_split(int depth = 1);
// Its perturbation where the period-two points collapse at the origin.
PuzzleTower septic_fused(int depth = 1);

}  // namespace lamina::fixtures
