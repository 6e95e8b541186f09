#include "lamina/fixtures.hpp"

#include <stdexcept>

namespace lamina::fixtures {

namespace {

AngleSet over(long den, std::initializer_list<long> nums) {
  std::vector<Angle> v;
  v.reserve(nums.size());
  for (long n : nums) v.emplace_back(n, den);
  return AngleSet(v);
}

// Grow a quadratic tower by repeatedly pulling back through the diameter
// {cut, cut + 1/2}.  The cut is chosen inside the critical gap so that the
// diameter crosses the critical Fatou component at every depth, which pins
// the pullback pairings to the ones the actual polynomial realizes.
PuzzleTower grow_quadratic(std::vector<AngleSet> seed, const Angle& cut, int depth) {
  mpq_class other = cut.value() + mpq_class(1, 2);
  if (other >= 1) other -= 1;
  const AngleSet cuts{cut, Angle(other)};
  PuzzleTower tower({FiniteLamination(2, std::move(seed))});
  while (tower.depth() < depth) tower = extend_tower(tower, cuts);
  return tower;
}

PuzzleTower stacked(int degree, int depth, std::vector<std::vector<AngleSet>> added,
                    const char* name) {
  if (depth < 0 || depth >= static_cast<int>(added.size()))
    throw std::invalid_argument(std::string(name) + ": depth " + std::to_string(depth) +
                                " not available (max " + std::to_string(added.size() - 1) + ")");
  std::vector<FiniteLamination> levels;
  std::vector<AngleSet> classes;
  for (int k = 0; k <= depth; ++k) {
    for (AngleSet& c : added[static_cast<std::size_t>(k)]) classes.push_back(std::move(c));
    levels.emplace_back(degree, classes);
  }
  return PuzzleTower(std::move(levels));
}

}  // namespace

PuzzleTower basilica(int depth) {
  return grow_quadratic({over(3, {1, 2})}, Angle(1, 5), depth);
}

PuzzleTower rabbit(int depth) {
  return grow_quadratic({over(7, {1, 2, 4})}, Angle(5, 63), depth);
}

PuzzleTower airplane(int depth) {
  return grow_quadratic({over(7, {3, 4}), over(7, {6, 1}), over(7, {2, 5})}, Angle(2, 9), depth);
}

PuzzleTower cubic_odd(int depth) {
  return stacked(3, depth,
                 {{over(2, {0, 1})},
                  {over(6, {1, 2}), over(6, {4, 5})},
                  {over(18, {1, 2}), over(18, {7, 8}), over(18, {13, 14}), over(18, {4, 5}),
                   over(18, {10, 11}), over(18, {16, 17})}},
                 "cubic_odd");
}

PuzzleTower quartic(int depth) {
  return stacked(
      4, depth,
      {{over(5, {2, 3})},
       {over(20, {3, 7}), over(20, {13, 17}), over(10, {9, 1})},
       {over(80, {3, 7}), over(80, {23, 27}), over(80, {43, 47}), over(80, {63, 67}),
        over(80, {13, 17}), over(80, {33, 37}), over(80, {53, 57}), over(80, {73, 77}),
        over(40, {39, 1}), over(40, {9, 11}), over(40, {19, 21}), over(40, {29, 31})}},
      "quartic");
}

PuzzleTower cubic_capture(int depth) {
  return stacked(3, depth,
                 {{over(8, {1, 3})},
                  {over(24, {1, 11}), over(24, {17, 19})},
                  {over(72, {11, 25}), over(72, {35, 49}), over(72, {59, 1}),
                   over(72, {17, 19}), over(72, {41, 43}), over(72, {65, 67})}},
                 "cubic_capture");
}

PuzzleTower cubic_pinched(int depth) {
  return stacked(3, depth,
                 {{over(8, {1, 3})},
                  {over(24, {1, 11, 17, 19})},
                  {over(72, {11, 17, 19, 25}), over(72, {35, 41, 43, 49}),
                   over(72, {59, 65, 67, 1})}},
                 "cubic_pinched");
}

PuzzleTower septic_split(int depth) {
  return stacked(7, depth,
                 {{over(12, {1, 5}), over(12, {7, 11})},
                  {over(84, {11, 31}), over(84, {13, 29}), over(84, {17, 25}),
                   over(84, {19, 23}), over(84, {53, 73}), over(84, {55, 71}),
                   over(84, {59, 67}), over(84, {61, 65}), over(84, {1, 5}),
                   over(84, {79, 83}), over(84, {37, 41}), over(84, {43, 47})}},
                 "septic_split");
}

PuzzleTower septic_fused(int depth) {
  return stacked(7, depth,
                 {{over(12, {1, 5, 7, 11})},
                  {over(84, {11, 13, 17, 19, 23, 25, 29, 31}),
                   over(84, {53, 55, 59, 61, 65, 67, 71, 73}), over(84, {79, 83, 1, 5}),
                   over(84, {37, 41, 43, 47})}},
                 "septic_fused");
}

const std::vector<FixtureInfo>& catalog() {
  static const std::vector<FixtureInfo> entries = {
      {"basilica", "z^2 - 1: superattracting 2-cycle 0 <-> -1", 2, 3, -1, &basilica},
      {"rabbit", "z^2 + c, c = -0.122561 + 0.744862i: superattracting 3-cycle", 2, 2, -1,
       &rabbit},
      {"airplane", "z^2 - 1.754878: real superattracting 3-cycle", 2, 4, -1, &airplane},
      {"cubic_odd", "z^3 + 3z/2: fixed critical points +-i/sqrt(2)", 3, 2, 2, &cubic_odd},
      {"quartic", "z^4 - 1: superattracting 2-cycle with fourfold ray symmetry", 4, 2, 2,
       &quartic},
      {"cubic_capture", "cubic 2-cycle {0,1}; free critical point falls onto the cycle", 3, 2,
       2, &cubic_capture},
      {"cubic_pinched", "cubic 2-cycle {0,1}; free critical point welded to a repelling fixed point",
       3, 2, 2, &cubic_pinched},
      {"septic_split", "odd degree-7 hyperbolic: critical 2-cycle +-i with captured companions",
       7, 1, 1, &septic_split},
      {"septic_fused", "odd degree-7 after the period-two points collapse at the origin", 7, 1,
       1, &septic_fused},
  };
  return entries;
}

PuzzleTower build(const std::string& name, int depth) {
  for (const FixtureInfo& info : catalog()) {
    if (info.name != name) continue;
    const int want = depth < 0 ? info.default_depth : depth;
    if (info.max_depth >= 0 && want > info.max_depth)
      throw std::invalid_argument(name + ": depth " + std::to_string(want) +
                                  " not available (max " + std::to_string(info.max_depth) + ")");
    return info.build(want);
  }
  throw std::invalid_argument("unknown fixture: " + name);
}

}  // namespace lamina::fixtures
