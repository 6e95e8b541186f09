#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "lamina/lamination.hpp"

namespace lamina {

// A finite stack of laminations Lam[0..K] under a single angle map m_d.
// Level k+1 refines level k: its support is the full m_d-preimage of the
// level-k support and its classes push forward onto the level-k classes.
class PuzzleTower {
 public:
  explicit PuzzleTower(std::vector<FiniteLamination> levels);

  int degree() const { return degree_; }
  int depth() const { return static_cast<int>(levels_.size()) - 1; }
  const FiniteLamination& level(int k) const { return levels_.at(static_cast<std::size_t>(k)); }
  const std::vector<FiniteLamination>& levels() const { return levels_; }

 private:
  int degree_;
  std::vector<FiniteLamination> levels_;
};

// True when m_d maps A onto B one cyclic step at a time: the image of the
// cyclic successor in A is the cyclic successor of the image in B.  This is
// what "covering of one cyclic set by another" unwinds to for finite sets;
// it accepts collapses onto singletons and rejects order reversal.
bool consecutive_preserving(const AngleSet& A, const AngleSet& B, int degree);

// Every tower axiom, with named witnesses:
//   support-periodic      level-0 support angles must be m_d-periodic
//   class-image-is-class  the image of a class is exactly a class one level up
//   consecutive-preserving cyclic order is preserved by the push-forward
//   nontrivial-image      a non-singleton class may not collapse to a singleton
//                         across levels (k+1 -> k)
//   support-preimage      supp(Lam[k+1]) == m_d^{-1}(supp(Lam[k]))
//   pushforward-onto      every level-k class is the image of a level-(k+1) class
//   level-restriction     Lam[k+1] restricted to supp(Lam[k]) equals Lam[k];
//                         this pins the pairing of preimage chords so that
//                         deeper pieces nest inside shallower ones
// plus the per-level lamination axioms (prefixed "level k:").
ValidationReport verify_tower(const PuzzleTower& tower);

// A complementary face of one level of the tower: a cycle of atomic arcs
// between consecutive support points, traced by jumping chords.
struct Piece {
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  int depth = 0;
  std::vector<Arc> arcs;                       // ccw, smallest start first
  std::vector<std::size_t> boundary_classes;   // class indices at this level
  int degree = 1;                              // max fiber cardinality of m_d here
  mpq_class measure;                           // total arc length
  std::size_t index = 0;                       // position in its level's face list
  std::size_t parent = npos;                   // face one level up containing this one
  std::size_t image = npos;                    // face one level up the arcs map onto

  bool contains(const Angle& a) const;         // strictly inside some arc
  bool closure_contains(const Angle& a) const; // inside an arc or an endpoint
  std::string str() const;
};

// Faces of every level, with degrees, nesting and image structure.
// Requires a tower that passes verify_tower; inconsistencies that the tower
// axioms rule out are reported as std::logic_error.
class PieceTable {
 public:
  explicit PieceTable(const PuzzleTower& tower);

  const PuzzleTower& tower() const { return tower_; }
  int depth() const { return static_cast<int>(levels_.size()) - 1; }
  const std::vector<Piece>& at(int k) const { return levels_.at(static_cast<std::size_t>(k)); }
  const Piece& piece(int k, std::size_t i) const { return levels_.at(static_cast<std::size_t>(k)).at(i); }

  // Face containing a strictly; nullopt when a is a support point of level k.
  std::optional<std::size_t> find(int k, const Angle& a) const;

 private:
  PuzzleTower tower_;
  std::vector<std::vector<Piece>> levels_;
  std::vector<std::map<Angle, std::size_t>> arc_start_to_face_;
};

// Ramification bookkeeping for one level: which faces and which classes
// absorb the d-1 units of criticality, and whether they add up.
struct CriticalInventory {
  int depth = 0;
  std::vector<std::size_t> critical_faces;     // degree >= 2
  std::vector<std::size_t> critical_classes;   // |C| > |m_d(C)|
  int face_degree_sum = 0;                     // sum over faces of (degree - 1)
  int class_degree_sum = 0;                    // sum over classes of (degree - 1)
  bool identity_holds = false;                 // 1 + sums == degree
};

CriticalInventory critical_inventory(const PieceTable& pieces, int k);

// The degree identity at every level; failures are appended to the report.
bool total_degree_check(const PieceTable& pieces, ValidationReport* report = nullptr);

// Transitive closure of "these angles share a class at some level".
// Targets outside every support become singleton classes and are flagged
// shallow (no level ever saw them).
FiniteLamination generated_classes(const PuzzleTower& tower, const AngleSet& targets,
                                   std::vector<bool>* shallow = nullptr);

/// One critical gap seen through the tower: pieces[k] is the face index at
// depth k.  shift counts forward images applied to a deeper ancestor chain,
// so a chain with shift j only reaches depth K - j.
struct GapChain {
  std::vector<std::size_t> pieces;
  int shift = 0;
  int source = 0;                // which depth-K critical face spawned the orbit
  int top() const { return static_cast<int>(pieces.size()) - 1; }
  std::size_t deepest() const { return pieces.back(); }
};

// orbits[c][j] = the chain of the c-th depth-K critical face pushed forward
// j times; j runs 0..K.
std::vector<std::vector<GapChain>> chain_orbits(const PieceTable& pieces);

// Boundary classes of the deepest available piece of a chain, as angles.
AngleSet chain_boundary_angles(const PieceTable& pieces, const GapChain& chain);

// Smallest k at which every chain's degree at depth k already equals its
// stable (deepest) degree; nullopt when no such k exists within this tower.
// When expected_degrees is given, the multiset of stable chain degrees of
// the shift-0 chains must match it, else nullopt.
std::optional<int> separation_depth(const PieceTable& pieces,
                                    const std::optional<std::vector<int>>& expected_degrees = std::nullopt);

struct PrimitivityResult {
  bool witness_found = false;
  int depth_checked = 0;
  AngleSet witness;              // generated class meeting two distinct gap boundaries
  std::pair<int, int> gaps{-1, -1};
  std::string detail;
};

// Searches for a generated class meeting the boundary-class angles of two
// distinct critical-orbit gaps.  No witness means primitive to this depth.
PrimitivityResult primitivity_check(const PieceTable& pieces);

struct ObstructionResult {
  bool witness_found = false;
  AngleSet witness;              // critical class shadowing a gap chain
  int gap = -1;
  std::string detail;
};

// Searches for a critical class (a class of degree >= 2, a branch point on
// the Julia side) whose angles meet the closure of some critical-orbit
// chain's piece at every available depth.  Such a class blocks the gap's
// first-return dynamics from being straightened in isolation.
ObstructionResult renormalizability_obstruction(const PieceTable& pieces);

// A request to merge whole preimage windows of one parent class during a
// pullback, creating a class of degree = windows.size() at a critical point.
struct ExtensionJoin {
  std::size_t parent = 0;            // class index at the level being pulled back
  std::vector<int> windows;          // window indices in [0, d)
};

// Pull one lamination back through m_d.  The cut set must be one full fiber
// {w, w + 1/d, ...}; the d windows between consecutive cuts each hold exactly
// one preimage of every class angle, and each window contributes one class
// per parent (subject to joins).  Throws std::invalid_argument when the cut
// collides with class angles or a join is malformed.
FiniteLamination pullback_level(const FiniteLamination& level, int degree, const AngleSet& cuts,
                                const std::vector<ExtensionJoin>& joins = {});

// Extend the tower one level down using an explicit marking (cut fiber plus
// optional window joins).  Refuses (std::invalid_argument, with the failing
// axiom) rather than guessing when the marking is ambiguous or the result
// would not verify.
PuzzleTower extend_tower(const PuzzleTower& tower, const AngleSet& cuts,
                         const std::vector<ExtensionJoin>& joins = {});

// Convenience: derive the cut fiber from a base angle omega (cuts = its
// preimages).  omega must not be a support angle of the deepest level.
PuzzleTower extend_tower(const PuzzleTower& tower, const Angle& omega,
                         const std::vector<ExtensionJoin>& joins = {});

// Random valid tower: a seed level-0 lamination for the degree, extended to
// target_depth with random cut fibers and occasional random window joins
// (dropped when they fail to verify).  Deterministic per rng state.
PuzzleTower random_tower(std::mt19937_64& rng, int degree, int target_depth);

// True when the angle's forward orbit under m_d revisits a class of the
// deepest level it has already visited (the combinatorial stand-in for
// "non-wandering" within the available data).
bool orbit_repeats(const PuzzleTower& tower, const Angle& a);

std::string to_string(const PuzzleTower& tower);

}  // namespace lamina
