#pragma once

#include <optional>
#include <vector>

#include "lamina/lamination.hpp"
#include "lamina/schema.hpp"
#include "lamina/tower.hpp"

namespace lamina {

// Internal coordinates on the boundary of one self-returning critical gap.
//
// The first return of the gap is a degree-`degree` covering of its boundary
// circle, and the coding pins down the conjugacy to angle `degree`-tupling:
// the root class sits at internal angle 0 and the `degree` boundary classes
// that return onto the root cut the boundary into sectors 0..degree-1,
// labelled counterclockwise from the root.  Everything here is finite-depth
// data read off a PieceTable, so queries refuse (std::invalid_argument) when
// the stored boundary is too shallow to answer them.
struct GapCoding {
  int vertex = 0;          // canonical vertex index in the reduced schema
  int ambient_degree = 2;  // degree of the ambient angle map
  int period = 1;          // first-return time of the gap
  int degree = 2;          // covering degree of the return on the gap boundary

  AngleSet root;                  // boundary class at internal angle 0
  std::vector<AngleSet> sectors;  // bounding classes, ccw; sectors[0] == root
  // Angular span of each sector: from the exit contact of sectors[s] ccw to
  // the entry contact of sectors[(s+1) % degree].  Used half-open [start,end)
  // for sector lookup; bounding-class angles are resolved by membership.
  std::vector<Arc> spans;

  std::vector<Arc> arcs;           // deepest known face arcs of the gap, ccw
  std::vector<AngleSet> boundary;  // deepest known boundary classes
};

// Reads the coding of `vertex` off the table.  The vertex must return to
// itself directly (sigma(vertex) == vertex in the reduced schema); gaps on
// longer cycles are not coded and are refused.  The root defaults to the
// return-fixed boundary class containing the smallest angle; `root_hint`
// overrides it with the (return-fixed) class containing that angle.
GapCoding gap_coding(const PieceTable& pieces, int vertex,
                     std::optional<Angle> root_hint = {});

// Codings for every self-returning vertex of the reduced schema, in vertex
// order.  Vertices on longer sigma-cycles are skipped, as are vertices whose
// coding the stored depth cannot resolve.
std::vector<GapCoding> standard_codings(const PieceTable& pieces);

// True when theta lies on the known part of the gap boundary: inside or on
// a stored face arc, or in a stored boundary class.
bool on_gap_boundary(const GapCoding& coding, const Angle& theta);

// Sector label of a gap-boundary angle.  Angles of a bounding class take
// the sector that class opens; everything else resolves by angular span.
int sector_of(const GapCoding& coding, const Angle& theta);

// Internal angle of a boundary point: the sector itinerary of theta under
// the first return, summed as sum s_n degree^-(n+1).  Exact; class-constant.
// Throws std::invalid_argument when theta is off the known boundary or the
// itinerary runs out of resolved data ("insufficient depth").
Angle alpha(const GapCoding& coding, const Angle& theta);

// External position of internal angle t: the boundary class whose itinerary
// spells the base-`degree` digits of t.  Returns a stored boundary class
// when the solved angle lies in one, else the singleton of the solved angle.
// Throws std::invalid_argument when the pullback cannot be resolved at the
// stored depth.
AngleSet alpha_inverse(const GapCoding& coding, const Angle& t);

// A lamination per vertex of a reduced schema, each tagged with that
// vertex's return degree.
struct SchemaLamination {
  MappingSchema schema;
  std::vector<FiniteLamination> laminations;  // one per vertex, same order

  bool operator==(const SchemaLamination& o) const = default;
};

// Structural checks: shapes line up, each per-vertex relation passes
// verify_lamination, and pushing a class of laminations[v] forward by
// delta(v)-tupling lands exactly on a class of laminations[sigma(v)],
// preserving cyclic order.
ValidationReport verify_schema_lamination(const SchemaLamination& data);

// Inserts `target` into the gaps of the tower behind `pieces`: each class of
// target.laminations[v] is carried to the gap boundary of v through
// alpha_inverse, the tower's own deepest classes are kept, and the union is
// closed under the angle map.  depth_budget caps the digit expansions that
// alpha_inverse must resolve (preperiod + period per angle); 0 picks
// 3 * (largest return period or digit expansion in play).  Refusals name the
// budget that would suffice.  The result verifies and is forward-invariant
// on its support.
FiniteLamination tune(const PieceTable& pieces, const std::vector<GapCoding>& codings,
                      const SchemaLamination& target, int depth_budget = 0);

// Reads a schema lamination back off a tuned relation: for each coded
// vertex, every class of `lam` meeting the known gap boundary is pushed
// forward through alpha; classes collapsing to a point are dropped.
// Vertices without a coding receive the trivial lamination.
SchemaLamination straighten_combinatorial(const PieceTable& pieces,
                                          const std::vector<GapCoding>& codings,
                                          const FiniteLamination& lam);

std::string to_string(const GapCoding& coding);

}  // namespace lamina
