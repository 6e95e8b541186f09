#pragma once

#include <string>
#include <vector>

#include "lamina/lamination.hpp"
#include "lamina/tower.hpp"

namespace lamina {

// A finite skew-product shape: vertices with a self-map sigma and a local
// degree delta per vertex.  This is the combinatorial footprint of a
// post-critically finite polynomial restricted to the components that carry
// its critical points: sigma records where each component goes on its first
// return to the marked set, delta the covering degree of that return.
struct MappingSchema {
  std::vector<std::string> vertices;
  std::vector<std::size_t> sigma;  // sigma[i] = index of the image vertex
  std::vector<int> delta;          // delta[i] >= 1; >= 2 means critical
  // Steps of the underlying circle map consumed by one sigma-step.  Empty
  // when the schema was written by hand; populated when reduced from a tower.
  std::vector<int> return_times;

  std::size_t size() const { return vertices.size(); }

  // Index of a named vertex, or throws std::out_of_range.
  std::size_t index_of(const std::string& name) const;

  friend bool operator==(const MappingSchema&, const MappingSchema&) = default;
};

// An external marking: one angle per vertex with delta(v) * theta_v landing
// on theta_sigma(v).  The angles pin down how external rays enter each
// component, which is the data a straightening has to choose.
struct Marking {
  std::vector<Angle> angles;  // aligned with schema.vertices

  friend bool operator==(const Marking&, const Marking&) = default;
};

// Structural checks: names unique and non-empty, sigma total, delta >= 1,
// return_times either absent or one positive entry per vertex.
ValidationReport validate_schema(const MappingSchema& schema);

// True when every vertex is critical (delta >= 2).
bool is_reduced(const MappingSchema& schema);

// Number of free coefficients of a monic centered polynomial tuple over the
// schema: sum of (delta(v) - 1).
int model_dimension(const MappingSchema& schema);

// Reorders vertices by (forward orbit length, eventual period, delta, label)
// and remaps sigma accordingly.  Stable under repetition; used for
// serialization and relabeling-invariant comparisons.
MappingSchema canonical_form(const MappingSchema& schema);

// Reads the reduced schema off a puzzle table: vertices are the gaps that
// carry critical faces at the deepest level, sigma follows each gap forward
// to its first return into that set, delta is the stabilized face degree.
// Requires separation_depth(pieces) and enough tower depth to observe every
// first return; throws std::invalid_argument otherwise.
//
// When `gap_of_vertex` is non-null it receives, per canonical vertex, the
// index of its gap orbit in chain_orbits(pieces).
MappingSchema reduce_from_tower(const PieceTable& pieces,
                                std::vector<std::size_t>* gap_of_vertex = nullptr);

enum class CubicType { adjacent, bitransitive, capture, disjoint };

std::string to_string(CubicType type);

// Matches a reduced schema with model dimension 2 against the four cubic
// templates, up to vertex relabeling.  Throws std::invalid_argument when the
// schema is not reduced-cubic.
CubicType classify_cubic(const MappingSchema& schema);

// Named cubic templates, canonical vertex labels.
MappingSchema cubic_schema(CubicType type);

// The complete list of markings of a reduced schema, sorted by angle vector.
// Solved per sigma-cycle: the cycle root satisfies (prod delta - 1) * theta
// = 0, preperiodic vertices branch over the delta(v) preimages.
std::vector<Marking> enumerate_markings(const MappingSchema& schema);

std::string to_string(const MappingSchema& schema);

}  // namespace lamina
