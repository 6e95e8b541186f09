#include "lamina/schema.hpp"

#include <algorithm>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>

namespace lamina {
namespace {

// Forward-orbit footprint of one vertex in the functional graph of sigma.
struct OrbitShape {
  int length = 0;  // distinct vertices visited, the vertex itself included
  int period = 0;  // length of the eventual cycle
};

OrbitShape orbit_shape(const std::vector<std::size_t>& sigma, std::size_t v) {
  std::vector<std::size_t> seen;
  std::size_t cur = v;
  for (;;) {
    auto it = std::find(seen.begin(), seen.end(), cur);
    if (it != seen.end())
      return OrbitShape{static_cast<int>(seen.size()),
                        static_cast<int>(seen.end() - it)};
    seen.push_back(cur);
    cur = sigma[cur];
  }
}

// Chains describe the same gap when their face indices agree at every depth
// both of them reach.
bool same_prefix(const std::vector<std::size_t>& a, const std::vector<std::size_t>& b) {
  const std::size_t common = std::min(a.size(), b.size());
  return std::equal(a.begin(), a.begin() + static_cast<std::ptrdiff_t>(common), b.begin());
}

}  // namespace

std::size_t MappingSchema::index_of(const std::string& name) const {
  for (std::size_t i = 0; i < vertices.size(); ++i)
    if (vertices[i] == name) return i;
  throw std::out_of_range("no vertex named '" + name + "'");
}

ValidationReport validate_schema(const MappingSchema& schema) {
  ValidationReport report;
  const std::size_t n = schema.size();
  std::set<std::string> names;
  for (std::size_t i = 0; i < n; ++i) {
    if (schema.vertices[i].empty())
      report.add("vertex-names", "vertex " + std::to_string(i) + " has an empty name");
    else if (!names.insert(schema.vertices[i]).second)
      report.add("vertex-names", "duplicate vertex name '" + schema.vertices[i] + "'");
  }
  if (schema.sigma.size() != n) {
    report.add("sigma-total", "sigma has " + std::to_string(schema.sigma.size()) +
                                  " entries for " + std::to_string(n) + " vertices");
  } else {
    for (std::size_t i = 0; i < n; ++i)
      if (schema.sigma[i] >= n)
        report.add("sigma-total",
                   "sigma(" + schema.vertices[i] + ") points outside the vertex set");
  }
  if (schema.delta.size() != n) {
    report.add("delta-positive", "delta has " + std::to_string(schema.delta.size()) +
                                     " entries for " + std::to_string(n) + " vertices");
  } else {
    for (std::size_t i = 0; i < n; ++i)
      if (schema.delta[i] < 1)
        report.add("delta-positive", "delta(" + schema.vertices[i] + ") = " +
                                         std::to_string(schema.delta[i]) + " < 1");
  }
  if (!schema.return_times.empty()) {
    if (schema.return_times.size() != n) {
      report.add("return-times", "return_times has " +
                                     std::to_string(schema.return_times.size()) +
                                     " entries for " + std::to_string(n) + " vertices");
    } else {
      for (std::size_t i = 0; i < n; ++i)
        if (schema.return_times[i] < 1)
          report.add("return-times", "return time of " + schema.vertices[i] + " = " +
                                         std::to_string(schema.return_times[i]) + " < 1");
    }
  }
  return report;
}

bool is_reduced(const MappingSchema& schema) {
  return std::all_of(schema.delta.begin(), schema.delta.end(),
                     [](int d) { return d >= 2; });
}

int model_dimension(const MappingSchema& schema) {
  return std::accumulate(schema.delta.begin(), schema.delta.end(), 0,
                         [](int acc, int d) { return acc + (d - 1); });
}

MappingSchema canonical_form(const MappingSchema& schema) {
  const std::size_t n = schema.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::vector<OrbitShape> shapes;
  shapes.reserve(n);
  for (std::size_t i = 0; i < n; ++i) shapes.push_back(orbit_shape(schema.sigma, i));
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return std::forward_as_tuple(shapes[a].length, shapes[a].period, schema.delta[a],
                                 schema.vertices[a]) <
           std::forward_as_tuple(shapes[b].length, shapes[b].period, schema.delta[b],
                                 schema.vertices[b]);
  });
  std::vector<std::size_t> inverse(n);
  for (std::size_t i = 0; i < n; ++i) inverse[order[i]] = i;

  MappingSchema out;
  out.vertices.reserve(n);
  out.sigma.reserve(n);
  out.delta.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.vertices.push_back(schema.vertices[order[i]]);
    out.sigma.push_back(inverse[schema.sigma[order[i]]]);
    out.delta.push_back(schema.delta[order[i]]);
    if (!schema.return_times.empty())
      out.return_times.push_back(schema.return_times[order[i]]);
  }
  return out;
}

MappingSchema reduce_from_tower(const PieceTable& pieces,
                                std::vector<std::size_t>* gap_of_vertex) {
  if (!separation_depth(pieces))
    throw std::invalid_argument(
        "schema reduction needs a separation depth: gap degrees have not stabilized");
  const auto orbits = chain_orbits(pieces);
  const std::size_t n = orbits.size();
  const PuzzleTower& tower = pieces.tower();

  // Boundary classes of each gap's deepest piece, as angle sets.  When a
  // pushed-forward chain is too short to tell two gaps apart by piece indices
  // alone, forwarding these through the angle map breaks the tie: a gap maps
  // onto a gap boundary-to-boundary, so the forwarded classes sit on the true
  // image gap and (in an accumulating tower) persist into its deeper boundary.
  std::vector<std::vector<AngleSet>> deep_boundary(n);
  for (std::size_t i = 0; i < n; ++i) {
    const GapChain& self = orbits[i][0];
    const Piece& deep = pieces.piece(self.top(), self.deepest());
    for (std::size_t c : deep.boundary_classes)
      deep_boundary[i].push_back(tower.level(self.top()).class_at(c));
  }
  const auto forwarded = [&](const AngleSet& cls, std::size_t steps) {
    AngleSet out = cls;
    for (std::size_t s = 0; s < steps; ++s) out = map_d(out, tower.degree());
    return out;
  };

  std::vector<std::size_t> sigma(n);
  std::vector<int> delta(n);
  std::vector<int> ell(n);
  for (std::size_t i = 0; i < n; ++i) {
    const GapChain& self = orbits[i][0];
    delta[i] = pieces.piece(self.top(), self.deepest()).degree;

    bool found = false;
    for (std::size_t j = 1; j < orbits[i].size() && !found; ++j) {
      std::vector<std::size_t> candidates;
      for (std::size_t k = 0; k < n; ++k)
        if (same_prefix(orbits[i][j].pieces, orbits[k][0].pieces)) candidates.push_back(k);
      if (candidates.empty()) continue;
      if (candidates.size() > 1) {
        std::vector<std::size_t> confirmed;
        for (std::size_t k : candidates) {
          const bool carries_boundary = std::any_of(
              deep_boundary[i].begin(), deep_boundary[i].end(), [&](const AngleSet& cls) {
                const AngleSet image = forwarded(cls, j);
                return std::any_of(deep_boundary[k].begin(), deep_boundary[k].end(),
                                   [&](const AngleSet& other) { return image == other; });
              });
          if (carries_boundary) confirmed.push_back(k);
        }
        if (confirmed.size() != 1)
          throw std::invalid_argument(
              "ambiguous first return: critical gap " + std::to_string(i) + " at step " +
              std::to_string(j) + " matches " + std::to_string(candidates.size()) +
              " gaps and boundary classes confirm " + std::to_string(confirmed.size()) +
              " of them; deepen the tower");
        candidates = std::move(confirmed);
      }
      sigma[i] = candidates.front();
      ell[i] = static_cast<int>(j);
      found = true;
    }
    if (!found)
      throw std::invalid_argument(
          "tower too shallow: critical gap " + std::to_string(i) +
          " shows no first return within depth " + std::to_string(pieces.depth()) +
          "; extend the tower");
  }

  // Canonical vertex order: fixed gaps first, short orbits before long,
  // degree as the next tiebreak, discovery (face position) last.
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::vector<OrbitShape> shapes;
  shapes.reserve(n);
  for (std::size_t i = 0; i < n; ++i) shapes.push_back(orbit_shape(sigma, i));
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return std::tuple(shapes[a].length, shapes[a].period, delta[a], a) <
           std::tuple(shapes[b].length, shapes[b].period, delta[b], b);
  });
  std::vector<std::size_t> inverse(n);
  for (std::size_t i = 0; i < n; ++i) inverse[order[i]] = i;

  if (gap_of_vertex) *gap_of_vertex = order;
  MappingSchema out;
  for (std::size_t i = 0; i < n; ++i) {
    out.vertices.push_back("v" + std::to_string(i));
    out.sigma.push_back(inverse[sigma[order[i]]]);
    out.delta.push_back(delta[order[i]]);
    out.return_times.push_back(ell[order[i]]);
  }
  return out;
}

std::string to_string(CubicType type) {
  switch (type) {
    case CubicType::adjacent: return "adjacent";
    case CubicType::bitransitive: return "bitransitive";
    case CubicType::capture: return "capture";
    case CubicType::disjoint: return "disjoint";
  }
  return "unknown";
}

CubicType classify_cubic(const MappingSchema& schema) {
  if (!is_reduced(schema) || model_dimension(schema) != 2)
    throw std::invalid_argument(
        "cubic classification needs a reduced schema with two free coefficients; got " +
        to_string(schema));
  if (schema.size() == 1) return CubicType::adjacent;  // single vertex of degree 3
  const bool fixes_first = schema.sigma[0] == 0;
  const bool fixes_second = schema.sigma[1] == 1;
  if (fixes_first && fixes_second) return CubicType::disjoint;
  if (!fixes_first && !fixes_second) return CubicType::bitransitive;
  return CubicType::capture;
}

MappingSchema cubic_schema(CubicType type) {
  switch (type) {
    case CubicType::adjacent: return MappingSchema{{"v0"}, {0}, {3}, {}};
    case CubicType::bitransitive: return MappingSchema{{"v0", "v1"}, {1, 0}, {2, 2}, {}};
    case CubicType::capture: return MappingSchema{{"v0", "v1"}, {0, 0}, {2, 2}, {}};
    case CubicType::disjoint: return MappingSchema{{"v0", "v1"}, {0, 1}, {2, 2}, {}};
  }
  throw std::invalid_argument("unknown cubic type");
}

std::vector<Marking> enumerate_markings(const MappingSchema& schema) {
  const ValidationReport structure = validate_schema(schema);
  if (!structure.ok())
    throw std::invalid_argument("markings need a structurally valid schema: " +
                                structure.violations.front().detail);
  if (!is_reduced(schema))
    throw std::invalid_argument("markings are defined for reduced schemata only");

  const std::size_t n = schema.size();
  std::vector<bool> on_cycle(n, false);
  for (std::size_t v = 0; v < n; ++v) {
    std::size_t cur = v;
    for (std::size_t step = 0; step < n; ++step) cur = schema.sigma[cur];
    // cur now sits on a cycle; walk it once
    std::size_t walk = cur;
    do {
      on_cycle[walk] = true;
      walk = schema.sigma[walk];
    } while (walk != cur);
  }

  std::vector<Marking> partial{Marking{std::vector<Angle>(n)}};

  // Cycles first: the root angle of a cycle of total degree D solves
  // (D - 1) * theta = 0, then multiplies forward around the cycle.
  std::vector<bool> placed(n, false);
  for (std::size_t v = 0; v < n; ++v) {
    if (!on_cycle[v] || placed[v]) continue;
    std::vector<std::size_t> cycle;
    std::size_t cur = v;
    do {
      cycle.push_back(cur);
      placed[cur] = true;
      cur = schema.sigma[cur];
    } while (cur != v);

    unsigned long product = 1;
    for (std::size_t w : cycle) product *= static_cast<unsigned long>(schema.delta[w]);

    std::vector<Marking> grown;
    grown.reserve(partial.size() * (product - 1));
    for (const Marking& m : partial) {
      for (unsigned long k = 0; k + 1 < product; ++k) {
        Marking ext = m;
        Angle theta{mpq_class(k, product - 1)};
        for (std::size_t w : cycle) {
          ext.angles[w] = theta;
          theta = map_d(theta, schema.delta[w]);
        }
        grown.push_back(std::move(ext));
      }
    }
    partial = std::move(grown);
  }

  // Then the preperiodic vertices, nearest to their cycle first, each
  // branching over the delta(v) preimages of its already-placed image.
  std::vector<std::pair<int, std::size_t>> tree;
  for (std::size_t v = 0; v < n; ++v) {
    if (on_cycle[v]) continue;
    int dist = 0;
    std::size_t cur = v;
    while (!on_cycle[cur]) {
      cur = schema.sigma[cur];
      ++dist;
    }
    tree.emplace_back(dist, v);
  }
  std::sort(tree.begin(), tree.end());
  for (const auto& [dist, v] : tree) {
    (void)dist;
    std::vector<Marking> grown;
    grown.reserve(partial.size() * static_cast<std::size_t>(schema.delta[v]));
    for (const Marking& m : partial) {
      for (const Angle& t : preimages(m.angles[schema.sigma[v]], schema.delta[v])) {
        Marking ext = m;
        ext.angles[v] = t;
        grown.push_back(std::move(ext));
      }
    }
    partial = std::move(grown);
  }

  std::sort(partial.begin(), partial.end(), [](const Marking& a, const Marking& b) {
    return std::lexicographical_compare(a.angles.begin(), a.angles.end(),
                                        b.angles.begin(), b.angles.end());
  });
  return partial;
}

std::string to_string(const MappingSchema& schema) {
  std::ostringstream out;
  out << "schema(";
  for (std::size_t i = 0; i < schema.size(); ++i) {
    if (i) out << ", ";
    out << schema.vertices[i] << ":" << schema.delta[i] << "->"
        << schema.vertices[schema.sigma[i]];
    if (!schema.return_times.empty()) out << "[" << schema.return_times[i] << "]";
  }
  out << ")";
  return out.str();
}

}  // namespace lamina
