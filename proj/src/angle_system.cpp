#include "lamina/angle_system.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace lamina {
namespace {

mpz_class int_pow(unsigned long base, unsigned long exp) {
  mpz_class out;
  mpz_ui_pow_ui(out.get_mpz_t(), base, exp);
  return out;
}

Angle return_step(const GapCoding& coding, Angle theta) {
  for (int i = 0; i < coding.period; ++i) theta = map_d(theta, coding.ambient_degree);
  return theta;
}

// Base-`degree` digits of t: t = sum digits[i] * degree^-(i+1), with the
// tail repeating from index `preperiod` on (period entries).
struct DigitExpansion {
  std::vector<int> digits;
  std::size_t preperiod = 0;
  std::size_t period = 1;
};

DigitExpansion expand_digits(const Angle& t, int degree) {
  DigitExpansion out;
  std::map<mpq_class, std::size_t> seen;
  mpq_class x = t.value();
  while (!seen.count(x)) {
    seen.emplace(x, out.digits.size());
    mpq_class scaled = x * degree;
    mpz_class digit;
    mpz_fdiv_q(digit.get_mpz_t(), scaled.get_num().get_mpz_t(), scaled.get_den().get_mpz_t());
    out.digits.push_back(static_cast<int>(digit.get_si()));
    x = scaled - mpq_class(digit);
  }
  out.preperiod = seen.at(x);
  out.period = out.digits.size() - out.preperiod;
  return out;
}

// Half-open sector span [start, end).
bool in_span(const Arc& span, const Angle& a) { return a == span.start || span.contains(a); }

const AngleSet* boundary_class_of(const GapCoding& coding, const Angle& a) {
  for (const AngleSet& cls : coding.boundary)
    if (cls.contains(a)) return &cls;
  return nullptr;
}

std::string gap_name(const GapCoding& coding) { return "v" + std::to_string(coding.vertex); }

// A point of the gap boundary is carried as the set of all its known angle
// representatives (a boundary class lists several angles for one point).
AngleSet widen_to_point(const GapCoding& coding, const AngleSet& reps) {
  AngleSet out = reps;
  for (const Angle& a : reps)
    if (const AngleSet* cls = boundary_class_of(coding, a)) out.insert_all(*cls);
  return out;
}

// The return preimage of the boundary point `target` inside sector s, as a
// point (every known representative).  The return map is injective on each
// sector, so all surviving candidates represent the same point; finding none
// means the stored boundary cannot resolve the pullback.
AngleSet pull_into_sector(const GapCoding& coding, int s, const AngleSet& target) {
  AngleSet candidates = widen_to_point(coding, target);
  for (int i = 0; i < coding.period; ++i) candidates = preimages(candidates, coding.ambient_degree);
  std::vector<Angle> hits;
  for (const Angle& c : candidates)
    if (in_span(coding.spans.at(static_cast<std::size_t>(s)), c) && on_gap_boundary(coding, c))
      hits.push_back(c);
  if (hits.empty()) {
    std::ostringstream msg;
    msg << "insufficient depth: sector " << s << " of gap " << gap_name(coding)
        << " holds no known return preimage of " << target.str()
        << "; deepen the tower behind the coding";
    throw std::invalid_argument(msg.str());
  }
  return widen_to_point(coding, AngleSet(std::move(hits)));
}

}  // namespace

bool on_gap_boundary(const GapCoding& coding, const Angle& theta) {
  if (boundary_class_of(coding, theta)) return true;
  for (const Arc& arc : coding.arcs)
    if (theta == arc.start || theta == arc.end || arc.contains(theta)) return true;
  return false;
}

int sector_of(const GapCoding& coding, const Angle& theta) {
  for (std::size_t s = 0; s < coding.sectors.size(); ++s)
    if (coding.sectors[s].contains(theta)) return static_cast<int>(s);
  for (std::size_t s = 0; s < coding.spans.size(); ++s)
    if (in_span(coding.spans[s], theta)) return static_cast<int>(s);
  throw std::invalid_argument("angle " + theta.str() + " is not on the boundary of gap " +
                              gap_name(coding));
}

GapCoding gap_coding(const PieceTable& pieces, int vertex, std::optional<Angle> root_hint) {
  std::vector<std::size_t> gap_of_vertex;
  const MappingSchema schema = reduce_from_tower(pieces, &gap_of_vertex);
  if (vertex < 0 || static_cast<std::size_t>(vertex) >= schema.size())
    throw std::out_of_range("no vertex " + std::to_string(vertex) + " in the reduced schema");
  if (schema.sigma.at(static_cast<std::size_t>(vertex)) != static_cast<std::size_t>(vertex))
    throw std::invalid_argument(
        "gap for vertex v" + std::to_string(vertex) + " first returns through v" +
        std::to_string(schema.sigma[static_cast<std::size_t>(vertex)]) +
        "; only self-returning gaps carry an internal coding");

  GapCoding coding;
  coding.vertex = vertex;
  coding.ambient_degree = pieces.tower().degree();
  coding.period = schema.return_times.at(static_cast<std::size_t>(vertex));
  coding.degree = schema.delta.at(static_cast<std::size_t>(vertex));

  const auto orbits = chain_orbits(pieces);
  const GapChain& chain = orbits.at(gap_of_vertex.at(static_cast<std::size_t>(vertex))).front();
  const Piece& deep = pieces.piece(chain.top(), chain.deepest());
  const FiniteLamination& level = pieces.tower().level(chain.top());
  coding.arcs = deep.arcs;
  for (std::size_t ci : deep.boundary_classes) coding.boundary.push_back(level.class_at(ci));

  const auto returns_to = [&](const AngleSet& cls) {
    AngleSet image = cls;
    for (int i = 0; i < coding.period; ++i) image = map_d(image, coding.ambient_degree);
    return image;
  };

  // Root: a return-fixed boundary class; by default the one containing the
  // smallest known boundary angle among the fixed ones.
  std::vector<std::size_t> fixed;
  for (std::size_t i = 0; i < coding.boundary.size(); ++i)
    if (returns_to(coding.boundary[i]) == coding.boundary[i]) fixed.push_back(i);
  if (root_hint) {
    const AngleSet* cls = boundary_class_of(coding, *root_hint);
    if (!cls)
      throw std::invalid_argument("root hint " + root_hint->str() +
                                  " is not in a known boundary class of gap " + gap_name(coding));
    if (returns_to(*cls) != *cls)
      throw std::invalid_argument("root hint " + root_hint->str() + " names class " + cls->str() +
                                  ", which the return map moves; the root must be return-fixed");
    coding.root = *cls;
  } else {
    if (fixed.empty())
      throw std::invalid_argument("insufficient depth: gap " + gap_name(coding) +
                                  " shows no return-fixed boundary class at depth " +
                                  std::to_string(pieces.depth()) + "; deepen the tower");
    std::size_t best = fixed.front();
    for (std::size_t idx : fixed)
      if (coding.boundary[idx][0] < coding.boundary[best][0]) best = idx;
    coding.root = coding.boundary[best];
  }

  // The sector-bounding classes: boundary classes returning onto the root.
  std::vector<std::size_t> bounding;
  for (std::size_t i = 0; i < coding.boundary.size(); ++i)
    if (returns_to(coding.boundary[i]) == coding.root) bounding.push_back(i);
  if (bounding.size() != static_cast<std::size_t>(coding.degree)) {
    std::ostringstream msg;
    msg << "insufficient depth: boundary of gap " << gap_name(coding) << " resolves "
        << bounding.size() << " of its " << coding.degree << " sector classes at depth "
        << pieces.depth() << "; deepen the tower";
    throw std::invalid_argument(msg.str());
  }

  // Walk the face counterclockwise: after the arc ending at b inside class C
  // the boundary continues at the cyclic predecessor of b within C.
  std::map<Angle, std::size_t> arc_at;
  for (std::size_t i = 0; i < deep.arcs.size(); ++i) arc_at.emplace(deep.arcs[i].start, i);
  const auto class_at_angle = [&](const Angle& a) -> std::size_t {
    for (std::size_t i = 0; i < coding.boundary.size(); ++i)
      if (coding.boundary[i].contains(a)) return i;
    throw std::logic_error("face arc endpoint " + a.str() + " is in no boundary class");
  };
  struct Step {
    std::size_t arc;
    std::size_t end_class;
    Angle exit;  // where the next arc starts after jumping the chord
  };
  std::vector<Step> walk;
  std::size_t arc = 0;
  do {
    const Angle& end = deep.arcs[arc].end;
    const std::size_t ci = class_at_angle(end);
    const AngleSet& cls = coding.boundary[ci];
    const std::size_t at = *cls.index_of(end);
    const Angle exit = cls[(at + cls.size() - 1) % cls.size()];
    walk.push_back({arc, ci, exit});
    const auto next = arc_at.find(exit);
    if (next == arc_at.end())
      throw std::logic_error("gap boundary walk left the face at " + exit.str());
    arc = next->second;
  } while (arc != 0);
  if (walk.size() != deep.arcs.size())
    throw std::logic_error("gap boundary walk did not close over every arc");

  // Jumps across bounding classes open the sectors, the root's jump first.
  std::vector<std::size_t> jumps;
  for (std::size_t i = 0; i < walk.size(); ++i)
    if (std::find(bounding.begin(), bounding.end(), walk[i].end_class) != bounding.end())
      jumps.push_back(i);
  if (jumps.size() != static_cast<std::size_t>(coding.degree))
    throw std::invalid_argument(
        "insufficient depth: gap " + gap_name(coding) + " meets its sector classes " +
        std::to_string(jumps.size()) + " times instead of " + std::to_string(coding.degree) +
        "; deepen the tower");
  std::size_t root_jump = 0;
  while (coding.boundary[walk[jumps[root_jump]].end_class] != coding.root) ++root_jump;
  std::rotate(jumps.begin(), jumps.begin() + static_cast<std::ptrdiff_t>(root_jump), jumps.end());

  for (std::size_t s = 0; s < jumps.size(); ++s) {
    const Step& open = walk[jumps[s]];
    const Step& close = walk[jumps[(s + 1) % jumps.size()]];
    coding.sectors.push_back(coding.boundary[open.end_class]);
    coding.spans.push_back(Arc{open.exit, deep.arcs[close.arc].end});
  }
  return coding;
}

std::vector<GapCoding> standard_codings(const PieceTable& pieces) {
  const MappingSchema schema = reduce_from_tower(pieces);
  std::vector<GapCoding> out;
  for (std::size_t v = 0; v < schema.size(); ++v) {
    if (schema.sigma[v] != v) continue;
    try {
      out.push_back(gap_coding(pieces, static_cast<int>(v)));
    } catch (const std::invalid_argument&) {
      // This gap's coding is not resolvable at the stored depth (for example
      // its return fixes no known boundary class); leave it uncoded.
    }
  }
  return out;
}

Angle alpha(const GapCoding& coding, const Angle& theta) {
  if (!on_gap_boundary(coding, theta))
    throw std::invalid_argument("angle " + theta.str() + " is not on the known boundary of gap " +
                                gap_name(coding));
  std::map<Angle, std::size_t> seen;
  std::vector<int> digits;
  Angle current = theta;
  while (!seen.count(current)) {
    seen.emplace(current, digits.size());
    digits.push_back(sector_of(coding, current));
    current = return_step(coding, current);
    if (!on_gap_boundary(coding, current)) {
      std::ostringstream msg;
      msg << "insufficient depth: the return orbit of " << theta.str()
          << " leaves the resolved boundary of gap " << gap_name(coding) << " at " << current.str()
          << " after " << digits.size() << " returns; boundary data roughly " << coding.period
          << " levels deeper is needed";
      throw std::invalid_argument(msg.str());
    }
  }
  const std::size_t pre = seen.at(current);
  const std::size_t per = digits.size() - pre;
  const mpz_class base = coding.degree;
  mpz_class head = 0;  // sum over the preperiod
  for (std::size_t i = 0; i < pre; ++i) head = head * base + digits[i];
  mpz_class cycle = 0;  // one period of the repeating tail
  for (std::size_t i = pre; i < digits.size(); ++i) cycle = cycle * base + digits[i];
  const mpz_class shift = int_pow(static_cast<unsigned long>(coding.degree), pre);
  const mpz_class full = int_pow(static_cast<unsigned long>(coding.degree), per) - 1;
  mpq_class value = mpq_class(head) + mpq_class(cycle) / mpq_class(full);
  value /= mpq_class(shift);
  return Angle(value);
}

AngleSet alpha_inverse(const GapCoding& coding, const Angle& t) {
  const DigitExpansion digits = expand_digits(t, coding.degree);
  const std::size_t u = digits.preperiod;
  const std::size_t p = digits.period;

  // Solve the periodic tail.  One round pulls back through the p repeating
  // digits; once two consecutive rounds take the same inverse branches the
  // round is pinned down as theta -> (theta + J) / D, whose fixed point
  // J / (D - 1) is the exact periodic boundary point.  The branch word of a
  // round is recovered from its output alone: J = floor(D * theta).
  const mpz_class D =
      int_pow(static_cast<unsigned long>(coding.ambient_degree),
              static_cast<unsigned long>(coding.period) * static_cast<unsigned long>(p));
  // True when `candidate` spells exactly the repeating digits and closes up.
  const auto closes_periodically = [&](const Angle& candidate) {
    Angle check = candidate;
    for (std::size_t i = 0; i < p; ++i) {
      if (!on_gap_boundary(coding, check) || sector_of(coding, check) != digits.digits[u + i])
        return false;
      check = return_step(coding, check);
    }
    return check == candidate;
  };

  AngleSet point({coding.spans.front().start});
  mpz_class branches_before = -1;
  std::optional<Angle> solved;
  for (int round = 0; round < 64 && !solved; ++round) {
    for (std::size_t i = 0; i < p; ++i)
      point = pull_into_sector(coding, digits.digits[u + p - 1 - i], point);
    mpz_class branches;
    {
      const mpq_class scaled = point[0].value() * mpq_class(D);
      mpz_fdiv_q(branches.get_mpz_t(), scaled.get_num().get_mpz_t(), scaled.get_den().get_mpz_t());
    }
    // The same branch word twice running suggests the round map has settled;
    // accept its fixed point only once it demonstrably spells the tail (the
    // word can repeat by accident while the pullback is still converging).
    if (branches == branches_before) {
      const Angle candidate(mpq_class(branches) / mpq_class(D - 1));
      if (closes_periodically(candidate)) solved = candidate;
    }
    branches_before = branches;
  }
  if (!solved)
    throw std::invalid_argument("insufficient depth: the periodic tail of " + t.str() +
                                " did not stabilize on the boundary of gap " + gap_name(coding));

  // Pull back through the preperiod, innermost digit first.
  point = AngleSet({*solved});
  for (std::size_t i = u; i-- > 0;) point = pull_into_sector(coding, digits.digits[i], point);

  return widen_to_point(coding, point);
}

ValidationReport verify_schema_lamination(const SchemaLamination& data) {
  ValidationReport report;
  report.merge(validate_schema(data.schema));
  if (!report.ok()) return report;
  if (!is_reduced(data.schema))
    report.add("schema-reduced", "schema has a unit-degree vertex and is not reduced");
  if (data.laminations.size() != data.schema.size()) {
    report.add("shape", "expected one lamination per vertex, got " +
                            std::to_string(data.laminations.size()) + " for " +
                            std::to_string(data.schema.size()) + " vertices");
    return report;
  }
  for (std::size_t v = 0; v < data.schema.size(); ++v) {
    const FiniteLamination& lam = data.laminations[v];
    const std::string where = data.schema.vertices[v] + ": ";
    if (lam.degree() != data.schema.delta[v])
      report.add("vertex-degree", where + "lamination degree " + std::to_string(lam.degree()) +
                                      " != vertex degree " + std::to_string(data.schema.delta[v]));
    for (const Violation& violation : verify_lamination(lam).violations)
      report.add(violation.axiom, where + violation.detail);
    const FiniteLamination& image_lam = data.laminations[data.schema.sigma[v]];
    for (std::size_t i : lam.nontrivial_indices()) {
      const AngleSet& cls = lam.class_at(i);
      const AngleSet image = map_d(cls, data.schema.delta[v]);
      if (image.size() < 2) {
        report.add("pushforward-collapse", where + "class " + cls.str() + " collapses to " +
                                               image.str() + " under " +
                                               std::to_string(data.schema.delta[v]) + "-tupling");
        continue;
      }
      const auto& classes = image_lam.classes();
      if (std::find(classes.begin(), classes.end(), image) == classes.end())
        report.add("pushforward-onto-class",
                   where + "image " + image.str() + " of class " + cls.str() +
                       " is not a class of the lamination at " +
                       data.schema.vertices[data.schema.sigma[v]]);
      else if (!consecutive_preserving(cls, image, data.schema.delta[v]))
        report.add("pushforward-order", where + "class " + cls.str() +
                                            " does not push forward to " + image.str() +
                                            " in cyclic order");
    }
  }
  return report;
}

namespace {

struct DisjointSets {
  std::map<Angle, std::size_t> ids;
  std::vector<std::size_t> parent;

  std::size_t id_of(const Angle& a) {
    const auto [it, inserted] = ids.emplace(a, parent.size());
    if (inserted) parent.push_back(it->second);
    return it->second;
  }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  bool unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    parent[b] = a;
    return true;
  }
};

const GapCoding* coding_for(const std::vector<GapCoding>& codings, std::size_t vertex) {
  for (const GapCoding& coding : codings)
    if (coding.vertex == static_cast<int>(vertex)) return &coding;
  return nullptr;
}

}  // namespace

FiniteLamination tune(const PieceTable& pieces, const std::vector<GapCoding>& codings,
                      const SchemaLamination& target, int depth_budget) {
  const MappingSchema schema = reduce_from_tower(pieces);
  if (target.schema != schema)
    throw std::invalid_argument(
        "tuning target schema does not match the reduced schema of the tower");
  {
    const ValidationReport report = verify_schema_lamination(target);
    if (!report.ok())
      throw std::invalid_argument("tuning target is not a valid schema lamination: " +
                                  report.violations.front().axiom + " (" +
                                  report.violations.front().detail + ")");
  }

  // Resolve the budget: every internal angle must fit its full digit
  // expansion (preperiod + period) within it.
  struct Transport {
    std::size_t vertex;
    const AngleSet* cls;
  };
  std::vector<Transport> transports;
  int longest = 1;
  for (const GapCoding& coding : codings) longest = std::max(longest, coding.period);
  for (std::size_t v = 0; v < schema.size(); ++v) {
    const FiniteLamination& lam = target.laminations[v];
    if (lam.nontrivial_indices().empty()) continue;
    const GapCoding* coding = coding_for(codings, v);
    if (!coding)
      throw std::invalid_argument("no coding for vertex " + schema.vertices[v] +
                                  " (not a self-returning gap); cannot tune a non-trivial "
                                  "lamination there");
    for (std::size_t i : lam.nontrivial_indices()) {
      transports.push_back({v, &lam.class_at(i)});
      for (const Angle& t : lam.class_at(i)) {
        const DigitExpansion digits = expand_digits(t, coding->degree);
        longest = std::max(longest, static_cast<int>(digits.preperiod + digits.period));
      }
    }
  }
  const int budget = depth_budget > 0 ? depth_budget : 3 * longest;
  for (const Transport& transport : transports) {
    const GapCoding* coding = coding_for(codings, transport.vertex);
    for (const Angle& t : *transport.cls) {
      const DigitExpansion digits = expand_digits(t, coding->degree);
      const int need = static_cast<int>(digits.preperiod + digits.period);
      if (need > budget)
        throw std::invalid_argument("depth budget " + std::to_string(budget) +
                                    " cannot resolve internal angle " + t.str() +
                                    " at vertex " + schema.vertices[transport.vertex] +
                                    "; a budget of " + std::to_string(need) + " suffices");
    }
  }

  // Generators: every class the tower already knows, plus each target class
  // carried onto its gap boundary.
  DisjointSets sets;
  const PuzzleTower& tower = pieces.tower();
  for (int k = 0; k <= tower.depth(); ++k)
    for (const AngleSet& cls : tower.level(k).classes())
      for (std::size_t i = 1; i < cls.size(); ++i)
        sets.unite(sets.id_of(cls[0]), sets.id_of(cls[i]));
  for (const Transport& transport : transports) {
    const GapCoding* coding = coding_for(codings, transport.vertex);
    std::vector<Angle> carried;
    for (const Angle& t : *transport.cls)
      for (const Angle& a : alpha_inverse(*coding, t)) carried.push_back(a);
    for (std::size_t i = 1; i < carried.size(); ++i)
      sets.unite(sets.id_of(carried[0]), sets.id_of(carried[i]));
  }

  // Close under the angle map: related angles stay related downstream.
  const int d = tower.degree();
  for (bool changed = true; changed;) {
    changed = false;
    const std::size_t known = sets.ids.size();
    std::map<std::size_t, std::vector<Angle>> groups;
    for (const auto& [angle, id] : sets.ids) groups[sets.find(id)].push_back(angle);
    for (const auto& [root, members] : groups) {
      if (members.size() < 2) continue;
      const std::size_t image_id = sets.id_of(map_d(members[0], d));
      for (std::size_t i = 1; i < members.size(); ++i)
        changed |= sets.unite(image_id, sets.id_of(map_d(members[i], d)));
    }
    if (sets.ids.size() != known) changed = true;
  }

  std::map<std::size_t, std::vector<Angle>> groups;
  for (const auto& [angle, id] : sets.ids) groups[sets.find(id)].push_back(angle);
  std::vector<AngleSet> classes;
  for (auto& [root, members] : groups)
    if (members.size() >= 2) classes.push_back(AngleSet(std::move(members)));
  FiniteLamination result(d, std::move(classes));

  {
    const ValidationReport report = verify_lamination(result);
    if (!report.ok())
      throw std::logic_error("tuned relation failed verification: " +
                             report.violations.front().axiom + " (" +
                             report.violations.front().detail + ")");
    for (std::size_t i : result.nontrivial_indices()) {
      const AngleSet image = map_d(result.class_at(i), d);
      const auto at = result.class_index_of(image[0]);
      if (image.size() >= 2 &&
          (!at || !std::includes(result.class_at(*at).begin(), result.class_at(*at).end(),
                                 image.begin(), image.end())))
        throw std::logic_error("tuned relation is not forward-invariant at class " +
                               result.class_at(i).str());
    }
  }
  return result;
}

SchemaLamination straighten_combinatorial(const PieceTable& pieces,
                                          const std::vector<GapCoding>& codings,
                                          const FiniteLamination& lam) {
  SchemaLamination out;
  out.schema = reduce_from_tower(pieces);
  for (std::size_t v = 0; v < out.schema.size(); ++v) {
    const GapCoding* coding = coding_for(codings, v);
    std::vector<AngleSet> classes;
    if (coding) {
      std::set<std::vector<Angle>> dedup;
      for (const AngleSet& cls : lam.classes()) {
        std::vector<Angle> values;
        for (const Angle& a : cls)
          if (on_gap_boundary(*coding, a)) {
            const Angle value = alpha(*coding, a);
            if (std::find(values.begin(), values.end(), value) == values.end())
              values.push_back(value);
          }
        if (values.size() < 2) continue;  // off this gap, or collapses to a point
        std::sort(values.begin(), values.end());
        if (dedup.insert(values).second) classes.push_back(AngleSet(values));
      }
    }
    out.laminations.push_back(FiniteLamination(out.schema.delta[v], std::move(classes)));
  }
  return out;
}

std::string to_string(const GapCoding& coding) {
  std::ostringstream os;
  os << "gap v" << coding.vertex << ": return after " << coding.period << " (degree "
     << coding.degree << "), root " << coding.root.str() << ", sectors";
  for (std::size_t s = 0; s < coding.sectors.size(); ++s)
    os << " " << s << ":" << coding.sectors[s].str() << "@" << coding.spans[s].str();
  return os.str();
}

}  // namespace lamina
