#include "lamina/tower.hpp"

#include <algorithm>
#include <set>
#include <sstream>
#include <stdexcept>

namespace lamina {

namespace {

// Degree of a class under the push-forward: the uniform fiber cardinality
// |C| / |m_d(C)|.  *exact reports whether the fibers really are uniform.
int class_map_degree(const AngleSet& C, int d, bool* exact = nullptr) {
  if (C.empty()) {
    if (exact) *exact = false;
    return 0;
  }
  AngleSet img = map_d(C, d);
  std::map<Angle, int> mult;
  for (const Angle& a : C) mult[map_d(a, d)]++;
  int maxm = 0;
  for (const auto& [val, count] : mult) maxm = std::max(maxm, count);
  const bool uniform = C.size() % img.size() == 0 &&
                       maxm == static_cast<int>(C.size() / img.size());
  if (exact) *exact = uniform;
  return uniform ? static_cast<int>(C.size() / img.size()) : maxm;
}

// Max over the circle of how many times m_d covers a point from these arcs.
int max_fiber_degree(const std::vector<Arc>& arcs, int d) {
  mpz_class base = 0;
  std::vector<std::pair<mpq_class, int>> events;
  auto add_interval = [&](const mpq_class& s, const mpq_class& e) {
    if (s == e) return;
    events.emplace_back(s, +1);
    events.emplace_back(e, -1);
  };
  for (const Arc& arc : arcs) {
    mpq_class total = arc.measure() * d;
    mpz_class whole = total.get_num() / total.get_den();
    base += whole;
    mpq_class frac = total - mpq_class(whole);
    if (frac == 0) continue;
    mpq_class s = map_d(arc.start, d).value();
    mpq_class e = s + frac;
    if (e <= 1) {
      add_interval(s, e);
    } else {
      add_interval(s, mpq_class(1));
      add_interval(mpq_class(0), e - 1);
    }
  }
  long best = 0;
  if (!events.empty()) {
    std::sort(events.begin(), events.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    long cur = 0;
    mpq_class prev = 0;
    std::size_t i = 0;
    while (i < events.size()) {
      const mpq_class at = events[i].first;
      if (at > prev) best = std::max(best, cur);
      while (i < events.size() && events[i].first == at) {
        cur += events[i].second;
        ++i;
      }
      prev = at;
    }
    if (prev < 1) best = std::max(best, cur);
  }
  return static_cast<int>(base.get_si() + best);
}

struct UnionFind {
  std::vector<std::size_t> up;
  std::size_t add() {
    up.push_back(up.size());
    return up.size() - 1;
  }
  std::size_t find(std::size_t x) {
    while (up[x] != x) x = up[x] = up[up[x]];
    return x;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a != b) up[a] = b;
  }
};

bool same_gap(const GapChain& a, const GapChain& b) {
  const int common = std::min(a.top(), b.top());
  for (int k = 0; k <= common; ++k)
    if (a.pieces[static_cast<std::size_t>(k)] != b.pieces[static_cast<std::size_t>(k)]) return false;
  return true;
}

// One chain per distinct gap, keeping the deepest available truncation.
std::vector<GapChain> gap_representatives(const PieceTable& pieces) {
  std::vector<GapChain> reps;
  for (const auto& orbit : chain_orbits(pieces)) {
    for (const GapChain& chain : orbit) {
      bool merged = false;
      for (GapChain& rep : reps) {
        if (same_gap(rep, chain)) {
          if (chain.top() > rep.top()) rep = chain;
          merged = true;
          break;
        }
      }
      if (!merged) reps.push_back(chain);
    }
  }
  return reps;
}

}  // namespace

// ---- PuzzleTower -------------------------------------------------------

PuzzleTower::PuzzleTower(std::vector<FiniteLamination> levels)
    : levels_(std::move(levels)) {
  if (levels_.empty()) throw std::invalid_argument("tower: need at least one level");
  degree_ = levels_.front().degree();
  for (const FiniteLamination& lam : levels_)
    if (lam.degree() != degree_)
      throw std::invalid_argument("tower: levels disagree on the degree");
}

bool consecutive_preserving(const AngleSet& A, const AngleSet& B, int degree) {
  if (A.empty() || B.empty()) return false;
  const std::size_t n = A.size();
  const std::size_t m = B.size();
  if (n % m != 0) return false;
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto j = B.index_of(map_d(A[i], degree));
    if (!j) return false;
    idx[i] = *j;
  }
  for (std::size_t i = 0; i < n; ++i)
    if (idx[(i + 1) % n] != (idx[i] + 1) % m) return false;
  return true;
}

namespace {

// The adjacent-pair tower axioms for src = level k over dst = level k-1
// (dst == src with k == 0 checks level-0 forward invariance).
void verify_level_pair(ValidationReport& report, const FiniteLamination& src,
                       const FiniteLamination& dst, int k, int d) {
  const std::string where = "level " + std::to_string(k) + ": ";
  std::vector<char> hit(dst.size(), 0);
  for (std::size_t i = 0; i < src.size(); ++i) {
    const AngleSet& C = src.class_at(i);
    AngleSet image = map_d(C, d);
    auto ci = dst.class_index_of(image[0]);
    if (!ci || !(dst.class_at(*ci) == image)) {
      report.add("class-image-is-class",
                 where + "image " + image.str() + " of class " + C.str() + " is not a class");
      continue;
    }
    if (!consecutive_preserving(C, dst.class_at(*ci), d))
      report.add("consecutive-preserving",
                 where + "class " + C.str() + " does not cover " + image.str() +
                     " in cyclic order");
    if (k > 0) {
      if (C.size() > 1 && image.size() == 1)
        report.add("nontrivial-image",
                   where + "class " + C.str() + " collapses to the singleton " + image.str());
      hit[*ci] = 1;
    }
  }
  if (k > 0) {
    for (std::size_t j = 0; j < dst.size(); ++j)
      if (!hit[j])
        report.add("pushforward-onto",
                   "level " + std::to_string(k - 1) + ": class " + dst.class_at(j).str() +
                       " is not the image of any level-" + std::to_string(k) + " class");
    // Restriction: on the coarser support this level must reproduce the
    // coarser partition exactly.  The pushforward axioms alone leave the
    // pairing of preimage chords free, and a misaligned pairing produces
    // pieces that straddle a coarser chord instead of nesting inside it.
    const AngleSet& coarse = dst.support();
    for (std::size_t i = 0; i < src.size(); ++i) {
      const AngleSet& C = src.class_at(i);
      std::vector<Angle> shared;
      for (const Angle& a : C)
        if (coarse.contains(a)) shared.push_back(a);
      if (shared.empty()) continue;
      const AngleSet got(shared);
      auto ci = dst.class_index_of(got[0]);
      if (!ci || !(dst.class_at(*ci) == got))
        report.add("level-restriction",
                   where + "class " + C.str() + " meets the coarser support in " + got.str() +
                       ", which is not a level-" + std::to_string(k - 1) + " class");
    }
    AngleSet expected = preimages(dst.support(), d);
    if (!(expected == src.support())) {
      int listed = 0;
      for (const Angle& a : expected) {
        if (!src.support().contains(a) && listed < 4) {
          report.add("support-preimage",
                     where + "angle " + a.str() + " is a preimage of the coarser support but missing");
          ++listed;
        }
      }
      for (const Angle& a : src.support()) {
        if (!expected.contains(a) && listed < 8) {
          report.add("support-preimage",
                     where + "angle " + a.str() + " is in the support but not a preimage of the coarser support");
          ++listed;
        }
      }
    }
  }
}

}  // namespace

ValidationReport verify_tower(const PuzzleTower& tower) {
  ValidationReport report;
  const int d = tower.degree();
  for (int k = 0; k <= tower.depth(); ++k) {
    ValidationReport level = verify_lamination(tower.level(k));
    for (const Violation& v : level.violations)
      report.add(v.axiom, "level " + std::to_string(k) + ": " + v.detail);
  }

  for (const Angle& a : tower.level(0).support()) {
    if (orbit(a, d).preperiod != 0)
      report.add("support-periodic",
                 "level 0: support angle " + a.str() + " is not periodic under the degree-" +
                     std::to_string(d) + " angle map");
  }

  for (int k = 0; k <= tower.depth(); ++k)
    verify_level_pair(report, tower.level(k), tower.level(k == 0 ? 0 : k - 1), k, d);
  return report;
}

// ---- Piece / PieceTable ------------------------------------------------

bool Piece::contains(const Angle& a) const {
  for (const Arc& arc : arcs)
    if (arc.contains(a)) return true;
  return false;
}

bool Piece::closure_contains(const Angle& a) const {
  for (const Arc& arc : arcs)
    if (arc.contains(a) || arc.start == a || arc.end == a) return true;
  return false;
}

std::string Piece::str() const {
  std::ostringstream os;
  os << "piece(depth=" << depth << ", degree=" << degree << ", arcs=";
  for (const Arc& arc : arcs) os << arc.str();
  os << ")";
  return os.str();
}

PieceTable::PieceTable(const PuzzleTower& tower) : tower_(tower) {
  const int d = tower_.degree();
  const int K = tower_.depth();
  levels_.resize(static_cast<std::size_t>(K) + 1);
  arc_start_to_face_.resize(static_cast<std::size_t>(K) + 1);

  for (int k = 0; k <= K; ++k) {
    const FiniteLamination& lam = tower_.level(k);
    const AngleSet& E = lam.support();
    auto& faces = levels_[static_cast<std::size_t>(k)];
    auto& smap = arc_start_to_face_[static_cast<std::size_t>(k)];
    const std::size_t n = E.size();

    if (n == 0) {
      Piece whole;
      whole.depth = k;
      whole.arcs = {Arc{Angle(), Angle()}};
      whole.degree = d;
      whole.measure = 1;
      whole.index = 0;
      if (k > 0) {
        whole.parent = 0;
        whole.image = 0;
      }
      faces.push_back(std::move(whole));
      continue;
    }

    // next arc after arc i: cross the chord of the class owning the arc's
    // endpoint, resuming at that endpoint's predecessor within its class
    std::vector<std::size_t> nxt(n);
    for (std::size_t i = 0; i < n; ++i) {
      const Angle& v = E[(i + 1) % n];
      auto ci = lam.class_index_of(v);
      if (!ci)
        throw std::logic_error("support angle " + v.str() +
                               " belongs to no class; run verify_tower first");
      const AngleSet& A = lam.class_at(*ci);
      const Angle& pred = A[(*A.index_of(v) + A.size() - 1) % A.size()];
      auto pi = E.index_of(pred);
      if (!pi) throw std::logic_error("class angle " + pred.str() + " missing from the support");
      nxt[i] = *pi;
    }

    std::vector<char> seen(n, 0);
    for (std::size_t i0 = 0; i0 < n; ++i0) {
      if (seen[i0]) continue;
      std::vector<std::size_t> cycle;
      std::size_t cur = i0;
      while (!seen[cur]) {
        seen[cur] = 1;
        cycle.push_back(cur);
        cur = nxt[cur];
      }
      std::size_t first = 0;
      for (std::size_t t = 1; t < cycle.size(); ++t)
        if (E[cycle[t]] < E[cycle[first]]) first = t;
      std::rotate(cycle.begin(), cycle.begin() + static_cast<std::ptrdiff_t>(first), cycle.end());

      Piece piece;
      piece.depth = k;
      for (std::size_t t : cycle) piece.arcs.push_back(Arc{E[t], E[(t + 1) % n]});
      faces.push_back(std::move(piece));
    }

    std::sort(faces.begin(), faces.end(),
              [](const Piece& a, const Piece& b) { return a.arcs[0].start < b.arcs[0].start; });
    for (std::size_t f = 0; f < faces.size(); ++f) {
      faces[f].index = f;
      for (const Arc& arc : faces[f].arcs) smap[arc.start] = f;
    }

    for (Piece& piece : faces) {
      std::set<std::size_t> touched;
      mpq_class measure = 0;
      for (const Arc& arc : piece.arcs) {
        touched.insert(*lam.class_index_of(arc.start));
        touched.insert(*lam.class_index_of(arc.end));
        measure += arc.measure();
      }
      piece.boundary_classes.assign(touched.begin(), touched.end());
      piece.measure = measure;
      piece.degree = max_fiber_degree(piece.arcs, d);
    }

    if (k > 0) {
      const AngleSet& Eup = tower_.level(k - 1).support();
      const auto& upmap = arc_start_to_face_[static_cast<std::size_t>(k) - 1];
      for (Piece& piece : faces) {
        if (Eup.empty()) {
          piece.parent = 0;
          piece.image = 0;
          continue;
        }
        std::size_t image = Piece::npos;
        std::size_t parent = Piece::npos;
        for (const Arc& arc : piece.arcs) {
          const Angle is = map_d(arc.start, d);
          auto im = upmap.find(is);
          auto ui = Eup.index_of(is);
          if (im == upmap.end() || !ui)
            throw std::logic_error("arc image " + is.str() +
                                   " is not a support point one level up; run verify_tower first");
          const Angle& ue = Eup[(*ui + 1) % Eup.size()];
          if (!(map_d(arc.end, d) == ue))
            throw std::logic_error("arc " + arc.str() +
                                   " does not map onto an atomic arc one level up");
          if (image == Piece::npos)
            image = im->second;
          else if (image != im->second)
            throw std::logic_error("arcs of one face map into different faces one level up");

          const std::size_t ub = Eup.cyclic_upper_bound(arc.start);
          const std::size_t pidx = (ub + Eup.size() - 1) % Eup.size();
          const std::size_t pf = upmap.at(Eup[pidx]);
          if (parent == Piece::npos)
            parent = pf;
          else if (parent != pf)
            throw std::logic_error("arcs of one face lie in different faces one level up");
        }
        piece.image = image;
        piece.parent = parent;
      }
    }
  }
}

std::optional<std::size_t> PieceTable::find(int k, const Angle& a) const {
  const AngleSet& E = tower_.level(k).support();
  if (E.empty()) return 0;
  if (E.contains(a)) return std::nullopt;
  const std::size_t ub = E.cyclic_upper_bound(a);
  const std::size_t pidx = (ub + E.size() - 1) % E.size();
  return arc_start_to_face_[static_cast<std::size_t>(k)].at(E[pidx]);
}

// ---- criticality bookkeeping --------------------------------------------

CriticalInventory critical_inventory(const PieceTable& pieces, int k) {
  CriticalInventory inv;
  inv.depth = k;
  const int d = pieces.tower().degree();
  for (const Piece& piece : pieces.at(k)) {
    if (piece.degree >= 2) inv.critical_faces.push_back(piece.index);
    inv.face_degree_sum += piece.degree - 1;
  }
  bool exact_all = true;
  const FiniteLamination& lam = pieces.tower().level(k);
  for (std::size_t i = 0; i < lam.size(); ++i) {
    bool exact = true;
    const int cd = class_map_degree(lam.class_at(i), d, &exact);
    exact_all = exact_all && exact;
    if (cd >= 2) inv.critical_classes.push_back(i);
    inv.class_degree_sum += cd - 1;
  }
  inv.identity_holds = exact_all && (1 + inv.face_degree_sum + inv.class_degree_sum == d);
  return inv;
}

bool total_degree_check(const PieceTable& pieces, ValidationReport* report) {
  bool ok = true;
  for (int k = 0; k <= pieces.depth(); ++k) {
    CriticalInventory inv = critical_inventory(pieces, k);
    if (!inv.identity_holds) {
      ok = false;
      if (report)
        report->add("total-degree",
                    "depth " + std::to_string(k) + ": 1 + " + std::to_string(inv.face_degree_sum) +
                        " (faces) + " + std::to_string(inv.class_degree_sum) + " (classes) != " +
                        std::to_string(pieces.tower().degree()));
    }
  }
  return ok;
}

// ---- generated classes ---------------------------------------------------

FiniteLamination generated_classes(const PuzzleTower& tower, const AngleSet& targets,
                                   std::vector<bool>* shallow) {
  UnionFind uf;
  std::map<Angle, std::size_t> node_of;
  auto node = [&](const Angle& a) {
    auto it = node_of.find(a);
    if (it != node_of.end()) return it->second;
    const std::size_t x = uf.add();
    node_of.emplace(a, x);
    return x;
  };
  for (const FiniteLamination& lam : tower.levels()) {
    for (const AngleSet& C : lam.classes()) {
      const std::size_t first = node(C[0]);
      for (std::size_t i = 1; i < C.size(); ++i) uf.unite(first, node(C[i]));
    }
  }
  std::map<std::size_t, std::vector<Angle>> members;
  for (const auto& [a, x] : node_of) members[uf.find(x)].push_back(a);

  std::vector<AngleSet> classes;
  std::set<std::size_t> emitted;
  for (const Angle& t : targets) {
    auto it = node_of.find(t);
    if (it == node_of.end()) {
      classes.push_back(AngleSet{t});
    } else {
      const std::size_t root = uf.find(it->second);
      if (emitted.insert(root).second) classes.push_back(AngleSet(members[root]));
    }
  }
  FiniteLamination result(tower.degree(), classes);
  if (shallow) {
    shallow->assign(result.size(), false);
    for (std::size_t i = 0; i < result.size(); ++i) {
      const AngleSet& C = result.class_at(i);
      (*shallow)[i] = C.size() == 1 && node_of.find(C[0]) == node_of.end();
    }
  }
  return result;
}

// ---- gap chains -----------------------------------------------------------

std::vector<std::vector<GapChain>> chain_orbits(const PieceTable& pieces) {
  const int K = pieces.depth();
  std::vector<std::vector<GapChain>> orbits;
  int source = 0;
  for (const Piece& deep : pieces.at(K)) {
    if (deep.degree < 2) continue;
    GapChain base;
    base.shift = 0;
    base.source = source;
    base.pieces.assign(static_cast<std::size_t>(K) + 1, 0);
    base.pieces[static_cast<std::size_t>(K)] = deep.index;
    for (int k = K; k > 0; --k)
      base.pieces[static_cast<std::size_t>(k) - 1] =
          pieces.piece(k, base.pieces[static_cast<std::size_t>(k)]).parent;
    std::vector<GapChain> orbit{base};
    for (int j = 1; j <= K; ++j) {
      const GapChain& prev = orbit.back();
      GapChain next;
      next.shift = j;
      next.source = source;
      next.pieces.resize(static_cast<std::size_t>(K - j) + 1);
      for (int k = 0; k <= K - j; ++k)
        next.pieces[static_cast<std::size_t>(k)] =
            pieces.piece(k + 1, prev.pieces[static_cast<std::size_t>(k) + 1]).image;
      orbit.push_back(std::move(next));
    }
    orbits.push_back(std::move(orbit));
    ++source;
  }
  return orbits;
}

AngleSet chain_boundary_angles(const PieceTable& pieces, const GapChain& chain) {
  const Piece& deep = pieces.piece(chain.top(), chain.deepest());
  const FiniteLamination& lam = pieces.tower().level(chain.top());
  AngleSet out;
  for (std::size_t ci : deep.boundary_classes) out.insert_all(lam.class_at(ci));
  return out;
}

std::optional<int> separation_depth(const PieceTable& pieces,
                                    const std::optional<std::vector<int>>& expected_degrees) {
  const auto orbits = chain_orbits(pieces);
  if (expected_degrees) {
    std::vector<int> stable;
    for (const auto& orbit : orbits)
      stable.push_back(pieces.piece(orbit[0].top(), orbit[0].deepest()).degree);
    std::vector<int> want = *expected_degrees;
    std::sort(stable.begin(), stable.end());
    std::sort(want.begin(), want.end());
    if (stable != want) return std::nullopt;
  }
  for (int k = 0; k <= pieces.depth(); ++k) {
    bool settled = true;
    for (const auto& orbit : orbits) {
      for (const GapChain& chain : orbit) {
        if (k > chain.top()) continue;
        const int stable = pieces.piece(chain.top(), chain.deepest()).degree;
        if (pieces.piece(k, chain.pieces[static_cast<std::size_t>(k)]).degree != stable) {
          settled = false;
          break;
        }
      }
      if (!settled) break;
    }
    if (settled) return k;
  }
  return std::nullopt;
}

PrimitivityResult primitivity_check(const PieceTable& pieces) {
  PrimitivityResult res;
  res.depth_checked = pieces.depth();
  const std::vector<GapChain> reps = gap_representatives(pieces);
  if (reps.size() < 2) {
    res.detail = "fewer than two distinct critical-orbit gaps";
    return res;
  }
  const FiniteLamination gen =
      generated_classes(pieces.tower(), pieces.tower().level(pieces.depth()).support());
  std::vector<AngleSet> bounds;
  bounds.reserve(reps.size());
  for (const GapChain& rep : reps) bounds.push_back(chain_boundary_angles(pieces, rep));
  auto meets = [](const AngleSet& A, const AngleSet& B) {
    for (const Angle& a : A)
      if (B.contains(a)) return true;
    return false;
  };
  for (std::size_t i = 0; i < reps.size(); ++i) {
    for (std::size_t j = i + 1; j < reps.size(); ++j) {
      for (const AngleSet& C : gen.classes()) {
        if (meets(C, bounds[i]) && meets(C, bounds[j])) {
          res.witness_found = true;
          res.witness = C;
          res.gaps = {static_cast<int>(i), static_cast<int>(j)};
          res.detail = "class " + C.str() + " meets the boundaries of gap " + std::to_string(i) +
                       " (shift " + std::to_string(reps[i].shift) + " of critical face " +
                       std::to_string(reps[i].source) + ") and gap " + std::to_string(j) +
                       " (shift " + std::to_string(reps[j].shift) + " of critical face " +
                       std::to_string(reps[j].source) + ")";
          return res;
        }
      }
    }
  }
  res.detail = "no generated class meets two distinct gap boundaries up to depth " +
               std::to_string(pieces.depth());
  return res;
}

ObstructionResult renormalizability_obstruction(const PieceTable& pieces) {
  ObstructionResult res;
  const int d = pieces.tower().degree();
  const FiniteLamination& deep = pieces.tower().level(pieces.depth());
  std::vector<AngleSet> critical;
  for (const AngleSet& C : deep.classes())
    if (class_map_degree(C, d) >= 2) critical.push_back(C);
  if (critical.empty()) {
    res.detail = "no critical classes at the deepest level; nothing shadows the gap chains";
    return res;
  }
  const std::vector<GapChain> reps = gap_representatives(pieces);
  for (std::size_t g = 0; g < reps.size(); ++g) {
    for (const AngleSet& C : critical) {
      bool shadows = true;
      for (int k = 0; k <= reps[g].top(); ++k) {
        const Piece& piece = pieces.piece(k, reps[g].pieces[static_cast<std::size_t>(k)]);
        bool here = false;
        for (const Angle& a : C)
          if (piece.closure_contains(a)) {
            here = true;
            break;
          }
        if (!here) {
          shadows = false;
          break;
        }
      }
      if (shadows) {
        res.witness_found = true;
        res.witness = C;
        res.gap = static_cast<int>(g);
        res.detail = "critical class " + C.str() + " meets the closure of gap " +
                     std::to_string(g) + " at every depth up to " + std::to_string(reps[g].top());
        return res;
      }
    }
  }
  res.detail = "no critical class shadows a gap chain at every depth";
  return res;
}

// ---- pullback / extension -------------------------------------------------

FiniteLamination pullback_level(const FiniteLamination& level, int degree, const AngleSet& cuts,
                                const std::vector<ExtensionJoin>& joins) {
  if (static_cast<int>(cuts.size()) != degree)
    throw std::invalid_argument("pullback: need exactly " + std::to_string(degree) +
                                " cut angles (one full fiber)");
  const Angle omega = map_d(cuts[0], degree);
  for (std::size_t i = 1; i < cuts.size(); ++i)
    if (!(map_d(cuts[i], degree) == omega))
      throw std::invalid_argument("pullback: cut angles are not one fiber");
  if (level.support().contains(omega))
    throw std::invalid_argument("pullback: cut fiber collides with the class angle " + omega.str());

  std::vector<Arc> windows;
  for (int j = 0; j < degree; ++j)
    windows.push_back(Arc{cuts[static_cast<std::size_t>(j)],
                          cuts[static_cast<std::size_t>((j + 1) % degree)]});

  const std::size_t nclasses = level.size();
  std::vector<std::vector<std::vector<Angle>>> sections(
      nclasses, std::vector<std::vector<Angle>>(static_cast<std::size_t>(degree)));
  for (std::size_t pc = 0; pc < nclasses; ++pc) {
    for (const Angle& a : level.class_at(pc)) {
      for (const Angle& x : preimages(a, degree)) {
        bool placed = false;
        for (int j = 0; j < degree; ++j) {
          if (windows[static_cast<std::size_t>(j)].contains(x)) {
            sections[pc][static_cast<std::size_t>(j)].push_back(x);
            placed = true;
            break;
          }
        }
        if (!placed)
          throw std::logic_error("pullback: preimage " + x.str() + " landed on a cut angle");
      }
    }
    for (int j = 0; j < degree; ++j)
      if (sections[pc][static_cast<std::size_t>(j)].size() != level.class_at(pc).size())
        throw std::logic_error("pullback: window " + std::to_string(j) +
                               " does not hold one preimage per class angle");
  }

  std::vector<std::vector<char>> used(nclasses, std::vector<char>(static_cast<std::size_t>(degree), 0));
  std::vector<AngleSet> out;
  for (const ExtensionJoin& join : joins) {
    if (join.parent >= nclasses)
      throw std::invalid_argument("pullback: join parent index out of range");
    if (join.windows.empty()) throw std::invalid_argument("pullback: join lists no windows");
    std::vector<Angle> merged;
    std::vector<int> ws = join.windows;
    std::sort(ws.begin(), ws.end());
    if (std::adjacent_find(ws.begin(), ws.end()) != ws.end())
      throw std::invalid_argument("pullback: join repeats a window");
    for (int w : ws) {
      if (w < 0 || w >= degree) throw std::invalid_argument("pullback: join window out of range");
      if (used[join.parent][static_cast<std::size_t>(w)])
        throw std::invalid_argument("pullback: window joined twice");
      used[join.parent][static_cast<std::size_t>(w)] = 1;
      const auto& sec = sections[join.parent][static_cast<std::size_t>(w)];
      merged.insert(merged.end(), sec.begin(), sec.end());
    }
    out.push_back(AngleSet(merged));
  }
  for (std::size_t pc = 0; pc < nclasses; ++pc)
    for (int j = 0; j < degree; ++j)
      if (!used[pc][static_cast<std::size_t>(j)])
        out.push_back(AngleSet(sections[pc][static_cast<std::size_t>(j)]));
  return FiniteLamination(degree, out);
}

PuzzleTower extend_tower(const PuzzleTower& tower, const AngleSet& cuts,
                         const std::vector<ExtensionJoin>& joins) {
  const int d = tower.degree();
  FiniteLamination next = pullback_level(tower.level(tower.depth()), d, cuts, joins);

  // Validate the new level against the current deepest one; the base tower
  // is taken as already valid, which keeps extension linear in level size.
  ValidationReport report;
  const int k = tower.depth() + 1;
  ValidationReport lam = verify_lamination(next);
  for (const Violation& v : lam.violations)
    report.add(v.axiom, "level " + std::to_string(k) + ": " + v.detail);
  verify_level_pair(report, next, tower.level(tower.depth()), k, d);
  if (!report.ok())
    throw std::invalid_argument("extension marking rejected: " + report.violations[0].axiom +
                                ": " + report.violations[0].detail);

  std::vector<FiniteLamination> levels = tower.levels();
  levels.push_back(std::move(next));
  return PuzzleTower(std::move(levels));
}

PuzzleTower extend_tower(const PuzzleTower& tower, const Angle& omega,
                         const std::vector<ExtensionJoin>& joins) {
  return extend_tower(tower, preimages(omega, tower.degree()), joins);
}

PuzzleTower random_tower(std::mt19937_64& rng, int degree, int target_depth) {
  if (degree < 2) throw std::invalid_argument("random_tower: need degree >= 2");
  auto pick = [&rng](std::size_t n) { return static_cast<std::size_t>(rng() % n); };

  std::vector<std::vector<AngleSet>> seeds;
  seeds.push_back({});  // empty tower
  {
    // a periodic orbit of singleton classes
    const int period = 1 + static_cast<int>(pick(4));
    unsigned long den = 1;
    for (int i = 0; i < period; ++i) den *= static_cast<unsigned long>(degree);
    den -= 1;
    const Angle theta(mpq_class(static_cast<unsigned long>(rng() % den), den));
    std::vector<AngleSet> classes;
    for (const Angle& a : orbit(theta, degree).trajectory) classes.push_back(AngleSet{a});
    seeds.push_back(classes);
  }
  if (degree == 2) {
    seeds.push_back({AngleSet{Angle(1, 3), Angle(2, 3)}});
    seeds.push_back({AngleSet{Angle(1, 7), Angle(2, 7), Angle(4, 7)}});
    seeds.push_back({AngleSet{Angle(3, 7), Angle(4, 7)}, AngleSet{Angle(6, 7), Angle(1, 7)},
                     AngleSet{Angle(2, 7), Angle(5, 7)}});
  } else if (degree == 3) {
    seeds.push_back({AngleSet{Angle(0, 1), Angle(1, 2)}});
    seeds.push_back({AngleSet{Angle(1, 8), Angle(3, 8)}});
    seeds.push_back({AngleSet{Angle(1, 4), Angle(5, 8)}, AngleSet{Angle(3, 4), Angle(7, 8)}});
  } else if (degree == 4) {
    seeds.push_back({AngleSet{Angle(2, 5), Angle(3, 5)}});
    seeds.push_back({AngleSet{Angle(1, 3), Angle(2, 3)}});
  }

  // A seed can dead-end: some classes reach an angular extent no single cut
  // window covers, and the forced welds stop aligning.  Restart from a fresh
  // seed when 64 fibers in a row fail.
  for (int restart = 0; restart < 32; ++restart) {
    PuzzleTower tower({FiniteLamination(degree, seeds[pick(seeds.size())])});
    bool dead = false;
    while (tower.depth() < target_depth && !dead) {
      bool grown = false;
      for (int attempt = 0; attempt < 64 && !grown; ++attempt) {
        const unsigned long q = 2 + rng() % 996;
        const Angle omega(mpq_class(rng() % q, q));
        const FiniteLamination& deepest = tower.level(tower.depth());
        if (deepest.support().contains(omega)) continue;

        const AngleSet cuts = preimages(omega, degree);
        std::vector<Arc> windows;
        for (int j = 0; j < degree; ++j)
          windows.push_back(Arc{cuts[static_cast<std::size_t>(j)],
                                cuts[static_cast<std::size_t>((j + 1) % degree)]});
        auto window_of = [&windows](const Angle& x) {
          for (std::size_t j = 0; j < windows.size(); ++j)
            if (windows[j].contains(x)) return static_cast<int>(j);
          return -1;
        };

        // A deepest-level class split across several windows survives the
        // pullback only when exactly its windows are welded over the class of
        // its image; derive those joins instead of guessing them.
        std::vector<ExtensionJoin> joins;
        bool usable = true;
        for (std::size_t pc = 0; pc < deepest.size() && usable; ++pc) {
          const AngleSet& C = deepest.class_at(pc);
          std::set<int> touched;
          for (const Angle& a : C) {
            const int w = window_of(a);
            if (w < 0) {
              usable = false;
              break;
            }
            touched.insert(w);
          }
          if (!usable || touched.size() < 2) continue;
          auto parent = deepest.class_index_of(map_d(C[0], degree));
          if (!parent) {
            usable = false;
            break;
          }
          joins.push_back(
              ExtensionJoin{*parent, std::vector<int>(touched.begin(), touched.end())});
        }
        if (!usable) continue;

        // Occasionally weld one extra pair of adjacent windows to mint a fresh
        // critical class; fall back to the forced joins alone if it clashes.
        std::vector<ExtensionJoin> attempt_joins = joins;
        if (!deepest.classes().empty() && rng() % 3 == 0) {
          ExtensionJoin join;
          join.parent = pick(deepest.size());
          const int w = static_cast<int>(pick(static_cast<std::size_t>(degree)));
          join.windows = {w, (w + 1) % degree};
          attempt_joins.push_back(join);
        }
        try {
          tower = extend_tower(tower, omega, attempt_joins);
          grown = true;
        } catch (const std::invalid_argument&) {
          if (attempt_joins.size() != joins.size()) {
            try {
              tower = extend_tower(tower, omega, joins);
              grown = true;
            } catch (const std::invalid_argument&) {
            }
          }
        }
      }
      if (!grown) dead = true;
    }
    if (!dead) return tower;
  }
  throw std::logic_error("random_tower: no usable cut fiber found");
}

bool orbit_repeats(const PuzzleTower& tower, const Angle& a) {
  const FiniteLamination& deep = tower.level(tower.depth());
  const Orbit orb = orbit(a, tower.degree());
  std::set<std::size_t> visited;
  for (const Angle& x : orb.trajectory) {
    auto ci = deep.class_index_of(x);
    if (ci && !visited.insert(*ci).second) return true;
  }
  for (std::size_t i = static_cast<std::size_t>(orb.preperiod); i < orb.trajectory.size(); ++i)
    if (deep.class_index_of(orb.trajectory[i])) return true;
  return false;
}

std::string to_string(const PuzzleTower& tower) {
  std::ostringstream os;
  os << "tower(d=" << tower.degree() << ", depth=" << tower.depth() << ", classes per level:";
  for (const FiniteLamination& lam : tower.levels()) os << " " << lam.size();
  os << ")";
  return os.str();
}

}  // namespace lamina
