#include "kh/cobordism.hpp"

#include <algorithm>

namespace kh {

int Movie::chi() const {
    int births = 0, deaths = 0, saddles = 0;
    for (const auto& ev : events) {
        if (ev.kind == EventKind::Birth) ++births;
        if (ev.kind == EventKind::Death) ++deaths;
        if (ev.kind == EventKind::Saddle) ++saddles;
    }
    return births + deaths - saddles;
}

MovieReplay replay(const Movie& m) {
    m.source.validate();
    MovieReplay r;
    r.diagrams.push_back(m.source);
    for (const auto& ev : m.events) {
        auto [next, corr] = apply_event(r.diagrams.back(), ev);
        r.diagrams.push_back(std::move(next));
        r.corrs.push_back(std::move(corr));
    }
    return r;
}

namespace {

// --- label transport --------------------------------------------------------
//
// Each event changes the circle partition of a resolution by at most one
// elementary operation: a merge of two circles, a split of one, or a
// relabeling. The transport below rebuilds the label vector on the new
// circles from parent/child bookkeeping and applies m or Delta where the
// partition actually changed.

struct TransportSpec {
    const CircleSet* oldcs = nullptr;
    uint64_t old_labels = 0;
    const CircleSet* newcs = nullptr;
    const EdgeCorrespondence* corr = nullptr;
    // Ancestry for edges that do not survive the rewrite: (new edge, old circle).
    std::vector<std::pair<EdgeId, int>> edge_parents = {};
    // Old circles whose labels the caller consumes (death, bigon circle).
    std::vector<int> excluded_old = {};
    // Labels forced on specific new circles (born or local circles).
    std::vector<std::pair<int, int>> forced_new = {};
    // Pair a lone unmatched new circle with a lone unmatched old one (R3).
    bool allow_orphan_pair = false;
};

bool label_x(uint64_t labels, int circle) { return (labels >> circle) & 1; }

std::vector<uint64_t> transport_labels(const TransportSpec& spec) {
    const CircleSet& oc = *spec.oldcs;
    const CircleSet& nc = *spec.newcs;
    std::vector<int8_t> excluded(oc.count(), 0);
    for (int a : spec.excluded_old) excluded[a] = 1;
    std::vector<int> forced(nc.count(), -1);
    for (auto [j, v] : spec.forced_new) forced[j] = v;

    std::vector<std::vector<int>> parents(nc.count());
    auto link = [&](int newc, int oldc) {
        if (excluded[oldc]) return;
        auto& p = parents[newc];
        if (std::find(p.begin(), p.end(), oldc) == p.end()) p.push_back(oldc);
    };
    for (EdgeId e = 0; e < static_cast<EdgeId>(spec.corr->forward.size()); ++e) {
        EdgeId e2 = spec.corr->forward[e];
        if (e2 < 0) continue;
        link(nc.circle_of[e2], oc.circle_of[e]);
    }
    for (auto [e2, oldc] : spec.edge_parents) link(nc.circle_of[e2], oldc);

    std::vector<std::vector<int>> children(oc.count());
    for (int j = 0; j < nc.count(); ++j) {
        if (forced[j] >= 0) continue;
        for (int a : parents[j]) children[a].push_back(j);
    }

    if (spec.allow_orphan_pair) {
        int lone_new = -1, lone_old = -1;
        for (int j = 0; j < nc.count(); ++j)
            if (forced[j] < 0 && parents[j].empty()) {
                if (lone_new >= 0) throw InputError("transport: multiple unmatched circles");
                lone_new = j;
            }
        for (int a = 0; a < oc.count(); ++a)
            if (!excluded[a] && children[a].empty()) {
                if (lone_old >= 0) throw InputError("transport: multiple unmatched circles");
                lone_old = a;
            }
        if ((lone_new >= 0) != (lone_old >= 0))
            throw InputError("transport: unmatched circle without a partner");
        if (lone_new >= 0) {
            parents[lone_new].push_back(lone_old);
            children[lone_old].push_back(lone_new);
        }
    }

    // Locate the single partition change, if any.
    int split_old = -1, merge_new = -1;
    for (int a = 0; a < oc.count(); ++a) {
        if (excluded[a]) continue;
        if (children[a].size() == 1) continue;
        if (children[a].size() == 2) {
            if (split_old >= 0 || merge_new >= 0)
                throw InputError("transport: more than one partition change");
            split_old = a;
            continue;
        }
        throw InputError("transport: old circle lost its descendants");
    }
    for (int j = 0; j < nc.count(); ++j) {
        if (forced[j] >= 0) continue;
        if (parents[j].size() == 1) continue;
        if (parents[j].size() == 2) {
            if (split_old >= 0 || merge_new >= 0)
                throw InputError("transport: more than one partition change");
            merge_new = j;
            continue;
        }
        throw InputError("transport: new circle without ancestry");
    }
    if (split_old >= 0) {
        // Both halves must point back at split_old alone.
        for (int j : children[split_old])
            if (parents[j].size() != 1)
                throw InputError("transport: split tangled with another change");
    }

    auto base_labels = [&](int special, int special_label) {
        uint64_t out = 0;
        for (int j = 0; j < nc.count(); ++j) {
            int v;
            if (j == special)
                v = special_label;
            else if (forced[j] >= 0)
                v = forced[j];
            else
                v = label_x(spec.old_labels, parents[j][0]) ? 1 : 0;
            if (v) out |= uint64_t{1} << j;
        }
        return out;
    };

    std::vector<uint64_t> result;
    if (merge_new >= 0) {
        int a = parents[merge_new][0], b = parents[merge_new][1];
        bool xa = label_x(spec.old_labels, a), xb = label_x(spec.old_labels, b);
        if (xa && xb) return result;  // m(x,x) = 0
        result.push_back(base_labels(merge_new, (xa || xb) ? 1 : 0));
    } else if (split_old >= 0) {
        int j1 = children[split_old][0], j2 = children[split_old][1];
        if (j1 > j2) std::swap(j1, j2);
        auto with = [&](int l1, int l2) {
            uint64_t out = base_labels(j1, l1);
            out &= ~(uint64_t{1} << j2);
            if (l2) out |= uint64_t{1} << j2;
            return out;
        };
        if (label_x(spec.old_labels, split_old)) {
            result.push_back(with(1, 1));  // Delta(x) = x (x) x
        } else {
            result.push_back(with(0, 1));  // Delta(1) = 1(x)x + x(x)1
            result.push_back(with(1, 0));
        }
    } else {
        result.push_back(base_labels(-1, 0));
    }
    return result;
}

Smoothing map_smoothing(const Diagram& dst, const EdgeCorrespondence& corr, const Smoothing& s,
                        const std::vector<std::pair<int, int>>& created_bits) {
    uint64_t bits = 0;
    for (int ci = 0; ci < static_cast<int>(corr.crossing_forward.size()); ++ci) {
        int nc = corr.crossing_forward[ci];
        if (nc >= 0 && s.bit(ci)) bits |= uint64_t{1} << nc;
    }
    for (auto [nc, b] : created_bits)
        if (b) bits |= uint64_t{1} << nc;
    return {bits, dst.n()};
}

struct EventCtx {
    const Diagram& src;
    const Diagram& dst;
    const EdgeCorrespondence& corr;
    const MovieEvent& ev;
};

void map_birth(const EventCtx& cx, const LabeledSmoothing& g, const CircleSet& oldcs,
               ChainVector& out) {
    Smoothing s2 = map_smoothing(cx.dst, cx.corr, g.s, {});
    CircleSet newcs = resolve(cx.dst, s2);
    TransportSpec spec{&oldcs, g.labels, &newcs, &cx.corr};
    spec.forced_new.push_back({newcs.circle_of[cx.corr.created[0]], 0});
    for (uint64_t labels : transport_labels(spec)) out.add({s2, labels});
}

void map_death(const EventCtx& cx, const LabeledSmoothing& g, const CircleSet& oldcs,
               ChainVector& out) {
    int killed = oldcs.circle_of[cx.ev.site[0]];
    if (!label_x(g.labels, killed)) return;  // counit sends 1-labeled circles to 0
    Smoothing s2 = map_smoothing(cx.dst, cx.corr, g.s, {});
    CircleSet newcs = resolve(cx.dst, s2);
    TransportSpec spec{&oldcs, g.labels, &newcs, &cx.corr};
    spec.excluded_old.push_back(killed);
    for (uint64_t labels : transport_labels(spec)) out.add({s2, labels});
}

void map_saddle(const EventCtx& cx, const LabeledSmoothing& g, const CircleSet& oldcs,
                ChainVector& out) {
    EdgeId a = cx.ev.site[0], b = cx.ev.site[1];
    int ca = oldcs.circle_of[a], cb = oldcs.circle_of[b];
    Smoothing s2 = map_smoothing(cx.dst, cx.corr, g.s, {});
    CircleSet newcs = resolve(cx.dst, s2);
    TransportSpec spec{&oldcs, g.labels, &newcs, &cx.corr};
    // Created edges descend from both saddle circles; surviving edges of
    // the opposite circle also witness the fusion.
    for (EdgeId e2 : cx.corr.created) {
        spec.edge_parents.push_back({e2, ca});
        spec.edge_parents.push_back({e2, cb});
    }
    if (cx.corr.created.empty()) {
        EdgeId survivor = cx.corr.forward[a] >= 0 ? cx.corr.forward[a] : cx.corr.forward[b];
        if (survivor < 0) throw InputError("internal: saddle left no trace");
        spec.edge_parents.push_back({survivor, ca});
        spec.edge_parents.push_back({survivor, cb});
    }
    for (uint64_t labels : transport_labels(spec)) out.add({s2, labels});
}

void map_r1_add(const EventCtx& cx, const LabeledSmoothing& g, const CircleSet& oldcs,
                ChainVector& out, bool positive) {
    int cn = cx.corr.created_crossings[0];
    EdgeId loop2 = cx.corr.created.back();
    EdgeId through2 = cx.corr.created[0];
    int t_old = oldcs.circle_of[cx.ev.site[0]];
    int circle_bit = positive ? 0 : 1;  // the curl circle splits off there
    Smoothing s2 = map_smoothing(cx.dst, cx.corr, g.s, {{cn, circle_bit}});
    CircleSet newcs = resolve(cx.dst, s2);
    int loop_circle = newcs.circle_of[loop2];
    int through_circle = newcs.circle_of[through2];

    auto make_spec = [&]() {
        TransportSpec spec{&oldcs, g.labels, &newcs, &cx.corr};
        for (size_t i = 0; i + 1 < cx.corr.created.size(); ++i)
            spec.edge_parents.push_back({cx.corr.created[i], t_old});
        return spec;
    };
    if (positive) {
        // alpha |-> alpha (x) x  +  (x . alpha) (x) 1
        TransportSpec spec1 = make_spec();
        spec1.forced_new.push_back({loop_circle, 1});
        for (uint64_t labels : transport_labels(spec1)) out.add({s2, labels});
        if (!label_x(g.labels, t_old)) {
            TransportSpec spec2{&oldcs, g.labels, &newcs, &cx.corr};
            spec2.excluded_old.push_back(t_old);
            spec2.forced_new.push_back({loop_circle, 0});
            spec2.forced_new.push_back({through_circle, 1});
            for (uint64_t labels : transport_labels(spec2)) out.add({s2, labels});
        }
    } else {
        // alpha |-> alpha (x) 1
        TransportSpec spec = make_spec();
        spec.forced_new.push_back({loop_circle, 0});
        for (uint64_t labels : transport_labels(spec)) out.add({s2, labels});
    }
}

void map_r1_remove(const EventCtx& cx, const LabeledSmoothing& g, const CircleSet& oldcs,
                   ChainVector& out, bool positive) {
    KinkPattern k = find_kink_pattern(cx.src, cx.ev.site[0], positive);
    int circle_bit = positive ? 0 : 1;
    if (g.s.bit(k.crossing) != static_cast<bool>(circle_bit)) return;
    int loop_circle = oldcs.circle_of[cx.ev.site[0]];
    int t_old = oldcs.circle_of[k.in];
    bool loop_is_x = label_x(g.labels, loop_circle);
    Smoothing s2 = map_smoothing(cx.dst, cx.corr, g.s, {});
    CircleSet newcs = resolve(cx.dst, s2);

    TransportSpec spec{&oldcs, g.labels, &newcs, &cx.corr};
    spec.excluded_old.push_back(loop_circle);
    spec.edge_parents.push_back({cx.corr.created[0], t_old});
    if (positive) {
        // x-labeled curls evaluate to 1, 1-labeled curls die.
        if (!loop_is_x) return;
    } else {
        if (loop_is_x) {
            // multiply the through strand by x
            if (label_x(g.labels, t_old)) return;
            spec.excluded_old.push_back(t_old);
            spec.forced_new.push_back({newcs.circle_of[cx.corr.created[0]], 1});
        }
    }
    for (uint64_t labels : transport_labels(spec)) out.add({s2, labels});
}

// Which resolution bit of crossing ci joins edges x and y.
int pairing_bit(const Diagram& d, int ci, EdgeId x, EdgeId y) {
    const auto& e = d.crossings[ci].e;
    int sx = -1, sy = -1;
    for (int s = 0; s < 4; ++s) {
        if (e[s] == x && sx < 0) sx = s;
        if (e[s] == y && (sy < 0 || sy == sx)) sy = s;
    }
    if (sx < 0 || sy < 0 || sx == sy) throw InputError("internal: edges not at crossing");
    if (sx > sy) std::swap(sx, sy);
    if ((sx == 0 && sy == 1) || (sx == 2 && sy == 3)) return 0;
    if ((sx == 0 && sy == 3) || (sx == 1 && sy == 2)) return 1;
    throw InputError("internal: edges on the same strand of a crossing");
}

void map_r2_add(const EventCtx& cx, const LabeledSmoothing& g, const CircleSet& oldcs,
                ChainVector& out) {
    EdgeId mov = cx.ev.site[0], tgt = cx.ev.site[1];
    bool mov_real = !cx.src.is_synthetic(mov);
    int c1n = cx.corr.created_crossings[0];
    int c2n = cx.corr.created_crossings[1];
    EdgeId m_m = cx.corr.created[1];
    EdgeId t_m = cx.corr.created[mov_real ? 4 : 3];
    int b1 = pairing_bit(cx.dst, c1n, m_m, t_m);
    int b2 = pairing_bit(cx.dst, c2n, m_m, t_m);
    if (b1 + b2 != 1) throw InputError("internal: r2 circle layer is not in middle degree");
    int a_old = oldcs.circle_of[mov], b_old = oldcs.circle_of[tgt];

    size_t m_count = mov_real ? 3 : 2;
    auto add_outer_parents = [&](TransportSpec& spec) {
        for (size_t i = 0; i < cx.corr.created.size(); ++i) {
            EdgeId e2 = cx.corr.created[i];
            if (e2 == m_m || e2 == t_m) continue;
            spec.edge_parents.push_back({e2, i < m_count ? a_old : b_old});
        }
    };

    // Parallel layer: plumb the chain straight through. The strands trade
    // middle segments there, so m_m rides the target circle and t_m the
    // moving one.
    {
        Smoothing s2 = map_smoothing(cx.dst, cx.corr, g.s, {{c1n, 1 - b1}, {c2n, 1 - b2}});
        CircleSet newcs = resolve(cx.dst, s2);
        TransportSpec spec{&oldcs, g.labels, &newcs, &cx.corr};
        add_outer_parents(spec);
        spec.edge_parents.push_back({m_m, b_old});
        spec.edge_parents.push_back({t_m, a_old});
        for (uint64_t labels : transport_labels(spec)) out.add({s2, labels});
    }
    // Circle layer: saddle the two strands together, label the bigon
    // circle 1.
    {
        Smoothing s2 = map_smoothing(cx.dst, cx.corr, g.s, {{c1n, b1}, {c2n, b2}});
        CircleSet newcs = resolve(cx.dst, s2);
        int bigon = newcs.circle_of[m_m];
        if (newcs.circle_of[t_m] != bigon || newcs.circles[bigon].size() != 2)
            throw InputError("internal: r2 circle layer mismatch");
        TransportSpec spec{&oldcs, g.labels, &newcs, &cx.corr};
        add_outer_parents(spec);
        spec.forced_new.push_back({bigon, 0});
        for (uint64_t labels : transport_labels(spec)) out.add({s2, labels});
    }
}

void map_r2_remove(const EventCtx& cx, const LabeledSmoothing& g, const CircleSet& oldcs,
                   ChainVector& out) {
    EdgeId p = cx.ev.site[0], q = cx.ev.site[1];
    BigonPattern bg = find_bigon_pattern(cx.src, p, q);
    int b1 = pairing_bit(cx.src, bg.c1, p, q);
    int b2 = pairing_bit(cx.src, bg.c2, p, q);
    if (b1 + b2 != 1) throw InputError("internal: r2 circle layer is not in middle degree");
    int s1 = g.s.bit(bg.c1), s2bit = g.s.bit(bg.c2);

    auto chain_parents = [&](TransportSpec& spec) {
        auto chains = dissolve_chains(cx.src, {bg.c1, bg.c2}, {p, q});
        size_t open_idx = 0, closed_idx = 0, opens = 0;
        for (const auto& ch : chains) opens += !ch.closed;
        for (const auto& ch : chains) {
            EdgeId e2 = ch.closed ? cx.corr.created[opens + closed_idx++]
                                  : cx.corr.created[open_idx++];
            for (EdgeId e : ch.edges) {
                if (e == p || e == q) continue;
                spec.edge_parents.push_back({e2, oldcs.circle_of[e]});
            }
        }
    };

    if (s1 == 1 - b1 && s2bit == 1 - b2) {
        // Parallel layer: identity re-plumbing.
        Smoothing s2 = map_smoothing(cx.dst, cx.corr, g.s, {});
        CircleSet newcs = resolve(cx.dst, s2);
        TransportSpec spec{&oldcs, g.labels, &newcs, &cx.corr};
        chain_parents(spec);
        for (uint64_t labels : transport_labels(spec)) out.add({s2, labels});
    } else if (s1 == b1 && s2bit == b2) {
        // Circle layer: only x-labeled bigon circles survive, through the
        // reconnecting saddle.
        int bigon = oldcs.circle_of[p];
        if (oldcs.circle_of[q] != bigon || oldcs.circles[bigon].size() != 2)
            throw InputError("internal: bigon circle mismatch");
        if (!label_x(g.labels, bigon)) return;
        Smoothing s2 = map_smoothing(cx.dst, cx.corr, g.s, {});
        CircleSet newcs = resolve(cx.dst, s2);
        TransportSpec spec{&oldcs, g.labels, &newcs, &cx.corr};
        spec.excluded_old.push_back(bigon);
        chain_parents(spec);
        for (uint64_t labels : transport_labels(spec)) out.add({s2, labels});
    }
    // Extreme layers map to zero.
}

// R3 bookkeeping around the slide: the strand whose triangle edge misses a
// crossing is the extremal slider S; chi is the crossing of the other two.
// On the resolution of chi that keeps those two strands apart the move is
// a planar isotopy; on the turnback resolution the induced map is the
// composite of cancelling the slider's bigon and re-inserting it on the
// other side (the two R2 retractions of the cone proof).
struct R3Ctx {
    int chi, p, q;          // crossing indices (same in source and target)
    EdgeId tri_s, tri_b, tri_c;    // source triangle edges: slider, then chi's strands
    EdgeId tri2_s, tri2_b, tri2_c; // their counterparts in the target
    int turn_bit_src, turn_bit_dst;
    std::pair<int, int> o_src, o_dst;  // (bit at p, bit at q) of the bigon layer
};

R3Ctx r3_context(const EventCtx& cx) {
    // Recover the triangle structure on the source.
    std::array<EdgeId, 3> tri;
    std::array<int, 2> ends[3];
    for (int k = 0; k < 3; ++k) {
        EdgeId e = cx.ev.site[k];
        tri[k] = e;
        ends[k] = {cx.src.tail_of(e).first, cx.src.head_of(e).first};
    }
    auto shared_crossing = [&](int a, int b) {
        for (int ca : ends[a])
            for (int cb : ends[b])
                if (ca == cb) return ca;
        throw InputError("internal: r3 edges do not meet");
    };
    // Strand k's triangle edge misses exactly one crossing: the one shared
    // by the other two edges.
    R3Ctx r{};
    int c01 = shared_crossing(0, 1), c02 = shared_crossing(0, 2), c12 = shared_crossing(1, 2);
    // site[k]'s strand: the crossing it does NOT touch: for edge 0: c12.
    // Slider = pick the strand that is extremal; but the construction only
    // needs chi = the crossing its triangle edge misses. Choose S = strand
    // of site[0]; relabel so roles are consistent.
    // chi must be the crossing not on tri_s.
    r.tri_s = tri[0];
    r.tri_b = tri[1];
    r.tri_c = tri[2];
    r.chi = c12;
    r.p = c01;  // S meets strand B here
    r.q = c02;  // S meets strand C here
    // Target edges: created in sorted-source order (see do_r3).
    std::array<EdgeId, 3> sorted = tri;
    std::sort(sorted.begin(), sorted.end());
    auto created_of = [&](EdgeId e) {
        for (int i = 0; i < 3; ++i)
            if (sorted[i] == e) return cx.corr.created[i];
        throw InputError("internal: r3 created edge lookup");
    };
    r.tri2_s = created_of(r.tri_s);
    r.tri2_b = created_of(r.tri_b);
    r.tri2_c = created_of(r.tri_c);
    r.chi = cx.corr.crossing_forward[r.chi];
    r.p = cx.corr.crossing_forward[r.p];
    r.q = cx.corr.crossing_forward[r.q];
    // crossing indices are preserved in place by the rewrite
    int chi_src = c12, p_src = c01, q_src = c02;
    if (r.chi != chi_src || r.p != p_src || r.q != q_src)
        throw InputError("internal: r3 crossing indices moved");
    r.turn_bit_src = pairing_bit(cx.src, chi_src, r.tri_b, r.tri_c);
    r.turn_bit_dst = pairing_bit(cx.dst, r.chi, r.tri2_b, r.tri2_c);
    r.o_src = {pairing_bit(cx.src, p_src, r.tri_s, r.tri_b),
               pairing_bit(cx.src, q_src, r.tri_s, r.tri_c)};
    r.o_dst = {pairing_bit(cx.dst, r.p, r.tri2_s, r.tri2_b),
               pairing_bit(cx.dst, r.q, r.tri2_s, r.tri2_c)};
    return r;
}

// One-crossing flip: the component of the differential at crossing ci
// (merge or split of the circles at its arcs), emitted as terms with the
// bit set.
void flip_crossing_terms(const Diagram& d, int ci, const LabeledSmoothing& g,
                         std::vector<LabeledSmoothing>& out) {
    if (g.s.bit(ci)) throw InputError("internal: flip of a 1-resolved crossing");
    CircleSet cs = resolve(d, g.s);
    Smoothing s2{g.s.bits | (uint64_t{1} << ci), g.s.n};
    CircleSet cs2 = resolve(d, s2);
    EdgeCorrespondence self;
    self.forward.resize(d.total_edges());
    for (EdgeId e = 0; e < d.total_edges(); ++e) self.forward[e] = e;
    const auto& e = d.crossings[ci].e;
    int ca = cs.circle_of[e[0]], cb = cs.circle_of[e[2]];
    TransportSpec spec{&cs, g.labels, &cs2, &self};
    (void)ca;
    (void)cb;
    for (uint64_t labels : transport_labels(spec)) out.push_back({s2, labels});
}

void map_r3(const EventCtx& cx, const LabeledSmoothing& g, const CircleSet& oldcs,
            ChainVector& out) {
    R3Ctx r = r3_context(cx);
    if (r.turn_bit_src != r.turn_bit_dst)
        throw InputError("internal: r3 turnback bit changed across the move");
    if (r.o_src.first + r.o_src.second != 1 || r.o_dst.first + r.o_dst.second != 1)
        throw InputError("internal: r3 bigon layer is not in middle degree");
    const int turn = r.turn_bit_src;
    const int iso = 1 - turn;

    uint64_t base = g.s.bits & ~((uint64_t{1} << r.chi) | (uint64_t{1} << r.p) |
                                 (uint64_t{1} << r.q));
    auto src_bits = [&](int pb, int qb, int cb) {
        uint64_t bits = base;
        if (pb) bits |= uint64_t{1} << r.p;
        if (qb) bits |= uint64_t{1} << r.q;
        if (cb) bits |= uint64_t{1} << r.chi;
        return Smoothing{bits, cx.src.n()};
    };
    auto dst_bits = [&](int pb, int qb, int cb) {
        uint64_t bits = base;
        if (pb) bits |= uint64_t{1} << r.p;
        if (qb) bits |= uint64_t{1} << r.q;
        if (cb) bits |= uint64_t{1} << r.chi;
        return Smoothing{bits, cx.dst.n()};
    };
    EdgeCorrespondence across;  // shared outer edges, triangle edges dropped
    across.forward.resize(cx.src.total_edges());
    for (EdgeId e = 0; e < cx.src.total_edges(); ++e) across.forward[e] = cx.corr.forward[e];
    EdgeCorrespondence self_src, self_dst;
    self_src.forward.resize(cx.src.total_edges());
    for (EdgeId e = 0; e < cx.src.total_edges(); ++e) self_src.forward[e] = e;
    self_dst.forward.resize(cx.dst.total_edges());
    for (EdgeId e = 0; e < cx.dst.total_edges(); ++e) self_dst.forward[e] = e;

    // The iso-layer replumb of one source term, emitted on the target.
    auto carry_iso = [&](const LabeledSmoothing& t, ChainVector& sink) {
        CircleSet cs = resolve(cx.src, t.s);
        Smoothing s2 = dst_bits(t.s.bit(r.p), t.s.bit(r.q), iso);
        CircleSet cs2 = resolve(cx.dst, s2);
        TransportSpec spec{&cs, t.labels, &cs2, &across};
        for (uint64_t labels : transport_labels(spec)) sink.add({s2, labels});
    };

    // The turn-layer retraction composite of one source term.
    auto carry_turn = [&](const LabeledSmoothing& t, ChainVector& sink) {
        CircleSet cs = resolve(cx.src, t.s);
        int sp = t.s.bit(r.p), sq = t.s.bit(r.q);
        bool in_parallel = (sp == 1 - r.o_src.first && sq == 1 - r.o_src.second);
        bool in_circle = (sp == r.o_src.first && sq == r.o_src.second);
        if (!in_parallel && !in_circle) return;  // extreme sublayers die

        Smoothing s_par = src_bits(1 - r.o_src.first, 1 - r.o_src.second, turn);
        CircleSet par_src = resolve(cx.src, s_par);
        std::vector<uint64_t> e_terms;
        if (in_parallel) {
            e_terms.push_back(t.labels);
        } else {
            int bigon = cs.circle_of[r.tri_s];
            if (cs.circle_of[r.tri_b] != bigon || cs.circle_of[r.tri_c] != bigon) return;
            if (!label_x(t.labels, bigon)) return;
            TransportSpec spec{&cs, t.labels, &par_src, &self_src};
            spec.excluded_old.push_back(bigon);
            e_terms = transport_labels(spec);
        }
        Smoothing s_par2 = dst_bits(1 - r.o_dst.first, 1 - r.o_dst.second, turn);
        CircleSet par_dst = resolve(cx.dst, s_par2);
        Smoothing s_circ2 = dst_bits(r.o_dst.first, r.o_dst.second, turn);
        CircleSet circ_dst = resolve(cx.dst, s_circ2);
        int bigon2 = circ_dst.circle_of[r.tri2_s];
        if (circ_dst.circle_of[r.tri2_b] != bigon2 || circ_dst.circle_of[r.tri2_c] != bigon2)
            throw InputError("internal: r3 target bigon mismatch");
        for (uint64_t e_labels : e_terms) {
            TransportSpec to_par{&par_src, e_labels, &par_dst, &across};
            for (uint64_t par_labels : transport_labels(to_par)) {
                sink.add({s_par2, par_labels});
                TransportSpec to_circ{&par_dst, par_labels, &circ_dst, &self_dst};
                to_circ.forced_new.push_back({bigon2, 0});
                for (uint64_t circ_labels : transport_labels(to_circ))
                    sink.add({s_circ2, circ_labels});
            }
        }
    };

    // Retraction homotopy of the source bigon: circle-layer terms with an
    // x-labeled bigon drop to the bottom sublayer; top terms drop to the
    // circle layer with the bigon labeled 1.
    auto homotopy_src = [&](const LabeledSmoothing& t, std::vector<LabeledSmoothing>& sink) {
        CircleSet cs = resolve(cx.src, t.s);
        int sp = t.s.bit(r.p), sq = t.s.bit(r.q);
        if (sp == r.o_src.first && sq == r.o_src.second) {
            int bigon = cs.circle_of[r.tri_s];
            if (cs.circle_of[r.tri_b] != bigon || cs.circle_of[r.tri_c] != bigon) return;
            if (!label_x(t.labels, bigon)) return;
            Smoothing s_bot = src_bits(0, 0, turn);
            CircleSet bot = resolve(cx.src, s_bot);
            TransportSpec spec{&cs, t.labels, &bot, &self_src};
            spec.excluded_old.push_back(bigon);
            for (uint64_t labels : transport_labels(spec)) sink.push_back({s_bot, labels});
        } else if (sp == 1 && sq == 1) {
            Smoothing s_o = src_bits(r.o_src.first, r.o_src.second, turn);
            CircleSet ocs = resolve(cx.src, s_o);
            int bigon = ocs.circle_of[r.tri_s];
            TransportSpec spec{&cs, t.labels, &ocs, &self_src};
            spec.forced_new.push_back({bigon, 0});
            for (uint64_t labels : transport_labels(spec)) sink.push_back({s_o, labels});
        }
    };

    // Same homotopy on the target side.
    auto homotopy_dst = [&](const LabeledSmoothing& t, ChainVector& sink) {
        CircleSet cs = resolve(cx.dst, t.s);
        int sp = t.s.bit(r.p), sq = t.s.bit(r.q);
        if (sp == r.o_dst.first && sq == r.o_dst.second) {
            int bigon = cs.circle_of[r.tri2_s];
            if (cs.circle_of[r.tri2_b] != bigon || cs.circle_of[r.tri2_c] != bigon) return;
            if (!label_x(t.labels, bigon)) return;
            Smoothing s_bot = dst_bits(0, 0, turn);
            CircleSet bot = resolve(cx.dst, s_bot);
            TransportSpec spec{&cs, t.labels, &bot, &self_dst};
            spec.excluded_old.push_back(bigon);
            for (uint64_t labels : transport_labels(spec)) sink.add({s_bot, labels});
        } else if (sp == 1 && sq == 1) {
            Smoothing s_o = dst_bits(r.o_dst.first, r.o_dst.second, turn);
            CircleSet ocs = resolve(cx.dst, s_o);
            int bigon = ocs.circle_of[r.tri2_s];
            TransportSpec spec{&cs, t.labels, &ocs, &self_dst};
            spec.forced_new.push_back({bigon, 0});
            for (uint64_t labels : transport_labels(spec)) sink.add({s_o, labels});
        }
    };

    int chi_bit = g.s.bit(r.chi);
    if (turn == 0) {
        // cone runs turn -> iso; correction K = iso-carry ( chi-flip ( h (g) ) )
        if (chi_bit == iso) {
            carry_iso(g, out);
        } else {
            carry_turn(g, out);
            std::vector<LabeledSmoothing> dropped;
            homotopy_src(g, dropped);
            for (const auto& t : dropped) {
                std::vector<LabeledSmoothing> flipped;
                flip_crossing_terms(cx.src, r.chi, t, flipped);
                for (const auto& f : flipped) carry_iso(f, out);
            }
        }
    } else {
        // cone runs iso -> turn; correction K' = h' ( chi'-flip ( iso-carry (g) ) )
        if (chi_bit == turn) {
            carry_turn(g, out);
        } else {
            ChainVector carried;
            carry_iso(g, carried);
            out.add(carried);
            for (const auto& z : carried.terms()) {
                std::vector<LabeledSmoothing> flipped;
                flip_crossing_terms(cx.dst, r.chi, z, flipped);
                for (const auto& f : flipped) homotopy_dst(f, out);
            }
        }
    }
}

}  // namespace

EventImage elementary_chain_map(const Diagram& d, const MovieEvent& ev, const ChainVector& c) {
    auto [target, corr] = apply_event(d, ev);
    EventImage img{std::move(target), std::move(corr), {}};
    EventCtx cx{d, img.target, img.corr, ev};
    for (const auto& g : c.terms()) {
        CircleSet oldcs = resolve(d, g.s);
        switch (ev.kind) {
            case EventKind::Birth: map_birth(cx, g, oldcs, img.image); break;
            case EventKind::Death: map_death(cx, g, oldcs, img.image); break;
            case EventKind::Saddle: map_saddle(cx, g, oldcs, img.image); break;
            case EventKind::R1Pos: map_r1_add(cx, g, oldcs, img.image, true); break;
            case EventKind::R1Neg: map_r1_add(cx, g, oldcs, img.image, false); break;
            case EventKind::R1PosInv: map_r1_remove(cx, g, oldcs, img.image, true); break;
            case EventKind::R1NegInv: map_r1_remove(cx, g, oldcs, img.image, false); break;
            case EventKind::R2Add: map_r2_add(cx, g, oldcs, img.image); break;
            case EventKind::R2Remove: map_r2_remove(cx, g, oldcs, img.image); break;
            case EventKind::R3: map_r3(cx, g, oldcs, img.image); break;
        }
    }
    return img;
}

ChainVector apply_movie(const Movie& m, const ChainVector& c) {
    Diagram d = m.source;
    d.validate();
    ChainVector cur = c;
    for (const auto& ev : m.events) {
        EventImage img = elementary_chain_map(d, ev, cur);
        d = std::move(img.target);
        cur = std::move(img.image);
    }
    return cur;
}

Movie reverse_movie(const Movie& m) {
    MovieReplay rep = replay(m);
    Movie rev;
    rev.source = rep.target();
    for (int i = static_cast<int>(m.events.size()) - 1; i >= 0; --i) {
        const MovieEvent& ev = m.events[i];
        const Diagram& before = rep.diagrams[i];
        const EdgeCorrespondence& corr = rep.corrs[i];
        MovieEvent inv;
        switch (ev.kind) {
            case EventKind::Birth:
                inv = {EventKind::Death, {corr.created[0]}};
                break;
            case EventKind::Death:
                inv = {EventKind::Birth, {}};
                break;
            case EventKind::Saddle: {
                EdgeId a = ev.site[0], b = ev.site[1];
                bool sa = before.is_synthetic(a), sb = before.is_synthetic(b);
                if (!sa && !sb) {
                    if (a == b)
                        inv = {EventKind::Saddle, {corr.created[0], corr.created[1]}};
                    else
                        inv = {EventKind::Saddle, {corr.created[0], corr.created[1]}};
                } else if (sa && sb) {
                    if (a == b)
                        inv = {EventKind::Saddle, {corr.forward[a], corr.created[0]}};
                    else {
                        EdgeId kept = corr.forward[std::min(a, b)];
                        inv = {EventKind::Saddle, {kept, kept}};
                    }
                } else {
                    EdgeId strand = sa ? b : a;
                    inv = {EventKind::Saddle, {corr.forward[strand], corr.forward[strand]}};
                }
                break;
            }
            case EventKind::R1Pos:
                inv = {EventKind::R1PosInv, {corr.created.back()}};
                break;
            case EventKind::R1Neg:
                inv = {EventKind::R1NegInv, {corr.created.back()}};
                break;
            case EventKind::R1PosInv: {
                KinkPattern k = find_kink_pattern(before, ev.site[0], true);
                inv = {EventKind::R1Pos, {corr.created[0]}, k.variant};
                break;
            }
            case EventKind::R1NegInv: {
                KinkPattern k = find_kink_pattern(before, ev.site[0], false);
                inv = {EventKind::R1Neg, {corr.created[0]}, k.variant};
                break;
            }
            case EventKind::R2Add: {
                bool mov_real = !before.is_synthetic(ev.site[0]);
                EdgeId m_m = corr.created[1];
                EdgeId t_m = corr.created[mov_real ? 4 : 3];
                // Order the bigon sides so the undo refills the original ids.
                if (ev.site[0] < ev.site[1])
                    inv = {EventKind::R2Remove, {m_m, t_m}};
                else
                    inv = {EventKind::R2Remove, {t_m, m_m}};
                break;
            }
            case EventKind::R2Remove: {
                EdgeId p = ev.site[0], q = ev.site[1];
                BigonPattern bg = find_bigon_pattern(before, p, q);
                auto chains = dissolve_chains(before, {bg.c1, bg.c2}, {p, q});
                // created ids list the open chains first, then the closed
                // ones (as synthetic circles), all in chain order.
                size_t opens = 0;
                for (const auto& ch : chains) opens += !ch.closed;
                size_t open_idx = 0, closed_idx = 0;
                EdgeId mov2 = -1, tgt2 = -1;
                for (const auto& ch : chains) {
                    EdgeId e2 = ch.closed ? corr.created[opens + closed_idx++]
                                          : corr.created[open_idx++];
                    bool has_p = std::find(ch.edges.begin(), ch.edges.end(), p) != ch.edges.end();
                    bool has_q = std::find(ch.edges.begin(), ch.edges.end(), q) != ch.edges.end();
                    if (has_p) mov2 = e2;
                    if (has_q) tgt2 = e2;
                }
                if (mov2 < 0 || tgt2 < 0)
                    throw InputError("reverse: r2- site edges not found in any strand chain");
                int sign_first = before.crossings[bg.c1].sign;
                bool tgt_first_c1 = before.tail_of(q).first == bg.c1;
                inv = {EventKind::R2Add,
                       {mov2, tgt2},
                       MovieEvent::r2_variant(bg.p_over, sign_first, tgt_first_c1)};
                break;
            }
            case EventKind::R3: {
                std::vector<EdgeId> site = corr.created;
                inv = {EventKind::R3, site};
                break;
            }
        }
        rev.events.push_back(inv);
    }
    return rev;
}

ChainMapReport verify_chain_map(const Movie& m, int bound) {
    if (m.source.n() > bound)
        throw FeasibilityError("verify_chain_map: source exceeds feasibility bound");
    MovieReplay rep = replay(m);
    const Diagram& tgt = rep.target();
    ChainMapReport report;
    for (const auto& g : enumerate_generators(m.source)) {
        ++report.generators_checked;
        ChainVector one(std::vector<LabeledSmoothing>{g});
        ChainVector lhs = apply_movie(m, apply_differential(m.source, one));
        ChainVector rhs = apply_differential(tgt, apply_movie(m, one));
        if (!(lhs == rhs)) {
            report.ok = false;
            report.witness = g;
            report.detail = "d(phi(g)) != phi(d(g))";
            return report;
        }
    }
    return report;
}

namespace {

// Incremental GF(2) echelon for independence bookkeeping.
class Echelon {
public:
    bool add(std::vector<uint8_t> v) {
        for (size_t r = 0; r < rows_.size(); ++r) {
            if (v[pivots_[r]])
                for (size_t c = 0; c < v.size(); ++c) v[c] ^= rows_[r][c];
        }
        for (size_t c = 0; c < v.size(); ++c)
            if (v[c]) {
                rows_.push_back(v);
                pivots_.push_back(static_cast<int>(c));
                return true;
            }
        return false;
    }

private:
    std::vector<std::vector<uint8_t>> rows_;
    std::vector<int> pivots_;
};

}  // namespace

HomologyBlockBasis::HomologyBlockBasis(const Diagram& d, Bigrading hq) : d_(d), hq_(hq) {
    ChainBlock blk = differential_block(d, hq);
    chain_basis_ = blk.source;
    // Boundary space: images of the previous block's generators.
    ChainBlock prev = differential_block(d, Bigrading{hq.h - 1, hq.q});
    Echelon ech;
    for (int j = 0; j < prev.d.cols(); ++j) {
        std::vector<uint8_t> col(prev.d.rows());
        for (int r = 0; r < prev.d.rows(); ++r) col[r] = prev.d.get(r, j);
        if (!col.empty() && ech.add(col)) boundary_coords_.push_back(col);
    }
    // Extend to a basis of the cycle space.
    for (const auto& k : kernel_basis(blk.d)) {
        if (ech.add(k)) {
            rep_coords_.push_back(k);
            ChainVector rep;
            for (size_t i = 0; i < k.size(); ++i)
                if (k[i]) rep.add(chain_basis_[i]);
            reps_.push_back(rep);
        }
    }
}

std::vector<uint8_t> HomologyBlockBasis::class_coordinates(const ChainVector& z) const {
    std::vector<uint8_t> v = coordinates_of(z, chain_basis_);
    int n = static_cast<int>(chain_basis_.size());
    int k = static_cast<int>(rep_coords_.size());
    int b = static_cast<int>(boundary_coords_.size());
    F2Matrix m(n, k + b);
    for (int j = 0; j < k; ++j)
        for (int r = 0; r < n; ++r)
            if (rep_coords_[j][r]) m.set(r, j, true);
    for (int j = 0; j < b; ++j)
        for (int r = 0; r < n; ++r)
            if (boundary_coords_[j][r]) m.set(r, k + j, true);
    auto sol = solve(m, v);
    if (!sol) throw InputError("class_coordinates: chain is not a cycle in this block");
    return std::vector<uint8_t>(sol->begin(), sol->begin() + k);
}

F2Matrix induced_homology_map(const Movie& m, Bigrading hq, int bound) {
    MovieReplay rep = replay(m);
    const Diagram& tgt = rep.target();
    if (m.source.n() > bound || tgt.n() > bound)
        throw FeasibilityError("induced_homology_map: diagram exceeds feasibility bound");
    HomologyBlockBasis src_basis(m.source, hq);
    HomologyBlockBasis tgt_basis(tgt, Bigrading{hq.h, hq.q + m.chi()});
    F2Matrix out(tgt_basis.dim(), src_basis.dim());
    for (int j = 0; j < src_basis.dim(); ++j) {
        ChainVector img = apply_movie(m, src_basis.representatives()[j]);
        if (img.zero()) continue;
        std::vector<uint8_t> coords = tgt_basis.class_coordinates(img);
        for (int r = 0; r < tgt_basis.dim(); ++r)
            if (coords[r]) out.set(r, j, true);
    }
    return out;
}

}  // namespace kh
