#include "kh/diagram.hpp"

#include <algorithm>
#include <numeric>
#include <set>

namespace kh {

namespace {

struct UnionFind {
    std::vector<int> parent;
    explicit UnionFind(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
    int find(int x) {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    }
    void unite(int a, int b) {
        a = find(a);
        b = find(b);
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
    }
};

}  // namespace

int Diagram::n_pos() const {
    int k = 0;
    for (const auto& c : crossings) k += c.sign > 0;
    return k;
}

int Diagram::n_neg() const {
    int k = 0;
    for (const auto& c : crossings) k += c.sign < 0;
    return k;
}

bool Diagram::same_crossings(const Diagram& other) const {
    for (size_t i = 0; i < crossings.size(); ++i)
        if (crossings[i].e != other.crossings[i].e || crossings[i].sign != other.crossings[i].sign)
            return false;
    return true;
}

std::pair<int, int> Diagram::tail_of(EdgeId e) const {
    if (is_synthetic(e)) throw InputError("tail_of: synthetic edge has no crossing endpoints");
    for (int ci = 0; ci < n(); ++ci) {
        if (crossings[ci].e[2] == e) return {ci, 2};
        int oo = over_out_slot(ci);
        if (crossings[ci].e[oo] == e) return {ci, oo};
    }
    throw InputError("tail_of: edge not found");
}

std::pair<int, int> Diagram::head_of(EdgeId e) const {
    if (is_synthetic(e)) throw InputError("head_of: synthetic edge has no crossing endpoints");
    for (int ci = 0; ci < n(); ++ci) {
        if (crossings[ci].e[0] == e) return {ci, 0};
        int oi = over_in_slot(ci);
        if (crossings[ci].e[oi] == e) return {ci, oi};
    }
    throw InputError("head_of: edge not found");
}

void Diagram::validate() const {
    if (edge_count < 0 || free_circles < 0) throw InputError("negative edge or circle count");
    if (n() > 0 && edge_count == 0) throw InputError("crossings present but no edges");
    std::vector<int> in_count(edge_count, 0), out_count(edge_count, 0);
    for (int ci = 0; ci < n(); ++ci) {
        const Crossing& c = crossings[ci];
        if (c.sign != 1 && c.sign != -1) throw InputError("crossing sign must be +1 or -1");
        for (EdgeId e : c.e) {
            if (e < 0 || e >= edge_count) throw InputError("crossing references unknown edge");
        }
        in_count[c.e[0]]++;
        out_count[c.e[2]]++;
        in_count[c.e[over_in_slot(ci)]]++;
        out_count[c.e[over_out_slot(ci)]]++;
    }
    for (EdgeId e = 0; e < edge_count; ++e) {
        if (in_count[e] + out_count[e] != 2)
            throw InputError("edge " + std::to_string(e) + " used " +
                             std::to_string(in_count[e] + out_count[e]) + " times, expected 2");
        if (in_count[e] != 1 || out_count[e] != 1)
            throw InputError("edge " + std::to_string(e) +
                             ": sign/orientation mismatch (needs one head and one tail)");
    }
}

int Smoothing::weight() const {
    int w = 0;
    for (int i = 0; i < n; ++i) w += bit(i);
    return w;
}

CircleSet resolve(const Diagram& d, const Smoothing& s) {
    if (s.n != d.n()) throw InputError("resolve: smoothing length does not match crossing count");
    int m = d.total_edges();
    UnionFind uf(m);
    for (int ci = 0; ci < d.n(); ++ci) {
        const auto& e = d.crossings[ci].e;
        if (!s.bit(ci)) {
            uf.unite(e[0], e[1]);
            uf.unite(e[2], e[3]);
        } else {
            uf.unite(e[0], e[3]);
            uf.unite(e[1], e[2]);
        }
    }
    CircleSet cs;
    cs.circle_of.assign(m, -1);
    std::vector<int> root_to_circle(m, -1);
    // Roots are minimal ids in their class, so ascending edge order yields
    // the canonical circle order directly.
    for (EdgeId e = 0; e < m; ++e) {
        int r = uf.find(e);
        if (root_to_circle[r] < 0) {
            root_to_circle[r] = cs.count();
            cs.circles.emplace_back();
        }
        int idx = root_to_circle[r];
        cs.circles[idx].push_back(e);
        cs.circle_of[e] = idx;
    }
    return cs;
}

Diagram mirror(const Diagram& d) {
    Diagram m = d;
    for (auto& c : m.crossings) {
        if (c.sign > 0) {
            // over-strand ran e[3] -> e[1]; it becomes the under-strand
            c = Crossing{{c.e[3], c.e[0], c.e[1], c.e[2]}, -1};
        } else {
            c = Crossing{{c.e[1], c.e[2], c.e[3], c.e[0]}, +1};
        }
    }
    return m;
}

const char* event_kind_name(EventKind k) {
    switch (k) {
        case EventKind::Birth: return "birth";
        case EventKind::Death: return "death";
        case EventKind::Saddle: return "saddle";
        case EventKind::R1Pos: return "r1+";
        case EventKind::R1Neg: return "r1-";
        case EventKind::R1PosInv: return "r1+inv";
        case EventKind::R1NegInv: return "r1-inv";
        case EventKind::R2Add: return "r2+";
        case EventKind::R2Remove: return "r2-";
        case EventKind::R3: return "r3";
    }
    return "?";
}

EventKind event_kind_from_name(const std::string& s) {
    if (s == "birth") return EventKind::Birth;
    if (s == "death") return EventKind::Death;
    if (s == "saddle") return EventKind::Saddle;
    if (s == "r1+") return EventKind::R1Pos;
    if (s == "r1-") return EventKind::R1Neg;
    if (s == "r1+inv") return EventKind::R1PosInv;
    if (s == "r1-inv") return EventKind::R1NegInv;
    if (s == "r2+") return EventKind::R2Add;
    if (s == "r2-") return EventKind::R2Remove;
    if (s == "r3") return EventKind::R3;
    throw InputError("unknown event kind '" + s + "'");
}

// ---------------------------------------------------------------------------
// Event rewriting.
//
// All rewrites run on a workspace where old edges keep their ids and new
// edges get temporary ids >= total_edges(). finalize() compacts: surviving
// real edges in ascending old order, then created real edges in creation
// order, then synthetic circle ids on top.
// ---------------------------------------------------------------------------

namespace {

constexpr EdgeId kGone = -1;

struct Rewriter {
    const Diagram& src;
    std::vector<Crossing> crossings;      // working records, temp ids
    std::vector<int> crossing_alive;      // parallel to crossings
    std::vector<int8_t> old_edge_alive;   // by old id (real + synthetic)
    std::vector<EdgeId> created_real;     // temp ids in creation order
    int created_free = 0;
    int next_temp;

    explicit Rewriter(const Diagram& d)
        : src(d), crossings(d.crossings), crossing_alive(d.n(), 1),
          old_edge_alive(d.total_edges(), 1), next_temp(d.total_edges()) {}

    EdgeId fresh_real() {
        EdgeId t = next_temp++;
        created_real.push_back(t);
        return t;
    }

    void kill_edge(EdgeId old_id) { old_edge_alive[old_id] = 0; }

    void replace_slot(int ci, int slot, EdgeId temp) { crossings[ci].e[slot] = temp; }

    Crossing make_crossing(EdgeId under_in, EdgeId under_out, EdgeId over_in, EdgeId over_out,
                           int sign) {
        if (sign > 0) return Crossing{{under_in, over_out, under_out, over_in}, +1};
        return Crossing{{under_in, over_in, under_out, over_out}, -1};
    }

    int add_crossing(const Crossing& c) {
        crossings.push_back(c);
        crossing_alive.push_back(1);
        return static_cast<int>(crossings.size()) - 1;
    }

    std::pair<Diagram, EdgeCorrespondence> finalize() {
        // Real edge ids: created edges fill the destroyed ids in ascending
        // order, then extend past the old range; leftover gaps are closed
        // by shifting the edges above them down (order preserving).
        std::vector<EdgeId> gaps;
        for (EdgeId e = 0; e < src.edge_count; ++e)
            if (!old_edge_alive[e]) gaps.push_back(e);
        std::vector<EdgeId> temp_to_final(next_temp, kGone);
        size_t gi = 0;
        EdgeId top = src.edge_count;
        for (EdgeId t : created_real)
            temp_to_final[t] = gi < gaps.size() ? gaps[gi++] : top++;
        // Provisional ids for survivors, then compact leftover gaps.
        std::vector<EdgeId> leftover(gaps.begin() + gi, gaps.end());
        auto shift = [&leftover](EdgeId id) {
            EdgeId s = id;
            for (EdgeId g : leftover)
                if (g < id) --s;
            return s;
        };
        for (EdgeId e = 0; e < src.edge_count; ++e)
            if (old_edge_alive[e]) temp_to_final[e] = shift(e);
        for (EdgeId t : created_real) temp_to_final[t] = shift(temp_to_final[t]);
        int new_edge_count =
            src.edge_count - static_cast<int>(gaps.size()) + static_cast<int>(created_real.size());
        // Synthetic circles: survivors in old order, created ones appended.
        EdgeId next_id = new_edge_count;
        for (EdgeId e = src.edge_count; e < src.total_edges(); ++e)
            if (old_edge_alive[e]) temp_to_final[e] = next_id++;
        int new_free = (next_id - new_edge_count) + created_free;

        Diagram out;
        out.edge_count = new_edge_count;
        out.free_circles = new_free;
        EdgeCorrespondence corr;
        corr.crossing_forward.assign(src.n(), -1);
        int next_ci = 0;
        for (size_t i = 0; i < crossings.size(); ++i) {
            if (!crossing_alive[i]) continue;
            Crossing c = crossings[i];
            for (auto& e : c.e) {
                e = temp_to_final[e];
                if (e == kGone) throw InputError("internal: rewrite left dangling edge");
            }
            out.crossings.push_back(c);
            if (i < static_cast<size_t>(src.n()))
                corr.crossing_forward[i] = next_ci;
            else
                corr.created_crossings.push_back(next_ci);
            ++next_ci;
        }

        corr.forward.assign(src.total_edges(), kGone);
        for (EdgeId e = 0; e < src.total_edges(); ++e)
            if (old_edge_alive[e]) corr.forward[e] = temp_to_final[e];
        for (EdgeId t : created_real) corr.created.push_back(temp_to_final[t]);
        for (int j = 0; j < created_free; ++j)
            corr.created.push_back(new_edge_count + (new_free - created_free) + j);

        // Rejecting rewrites that leave the sphere catches variant flags
        // that contradict the face structure at the site.
        validate_planar(out);
        return {out, corr};
    }
};

void check_site_size(const MovieEvent& ev, size_t expect) {
    if (ev.site.size() != expect)
        throw InputError(std::string("event ") + event_kind_name(ev.kind) + ": expected " +
                         std::to_string(expect) + " site edges, got " +
                         std::to_string(ev.site.size()));
}

void check_edge_exists(const Diagram& d, EdgeId e) {
    if (e < 0 || e >= d.total_edges())
        throw InputError("site edge " + std::to_string(e) + " does not exist");
}

std::pair<Diagram, EdgeCorrespondence> do_birth(const Diagram& d) {
    Rewriter rw(d);
    rw.created_free = 1;
    return rw.finalize();
}

std::pair<Diagram, EdgeCorrespondence> do_death(const Diagram& d, const MovieEvent& ev) {
    check_site_size(ev, 1);
    EdgeId e = ev.site[0];
    check_edge_exists(d, e);
    if (!d.is_synthetic(e))
        throw InputError("death: circle must be crossingless (named by its synthetic edge)");
    Rewriter rw(d);
    rw.kill_edge(e);
    return rw.finalize();
}

std::pair<Diagram, EdgeCorrespondence> do_saddle(const Diagram& d, const MovieEvent& ev) {
    check_site_size(ev, 2);
    EdgeId a = ev.site[0], b = ev.site[1];
    check_edge_exists(d, a);
    check_edge_exists(d, b);
    if (!edges_face_adjacent(d, a, b))
        throw InputError("saddle: the two arcs do not border a common face");
    Rewriter rw(d);
    bool sa = d.is_synthetic(a), sb = d.is_synthetic(b);
    if (!sa && !sb) {
        auto ta = d.tail_of(a), ha = d.head_of(a);
        if (a == b) {
            EdgeId x1 = rw.fresh_real();
            rw.replace_slot(ta.first, ta.second, x1);
            rw.replace_slot(ha.first, ha.second, x1);
            rw.kill_edge(a);
            rw.created_free = 1;
        } else {
            auto tb = d.tail_of(b), hb = d.head_of(b);
            EdgeId x1 = rw.fresh_real();  // tail(a) -> head(b)
            EdgeId x2 = rw.fresh_real();  // tail(b) -> head(a)
            rw.replace_slot(ta.first, ta.second, x1);
            rw.replace_slot(hb.first, hb.second, x1);
            rw.replace_slot(tb.first, tb.second, x2);
            rw.replace_slot(ha.first, ha.second, x2);
            rw.kill_edge(a);
            rw.kill_edge(b);
        }
    } else if (sa && sb) {
        if (a == b) {
            rw.created_free = 1;  // split one free circle into two
        } else {
            rw.kill_edge(std::max(a, b));  // merge two free circles
        }
    } else {
        // Band between a circle and a strand: the circle is absorbed.
        EdgeId circle = sa ? a : b;
        rw.kill_edge(circle);
    }
    return rw.finalize();
}

// R1 record layouts per sign and chirality variant, as derived from the
// slot convention. `in`/`out` are the through-strand edges, `loop` the
// small circle of the kink.
Crossing kink_record(EdgeId in, EdgeId out, EdgeId loop, bool positive, int variant) {
    if (positive) {
        if (variant == 0) return Crossing{{in, out, loop, loop}, +1};
        return Crossing{{loop, loop, out, in}, +1};
    }
    if (variant == 0) return Crossing{{in, loop, loop, out}, -1};
    return Crossing{{loop, in, out, loop}, -1};
}

std::pair<Diagram, EdgeCorrespondence> do_r1(const Diagram& d, const MovieEvent& ev,
                                             bool positive) {
    check_site_size(ev, 1);
    EdgeId e = ev.site[0];
    check_edge_exists(d, e);
    if (ev.variant != 0 && ev.variant != 1) throw InputError("r1: variant must be 0 or 1");
    Rewriter rw(d);
    if (d.is_synthetic(e)) {
        EdgeId t = rw.fresh_real();
        EdgeId loop = rw.fresh_real();
        rw.add_crossing(kink_record(t, t, loop, positive, ev.variant));
        rw.kill_edge(e);
    } else {
        auto te = d.tail_of(e), he = d.head_of(e);
        EdgeId e_in = rw.fresh_real();
        EdgeId e_out = rw.fresh_real();
        EdgeId loop = rw.fresh_real();
        rw.replace_slot(te.first, te.second, e_in);
        rw.replace_slot(he.first, he.second, e_out);
        rw.add_crossing(kink_record(e_in, e_out, loop, positive, ev.variant));
        rw.kill_edge(e);
    }
    return rw.finalize();
}

std::pair<Diagram, EdgeCorrespondence> do_r1_inv(const Diagram& d, const MovieEvent& ev,
                                                 bool positive) {
    check_site_size(ev, 1);
    EdgeId loop = ev.site[0];
    check_edge_exists(d, loop);
    if (d.is_synthetic(loop)) throw InputError("r1 removal: loop edge is a free circle");
    KinkPattern k = find_kink_pattern(d, loop, positive);
    Rewriter rw(d);
    rw.crossing_alive[k.crossing] = 0;
    rw.kill_edge(loop);
    if (k.in == k.out) {
        // Kinked unknot: the component becomes a free circle.
        rw.kill_edge(k.in);
        rw.created_free = 1;
    } else {
        EdgeId x = rw.fresh_real();
        auto t = d.tail_of(k.in);
        auto h = d.head_of(k.out);
        if (t.first == k.crossing || h.first == k.crossing)
            throw InputError("r1 removal: through-strand tangles back into the kink");
        rw.replace_slot(t.first, t.second, x);
        rw.replace_slot(h.first, h.second, x);
        rw.kill_edge(k.in);
        rw.kill_edge(k.out);
    }
    return rw.finalize();
}

std::pair<Diagram, EdgeCorrespondence> do_r2_add(const Diagram& d, const MovieEvent& ev) {
    check_site_size(ev, 2);
    EdgeId mov = ev.site[0], tgt = ev.site[1];
    check_edge_exists(d, mov);
    check_edge_exists(d, tgt);
    if (mov == tgt) throw InputError("r2+: cannot push an edge across itself");
    if (!edges_face_adjacent(d, mov, tgt))
        throw InputError("r2+: the strands do not border a common face");
    bool mov_over = ev.variant & 1;
    int s1 = (ev.variant & 2) ? +1 : -1;
    bool tgt_first_c1 = ev.variant & 4;

    Rewriter rw(d);
    EdgeId m_a, m_m, m_b, t_a, t_m, t_b;
    if (d.is_synthetic(mov)) {
        EdgeId m_r = rw.fresh_real();
        m_m = rw.fresh_real();
        m_a = m_b = m_r;
        rw.kill_edge(mov);
    } else {
        m_a = rw.fresh_real();
        m_m = rw.fresh_real();
        m_b = rw.fresh_real();
        auto t = d.tail_of(mov), h = d.head_of(mov);
        rw.replace_slot(t.first, t.second, m_a);
        rw.replace_slot(h.first, h.second, m_b);
        rw.kill_edge(mov);
    }
    if (d.is_synthetic(tgt)) {
        EdgeId t_r = rw.fresh_real();
        t_m = rw.fresh_real();
        t_a = t_b = t_r;
        rw.kill_edge(tgt);
    } else {
        t_a = rw.fresh_real();
        t_m = rw.fresh_real();
        t_b = rw.fresh_real();
        auto t = d.tail_of(tgt), h = d.head_of(tgt);
        rw.replace_slot(t.first, t.second, t_a);
        rw.replace_slot(h.first, h.second, t_b);
        rw.kill_edge(tgt);
    }
    // Crossing 1 is the first along mov; the target strand passes them in
    // the order selected by the variant.
    EdgeId tgt_in_c1 = tgt_first_c1 ? t_a : t_m;
    EdgeId tgt_out_c1 = tgt_first_c1 ? t_m : t_b;
    EdgeId tgt_in_c2 = tgt_first_c1 ? t_m : t_a;
    EdgeId tgt_out_c2 = tgt_first_c1 ? t_b : t_m;
    Crossing c1 = mov_over ? rw.make_crossing(tgt_in_c1, tgt_out_c1, m_a, m_m, s1)
                           : rw.make_crossing(m_a, m_m, tgt_in_c1, tgt_out_c1, s1);
    Crossing c2 = mov_over ? rw.make_crossing(tgt_in_c2, tgt_out_c2, m_m, m_b, -s1)
                           : rw.make_crossing(m_m, m_b, tgt_in_c2, tgt_out_c2, -s1);
    rw.add_crossing(c1);
    rw.add_crossing(c2);
    return rw.finalize();
}

}  // namespace

std::vector<DissolveChain> dissolve_chains(const Diagram& d, const std::vector<int>& which,
                                           const std::vector<EdgeId>& priority) {
    UnionFind uf(d.total_edges());
    std::vector<int8_t> touched(d.total_edges(), 0);
    for (int ci : which) {
        const auto& e = d.crossings[ci].e;
        uf.unite(e[0], e[2]);
        uf.unite(e[d.over_in_slot(ci)], e[d.over_out_slot(ci)]);
        for (int s = 0; s < 4; ++s) touched[e[s]] = 1;
    }
    std::vector<int8_t> dissolved_cr(d.n(), 0);
    for (int ci : which) dissolved_cr[ci] = 1;
    std::map<int, std::vector<EdgeId>> by_root;
    for (EdgeId e = 0; e < d.edge_count; ++e)
        if (touched[e]) by_root[uf.find(e)].push_back(e);

    // Order: priority edges pick their chains first, remaining by root id.
    std::vector<int> roots;
    for (EdgeId p : priority) {
        if (p < 0 || p >= d.edge_count || !touched[p]) continue;
        int r = uf.find(p);
        if (std::find(roots.begin(), roots.end(), r) == roots.end()) roots.push_back(r);
    }
    for (const auto& [r, _] : by_root)
        if (std::find(roots.begin(), roots.end(), r) == roots.end()) roots.push_back(r);

    std::vector<DissolveChain> out;
    for (int r : roots) {
        const auto& edges = by_root.at(r);
        bool open = false;
        for (EdgeId e : edges) {
            if (!dissolved_cr[d.tail_of(e).first] || !dissolved_cr[d.head_of(e).first]) open = true;
        }
        out.push_back({edges, !open});
    }
    return out;
}

namespace {

// Rotation-system face machinery. A dart is a directed traversal of a
// real edge: 2e runs tail -> head, 2e+1 the reverse. The face to the left
// of a dart continues with the dart leaving the next slot counterclockwise
// at the crossing it arrives at.
struct FaceSystem {
    std::vector<int> next;        // dart -> dart
    std::vector<int> face_of;     // dart -> face index
    int faces = 0;

    explicit FaceSystem(const Diagram& d) {
        std::vector<std::pair<int, int>> tail(d.edge_count), head(d.edge_count);
        for (int ci = 0; ci < d.n(); ++ci) {
            const auto& e = d.crossings[ci].e;
            head[e[0]] = {ci, 0};
            tail[e[2]] = {ci, 2};
            head[e[d.over_in_slot(ci)]] = {ci, d.over_in_slot(ci)};
            tail[e[d.over_out_slot(ci)]] = {ci, d.over_out_slot(ci)};
        }
        next.assign(2 * d.edge_count, -1);
        for (EdgeId e = 0; e < d.edge_count; ++e) {
            for (int dir = 0; dir < 2; ++dir) {
                auto [ci, s] = dir == 0 ? head[e] : tail[e];
                int s2 = (s + 1) % 4;
                EdgeId e2 = d.crossings[ci].e[s2];
                bool leaves_forward = tail[e2] == std::make_pair(ci, s2);
                next[2 * e + dir] = 2 * e2 + (leaves_forward ? 0 : 1);
            }
        }
        face_of.assign(next.size(), -1);
        for (size_t start = 0; start < next.size(); ++start) {
            if (face_of[start] >= 0) continue;
            int dart = static_cast<int>(start);
            while (face_of[dart] < 0) {
                face_of[dart] = faces;
                dart = next[dart];
            }
            ++faces;
        }
    }
};

// crossing-connected components, labeled per edge (-1 for synthetic)
std::vector<int> edge_components(const Diagram& d) {
    UnionFind uf(d.total_edges());
    for (const auto& c : d.crossings) {
        uf.unite(c.e[0], c.e[1]);
        uf.unite(c.e[0], c.e[2]);
        uf.unite(c.e[0], c.e[3]);
    }
    std::vector<int> comp(d.total_edges());
    for (EdgeId e = 0; e < d.total_edges(); ++e) comp[e] = uf.find(e);
    return comp;
}

}  // namespace

bool edges_face_adjacent(const Diagram& d, EdgeId a, EdgeId b) {
    if (d.is_synthetic(a) || d.is_synthetic(b)) return true;
    if (a == b) return true;
    std::vector<int> comp = edge_components(d);
    if (comp[a] != comp[b]) return true;
    FaceSystem fs(d);
    for (int da = 0; da < 2; ++da)
        for (int db = 0; db < 2; ++db)
            if (fs.face_of[2 * a + da] == fs.face_of[2 * b + db]) return true;
    return false;
}

void validate_planar(const Diagram& d) {
    d.validate();
    if (d.n() == 0) return;
    FaceSystem fs(d);
    std::vector<int> comp = edge_components(d);
    // per component: faces = edges - crossings + 2 on the sphere
    std::map<int, int> verts, edges;
    std::map<int, std::set<int>> faces;
    std::vector<int> comp_of_crossing(d.n());
    for (int ci = 0; ci < d.n(); ++ci) {
        int c = comp[d.crossings[ci].e[0]];
        verts[c] += 1;
    }
    for (EdgeId e = 0; e < d.edge_count; ++e) {
        edges[comp[e]] += 1;
        faces[comp[e]].insert(fs.face_of[2 * e]);
        faces[comp[e]].insert(fs.face_of[2 * e + 1]);
    }
    for (const auto& [c, v] : verts) {
        int f = static_cast<int>(faces[c].size());
        if (f != edges[c] - v + 2)
            throw InputError("diagram component is not planar (face count " + std::to_string(f) +
                             ", expected " + std::to_string(edges[c] - v + 2) + ")");
    }
}

KinkPattern find_kink_pattern(const Diagram& d, EdgeId loop, bool positive) {
    if (loop < 0 || loop >= d.edge_count) throw InputError("r1 removal: site not found");
    for (int ci = 0; ci < d.n(); ++ci) {
        const auto& e = d.crossings[ci].e;
        int hits = 0;
        for (int s = 0; s < 4; ++s) hits += e[s] == loop;
        if (hits == 0) continue;
        if (hits != 2) throw InputError("r1 removal: edge is not a kink loop");
        if ((d.crossings[ci].sign > 0) != positive)
            throw InputError("r1 removal: kink has the wrong sign");
        // The loop occupies one in-slot and one out-slot; the slot pair
        // identifies the chirality variant (see kink_record).
        int slot_a = -1, slot_b = -1;
        for (int s = 0; s < 4; ++s)
            if (e[s] == loop) (slot_a < 0 ? slot_a : slot_b) = s;
        int variant;
        EdgeId in, out;
        if (positive && slot_a == 2 && slot_b == 3) {
            variant = 0;
            in = e[0];
            out = e[1];
        } else if (positive && slot_a == 0 && slot_b == 1) {
            variant = 1;
            in = e[3];
            out = e[2];
        } else if (!positive && slot_a == 1 && slot_b == 2) {
            variant = 0;
            in = e[0];
            out = e[3];
        } else if (!positive && slot_a == 0 && slot_b == 3) {
            variant = 1;
            in = e[1];
            out = e[2];
        } else {
            throw InputError("r1 removal: local pattern mismatch (loop is not a curl)");
        }
        return {ci, in, out, variant};
    }
    throw InputError("r1 removal: site not found");
}

BigonPattern find_bigon_pattern(const Diagram& d, EdgeId p, EdgeId q) {
    if (p == q) throw InputError("r2-: bigon edges must be distinct");
    if (p < 0 || q < 0 || p >= d.edge_count || q >= d.edge_count)
        throw InputError("r2-: bigon edges are not diagram strands");
    auto tp = d.tail_of(p), hp = d.head_of(p);
    auto tq = d.tail_of(q), hq = d.head_of(q);
    int c1 = tp.first, c2 = hp.first;
    if (c1 == c2) throw InputError("r2-: local pattern mismatch (kink, not a bigon)");
    bool q_matches = (tq.first == c1 && hq.first == c2) || (tq.first == c2 && hq.first == c1);
    if (!q_matches) throw InputError("r2-: no cancelable bigon at this site");
    if (d.crossings[c1].sign == d.crossings[c2].sign)
        throw InputError("r2-: bigon crossings carry equal signs");
    bool p_over_seen[2], q_over_seen[2];
    int idx = 0;
    for (int ci : {c1, c2}) {
        const auto& e = d.crossings[ci].e;
        bool p_under = e[0] == p || e[2] == p;
        bool p_over = e[d.over_in_slot(ci)] == p || e[d.over_out_slot(ci)] == p;
        bool q_under = e[0] == q || e[2] == q;
        bool q_over = e[d.over_in_slot(ci)] == q || e[d.over_out_slot(ci)] == q;
        if (!((p_under && q_over) || (p_over && q_under)))
            throw InputError("r2-: bigon sides do not lie on distinct strands");
        p_over_seen[idx] = p_over;
        q_over_seen[idx] = q_over;
        ++idx;
    }
    if (p_over_seen[0] != p_over_seen[1] || q_over_seen[0] != q_over_seen[1])
        throw InputError("r2-: bigon is clasp-like, not a Reidemeister pattern");
    return {c1, c2, p_over_seen[0]};
}

namespace {

// General crossing dissolution: remove the given crossings, fusing each
// dissolved crossing's under-pair and over-pair into continuing strands.
// Chains closing through dissolved crossings only become free circles.
std::pair<Diagram, EdgeCorrespondence> dissolve_crossings(const Diagram& d,
                                                          const std::vector<int>& which,
                                                          const std::vector<EdgeId>& priority) {
    Rewriter rw(d);
    std::vector<int8_t> dissolved_cr(d.n(), 0);
    for (int ci : which) {
        rw.crossing_alive[ci] = 0;
        dissolved_cr[ci] = 1;
    }
    for (const DissolveChain& chain : dissolve_chains(d, which, priority)) {
        EdgeId tail_edge = kGone, head_edge = kGone;
        std::pair<int, int> tail_pos{-1, -1}, head_pos{-1, -1};
        for (EdgeId e : chain.edges) {
            auto t = d.tail_of(e);
            auto h = d.head_of(e);
            if (!dissolved_cr[t.first]) {
                if (tail_edge != kGone) throw InputError("dissolve: inconsistent strand chain");
                tail_edge = e;
                tail_pos = t;
            }
            if (!dissolved_cr[h.first]) {
                if (head_edge != kGone) throw InputError("dissolve: inconsistent strand chain");
                head_edge = e;
                head_pos = h;
            }
        }
        for (EdgeId e : chain.edges) rw.kill_edge(e);
        if (chain.closed) {
            if (tail_edge != kGone || head_edge != kGone)
                throw InputError("dissolve: inconsistent strand chain");
            rw.created_free += 1;
        } else {
            if (tail_edge == kGone || head_edge == kGone)
                throw InputError("dissolve: open strand chain");
            EdgeId x = rw.fresh_real();
            rw.replace_slot(tail_pos.first, tail_pos.second, x);
            rw.replace_slot(head_pos.first, head_pos.second, x);
        }
    }
    return rw.finalize();
}

std::pair<Diagram, EdgeCorrespondence> do_r2_remove(const Diagram& d, const MovieEvent& ev) {
    check_site_size(ev, 2);
    check_edge_exists(d, ev.site[0]);
    check_edge_exists(d, ev.site[1]);
    BigonPattern b = find_bigon_pattern(d, ev.site[0], ev.site[1]);
    return dissolve_crossings(d, {b.c1, b.c2}, ev.site);
}

// --- R3 --------------------------------------------------------------------

struct TriangleInfo {
    // Strand k passes crossings first[k] then second[k] with triangle edge
    // tri[k] between them, entering on in_edge[k] and leaving on out_edge[k].
    std::array<EdgeId, 3> tri;
    std::array<int, 3> first, second;
    std::array<EdgeId, 3> in_edge, out_edge;
    std::array<int, 3> crossings;  // the three triangle crossings (sorted)
};

TriangleInfo find_triangle(const Diagram& d, std::vector<EdgeId> site) {
    if (site.size() != 3) throw InputError("r3: site must name the three triangle edges");
    std::sort(site.begin(), site.end());
    if (site[0] == site[1] || site[1] == site[2]) throw InputError("r3: triangle edges repeat");
    TriangleInfo t{};
    std::vector<int> cr;
    for (int k = 0; k < 3; ++k) {
        EdgeId e = site[k];
        check_edge_exists(d, e);
        if (d.is_synthetic(e)) throw InputError("r3: triangle edge is a free circle");
        auto tl = d.tail_of(e), hd = d.head_of(e);
        if (tl.first == hd.first) throw InputError("r3: triangle edge is a kink loop");
        t.tri[k] = e;
        t.first[k] = tl.first;
        t.second[k] = hd.first;
        cr.push_back(tl.first);
        cr.push_back(hd.first);
    }
    std::sort(cr.begin(), cr.end());
    cr.erase(std::unique(cr.begin(), cr.end()), cr.end());
    if (cr.size() != 3) throw InputError("r3: edges do not span three crossings");
    // Each crossing must host exactly two of the triangle edges.
    for (int ci : cr) {
        int hits = 0;
        for (int k = 0; k < 3; ++k) hits += (t.first[k] == ci) + (t.second[k] == ci);
        if (hits != 2) throw InputError("r3: local pattern mismatch at crossing");
    }
    for (int k = 0; k < 3; ++k) {
        // Outer edges: the strand continues through both triangle crossings.
        const auto& cf = d.crossings[t.first[k]];
        const auto& cs_ = d.crossings[t.second[k]];
        // tri[k] leaves first[k]; its strand entered at the matching in-slot.
        EdgeId e = t.tri[k];
        int ci = t.first[k];
        if (cf.e[2] == e)
            t.in_edge[k] = cf.e[0];
        else if (cf.e[d.over_out_slot(ci)] == e)
            t.in_edge[k] = cf.e[d.over_in_slot(ci)];
        else
            throw InputError("r3: triangle edge orientation mismatch");
        ci = t.second[k];
        if (cs_.e[0] == e)
            t.out_edge[k] = cs_.e[2];
        else if (cs_.e[d.over_in_slot(ci)] == e)
            t.out_edge[k] = cs_.e[d.over_out_slot(ci)];
        else
            throw InputError("r3: triangle edge orientation mismatch");
        if (t.in_edge[k] == t.tri[k] || t.out_edge[k] == t.tri[k])
            throw InputError("r3: strand doubles back inside the triangle");
    }
    for (int k = 0; k < 3; ++k) t.crossings[k] = cr[k];
    // The move needs an empty triangular region: some face must be bounded
    // by exactly the three triangle edges.
    {
        FaceSystem fs(d);
        bool empty_triangle = false;
        for (int dir = 0; dir < 2 && !empty_triangle; ++dir) {
            int start = 2 * t.tri[0] + dir;
            int d1 = fs.next[start], d2 = fs.next[d1];
            if (fs.next[d2] == start) {
                std::set<EdgeId> around{t.tri[0], static_cast<EdgeId>(d1 / 2),
                                        static_cast<EdgeId>(d2 / 2)};
                empty_triangle =
                    around == std::set<EdgeId>{t.tri[0], t.tri[1], t.tri[2]};
            }
        }
        if (!empty_triangle)
            throw InputError("r3: the three edges do not bound an empty triangle");
    }
    // Height consistency: the over/under relation between the strands must
    // be acyclic, otherwise this is a Borromean-style tangle, not a move.
    // Strand k is over at crossing ci iff tri/in/out occupies an over slot.
    auto strand_over_at = [&](int k, int ci) {
        const auto& c = d.crossings[ci];
        EdgeId probe = (t.first[k] == ci) ? t.tri[k] : t.in_edge[k];
        // probe is the edge of strand k leaving/entering ci; check both.
        EdgeId leave = (t.first[k] == ci) ? t.tri[k] : t.out_edge[k];
        EdgeId enter = (t.first[k] == ci) ? t.in_edge[k] : t.tri[k];
        (void)probe;
        return c.e[d.over_in_slot(ci)] == enter && c.e[d.over_out_slot(ci)] == leave;
    };
    int over_count[3] = {0, 0, 0};
    for (int ci : t.crossings) {
        int at[2], na = 0;
        for (int k = 0; k < 3; ++k)
            if (t.first[k] == ci || t.second[k] == ci) at[na++] = k;
        if (na != 2) throw InputError("r3: malformed triangle");
        bool a_over = strand_over_at(at[0], ci);
        bool b_over = strand_over_at(at[1], ci);
        if (a_over == b_over) throw InputError("r3: inconsistent strand data at crossing");
        over_count[a_over ? at[0] : at[1]]++;
    }
    // Acyclic height order <=> counts are {0,1,2}.
    if (!((over_count[0] + over_count[1] + over_count[2] == 3) &&
          std::max({over_count[0], over_count[1], over_count[2]}) == 2 &&
          std::min({over_count[0], over_count[1], over_count[2]}) == 0))
        throw InputError("r3: strands have no consistent height order (move not applicable)");
    return t;
}

std::pair<Diagram, EdgeCorrespondence> do_r3(const Diagram& d, const MovieEvent& ev) {
    TriangleInfo t = find_triangle(d, ev.site);
    Rewriter rw(d);
    // Strand k now runs in_edge -> second[k] -> tri'[k] -> first[k] -> out_edge.
    std::array<EdgeId, 3> tri2;
    std::array<int, 3> order{0, 1, 2};
    std::sort(order.begin(), order.end(), [&](int a, int b) { return t.tri[a] < t.tri[b]; });
    std::array<EdgeId, 3> tri2_by_strand{};
    for (int idx : order) tri2_by_strand[idx] = rw.fresh_real();
    tri2 = tri2_by_strand;
    // Rebuild the three crossings. Signs and the over/under assignment per
    // strand pair are preserved; only the edge routing changes.
    for (int ci : t.crossings) {
        int ks[2], na = 0;
        for (int k = 0; k < 3; ++k)
            if (t.first[k] == ci || t.second[k] == ci) ks[na++] = k;
        const Crossing& old_c = d.crossings[ci];
        auto strand_edges_after = [&](int k) -> std::pair<EdgeId, EdgeId> {
            // (enter, leave) of strand k at ci after the move.
            if (t.second[k] == ci) return {t.in_edge[k], tri2[k]};
            return {tri2[k], t.out_edge[k]};
        };
        auto strand_was_over = [&](int k) {
            EdgeId enter = (t.first[k] == ci) ? t.in_edge[k] : t.tri[k];
            return old_c.e[d.over_in_slot(ci)] == enter;
        };
        int ko = strand_was_over(ks[0]) ? ks[0] : ks[1];
        int ku = ko == ks[0] ? ks[1] : ks[0];
        auto [o_in, o_out] = strand_edges_after(ko);
        auto [u_in, u_out] = strand_edges_after(ku);
        rw.crossings[ci] = rw.make_crossing(u_in, u_out, o_in, o_out, old_c.sign);
    }
    for (int k = 0; k < 3; ++k) rw.kill_edge(t.tri[k]);
    return rw.finalize();
}

}  // namespace

std::pair<Diagram, EdgeCorrespondence> apply_event(const Diagram& d, const MovieEvent& ev) {
    switch (ev.kind) {
        case EventKind::Birth: return do_birth(d);
        case EventKind::Death: return do_death(d, ev);
        case EventKind::Saddle: return do_saddle(d, ev);
        case EventKind::R1Pos: return do_r1(d, ev, true);
        case EventKind::R1Neg: return do_r1(d, ev, false);
        case EventKind::R1PosInv: return do_r1_inv(d, ev, true);
        case EventKind::R1NegInv: return do_r1_inv(d, ev, false);
        case EventKind::R2Add: return do_r2_add(d, ev);
        case EventKind::R2Remove: return do_r2_remove(d, ev);
        case EventKind::R3: return do_r3(d, ev);
    }
    throw InputError("unknown event kind");
}

}  // namespace kh
