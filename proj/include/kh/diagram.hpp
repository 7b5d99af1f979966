#ifndef KH_DIAGRAM_HPP
#define KH_DIAGRAM_HPP

#include <array>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace kh {

/// Raised on malformed or inconsistent input documents.
struct InputError : std::runtime_error {
    explicit InputError(const std::string& what) : std::runtime_error(what) {}
};

/// Raised when an operation exceeds the configured feasibility bound.
struct FeasibilityError : std::runtime_error {
    explicit FeasibilityError(const std::string& what) : std::runtime_error(what) {}
};

using EdgeId = int;

/// One crossing of an oriented diagram.
///
/// Slot convention: e[0..3] lists the four incident edges counterclockwise,
/// starting at the incoming under-strand. The under-strand therefore runs
/// e[0] -> e[2]. A crossing is positive exactly when the over-strand enters
/// at slot 3 (and leaves at slot 1); negative when it enters at slot 1.
///
/// Resolutions: the 0-smoothing joins e[0]-e[1] and e[2]-e[3]; the
/// 1-smoothing joins e[0]-e[3] and e[1]-e[2].
struct Crossing {
    std::array<EdgeId, 4> e;
    int sign;  // +1 or -1
};

/// Oriented planar link diagram as a PD-style incidence structure.
///
/// Real edges are 0..edge_count-1 and each occurs exactly twice among the
/// crossing slots, once entering and once leaving a crossing. Crossingless
/// circle components cannot be expressed by PD slots, so they are carried
/// by an explicit count; circle j is addressed through the synthetic edge
/// id edge_count + j. Diagrams are immutable values: every rewrite returns
/// a fresh diagram.
struct Diagram {
    std::vector<Crossing> crossings;
    int edge_count = 0;
    int free_circles = 0;

    int n() const { return static_cast<int>(crossings.size()); }
    int n_pos() const;
    int n_neg() const;
    int writhe() const { return n_pos() - n_neg(); }

    int total_edges() const { return edge_count + free_circles; }
    bool is_synthetic(EdgeId e) const { return e >= edge_count; }

    /// In/out slot classification. Slot 0 and the over-in slot receive an
    /// edge head; slot 2 and the over-out slot hold an edge tail.
    int over_in_slot(int ci) const { return crossings[ci].sign > 0 ? 3 : 1; }
    int over_out_slot(int ci) const { return crossings[ci].sign > 0 ? 1 : 3; }

    /// Where edge e leaves from / arrives at, as (crossing, slot) pairs.
    /// Throws for synthetic edges.
    std::pair<int, int> tail_of(EdgeId e) const;
    std::pair<int, int> head_of(EdgeId e) const;

    /// Structural validation; throws InputError on violation.
    void validate() const;

    bool operator==(const Diagram& other) const {
        return crossings.size() == other.crossings.size() && edge_count == other.edge_count &&
               free_circles == other.free_circles && same_crossings(other);
    }

private:
    bool same_crossings(const Diagram& other) const;
};

/// A binary resolution vector for a diagram with n crossings (bit i is the
/// choice at crossing i). Capacity is 64 crossings, plenty past the point
/// where state enumeration stops being feasible.
struct Smoothing {
    uint64_t bits = 0;
    int n = 0;

    bool bit(int i) const { return (bits >> i) & 1u; }
    int weight() const;  // number of 1-resolutions

    bool operator==(const Smoothing& o) const { return bits == o.bits && n == o.n; }
    bool operator<(const Smoothing& o) const { return bits < o.bits; }
};

/// Circles of a resolved diagram: a partition of all edge ids (synthetic
/// ones included) into cycles, listed by ascending minimal edge id. That
/// order is the canonical circle order used to index label vectors.
struct CircleSet {
    std::vector<std::vector<EdgeId>> circles;  // each sorted ascending
    std::vector<int> circle_of;                // edge id -> circle index

    int count() const { return static_cast<int>(circles.size()); }
};

/// Trace the circles of the smoothing s of d by union-find over the edge
/// gluings dictated by the resolution convention above.
CircleSet resolve(const Diagram& d, const Smoothing& s);

/// All crossing signs flipped, over/under strands exchanged consistently.
/// mirror(mirror(d)) == d.
Diagram mirror(const Diagram& d);

// --- movie events and diagram rewriting ------------------------------------

enum class EventKind {
    Birth,
    Death,
    Saddle,
    R1Pos,     // add a positive kink
    R1Neg,     // add a negative kink
    R1PosInv,  // remove a positive kink
    R1NegInv,  // remove a negative kink
    R2Add,     // push one strand across another
    R2Remove,  // cancel a bigon
    R3,        // slide a strand across a crossing
};

/// One elementary event of a movie. Sites address edges of the diagram the
/// event is applied to; kinds interpret them as follows:
///   Birth      site = {}
///   Death      site = {synthetic edge of a crossingless circle}
///   Saddle     site = {edge a, edge b} (a == b splits a circle off a)
///   R1Pos/Neg  site = {edge}, variant 0/1 picks the loop chirality
///   R1±Inv     site = {loop edge of the kink}
///   R2Add      site = {moving edge, target edge}; variant packs
///              (moving strand over?, sign of first crossing along mov,
///               target traverses first-or-second crossing first)
///   R2Remove   site = {the two bigon edges}
///   R3         site = {the three triangle edges}
struct MovieEvent {
    EventKind kind;
    std::vector<EdgeId> site;
    int variant = 0;

    static int r2_variant(bool mov_over, int sign_first, bool tgt_first_c1) {
        return (mov_over ? 1 : 0) | (sign_first > 0 ? 2 : 0) | (tgt_first_c1 ? 4 : 0);
    }
};

const char* event_kind_name(EventKind k);
EventKind event_kind_from_name(const std::string& s);

/// Deterministic map from the edges and crossings of a diagram to those of
/// its rewrite. Created edges are re-issued the lowest unused ids (filling
/// the slots of destroyed edges in creation order, then extending at the
/// top); surviving edges keep their ids except for the final gap
/// compaction. This makes replay bit-exact and lets an event followed by
/// its inverse reproduce the original ids whenever the destroyed ids sit
/// at the top of the range.
struct EdgeCorrespondence {
    std::vector<EdgeId> forward;       // old edge id -> new id, -1 if destroyed
    std::vector<EdgeId> created;       // new ids not originating from old edges
    std::vector<int> crossing_forward; // old crossing -> new index, -1 if removed
    std::vector<int> created_crossings;

    EdgeId map(EdgeId old_edge) const {
        if (old_edge < 0 || old_edge >= static_cast<int>(forward.size()))
            throw InputError("edge correspondence: unknown edge");
        return forward[old_edge];
    }
};

/// Apply one elementary event; returns the rewritten diagram and the edge
/// correspondence. Throws InputError when the site does not exist or the
/// local pattern does not match (e.g. R2Remove without a cancelable bigon).
std::pair<Diagram, EdgeCorrespondence> apply_event(const Diagram& d, const MovieEvent& ev);

/// A maximal run of edges that dissolving the given crossings would fuse
/// into a single edge (open) or a crossingless circle (closed).
struct DissolveChain {
    std::vector<EdgeId> edges;
    bool closed;
};

/// Chains for dissolving `which`, in the deterministic order used by the
/// rewrites: chains containing earlier `priority` edges first, then by
/// minimal edge id. Replacement edges are issued in exactly this order.
std::vector<DissolveChain> dissolve_chains(const Diagram& d, const std::vector<int>& which,
                                           const std::vector<EdgeId>& priority);

/// The kink carrying `loop` as its curl: crossing index, through-strand
/// edges and the chirality variant. Throws when the pattern does not match.
struct KinkPattern {
    int crossing;
    EdgeId in, out;
    int variant;
};
KinkPattern find_kink_pattern(const Diagram& d, EdgeId loop, bool positive);

/// The two crossings of the cancelable bigon with sides p and q;
/// c1 is the crossing where p starts (its tail). Validates opposite signs
/// and that one strand runs over the other at both crossings.
struct BigonPattern {
    int c1, c2;
    bool p_over;  // the p side is the over-strand at both crossings
};
BigonPattern find_bigon_pattern(const Diagram& d, EdgeId p, EdgeId q);

/// Whether a band or finger can run from edge a to edge b: for edges in
/// the same crossing-connected component they must border a common face
/// of the rotation system; separate components (and crossingless circles)
/// can always be arranged to touch.
bool edges_face_adjacent(const Diagram& d, EdgeId a, EdgeId b);

/// Checks that every crossing-connected component has the face count of a
/// sphere embedding (V + 2); throws InputError otherwise.
void validate_planar(const Diagram& d);

}  // namespace kh

#endif
