#ifndef KH_TESTS_FIXTURES_HPP
#define KH_TESTS_FIXTURES_HPP

#include <random>

#include "kh/cobordism.hpp"

namespace fx {

using namespace kh;

/// 0-crossing unknot: one crossingless circle.
inline Diagram unknot0() {
    Diagram d;
    d.free_circles = 1;
    return d;
}

inline Diagram empty_link() { return {}; }

/// Unknot with one positive kink (variant-0 record).
inline Diagram kink_pos() {
    Diagram d;
    d.edge_count = 2;
    d.crossings = {{{0, 0, 1, 1}, +1}};
    return d;
}

/// Unknot with one negative kink.
inline Diagram kink_neg() {
    Diagram d;
    d.edge_count = 2;
    d.crossings = {{{0, 1, 1, 0}, -1}};
    return d;
}

/// Positive Hopf link (closure of the square of the positive braid
/// generator). Edges 0,1 on one component, 2,3 on the other.
inline Diagram hopf_pos() {
    Diagram d;
    d.edge_count = 4;
    d.crossings = {{{2, 3, 1, 0}, +1}, {{3, 2, 0, 1}, +1}};
    return d;
}

/// Right-handed trefoil (closure of the cube of the positive generator).
inline Diagram trefoil_right() {
    Diagram d;
    d.edge_count = 6;
    d.crossings = {{{3, 4, 1, 0}, +1}, {{4, 5, 2, 1}, +1}, {{5, 3, 0, 2}, +1}};
    return d;
}

/// Deterministic random movies built from structurally valid events; the
/// resulting diagrams are guaranteed planar because they are assembled by
/// legal moves from crossingless circles.
class MovieGen {
public:
    explicit MovieGen(uint64_t seed) : rng_(seed) {}

    /// A diagram with at most max_crossings crossings.
    Diagram diagram(int max_crossings) { return grow(max_crossings).first; }

    /// A movie starting from a small random diagram.
    Movie movie(int max_crossings, int extra_events) {
        auto [d, _] = grow(max_crossings);
        Movie m{d, {}};
        Diagram cur = d;
        for (int i = 0; i < extra_events; ++i) {
            auto ev = random_event(cur, true);
            if (!ev) break;
            auto [next, corr] = apply_event(cur, *ev);
            m.events.push_back(*ev);
            cur = next;
        }
        return m;
    }

    std::mt19937_64& rng() { return rng_; }

private:
    std::mt19937_64 rng_;

    int pick(int n) { return static_cast<int>(rng_() % static_cast<uint64_t>(n)); }

    std::pair<Diagram, int> grow(int max_crossings) {
        Diagram d;
        d.free_circles = 1 + pick(2);
        int guard = 0;
        while (d.n() < max_crossings && guard++ < 200) {
            auto ev = random_event(d, false);
            if (!ev) break;
            auto [next, corr] = apply_event(d, *ev);
            if (next.n() > max_crossings) continue;
            d = next;
        }
        return {d, 0};
    }

    std::optional<MovieEvent> random_event(const Diagram& d, bool allow_morse) {
        for (int attempt = 0; attempt < 40; ++attempt) {
            int total = d.total_edges();
            if (total == 0) return MovieEvent{EventKind::Birth, {}};
            int kind = pick(allow_morse ? 7 : 5);
            MovieEvent ev;
            switch (kind) {
                case 0:
                    ev = {EventKind::R1Pos, {pick(total)}, pick(2)};
                    break;
                case 1:
                    ev = {EventKind::R1Neg, {pick(total)}, pick(2)};
                    break;
                case 2:
                case 3: {
                    EdgeId a = pick(total), b = pick(total);
                    if (a == b) continue;
                    ev = {EventKind::R2Add, {a, b}, pick(8)};
                    break;
                }
                case 4: {
                    // occasionally remove a kink to mix signs around
                    if (d.n() == 0) continue;
                    std::vector<std::pair<EdgeId, bool>> kinks;
                    for (EdgeId e = 0; e < d.edge_count; ++e) {
                        for (bool pos : {true, false}) {
                            try {
                                find_kink_pattern(d, e, pos);
                                kinks.push_back({e, pos});
                            } catch (const InputError&) {
                            }
                        }
                    }
                    if (kinks.empty()) continue;
                    auto [e, pos] = kinks[pick(static_cast<int>(kinks.size()))];
                    ev = {pos ? EventKind::R1PosInv : EventKind::R1NegInv, {e}};
                    break;
                }
                case 5:
                    ev = {EventKind::Birth, {}};
                    break;
                case 6: {
                    EdgeId a = pick(total), b = pick(total);
                    ev = {EventKind::Saddle, {a, b}};
                    break;
                }
                default:
                    continue;
            }
            try {
                apply_event(d, ev);
                return ev;
            } catch (const InputError&) {
            }
        }
        return std::nullopt;
    }
};

}  // namespace fx

#endif
