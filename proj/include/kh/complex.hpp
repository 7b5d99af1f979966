#ifndef KH_COMPLEX_HPP
#define KH_COMPLEX_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "kh/diagram.hpp"
#include "kh/f2.hpp"

namespace kh {

struct Bigrading {
    int h = 0;
    int q = 0;

    bool operator==(const Bigrading& o) const { return h == o.h && q == o.q; }
    bool operator!=(const Bigrading& o) const { return !(*this == o); }
    bool operator<(const Bigrading& o) const { return h != o.h ? h < o.h : q < o.q; }
};

/// A standard generator of the chain group: a smoothing plus one label bit
/// per circle in the canonical circle order (bit set = label x).
struct LabeledSmoothing {
    Smoothing s;
    uint64_t labels = 0;

    bool operator==(const LabeledSmoothing& o) const { return s == o.s && labels == o.labels; }
    bool operator<(const LabeledSmoothing& o) const {
        if (s.bits != o.s.bits) return s.bits < o.s.bits;
        return labels < o.labels;
    }
};

/// GF(2) chain: a set of generators. Kept sorted and duplicate-free;
/// adding a generator twice cancels it.
class ChainVector {
public:
    ChainVector() = default;
    explicit ChainVector(std::vector<LabeledSmoothing> terms);

    void add(const LabeledSmoothing& g);      // toggle membership
    void add(const ChainVector& other);

    bool zero() const { return terms_.empty(); }
    size_t size() const { return terms_.size(); }
    const std::vector<LabeledSmoothing>& terms() const { return terms_; }

    bool operator==(const ChainVector& o) const { return terms_ == o.terms_; }

private:
    std::vector<LabeledSmoothing> terms_;
};

/// Bigraded dimension table; absent keys mean zero.
using BigradedDims = std::map<Bigrading, int>;

/// Configuration knob: full-cube operations refuse diagrams with more
/// crossings than this.
constexpr int kDefaultFeasibilityBound = 14;

Bigrading bigrading(const Diagram& d, const LabeledSmoothing& g);

/// True when every term of c carries the same bigrading (vacuously true
/// for the zero chain). Returns that grading.
std::optional<Bigrading> homogeneous_bigrading(const Diagram& d, const ChainVector& c);

/// All generators of CKh(d), or only those in one bigrading. Deterministic
/// order: smoothing bits ascending, then label bits ascending.
std::vector<LabeledSmoothing> enumerate_generators(const Diagram& d,
                                                   std::optional<Bigrading> filter = {});

/// The Khovanov differential, term by term: for every 0-resolved crossing,
/// flip it and apply the merge/split map to the labels.
ChainVector apply_differential(const Diagram& d, const ChainVector& c);
ChainVector differential_of_generator(const Diagram& d, const LabeledSmoothing& g);

/// Cycle test by the local criterion: every 0-resolved crossing, when
/// flipped, must merge two distinct x-labeled circles.
bool is_cycle_local(const Diagram& d, const LabeledSmoothing& g);

/// One homogeneous block of the chain complex with its outgoing
/// differential matrix (rows = target generators, cols = source).
struct ChainBlock {
    std::vector<LabeledSmoothing> source;  // generators at (h, q)
    std::vector<LabeledSmoothing> target;  // generators at (h + 1, q)
    F2Matrix d;                            // target x source
};

ChainBlock differential_block(const Diagram& d, Bigrading hq);

/// Bigraded homology dimensions via per-block elimination. Throws
/// FeasibilityError when d.n() exceeds the bound.
BigradedDims homology_dims(const Diagram& d, int bound = kDefaultFeasibilityBound);

/// Whether the cycle c is a boundary (image of the differential from the
/// previous homological degree). Pre: c is a cycle; throws otherwise.
bool is_boundary(const Diagram& d, const ChainVector& c, int bound = kDefaultFeasibilityBound);

/// Index of a chain in a generator list (coordinates over the block basis).
std::vector<uint8_t> coordinates_of(const ChainVector& c,
                                    const std::vector<LabeledSmoothing>& basis);

}  // namespace kh

#endif
