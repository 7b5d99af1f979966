#ifndef KH_COBORDISM_HPP
#define KH_COBORDISM_HPP

#include <optional>
#include <string>
#include <vector>

#include "kh/complex.hpp"
#include "kh/diagram.hpp"

namespace kh {

/// A link cobordism presented as a movie: a source diagram and an ordered
/// list of elementary events. Event sites address edges of the diagram
/// current at that point of the replay, so a movie is only meaningful
/// relative to its source.
struct Movie {
    Diagram source;
    std::vector<MovieEvent> events;

    /// Euler characteristic: births + deaths - saddles.
    int chi() const;
};

/// Full replay: diagrams[0] == source, diagrams[i+1] the result of
/// events[i], with the edge correspondences alongside.
struct MovieReplay {
    std::vector<Diagram> diagrams;
    std::vector<EdgeCorrespondence> corrs;

    const Diagram& target() const { return diagrams.back(); }
};

MovieReplay replay(const Movie& m);

/// Result of pushing a chain through one event.
struct EventImage {
    Diagram target;
    EdgeCorrespondence corr;
    ChainVector image;
};

/// The chain map induced by one elementary cobordism, per Khovanov TQFT
/// rules: births insert a 1-labeled circle, deaths evaluate (1 -> 0,
/// x -> 1), saddles apply the merge/split maps, and Reidemeister events
/// apply the standard local homotopy equivalences (over GF(2)).
EventImage elementary_chain_map(const Diagram& d, const MovieEvent& ev, const ChainVector& c);

/// Composite over all events of m; c must live on m.source.
ChainVector apply_movie(const Movie& m, const ChainVector& c);

/// The reverse cobordism: events reversed, each replaced by its inverse
/// kind, with sites rewritten for the reverse replay. Reversal preserves
/// chi; reverse(reverse(m)) replays to the same diagrams.
Movie reverse_movie(const Movie& m);

/// Chain-map verification report for d∘φ = φ∘d over every generator.
struct ChainMapReport {
    bool ok = true;
    int generators_checked = 0;
    std::optional<LabeledSmoothing> witness;  // first violating generator
    std::string detail;
};

/// Checks that the full composite of m commutes with the differential,
/// generator by generator on CKh(source). Throws FeasibilityError if the
/// source exceeds the bound.
ChainMapReport verify_chain_map(const Movie& m, int bound = kDefaultFeasibilityBound);

/// Basis of one homology block with coordinate machinery.
class HomologyBlockBasis {
public:
    HomologyBlockBasis(const Diagram& d, Bigrading hq);

    int dim() const { return static_cast<int>(reps_.size()); }
    const std::vector<ChainVector>& representatives() const { return reps_; }

    /// Coordinates of the class of the cycle z in this basis.
    std::vector<uint8_t> class_coordinates(const ChainVector& z) const;

private:
    Diagram d_;
    Bigrading hq_;
    std::vector<LabeledSmoothing> chain_basis_;       // generators at (h,q)
    std::vector<ChainVector> reps_;                   // homology representatives
    std::vector<std::vector<uint8_t>> rep_coords_;    // in chain basis
    std::vector<std::vector<uint8_t>> boundary_coords_;
};

/// Matrix of the induced map Kh^{h,q}(source) -> Kh^{h,q+chi}(target) in
/// the deterministic block bases above (rows = target classes).
F2Matrix induced_homology_map(const Movie& m, Bigrading hq,
                              int bound = kDefaultFeasibilityBound);

}  // namespace kh

#endif
