#ifndef KH_TOWER_HPP
#define KH_TOWER_HPP

#include <map>
#include <optional>
#include <string>

#include "kh/cobordism.hpp"

namespace kh {

/// One stage of a tower: the link slice, the connecting cobordism from the
/// previous slice, and the quantum shift (the Euler characteristic of the
/// surface part beyond this stage).
struct TowerStage {
    Diagram diagram;
    Movie movie;  // from the previous stage's diagram to this one
    int chi_shift = 0;
};

/// Data-driven recipe generating stage i from stage i-1 past the explicit
/// prefix. Sites may reference named edges ("@name") bound by earlier
/// events or carried across stages via anchors/exports; "names" binds the
/// ids created by an event (roles documented per event kind).
struct PatternEvent {
    EventKind kind;
    std::vector<std::string> site;  // "@name" or a decimal edge id
    int variant = 0;
    std::map<std::string, std::string> names;  // role -> name
};

struct TowerPattern {
    std::map<std::string, EdgeId> anchors;  // bindings in the last explicit diagram
    std::vector<PatternEvent> events;
    std::map<std::string, std::string> exports;  // anchor -> "@name" for the next stage
    std::vector<std::pair<std::string, int>> cycle_bits;    // crossing name -> resolution
    std::vector<std::pair<std::string, int>> cycle_labels;  // edge name -> label (1 = x)
    ChainVector base_cycle;  // cycle template on the last explicit diagram
    int chi_shift = 0;
};

/// A noncompact surface as a tower of links and cobordisms. Stage 0 is
/// always the empty link. A tower is eventually periodic when it has no
/// pattern and its last movie maps the last diagram to itself.
struct TowerSpec {
    std::vector<TowerStage> stages;
    std::optional<TowerPattern> pattern;
    int depth_default = 4;

    void validate() const;
    bool periodic_tail() const;
};

/// A compatible-sequence certificate: cycles[i] lives on the diagram of
/// stage i+1; the claimed bigrading is the end-homology class.
struct SurvivalCertificate {
    std::vector<ChainVector> cycles;
    Bigrading claimed;
};

/// Stage i (diagram, connecting movie, cycle template), generating stages
/// past the prefix from the pattern. Deterministic.
struct GeneratedStage {
    Diagram diagram;
    Movie movie;
    ChainVector cycle_template;
};
GeneratedStage generate_stage(const TowerSpec& t, int i);

/// Dimension of the colimit of Kh^{h,q-chi_shift} along the tower, for an
/// eventually periodic tower: the eventual rank of the period map.
int coend_dims(const TowerSpec& t, Bigrading hq, int depth = 0,
               int bound = kDefaultFeasibilityBound);

/// Dimension of the inverse limit along the reversed cobordisms (the
/// stable image of the periodic transfer composite).
int end_dims(const TowerSpec& t, Bigrading hq, int depth = 0,
             int bound = kDefaultFeasibilityBound);

struct StageCheck {
    int stage = 0;
    bool cycle_ok = false;
    std::string cycle_method;  // "local-criterion" or "differential"
    bool transfer_ok = false;
    std::string transfer_method;  // "chain-equality" or "homology-equivalence"
    bool grading_ok = false;
    std::string witness;  // first offending generator / mismatch, if any
};

struct SurvivalReport {
    bool pass = false;
    Bigrading end_class;
    int depth = 0;
    std::vector<StageCheck> stages;
    std::string error;
};

/// Verify a survival certificate to depth N (cert.cycles.size()): each
/// cycle is a cycle, each maps to the previous one under the reversed
/// connecting movie, and the bigradings are consistent with the claimed
/// end class. Chain-level equality is primary; an is_boundary fallback on
/// the difference runs when a stage diagram is within the bound.
SurvivalReport verify_survival(const TowerSpec& t, const SurvivalCertificate& cert,
                               int bound = kDefaultFeasibilityBound);

struct CapoffReport {
    bool pass = false;
    std::string method;  // "minimal-smoothing" or "boundary-check"
    std::string detail;
};

/// Certify that the cycle c is not a boundary by pushing it through the
/// cap-off movie: if the image is nonzero and supported on all-0
/// smoothings it sits in minimal homological degree, where no boundaries
/// live. Falls back to an explicit boundary check when feasible.
CapoffReport prove_nonzero_via_capoff(const Diagram& d, const ChainVector& c, const Movie& capoff,
                                      int bound = kDefaultFeasibilityBound);

/// The same tower with an identity stage spliced in at `pos` (1-based
/// stage index); used by the exhaustion-robustness checks.
TowerSpec insert_identity_stage(const TowerSpec& t, int pos);

}  // namespace kh

#endif
