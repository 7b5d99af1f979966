#include <doctest.h>

#include "fixtures.hpp"
#include "kh/tower.hpp"

using namespace kh;

namespace {

/// The standard-plane tower: empty link, then a birth, then the identity
/// movie on the unknot repeating forever.
TowerSpec standard_plane() {
    TowerSpec t;
    Diagram empty = fx::empty_link();
    Diagram u = fx::unknot0();
    t.stages.push_back({empty, Movie{empty, {}}, 1});
    t.stages.push_back({u, Movie{empty, {{EventKind::Birth, {}}}}, 0});
    t.stages.push_back({u, Movie{u, {}}, 0});
    t.depth_default = 4;
    return t;
}

/// A constant tower whose period map is nilpotent (in fact zero): the
/// period cobordism is a genus-1 tube on the unknot plus a free sphere,
/// so chi vanishes but the induced map is m∘Delta = 0 over GF(2).
TowerSpec nilpotent_fixture() {
    TowerSpec t;
    Diagram empty = fx::empty_link();
    Diagram u = fx::unknot0();
    t.stages.push_back({empty, Movie{empty, {}}, 1});
    t.stages.push_back({u, Movie{empty, {{EventKind::Birth, {}}}}, 0});
    t.stages.push_back({u,
                        Movie{u,
                              {{EventKind::Saddle, {0, 0}},
                               {EventKind::Saddle, {0, 1}},
                               {EventKind::Birth, {}},
                               {EventKind::Death, {1}}}},
                        0});
    return t;
}

}  // namespace

TEST_CASE("standard plane tower validates and is periodic") {
    TowerSpec t = standard_plane();
    CHECK_NOTHROW(t.validate());
    CHECK(t.periodic_tail());
}

TEST_CASE("standard plane limits match the closed form") {
    TowerSpec t = standard_plane();
    for (int h = -3; h <= 3; ++h)
        for (int q = -5; q <= 5; ++q) {
            int expect = (h == 0 && (q == 1 || q == -1)) ? 1 : 0;
            CHECK(coend_dims(t, {h, q}) == expect);
            CHECK(end_dims(t, {h, q}) == expect);
        }
}

TEST_CASE("nilpotent period maps give zero limits at every bigrading") {
    TowerSpec t = nilpotent_fixture();
    CHECK_NOTHROW(t.validate());
    for (int h = -2; h <= 2; ++h)
        for (int q = -3; q <= 3; ++q) {
            CHECK(coend_dims(t, {h, q}) == 0);
            CHECK(end_dims(t, {h, q}) == 0);
        }
}

TEST_CASE("exhaustion robustness: identity stages change no dimension") {
    TowerSpec t = standard_plane();
    for (int pos = 1; pos <= static_cast<int>(t.stages.size()); ++pos) {
        TowerSpec t2 = insert_identity_stage(t, pos);
        CHECK_NOTHROW(t2.validate());
        for (int h = -2; h <= 2; ++h)
            for (int q = -3; q <= 3; ++q) {
                CHECK(coend_dims(t2, {h, q}) == coend_dims(t, {h, q}));
                CHECK(end_dims(t2, {h, q}) == end_dims(t, {h, q}));
            }
    }
}

TEST_CASE("standard plane survival certificate") {
    TowerSpec t = standard_plane();
    SurvivalCertificate cert;
    cert.claimed = {0, -1};
    // c_i = the unknot circle labeled x at every stage, depth 6
    for (int i = 0; i < 6; ++i)
        cert.cycles.push_back(ChainVector(std::vector<LabeledSmoothing>{{{0, 0}, 0b1}}));
    SurvivalReport rep = verify_survival(t, cert);
    CHECK(rep.pass);
    CHECK(rep.depth == 6);
    for (const auto& s : rep.stages) {
        CHECK(s.cycle_ok);
        CHECK(s.transfer_ok);
        CHECK(s.grading_ok);
    }
}

TEST_CASE("survival fails on a flipped label with a witness") {
    TowerSpec t = standard_plane();
    SurvivalCertificate cert;
    cert.claimed = {0, -1};
    cert.cycles.push_back(ChainVector(std::vector<LabeledSmoothing>{{{0, 0}, 0b1}}));
    cert.cycles.push_back(ChainVector(std::vector<LabeledSmoothing>{{{0, 0}, 0b0}}));  // flipped
    SurvivalReport rep = verify_survival(t, cert);
    CHECK_FALSE(rep.pass);
    REQUIRE(rep.stages.size() == 2);
    CHECK_FALSE(rep.stages[1].grading_ok);
}

TEST_CASE("capoff: zero image fails") {
    Diagram u = fx::unknot0();
    Movie kill{u, {{EventKind::Death, {0}}}};
    ChainVector one(std::vector<LabeledSmoothing>{{{0, 0}, 0b0}});  // label 1
    CapoffReport rep = prove_nonzero_via_capoff(u, one, kill);
    CHECK_FALSE(rep.pass);
}

TEST_CASE("capoff: identity movie falls back to the boundary check") {
    // a boundary cycle with the identity cap-off must fail via is_boundary
    Diagram h = fx::hopf_pos();
    auto gens = enumerate_generators(h, Bigrading{1, 4});
    ChainVector boundary;
    for (const auto& g : gens) {
        ChainVector dg = differential_of_generator(h, g);
        if (!dg.zero()) {
            boundary = dg;
            break;
        }
    }
    REQUIRE(!boundary.zero());
    Movie id{h, {}};
    CapoffReport rep = prove_nonzero_via_capoff(h, boundary, id);
    CHECK_FALSE(rep.pass);
    CHECK(rep.method == "boundary-check");

    // while the extreme nontrivial class passes through the same fallback
    ChainVector xx(std::vector<LabeledSmoothing>{{{0, 2}, 0b11}});
    CapoffReport rep2 = prove_nonzero_via_capoff(h, xx, id);
    CHECK(rep2.pass);
}
