#include <doctest.h>

#include "fixtures.hpp"
#include "kh/complex.hpp"
#include "oracle.hpp"

using namespace kh;

namespace {

BigradedDims from_oracle(const Diagram& d) {
    BigradedDims out;
    for (auto [hq, dim] : oracle::homology(d)) out[{hq.first, hq.second}] = dim;
    return out;
}

ChainVector single(const LabeledSmoothing& g) {
    return ChainVector(std::vector<LabeledSmoothing>{g});
}

}  // namespace

TEST_CASE("bigrading formulas") {
    Diagram u = fx::unknot0();
    // circle labeled 1
    CHECK(bigrading(u, {{0, 0}, 0b0}) == Bigrading{0, 1});
    // circle labeled x
    CHECK(bigrading(u, {{0, 0}, 0b1}) == Bigrading{0, -1});

    // positive Hopf, sigma = (1,1), both circles labeled 1 -> (2, 6)
    Diagram h = fx::hopf_pos();
    CHECK(bigrading(h, {{0b11, 2}, 0b00}) == Bigrading{2, 6});
}

TEST_CASE("generator enumeration counts") {
    CHECK(enumerate_generators(fx::empty_link()).size() == 1);  // the empty generator
    CHECK(enumerate_generators(fx::unknot0()).size() == 2);
    CHECK(enumerate_generators(fx::kink_pos()).size() == 6);
    CHECK(enumerate_generators(fx::hopf_pos()).size() == 12);

    // filtered enumeration matches the brute filter
    Diagram h = fx::hopf_pos();
    auto all = enumerate_generators(h);
    for (Bigrading hq : {Bigrading{0, 0}, Bigrading{1, 2}, Bigrading{2, 6}}) {
        size_t count = 0;
        for (const auto& g : all) count += bigrading(h, g) == hq;
        CHECK(enumerate_generators(h, hq).size() == count);
    }
}

TEST_CASE("differential squares to zero and respects the grading") {
    fx::MovieGen gen(4242);
    for (int trial = 0; trial < 15; ++trial) {
        Diagram d = gen.diagram(6);
        for (const auto& g : enumerate_generators(d)) {
            ChainVector dg = differential_of_generator(d, g);
            CHECK(apply_differential(d, dg).zero());
            Bigrading hq = bigrading(d, g);
            for (const auto& t : dg.terms()) {
                Bigrading b = bigrading(d, t);
                CHECK(b.h == hq.h + 1);
                CHECK(b.q == hq.q);
            }
        }
    }
}

TEST_CASE("local cycle criterion matches the differential") {
    // kink examples from the merge/split tables
    Diagram k = fx::kink_pos();
    // sigma = 0 has two circles: through strand (edge 0) and curl (edge 1)
    CircleSet cs = resolve(k, {0, 1});
    REQUIRE(cs.count() == 2);
    LabeledSmoothing xx{{0, 1}, 0b11};
    LabeledSmoothing onex{{0, 1}, 0b10};
    CHECK(is_cycle_local(k, xx));
    CHECK(differential_of_generator(k, xx).zero());
    CHECK_FALSE(is_cycle_local(k, onex));
    CHECK_FALSE(differential_of_generator(k, onex).zero());

    fx::MovieGen gen(9001);
    for (int trial = 0; trial < 25; ++trial) {
        Diagram d = gen.diagram(6);
        for (const auto& g : enumerate_generators(d))
            CHECK(is_cycle_local(d, g) == differential_of_generator(d, g).zero());
    }
}

TEST_CASE("homology of the basic links") {
    BigradedDims u = homology_dims(fx::unknot0());
    CHECK(u == BigradedDims{{{0, 1}, 1}, {{0, -1}, 1}});

    // Reidemeister-I invariance at the kink
    CHECK(homology_dims(fx::kink_pos()) == u);
    CHECK(homology_dims(fx::kink_neg()) == u);

    BigradedDims h = homology_dims(fx::hopf_pos());
    BigradedDims h_expect{{{0, 0}, 1}, {{0, 2}, 1}, {{2, 4}, 1}, {{2, 6}, 1}};
    CHECK(h == h_expect);

    // trefoil, cross-checked against the independent oracle
    CHECK(homology_dims(fx::trefoil_right()) == from_oracle(fx::trefoil_right()));
}

TEST_CASE("homology matches the dense full-cube oracle on random diagrams") {
    fx::MovieGen gen(616);
    for (int trial = 0; trial < 10; ++trial) {
        Diagram d = gen.diagram(6);
        CHECK(homology_dims(d) == from_oracle(d));
    }
}

TEST_CASE("duality: mirror homology at (-h,-q)") {
    fx::MovieGen gen(321);
    for (int trial = 0; trial < 8; ++trial) {
        Diagram d = gen.diagram(6);
        BigradedDims dims = homology_dims(d);
        BigradedDims mdims = homology_dims(mirror(d));
        BigradedDims reflected;
        for (auto [hq, dim] : mdims) reflected[{-hq.h, -hq.q}] = dim;
        CHECK(dims == reflected);
    }
}

TEST_CASE("feasibility bound is enforced") {
    fx::MovieGen gen(8);
    Diagram d = gen.diagram(6);
    if (d.n() >= 3) CHECK_THROWS_AS(homology_dims(d, 2), FeasibilityError);
}

TEST_CASE("is_boundary basics") {
    Diagram h = fx::hopf_pos();
    CHECK(is_boundary(h, ChainVector{}));

    // image of a non-cycle generator is a boundary
    auto gens = enumerate_generators(h, Bigrading{1, 2});
    REQUIRE(!gens.empty());
    ChainVector img = differential_of_generator(h, gens[0]);
    if (!img.zero()) CHECK(is_boundary(h, img));

    // the extreme all-x cycle of the positive Hopf is not a boundary
    LabeledSmoothing xx{{0, 2}, 0b11};
    REQUIRE(is_cycle_local(h, xx));
    CHECK_FALSE(is_boundary(h, single(xx)));

    // non-cycles are rejected
    LabeledSmoothing bad{{0, 2}, 0b01};
    CHECK_THROWS_AS(is_boundary(h, single(bad)), InputError);
}

TEST_CASE("no all-0-supported cycle is a boundary") {
    fx::MovieGen gen(5150);
    for (int trial = 0; trial < 20; ++trial) {
        Diagram d = gen.diagram(6);
        if (d.n() == 0) continue;
        for (const auto& g : enumerate_generators(d)) {
            if (g.s.bits != 0) continue;
            if (!is_cycle_local(d, g)) continue;
            CHECK_FALSE(is_boundary(d, single(g)));
        }
    }
}

TEST_CASE("reidemeister invariance of homology dims") {
    fx::MovieGen gen(2718);
    int checked = 0;
    for (int trial = 0; trial < 40 && checked < 12; ++trial) {
        Diagram d = gen.diagram(5);
        if (d.total_edges() == 0) continue;
        BigradedDims base = homology_dims(d);
        EdgeId e = static_cast<EdgeId>(gen.rng()() % d.total_edges());
        for (EventKind kind : {EventKind::R1Pos, EventKind::R1Neg}) {
            auto [moved, corr] = apply_event(d, {kind, {e}, 0});
            CHECK(homology_dims(moved) == base);
        }
        EdgeId f = static_cast<EdgeId>(gen.rng()() % d.total_edges());
        if (f != e) {
            try {
                auto [moved, corr] =
                    apply_event(d, {EventKind::R2Add, {e, f}, static_cast<int>(gen.rng()() % 8)});
                CHECK(homology_dims(moved) == base);
            } catch (const InputError&) {
            }
        }
        ++checked;
    }
    CHECK(checked > 0);
}
