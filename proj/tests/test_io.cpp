#include <doctest.h>

#include "fixtures.hpp"
#include "kh/io.hpp"

#include <nlohmann/json.hpp>

using namespace kh;

TEST_CASE("diagram round trip") {
    for (const Diagram& d :
         {fx::empty_link(), fx::unknot0(), fx::kink_pos(), fx::hopf_pos(), fx::trefoil_right()}) {
        Json j = serialize_diagram(d);
        CHECK(parse_diagram(j) == d);
    }
}

TEST_CASE("version field is mandatory") {
    Json j = serialize_diagram(fx::hopf_pos());
    j.erase("version");
    CHECK_THROWS_AS(parse_diagram(j), InputError);
    j["version"] = "diagram.v2";
    CHECK_THROWS_AS(parse_diagram(j), InputError);
}

TEST_CASE("malformed documents are rejected") {
    // edge used three times
    Json j = Json::object();
    j["version"] = "diagram.v1";
    j["crossings"] = Json::array();
    j["crossings"].push_back({{"edges", {0, 0, 0, 1}}, {"sign", 1}});
    j["free_circles"] = 0;
    CHECK_THROWS_AS(parse_diagram(j), InputError);

    // orientation flags must confirm the slot convention
    Json k = serialize_diagram(fx::kink_pos());
    k["orientations"][0] = 0;
    CHECK_THROWS_AS(parse_diagram(k), InputError);

    Json c = Json::object();
    c["version"] = "chain.v1";
    CHECK_THROWS_AS(parse_chain(c), InputError);
}

TEST_CASE("chain round trip") {
    Diagram h = fx::hopf_pos();
    ChainVector c;
    c.add({{0b00, 2}, 0b11});
    c.add({{0b11, 2}, 0b01});
    Json j = serialize_chain(h, c);
    CHECK(parse_chain(j) == c);
}

TEST_CASE("movie round trip and byte-stable output") {
    fx::MovieGen gen(2024);
    Movie m = gen.movie(4, 3);
    Json j = serialize_movie(m);
    Movie m2 = parse_movie(j);
    CHECK(m2.source == m.source);
    CHECK(m2.events.size() == m.events.size());
    CHECK(serialize_movie(m2).dump() == j.dump());
}

TEST_CASE("dims serialize as sorted triples") {
    BigradedDims dims{{{0, 1}, 1}, {{-2, -4}, 2}, {{0, -1}, 1}};
    Json j = serialize_dims(dims);
    REQUIRE(j.size() == 3);
    CHECK(j[0] == Json::array({-2, -4, 2}));
    CHECK(j[1] == Json::array({0, -1, 1}));
    CHECK(j[2] == Json::array({0, 1, 1}));
}
