#include "kh/io.hpp"

#include <fstream>

#include <nlohmann/json.hpp>

namespace kh {

namespace {

void require_version(const Json& j, const std::string& expect) {
    if (!j.is_object() || !j.contains("version"))
        throw InputError("document has no version field (expected " + expect + ")");
    if (j.at("version").get<std::string>() != expect)
        throw InputError("wrong document version: expected " + expect + ", got " +
                         j.at("version").dump());
}

int get_int(const Json& j, const char* key) {
    if (!j.contains(key) || !j.at(key).is_number_integer())
        throw InputError(std::string("missing or non-integer field '") + key + "'");
    return j.at(key).get<int>();
}

uint64_t bits_from_array(const Json& arr, int expect_len, const char* what) {
    if (!arr.is_array() || static_cast<int>(arr.size()) != expect_len)
        throw InputError(std::string(what) + ": expected " + std::to_string(expect_len) +
                         " bits, got " + std::to_string(arr.size()));
    uint64_t bits = 0;
    for (int i = 0; i < expect_len; ++i) {
        int b = arr[i].get<int>();
        if (b != 0 && b != 1) throw InputError(std::string(what) + ": bits must be 0 or 1");
        if (b) bits |= uint64_t{1} << i;
    }
    return bits;
}

Json bits_to_array(uint64_t bits, int len) {
    Json arr = Json::array();
    for (int i = 0; i < len; ++i) arr.push_back(static_cast<int>((bits >> i) & 1));
    return arr;
}

}  // namespace

Json serialize_diagram(const Diagram& d) {
    Json j;
    j["version"] = "diagram.v1";
    Json crossings = Json::array();
    for (const auto& c : d.crossings) {
        Json jc;
        jc["edges"] = Json::array({c.e[0], c.e[1], c.e[2], c.e[3]});
        jc["sign"] = c.sign;
        crossings.push_back(jc);
    }
    j["crossings"] = crossings;
    j["free_circles"] = d.free_circles;
    Json orient = Json::array();
    for (int e = 0; e < d.edge_count; ++e) orient.push_back(1);
    j["orientations"] = orient;
    return j;
}

Diagram parse_diagram(const Json& j) {
    require_version(j, "diagram.v1");
    Diagram d;
    if (!j.contains("crossings") || !j.at("crossings").is_array())
        throw InputError("diagram.v1: missing crossings array");
    int max_edge = -1;
    for (const auto& jc : j.at("crossings")) {
        if (!jc.contains("edges") || !jc.at("edges").is_array() || jc.at("edges").size() != 4)
            throw InputError("diagram.v1: crossing needs exactly 4 edges");
        Crossing c{};
        for (int s = 0; s < 4; ++s) {
            c.e[s] = jc.at("edges")[s].get<int>();
            if (c.e[s] < 0) throw InputError("diagram.v1: negative edge id");
            max_edge = std::max(max_edge, c.e[s]);
        }
        c.sign = get_int(jc, "sign");
        d.crossings.push_back(c);
    }
    d.edge_count = max_edge + 1;
    d.free_circles = j.contains("free_circles") ? get_int(j, "free_circles") : 0;
    if (j.contains("orientations")) {
        const auto& o = j.at("orientations");
        if (!o.is_array() || static_cast<int>(o.size()) != d.edge_count)
            throw InputError("diagram.v1: orientations length must equal the edge count");
        for (const auto& v : o)
            if (v.get<int>() != 1)
                throw InputError("diagram.v1: sign/orientation mismatch (flags must be 1 in the "
                                 "slot convention)");
    }
    d.validate();
    return d;
}

Json serialize_chain(const Diagram& d, const ChainVector& c) {
    Json j;
    j["version"] = "chain.v1";
    Json terms = Json::array();
    for (const auto& t : c.terms()) {
        Json jt;
        jt["smoothing"] = bits_to_array(t.s.bits, t.s.n);
        jt["labels"] = bits_to_array(t.labels, resolve(d, t.s).count());
        terms.push_back(jt);
    }
    j["terms"] = terms;
    return j;
}

ChainVector parse_chain(const Json& j) {
    require_version(j, "chain.v1");
    ChainVector c;
    if (!j.contains("terms") || !j.at("terms").is_array())
        throw InputError("chain.v1: missing terms array");
    for (const auto& jt : j.at("terms")) {
        if (!jt.contains("smoothing") || !jt.at("smoothing").is_array())
            throw InputError("chain.v1: term needs a smoothing array");
        int n = static_cast<int>(jt.at("smoothing").size());
        if (n > 62) throw InputError("chain.v1: smoothing too long");
        LabeledSmoothing g;
        g.s = Smoothing{bits_from_array(jt.at("smoothing"), n, "chain.v1 smoothing"), n};
        if (!jt.contains("labels") || !jt.at("labels").is_array())
            throw InputError("chain.v1: term needs a labels array");
        int k = static_cast<int>(jt.at("labels").size());
        if (k > 62) throw InputError("chain.v1: label vector too long");
        g.labels = bits_from_array(jt.at("labels"), k, "chain.v1 labels");
        c.add(g);
    }
    return c;
}

namespace {

Json serialize_event(const MovieEvent& ev) {
    Json j;
    j["kind"] = event_kind_name(ev.kind);
    if (!ev.site.empty()) j["site"] = ev.site;
    if (ev.variant != 0) j["variant"] = ev.variant;
    return j;
}

MovieEvent parse_event(const Json& j) {
    if (!j.is_object() || !j.contains("kind")) throw InputError("movie.v1: event needs a kind");
    MovieEvent ev;
    ev.kind = event_kind_from_name(j.at("kind").get<std::string>());
    if (j.contains("site")) {
        for (const auto& v : j.at("site")) ev.site.push_back(v.get<int>());
    }
    ev.variant = j.contains("variant") ? get_int(j, "variant") : 0;
    return ev;
}

}  // namespace

Json serialize_movie(const Movie& m) {
    Json j;
    j["version"] = "movie.v1";
    j["source"] = serialize_diagram(m.source);
    Json events = Json::array();
    for (const auto& ev : m.events) events.push_back(serialize_event(ev));
    j["events"] = events;
    return j;
}

Movie parse_movie(const Json& j) {
    require_version(j, "movie.v1");
    Movie m;
    if (!j.contains("source")) throw InputError("movie.v1: missing source diagram");
    m.source = parse_diagram(j.at("source"));
    if (!j.contains("events") || !j.at("events").is_array())
        throw InputError("movie.v1: missing events array");
    for (const auto& je : j.at("events")) m.events.push_back(parse_event(je));
    return m;
}

Json serialize_tower(const TowerSpec& t) {
    Json j;
    j["version"] = "tower.v1";
    Json stages = Json::array();
    for (const auto& st : t.stages) {
        Json js;
        js["diagram"] = serialize_diagram(st.diagram);
        js["movie"] = serialize_movie(st.movie);
        js["chi_shift"] = st.chi_shift;
        stages.push_back(js);
    }
    j["stages"] = stages;
    if (t.pattern) {
        const TowerPattern& p = *t.pattern;
        Json jp;
        Json anchors;
        for (const auto& [k, v] : p.anchors) anchors[k] = v;
        jp["anchors"] = anchors;
        Json events = Json::array();
        for (const auto& pe : p.events) {
            Json je;
            je["kind"] = event_kind_name(pe.kind);
            if (!pe.site.empty()) je["site"] = pe.site;
            if (pe.variant != 0) je["variant"] = pe.variant;
            if (!pe.names.empty()) {
                Json names;
                for (const auto& [k, v] : pe.names) names[k] = v;
                je["names"] = names;
            }
            events.push_back(je);
        }
        jp["events"] = events;
        Json exports;
        for (const auto& [k, v] : p.exports) exports[k] = v;
        jp["exports"] = exports;
        Json bits = Json::array();
        for (const auto& [k, v] : p.cycle_bits) bits.push_back(Json::array({k, v}));
        jp["cycle_bits"] = bits;
        Json labels = Json::array();
        for (const auto& [k, v] : p.cycle_labels) labels.push_back(Json::array({k, v}));
        jp["cycle_labels"] = labels;
        jp["base_cycle"] = serialize_chain(t.stages.back().diagram, p.base_cycle);
        jp["chi_shift"] = p.chi_shift;
        j["pattern"] = jp;
    }
    j["depth_default"] = t.depth_default;
    return j;
}

TowerSpec parse_tower(const Json& j) {
    require_version(j, "tower.v1");
    TowerSpec t;
    if (!j.contains("stages") || !j.at("stages").is_array())
        throw InputError("tower.v1: missing stages array");
    for (const auto& js : j.at("stages")) {
        TowerStage st;
        st.diagram = parse_diagram(js.at("diagram"));
        st.movie = parse_movie(js.at("movie"));
        st.chi_shift = get_int(js, "chi_shift");
        t.stages.push_back(std::move(st));
    }
    if (j.contains("pattern")) {
        const Json& jp = j.at("pattern");
        TowerPattern p;
        if (jp.contains("anchors"))
            for (const auto& [k, v] : jp.at("anchors").items()) p.anchors[k] = v.get<int>();
        for (const auto& je : jp.at("events")) {
            PatternEvent pe;
            pe.kind = event_kind_from_name(je.at("kind").get<std::string>());
            if (je.contains("site"))
                for (const auto& s : je.at("site"))
                    pe.site.push_back(s.is_string() ? s.get<std::string>()
                                                    : std::to_string(s.get<int>()));
            pe.variant = je.contains("variant") ? get_int(je, "variant") : 0;
            if (je.contains("names"))
                for (const auto& [k, v] : je.at("names").items())
                    pe.names[k] = v.get<std::string>();
            p.events.push_back(std::move(pe));
        }
        if (jp.contains("exports"))
            for (const auto& [k, v] : jp.at("exports").items())
                p.exports[k] = v.get<std::string>();
        if (jp.contains("cycle_bits"))
            for (const auto& e : jp.at("cycle_bits"))
                p.cycle_bits.push_back({e[0].get<std::string>(), e[1].get<int>()});
        if (jp.contains("cycle_labels"))
            for (const auto& e : jp.at("cycle_labels"))
                p.cycle_labels.push_back({e[0].get<std::string>(), e[1].get<int>()});
        if (jp.contains("base_cycle")) p.base_cycle = parse_chain(jp.at("base_cycle"));
        p.chi_shift = jp.contains("chi_shift") ? get_int(jp, "chi_shift") : 0;
        t.pattern = std::move(p);
    }
    t.depth_default = j.contains("depth_default") ? get_int(j, "depth_default") : 4;
    return t;
}

Json serialize_certificate(const TowerSpec& t, const SurvivalCertificate& c) {
    Json j;
    j["version"] = "certificate.v1";
    Json cycles = Json::array();
    for (size_t i = 0; i < c.cycles.size(); ++i) {
        GeneratedStage g = generate_stage(t, static_cast<int>(i) + 1);
        cycles.push_back(serialize_chain(g.diagram, c.cycles[i]));
    }
    j["cycles"] = cycles;
    j["claimed_bigrading"] = Json::array({c.claimed.h, c.claimed.q});
    return j;
}

SurvivalCertificate parse_certificate(const Json& j) {
    require_version(j, "certificate.v1");
    SurvivalCertificate c;
    if (!j.contains("cycles") || !j.at("cycles").is_array())
        throw InputError("certificate.v1: missing cycles array");
    for (const auto& jc : j.at("cycles")) c.cycles.push_back(parse_chain(jc));
    if (!j.contains("claimed_bigrading") || j.at("claimed_bigrading").size() != 2)
        throw InputError("certificate.v1: missing claimed_bigrading [h,q]");
    c.claimed = {j.at("claimed_bigrading")[0].get<int>(), j.at("claimed_bigrading")[1].get<int>()};
    return c;
}

Json serialize_dims(const BigradedDims& dims) {
    // Lexicographically sorted [h, q, dim] triples.
    Json arr = Json::array();
    for (const auto& [hq, dim] : dims) arr.push_back(Json::array({hq.h, hq.q, dim}));
    return arr;
}

Json serialize_survival_report(const SurvivalReport& r) {
    Json j;
    j["pass"] = r.pass;
    j["end_class"] = Json::array({r.end_class.h, r.end_class.q});
    j["depth"] = r.depth;
    Json stages = Json::array();
    for (const auto& s : r.stages) {
        Json js;
        js["stage"] = s.stage;
        js["cycle_ok"] = s.cycle_ok;
        js["cycle_method"] = s.cycle_method;
        js["transfer_ok"] = s.transfer_ok;
        js["transfer_method"] = s.transfer_method;
        js["grading_ok"] = s.grading_ok;
        if (!s.witness.empty()) js["witness"] = s.witness;
        stages.push_back(js);
    }
    j["stages"] = stages;
    if (!r.error.empty()) j["error"] = r.error;
    return j;
}

Json serialize_capoff_report(const CapoffReport& r) {
    Json j;
    j["pass"] = r.pass;
    j["method"] = r.method;
    j["detail"] = r.detail;
    return j;
}

Json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open file: " + path);
    Json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw InputError("malformed JSON in " + path + ": " + e.what());
    }
    return j;
}

void save_json_file(const std::string& path, const Json& j) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write file: " + path);
    out << j.dump(2) << "\n";
}

}  // namespace kh
