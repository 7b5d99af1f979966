// Command-line front end: compute homology tables, run cobordism movies,
// evaluate towers and verify certificates.

#include <cstdlib>
#include <iostream>
#include <string>
#include <thread>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "kh/io.hpp"

namespace {

using namespace kh;

constexpr int kExitPass = 0;
constexpr int kExitVerifyFail = 1;
constexpr int kExitInputError = 2;
constexpr int kExitInfeasible = 3;

struct Options {
    std::string format = "text";
    int bound = kDefaultFeasibilityBound;
    int depth = -1;
    std::string window = "-4:4,-8:8";
    bool serial = false;
};

struct Window {
    int h0, h1, q0, q1;
};

Window parse_window(const std::string& s) {
    Window w{};
    if (std::sscanf(s.c_str(), "%d:%d,%d:%d", &w.h0, &w.h1, &w.q0, &w.q1) != 4)
        throw InputError("bad --window, expected h0:h1,q0:q1");
    if (w.h0 > w.h1 || w.q0 > w.q1) throw InputError("bad --window: empty range");
    return w;
}

// Resolve a path, trying the data-dir override when the file is missing.
std::string locate(const std::string& path) {
    std::ifstream probe(path);
    if (probe) return path;
    const char* dir = std::getenv("KH_DATA_DIR");
    if (dir) {
        std::string alt = std::string(dir) + "/" + path;
        std::ifstream probe2(alt);
        if (probe2) return alt;
    }
    return path;  // let the loader report the error
}

void emit(const Options& opt, const Json& machine, const std::string& text) {
    if (opt.format == "json")
        std::cout << machine.dump(2) << "\n";
    else
        std::cout << text;
}

std::string dims_table(const BigradedDims& dims) {
    if (dims.empty()) return "(no homology in range)\n";
    std::string out = "  h    q  dim\n";
    for (const auto& [hq, dim] : dims) {
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%3d  %3d  %3d\n", hq.h, hq.q, dim);
        out += buf;
    }
    return out;
}

int cmd_kh(const Options& opt, const std::string& file) {
    Diagram d = parse_diagram(load_json_file(locate(file)));
    BigradedDims dims = homology_dims(d, opt.bound);
    Json j;
    j["command"] = "kh";
    j["dims"] = serialize_dims(dims);
    emit(opt, j, dims_table(dims));
    return kExitPass;
}

int cmd_map(const Options& opt, const std::string& file) {
    Movie m = parse_movie(load_json_file(locate(file)));
    Window w = parse_window(opt.window);
    Json blocks = Json::array();
    std::string text;
    for (int h = w.h0; h <= w.h1; ++h)
        for (int q = w.q0; q <= w.q1; ++q) {
            F2Matrix f = induced_homology_map(m, {h, q}, opt.bound);
            if (f.rows() == 0 && f.cols() == 0) continue;
            Json jb;
            jb["from"] = Json::array({h, q});
            jb["to"] = Json::array({h, q + m.chi()});
            Json rows = Json::array();
            for (int r = 0; r < f.rows(); ++r) {
                Json row = Json::array();
                for (int c = 0; c < f.cols(); ++c) row.push_back(static_cast<int>(f.get(r, c)));
                rows.push_back(row);
            }
            jb["matrix"] = rows;
            jb["rank"] = rank(f);
            blocks.push_back(jb);
            text += "block (" + std::to_string(h) + "," + std::to_string(q) + ") -> (" +
                    std::to_string(h) + "," + std::to_string(q + m.chi()) + "): " +
                    std::to_string(f.rows()) + "x" + std::to_string(f.cols()) +
                    ", rank " + std::to_string(rank(f)) + "\n";
        }
    Json j;
    j["command"] = "map";
    j["chi"] = m.chi();
    j["blocks"] = blocks;
    emit(opt, j, text.empty() ? "(no nonzero blocks in window)\n" : text);
    return kExitPass;
}

int cmd_tower(const Options& opt, const std::string& file) {
    TowerSpec t = parse_tower(load_json_file(locate(file)));
    Window w = parse_window(opt.window);
    Json ends = Json::array(), coends = Json::array();
    std::string text = "  h    q  coend  end\n";
    bool any = false;
    for (int h = w.h0; h <= w.h1; ++h)
        for (int q = w.q0; q <= w.q1; ++q) {
            int ce = coend_dims(t, {h, q}, 0, opt.bound);
            int e = end_dims(t, {h, q}, 0, opt.bound);
            if (ce == 0 && e == 0) continue;
            any = true;
            coends.push_back(Json::array({h, q, ce}));
            ends.push_back(Json::array({h, q, e}));
            char buf[80];
            std::snprintf(buf, sizeof(buf), "%3d  %3d  %5d  %3d\n", h, q, ce, e);
            text += buf;
        }
    Json j;
    j["command"] = "tower";
    j["coend"] = coends;
    j["end"] = ends;
    emit(opt, j, any ? text : "(all limits vanish in window)\n");
    return kExitPass;
}

int cmd_verify_cycle(const Options& opt, const std::string& dfile, const std::string& cfile) {
    Diagram d = parse_diagram(load_json_file(locate(dfile)));
    ChainVector c = parse_chain(load_json_file(locate(cfile)));
    bool local_ok = !c.zero();
    for (const auto& g : c.terms()) local_ok = local_ok && is_cycle_local(d, g);
    bool diff_ok = apply_differential(d, c).zero();
    auto hq = homogeneous_bigrading(d, c);
    Json j;
    j["command"] = "verify-cycle";
    j["local_criterion"] = local_ok;
    j["differential_vanishes"] = diff_ok;
    if (hq && !c.zero()) j["bigrading"] = Json::array({hq->h, hq->q});
    std::string text = std::string("cycle: ") + (diff_ok ? "yes" : "no") +
                       " (local criterion: " + (local_ok ? "yes" : "no") + ")\n";
    if (hq && !c.zero())
        text += "bigrading: (" + std::to_string(hq->h) + "," + std::to_string(hq->q) + ")\n";
    emit(opt, j, text);
    return diff_ok ? kExitPass : kExitVerifyFail;
}

int cmd_survival(const Options& opt, const std::string& tfile, const std::string& cfile) {
    TowerSpec t = parse_tower(load_json_file(locate(tfile)));
    SurvivalCertificate cert = parse_certificate(load_json_file(locate(cfile)));
    if (opt.depth > 0) {
        if (opt.depth > static_cast<int>(cert.cycles.size()))
            throw InputError("certificate is shallower than requested depth");
        cert.cycles.resize(opt.depth);
    }
    SurvivalReport rep = verify_survival(t, cert, opt.bound);
    Json j = serialize_survival_report(rep);
    j["command"] = "survival";
    std::string text = std::string(rep.pass ? "PASS" : "FAIL") + ", end class (" +
                       std::to_string(rep.end_class.h) + "," + std::to_string(rep.end_class.q) +
                       "), depth " + std::to_string(rep.depth) + "\n";
    for (const auto& s : rep.stages) {
        text += "  stage " + std::to_string(s.stage) + ": cycle " +
                (s.cycle_ok ? "ok" : "FAIL") + " [" + s.cycle_method + "], transfer " +
                (s.transfer_ok ? "ok" : "FAIL") + " [" + s.transfer_method + "], grading " +
                (s.grading_ok ? "ok" : "FAIL");
        if (!s.witness.empty()) text += " -- " + s.witness;
        text += "\n";
    }
    if (!rep.error.empty()) text += "error: " + rep.error + "\n";
    emit(opt, j, text);
    return rep.pass ? kExitPass : kExitVerifyFail;
}

int cmd_capoff(const Options& opt, const std::string& dfile, const std::string& cfile,
               const std::string& mfile) {
    Diagram d = parse_diagram(load_json_file(locate(dfile)));
    ChainVector c = parse_chain(load_json_file(locate(cfile)));
    Movie m = parse_movie(load_json_file(locate(mfile)));
    CapoffReport rep = prove_nonzero_via_capoff(d, c, m, opt.bound);
    Json j = serialize_capoff_report(rep);
    j["command"] = "capoff";
    emit(opt, j,
         std::string(rep.pass ? "PASS" : "FAIL") + " [" + rep.method + "]: " + rep.detail + "\n");
    return rep.pass ? kExitPass : kExitVerifyFail;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Khovanov homology, cobordism maps, and end invariants of link towers"};
    app.require_subcommand(1);

    Options opt;
    app.add_option("--format", opt.format, "text or json")
        ->check(CLI::IsMember({"text", "json"}));
    app.add_option("--bound", opt.bound, "feasibility bound on crossing count");
    app.add_option("--depth", opt.depth, "verification depth");
    app.add_option("--window", opt.window, "bigrading window h0:h1,q0:q1");
    app.add_flag("--serial", opt.serial, "force single-threaded execution");

    std::string file_a, file_b, file_c;
    auto* kh_cmd = app.add_subcommand("kh", "bigraded homology table of a diagram");
    kh_cmd->add_option("diagram", file_a)->required();
    auto* map_cmd = app.add_subcommand("map", "induced homology map of a movie");
    map_cmd->add_option("movie", file_a)->required();
    auto* tower_cmd = app.add_subcommand("tower", "end/co-end dimensions of a tower");
    tower_cmd->add_option("tower", file_a)->required();
    auto* vc_cmd = app.add_subcommand("verify-cycle", "check a chain is a cycle");
    vc_cmd->add_option("diagram", file_a)->required();
    vc_cmd->add_option("chain", file_b)->required();
    auto* sv_cmd = app.add_subcommand("survival", "verify a survival certificate");
    sv_cmd->add_option("tower", file_a)->required();
    sv_cmd->add_option("certificate", file_b)->required();
    auto* co_cmd = app.add_subcommand("capoff", "certify a nonzero class via a cap-off movie");
    co_cmd->add_option("diagram", file_a)->required();
    co_cmd->add_option("chain", file_b)->required();
    co_cmd->add_option("movie", file_c)->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (kh_cmd->parsed()) return cmd_kh(opt, file_a);
        if (map_cmd->parsed()) return cmd_map(opt, file_a);
        if (tower_cmd->parsed()) return cmd_tower(opt, file_a);
        if (vc_cmd->parsed()) return cmd_verify_cycle(opt, file_a, file_b);
        if (sv_cmd->parsed()) return cmd_survival(opt, file_a, file_b);
        if (co_cmd->parsed()) return cmd_capoff(opt, file_a, file_b, file_c);
    } catch (const FeasibilityError& e) {
        Json j{{"error", "feasibility"}, {"detail", e.what()}};
        if (opt.format == "json")
            std::cout << j.dump(2) << "\n";
        else
            std::cerr << "feasibility: " << e.what() << "\n";
        return kExitInfeasible;
    } catch (const InputError& e) {
        Json j{{"error", "input"}, {"detail", e.what()}};
        if (opt.format == "json")
            std::cout << j.dump(2) << "\n";
        else
            std::cerr << "input error: " << e.what() << "\n";
        return kExitInputError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInputError;
    }
    return kExitInputError;
}
