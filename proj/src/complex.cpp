#include "kh/complex.hpp"

#include <algorithm>
#include <bit>

namespace kh {

ChainVector::ChainVector(std::vector<LabeledSmoothing> terms) {
    for (const auto& t : terms) add(t);
}

void ChainVector::add(const LabeledSmoothing& g) {
    auto it = std::lower_bound(terms_.begin(), terms_.end(), g);
    if (it != terms_.end() && *it == g)
        terms_.erase(it);
    else
        terms_.insert(it, g);
}

void ChainVector::add(const ChainVector& other) {
    for (const auto& t : other.terms_) add(t);
}

Bigrading bigrading(const Diagram& d, const LabeledSmoothing& g) {
    CircleSet cs = resolve(d, g.s);
    int k = cs.count();
    if (k > 64) throw FeasibilityError("more than 64 circles in one smoothing");
    uint64_t mask = k == 64 ? ~uint64_t{0} : ((uint64_t{1} << k) - 1);
    if (g.labels & ~mask) throw InputError("label vector longer than circle count");
    int v_minus = std::popcount(g.labels & mask);
    int v_plus = k - v_minus;
    int h = g.s.weight() - d.n_neg();
    int q = v_plus - v_minus + h + d.writhe();
    return {h, q};
}

std::optional<Bigrading> homogeneous_bigrading(const Diagram& d, const ChainVector& c) {
    std::optional<Bigrading> bg;
    for (const auto& t : c.terms()) {
        Bigrading b = bigrading(d, t);
        if (!bg)
            bg = b;
        else if (*bg != b)
            return std::nullopt;
    }
    return bg.has_value() ? bg : std::optional<Bigrading>{Bigrading{0, 0}};
}

std::vector<LabeledSmoothing> enumerate_generators(const Diagram& d,
                                                   std::optional<Bigrading> filter) {
    const int n = d.n();
    if (n > 62) throw FeasibilityError("crossing count exceeds enumeration capacity");
    std::vector<LabeledSmoothing> out;
    for (uint64_t bits = 0; bits < (uint64_t{1} << n); ++bits) {
        Smoothing s{bits, n};
        int h = std::popcount(bits) - d.n_neg();
        if (filter && h != filter->h) continue;
        CircleSet cs = resolve(d, s);
        int k = cs.count();
        if (k > 62) throw FeasibilityError("circle count exceeds enumeration capacity");
        if (!filter) {
            for (uint64_t labels = 0; labels < (uint64_t{1} << k); ++labels)
                out.push_back({s, labels});
            continue;
        }
        // q = v+ - v- + h + w with v+ + v- = k pins the number of x labels.
        int t = filter->q - h - d.writhe();  // v+ - v-
        if ((k - t) % 2 != 0) continue;
        int v_minus = (k - t) / 2;
        if (v_minus < 0 || v_minus > k) continue;
        // All label masks with v_minus bits set, ascending.
        if (v_minus == 0) {
            out.push_back({s, 0});
            continue;
        }
        uint64_t m = (uint64_t{1} << v_minus) - 1;
        uint64_t limit = uint64_t{1} << k;
        while (m < limit) {
            out.push_back({s, m});
            // next mask with same popcount (Gosper's hack)
            uint64_t c0 = m & -m, r = m + c0;
            m = (((r ^ m) >> 2) / c0) | r;
            if (c0 == 0) break;
        }
    }
    return out;
}

ChainVector differential_of_generator(const Diagram& d, const LabeledSmoothing& g) {
    ChainVector out;
    CircleSet cs = resolve(d, g.s);
    for (int i = 0; i < d.n(); ++i) {
        if (g.s.bit(i)) continue;
        Smoothing s2{g.s.bits | (uint64_t{1} << i), g.s.n};
        CircleSet cs2 = resolve(d, s2);
        const auto& e = d.crossings[i].e;
        int ca = cs.circle_of[e[0]];
        int cb = cs.circle_of[e[2]];
        if (ca != cb) {
            // merge: m(x,x)=0, m(1,a)=a
            bool xa = (g.labels >> ca) & 1, xb = (g.labels >> cb) & 1;
            if (xa && xb) continue;
            bool merged_label = xa || xb;
            uint64_t labels2 = 0;
            for (int j2 = 0; j2 < cs2.count(); ++j2) {
                EdgeId rep = cs2.circles[j2][0];
                int jold = cs.circle_of[rep];
                bool x;
                if (jold == ca || jold == cb)
                    x = merged_label;
                else
                    x = (g.labels >> jold) & 1;
                if (x) labels2 |= uint64_t{1} << j2;
            }
            out.add({s2, labels2});
        } else {
            // split: Delta(x) = x(x)x, Delta(1) = 1(x)x + x(x)1
            int j2a = cs2.circle_of[e[0]];
            int j2b = cs2.circle_of[e[2]];
            if (j2a == j2b) throw InputError("internal: flip neither merged nor split");
            auto emit = [&](bool la, bool lb) {
                uint64_t labels2 = 0;
                for (int j2 = 0; j2 < cs2.count(); ++j2) {
                    bool x;
                    if (j2 == j2a)
                        x = la;
                    else if (j2 == j2b)
                        x = lb;
                    else
                        x = (g.labels >> cs.circle_of[cs2.circles[j2][0]]) & 1;
                    if (x) labels2 |= uint64_t{1} << j2;
                }
                out.add({s2, labels2});
            };
            if ((g.labels >> ca) & 1) {
                emit(true, true);
            } else {
                emit(true, false);
                emit(false, true);
            }
        }
    }
    return out;
}

ChainVector apply_differential(const Diagram& d, const ChainVector& c) {
    ChainVector out;
    for (const auto& g : c.terms()) out.add(differential_of_generator(d, g));
    return out;
}

bool is_cycle_local(const Diagram& d, const LabeledSmoothing& g) {
    CircleSet cs = resolve(d, g.s);
    for (int i = 0; i < d.n(); ++i) {
        if (g.s.bit(i)) continue;
        const auto& e = d.crossings[i].e;
        int ca = cs.circle_of[e[0]];
        int cb = cs.circle_of[e[2]];
        if (ca == cb) return false;  // the flip splits
        if (!((g.labels >> ca) & 1) || !((g.labels >> cb) & 1)) return false;
    }
    return true;
}

ChainBlock differential_block(const Diagram& d, Bigrading hq) {
    ChainBlock blk;
    blk.source = enumerate_generators(d, hq);
    blk.target = enumerate_generators(d, Bigrading{hq.h + 1, hq.q});
    blk.d = F2Matrix(static_cast<int>(blk.target.size()), static_cast<int>(blk.source.size()));
    std::map<LabeledSmoothing, int> index;
    for (size_t i = 0; i < blk.target.size(); ++i) index[blk.target[i]] = static_cast<int>(i);
    for (size_t j = 0; j < blk.source.size(); ++j) {
        ChainVector dg = differential_of_generator(d, blk.source[j]);
        for (const auto& t : dg.terms()) {
            auto it = index.find(t);
            if (it == index.end())
                throw InputError("internal: differential left the expected block");
            blk.d.set(it->second, static_cast<int>(j), true);
        }
    }
    return blk;
}

BigradedDims homology_dims(const Diagram& d, int bound) {
    if (d.n() > bound)
        throw FeasibilityError("homology_dims: crossing count " + std::to_string(d.n()) +
                               " exceeds feasibility bound " + std::to_string(bound));
    // Group all generators by bigrading, then run per-block elimination.
    std::map<Bigrading, std::vector<LabeledSmoothing>> gens;
    for (const auto& g : enumerate_generators(d)) gens[bigrading(d, g)].push_back(g);

    std::map<Bigrading, int> rank_out;  // rank of d leaving each block
    for (const auto& [hq, source] : gens) {
        Bigrading next{hq.h + 1, hq.q};
        auto it = gens.find(next);
        if (it == gens.end()) {
            rank_out[hq] = 0;
            continue;
        }
        const auto& target = it->second;
        F2Matrix m(static_cast<int>(target.size()), static_cast<int>(source.size()));
        std::map<LabeledSmoothing, int> index;
        for (size_t i = 0; i < target.size(); ++i) index[target[i]] = static_cast<int>(i);
        for (size_t j = 0; j < source.size(); ++j) {
            ChainVector dg = differential_of_generator(d, source[j]);
            for (const auto& t : dg.terms()) m.set(index.at(t), static_cast<int>(j), true);
        }
        rank_out[hq] = rank(m);
    }

    BigradedDims dims;
    for (const auto& [hq, source] : gens) {
        int dim = static_cast<int>(source.size()) - rank_out[hq];
        auto prev = rank_out.find(Bigrading{hq.h - 1, hq.q});
        if (prev != rank_out.end()) dim -= prev->second;
        if (dim < 0) throw InputError("internal: negative homology dimension");
        if (dim > 0) dims[hq] = dim;
    }
    return dims;
}

bool is_boundary(const Diagram& d, const ChainVector& c, int bound) {
    if (c.zero()) return true;
    if (d.n() > bound)
        throw FeasibilityError("is_boundary: crossing count exceeds feasibility bound");
    if (!apply_differential(d, c).zero())
        throw InputError("is_boundary: chain is not a cycle");
    auto hq = homogeneous_bigrading(d, c);
    if (!hq) throw InputError("is_boundary: chain is not homogeneous");
    ChainBlock blk = differential_block(d, Bigrading{hq->h - 1, hq->q});
    std::vector<uint8_t> rhs = coordinates_of(c, blk.target);
    return solve(blk.d, rhs).has_value();
}

std::vector<uint8_t> coordinates_of(const ChainVector& c,
                                    const std::vector<LabeledSmoothing>& basis) {
    std::vector<uint8_t> v(basis.size(), 0);
    std::map<LabeledSmoothing, int> index;
    for (size_t i = 0; i < basis.size(); ++i) index[basis[i]] = static_cast<int>(i);
    for (const auto& t : c.terms()) {
        auto it = index.find(t);
        if (it == index.end()) throw InputError("chain has a term outside the expected block");
        v[it->second] ^= 1;
    }
    return v;
}

}  // namespace kh
