#pragma once

/**
 * @file irreducibility.hpp
 * @brief Support calculus for irreducibility: the lower envelope 𝔟, its tail
 *        infimum c(z), the iteration limit c_∞(z), the supremum c̄, and a
 *        brute-force reachability check on size bins.
 */

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "gfrag/errors.hpp"
#include "gfrag/model.hpp"
#include "gfrag/support.hpp"

namespace gfrag {

namespace detail {

struct Piece {
    double lo;
    double hi;
};

// supp_a with the sizes beyond an equals_y_beyond threshold removed
inline std::vector<Piece> effective_support(const SupportModel& s) {
    double cap = infinity;
    if (s.tail)
        if (const auto* e = std::get_if<EqualsYBeyond>(&*s.tail)) cap = e->y_max;
    std::vector<Piece> out;
    for (const auto& iv : s.supp_a.intervals) {
        const double hi = std::min(iv.hi, cap);
        if (hi > iv.lo) out.push_back({iv.lo, hi});
    }
    return out;
}

// inf of the non-negative linear function v(y) = v0 + k(y − y0) over [lo, hi]
inline double linear_infimum(double v0, double y0, double k, double lo, double hi) {
    if (lo > hi) return infinity;
    if (k >= 0.0) return std::max(0.0, v0 + k * (lo - y0));
    if (std::isinf(hi)) return 0.0;
    return std::max(0.0, v0 + k * (hi - y0));
}

// infimum over [lo, hi] ∩ supp_a of 𝔟, including the tail rule; for lo < hi the essential infimum
inline double support_infimum(const SupportModel& s, const std::vector<Piece>& supp, double lo, double hi) {
    double best = infinity;
    const double end = s.described_end();
    for (const auto& p : supp) {
        const double a = std::max(p.lo, lo);
        const double b = std::min(p.hi, hi);
        if (a > b) continue;
        if (a == b && !(a > p.lo && a < p.hi)) continue;

        const double covered_target = std::min(b, end);
        double cur = a;
        for (const auto& seg : s.envelope) {
            if (seg.hi < cur) continue;
            if (seg.lo > b) break;
            if (seg.lo > cur && cur < covered_target)
                throw InvalidInput("support: envelope does not cover supp_a near y = " + std::to_string(cur));
            const double from = std::max(a, seg.lo), to = std::min(b, seg.hi);
            // over a set of positive length a segment touching it in one point does not count
            if (a == b || to > from) best = std::min(best, linear_infimum(seg.value_at_lo, seg.lo, seg.slope, from, to));
            cur = std::max(cur, seg.hi);
        }
        if (cur < covered_target)
            throw InvalidInput("support: envelope does not cover supp_a near y = " + std::to_string(cur));

        const double tail_from = std::max(a, end);
        if (tail_from > b || std::isinf(tail_from)) continue;
        if (tail_from == b && b == end && end > a) continue;
        if (!s.tail) throw MissingTail("support: supp_a extends beyond the described envelope and no tail is declared");
        std::visit(overloaded{
                       [&](const EnvelopeExtends&) {
                           if (s.envelope.empty()) throw MissingTail("support: envelope_extends needs at least one segment");
                           const auto& last = s.envelope.back();
                           best = std::min(best, linear_infimum(last.value_at_lo, last.lo, last.slope, tail_from, b));
                       },
                       [&](const ConstantFloor& f) { best = std::min(best, std::min(f.value, tail_from)); },
                       [&](const EqualsYBeyond&) {
                           throw InvalidInput("support: envelope does not cover supp_a below the equals_y_beyond threshold");
                       },
                   },
                   *s.tail);
    }
    return best;
}

// infimum of 𝔟(y) = y over the complement of supp_a within [lo, ∞)
inline double complement_infimum(const std::vector<Piece>& supp, double lo) {
    double prev = 0.0;
    for (const auto& p : supp) {
        if (p.lo > prev && p.lo > lo) return std::max(prev, lo);
        prev = std::max(prev, p.hi);
    }
    if (std::isinf(prev)) return infinity;
    return std::max(prev, lo);
}

}  // namespace detail

/// 𝔟(y): the envelope on supp_a, y elsewhere.
inline double lower_envelope(const SupportModel& s, double y) {
    const auto supp = detail::effective_support(s);
    const bool inside = std::any_of(supp.begin(), supp.end(), [y](const detail::Piece& p) { return y > p.lo && y < p.hi; });
    if (!inside) return y;
    return std::min(y, detail::support_infimum(s, supp, y, y));
}

/// c(z) = inf_{y ≥ z} 𝔟(y), exact for the piecewise-linear envelope.
inline double tail_infimum_c(const SupportModel& s, double z) {
    if (!(z > 0.0)) throw InvalidInput("tail_infimum_c: z must be positive");
    const auto supp = detail::effective_support(s);
    const double on = detail::support_infimum(s, supp, z, infinity);
    const double off = detail::complement_infimum(supp, z);
    return std::min({on, off, z});
}

struct IterationResult {
    double c_inf = 0.0;
    long steps = 0;
    bool converged = false;
};

/// z_{n+1} = c(z_n) until two consecutive increments drop below tol.
inline IterationResult iterate_c(const SupportModel& s, double z0, double tol = 1e-12, long cap = 1000000) {
    if (!(z0 > 0.0)) throw InvalidInput("iterate_c: z0 must be positive");
    IterationResult res;
    double z = z0;
    bool small = false;
    while (res.steps < cap) {
        const double next = z > 0.0 ? tail_infimum_c(s, z) : 0.0;
        ++res.steps;
        if (next > z * (1.0 + 1e-15)) throw ConsistencyError("iterate_c: sequence increased");
        const double inc = z - next;
        z = next;
        // a tiny step onto a breakpoint can be followed by a jump
        if (inc < tol && (small || inc == 0.0)) {
            res.converged = true;
            break;
        }
        small = inc < tol;
    }
    res.c_inf = z;
    return res;
}

enum class CbarCase { fixed_point, approached_from_above };

struct CbarResult {
    double c_bar = 0.0;
    CbarCase kind = CbarCase::fixed_point;
    std::vector<std::pair<double, double>> witnesses;
};

inline constexpr double c_bar_zero_threshold = 1e-9;

/// Breakpoints of the support description: interval ends, segment ends and tail thresholds.
inline std::vector<double> support_breakpoints(const SupportModel& s) {
    std::vector<double> b;
    for (const auto& iv : s.supp_a.intervals) {
        b.push_back(iv.lo);
        if (std::isfinite(iv.hi)) b.push_back(iv.hi);
    }
    for (const auto& seg : s.envelope) {
        b.push_back(seg.lo);
        b.push_back(seg.value_at_lo);
        if (std::isfinite(seg.hi)) {
            b.push_back(seg.hi);
            b.push_back(seg.value(seg.hi));
        }
    }
    if (s.tail) {
        if (const auto* f = std::get_if<ConstantFloor>(&*s.tail)) b.push_back(f->value);
        if (const auto* e = std::get_if<EqualsYBeyond>(&*s.tail)) b.push_back(e->y_max);
    }
    std::sort(b.begin(), b.end());
    b.erase(std::unique(b.begin(), b.end()), b.end());
    return b;
}

/// Log-spaced samples on (0, Z] plus every breakpoint and its ± machine-epsilon neighbours.
inline std::vector<double> default_z_samples(const SupportModel& s, std::size_t n_log = 400) {
    const auto bps = support_breakpoints(s);
    double top = 1.0;
    for (double v : bps)
        if (std::isfinite(v)) top = std::max(top, v);
    top *= 10.0;
    std::vector<double> z;
    for (std::size_t i = 0; i <= n_log; ++i)
        z.push_back(1e-6 * std::pow(top / 1e-6, static_cast<double>(i) / static_cast<double>(n_log)));
    const double eps = std::numeric_limits<double>::epsilon();
    for (double v : bps) {
        if (!(v > 0.0) || !std::isfinite(v)) continue;
        z.push_back(v);
        z.push_back(v * (1.0 - 4.0 * eps));
        z.push_back(v * (1.0 + 4.0 * eps));
    }
    std::sort(z.begin(), z.end());
    z.erase(std::unique(z.begin(), z.end()), z.end());
    return z;
}

/// True when no fragmentation happens above some size, so that c(z) = z for all large z.
inline bool fragmentation_bounded(const SupportModel& s) {
    const auto supp = detail::effective_support(s);
    return supp.empty() || std::isfinite(supp.back().hi);
}

inline CbarResult compute_c_bar(const SupportModel& s, std::vector<double> z_samples = {}) {
    s.validate();
    if (z_samples.empty()) z_samples = default_z_samples(s);
    CbarResult res;
    if (fragmentation_bounded(s)) {
        res.c_bar = infinity;
        res.kind = CbarCase::fixed_point;
        return res;
    }
    double best = 0.0;
    for (double z : z_samples) {
        if (!(z > 0.0)) continue;
        const auto it = iterate_c(s, z);
        res.witnesses.emplace_back(z, it.c_inf);
        best = std::max(best, it.c_inf);
    }
    // iteration limits approached geometrically stall slightly above a breakpoint value
    for (double v : support_breakpoints(s))
        if (std::abs(best - v) <= 1e-9 * std::max(1.0, v)) best = v;
    if (best <= c_bar_zero_threshold) best = 0.0;
    res.c_bar = best;
    if (best > 0.0)
        res.kind = tail_infimum_c(s, best) >= best ? CbarCase::fixed_point : CbarCase::approached_from_above;
    return res;
}

enum class Irreducibility { irreducible, not_irreducible };

struct IrreducibilityDecision {
    Irreducibility decision = Irreducibility::not_irreducible;
    double c_bar = 0.0;
    std::string reason;

    bool irreducible() const { return decision == Irreducibility::irreducible; }
};

inline std::string to_string(Irreducibility d) {
    return d == Irreducibility::irreducible ? "IRREDUCIBLE" : "NOT_IRREDUCIBLE";
}

inline std::string format_bound(double v) {
    if (std::isinf(v)) return "inf";
    std::ostringstream os;
    os.precision(12);
    os << v;
    return os.str();
}

/// Irreducible iff sup supp β = ∞, or sup supp β > c̄, or c̄ = 0.
inline IrreducibilityDecision decide_irreducibility(const SupportModel& s, const CbarResult& result) {
    IrreducibilityDecision d;
    d.c_bar = result.c_bar;
    const double bs = s.beta_sup;
    const std::string cb = format_bound(result.c_bar), bsup = format_bound(bs);
    if (std::isinf(bs)) {
        d.decision = Irreducibility::irreducible;
        d.reason = "sup supp beta = inf";
    } else if (bs > result.c_bar) {
        d.decision = Irreducibility::irreducible;
        d.reason = "sup supp beta = " + bsup + " > c_bar = " + cb;
    } else if (result.c_bar == 0.0) {
        d.decision = Irreducibility::irreducible;
        d.reason = "c_bar = 0";
    } else {
        d.decision = Irreducibility::not_irreducible;
        d.reason = "violated: sup supp beta = " + bsup + " is finite; sup supp beta <= c_bar = " + cb + "; c_bar > 0";
    }
    return d;
}

inline IrreducibilityDecision decide_irreducibility(const SupportModel& s) {
    return decide_irreducibility(s, compute_c_bar(s));
}

/**
 * Bins (ih, (i+1)h) on [0, L] with the last bin open to +∞. Edges: growth
 * i → i+1; fragmentation i → j (j ≤ i) when parents in bin i ∩ supp_a of
 * positive measure have 𝔟(y) below the top of bin j; renewal i → 0 when bin i
 * meets [0, sup supp β).
 * Irreducible iff the graph is strongly connected.
 */
inline Irreducibility reachability_oracle(const SupportModel& s, std::size_t n_bins, double L = 0.0) {
    if (n_bins < 32) throw InvalidInput("reachability_oracle: need at least 32 bins");
    s.validate();
    if (!(L > 0.0)) {
        double top = 1.0;
        for (double v : support_breakpoints(s))
            if (std::isfinite(v)) top = std::max(top, v);
        L = 2.0 * top;
    }
    const double h = L / static_cast<double>(n_bins);
    const auto supp = detail::effective_support(s);
    std::vector<std::vector<std::size_t>> fwd(n_bins), bwd(n_bins);
    auto edge = [&](std::size_t i, std::size_t j) {
        fwd[i].push_back(j);
        bwd[j].push_back(i);
    };
    for (std::size_t i = 0; i < n_bins; ++i) {
        const double lo = h * static_cast<double>(i);
        const double hi = (i + 1 == n_bins) ? infinity : h * static_cast<double>(i + 1);
        if (i + 1 < n_bins) edge(i, i + 1);
        if (lo < s.beta_sup && i != 0) edge(i, 0);
        // parents in the open bin intersected with supp_a
        const double inf_b = detail::support_infimum(s, supp, lo, hi);
        if (!std::isfinite(inf_b)) continue;
        const bool has_parent = std::any_of(supp.begin(), supp.end(),
                                            [&](const detail::Piece& p) { return std::min(p.hi, hi) > std::max(p.lo, lo); });
        if (!has_parent) continue;
        for (std::size_t j = 0; j < i; ++j)
            if (inf_b < h * static_cast<double>(j + 1)) edge(i, j);
    }
    auto reach_all = [&](const std::vector<std::vector<std::size_t>>& g) {
        std::vector<char> seen(n_bins, 0);
        std::vector<std::size_t> stack{0};
        seen[0] = 1;
        std::size_t count = 1;
        while (!stack.empty()) {
            const auto v = stack.back();
            stack.pop_back();
            for (auto w : g[v])
                if (!seen[w]) {
                    seen[w] = 1;
                    ++count;
                    stack.push_back(w);
                }
        }
        return count == n_bins;
    };
    return (reach_all(fwd) && reach_all(bwd)) ? Irreducibility::irreducible : Irreducibility::not_irreducible;
}

// ---------------------------------------------------------------------------
// Support metadata from model coefficients
// ---------------------------------------------------------------------------

namespace detail {

inline IntervalUnion positive_set(const CoefficientSpec& a) {
    return std::visit(
        overloaded{
            [](const Constant& c) { return c.c > 0.0 ? IntervalUnion({{0.0, infinity}}) : IntervalUnion(); },
            [](const Linear& l) {
                return (l.c0 > 0.0 || l.c1 > 0.0) ? IntervalUnion({{0.0, infinity}}) : IntervalUnion();
            },
            [](const Power& p) { return p.c0 > 0.0 ? IntervalUnion({{0.0, infinity}}) : IntervalUnion(); },
            [](const Tabulated& t) {
                // piecewise linear, constant beyond the ends
                std::vector<Interval> iv;
                const auto& x = t.nodes;
                const auto& v = t.values;
                double start = v.front() > 0.0 ? 0.0 : -1.0;
                for (std::size_t i = 0; i + 1 < x.size(); ++i) {
                    if (start < 0.0 && v[i + 1] > 0.0) start = (v[i] > 0.0) ? x[i] : x[i];
                    if (start >= 0.0 && v[i + 1] == 0.0) {
                        iv.push_back({start, x[i + 1]});
                        start = -1.0;
                    }
                }
                if (start >= 0.0) iv.push_back({start, infinity});
                return IntervalUnion(iv);
            },
        },
        a);
}

}  // namespace detail

/// Support metadata implied by the model coefficients; the explicit description wins when present.
inline SupportModel derive_support(const ModelDefinition& model) {
    if (model.support) return *model.support;
    SupportModel s;
    s.supp_a = detail::positive_set(model.a);
    s.beta_sup = support_sup(model.beta);
    s.tail = EnvelopeExtends{};
    std::visit(overloaded{
                   [&](const UniformBinary&) { s.envelope.push_back({0.0, infinity, 0.0, 0.0}); },
                   [&](const PowerLaw&) { s.envelope.push_back({0.0, infinity, 0.0, 0.0}); },
                   [&](const TabulatedKernel& k) {
                       s.envelope.push_back({0.0, infinity, 0.0, k.inf_support_ratio()});
                   },
                   [&](const ShrinkingBinary& k) {
                       // 𝔟(y) = min(cap·y, scale·y^{1−power}) is piecewise linear only for power ∈ {0, 1}
                       if (k.eps_power == 1.0) {
                           const double y1 = k.eps_scale / k.eps_cap;
                           s.envelope.push_back({0.0, y1, 0.0, k.eps_cap});
                           s.envelope.push_back({y1, infinity, k.eps_scale, 0.0});
                       } else if (k.eps_power == 0.0) {
                           s.envelope.push_back({0.0, infinity, 0.0, std::min(k.eps_cap, k.eps_scale)});
                       } else {
                           throw InvalidInput("shrinking kernel envelope is not piecewise linear; give a support section");
                       }
                   },
               },
               model.kernel);
    return s;
}

}  // namespace gfrag
