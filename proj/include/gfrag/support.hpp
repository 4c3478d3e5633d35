#pragma once

/**
 * @file support.hpp
 * @brief Support metadata consumed by the irreducibility calculus.
 *
 * The lower envelope 𝔟(y) = inf supp b(·, y) is described piecewise-linearly on
 * supp a; off supp a the convention 𝔟(y) = y applies (non-splitting sizes).
 */

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <variant>
#include <vector>

#include "gfrag/errors.hpp"

namespace gfrag {

inline constexpr double infinity = std::numeric_limits<double>::infinity();

/// Open interval (lo, hi); hi may be +inf.
struct Interval {
    double lo = 0.0;
    double hi = infinity;

    bool contains(double y) const { return y > lo && y < hi; }
};

struct IntervalUnion {
    std::vector<Interval> intervals;

    IntervalUnion() = default;
    explicit IntervalUnion(std::vector<Interval> iv) : intervals(std::move(iv)) { validate(); }

    void validate() const {
        for (std::size_t k = 0; k < intervals.size(); ++k) {
            const auto& iv = intervals[k];
            if (!(iv.lo >= 0.0) || !(iv.hi > iv.lo)) throw InvalidInput("interval union: empty or negative interval");
            if (k > 0 && !(iv.lo >= intervals[k - 1].hi))
                throw InvalidInput("interval union: intervals must be sorted and disjoint");
        }
    }

    bool contains(double y) const {
        return std::any_of(intervals.begin(), intervals.end(), [y](const Interval& iv) { return iv.contains(y); });
    }

    bool unbounded() const { return !intervals.empty() && std::isinf(intervals.back().hi); }
    bool empty() const { return intervals.empty(); }
};

/// 𝔟(y) = value_at_lo + slope·(y − lo) on [lo, hi].
struct EnvelopeSegment {
    double lo = 0.0;
    double hi = infinity;
    double value_at_lo = 0.0;
    double slope = 0.0;

    double value(double y) const { return value_at_lo + slope * (y - lo); }
    /// Infimum of the segment over [from, to] ∩ [lo, hi]; +inf when empty.
    double infimum(double from, double to) const {
        const double a = std::max(from, lo);
        const double b = std::min(to, hi);
        if (a > b) return infinity;
        if (slope >= 0.0) return value(a);
        return value(b);
    }
};

/// How 𝔟 behaves beyond the last described envelope segment.
struct EnvelopeExtends {};
struct ConstantFloor {
    double value = 0.0;
};
struct EqualsYBeyond {
    double y_max = 0.0;
};
using SupportTail = std::variant<EnvelopeExtends, ConstantFloor, EqualsYBeyond>;

struct SupportModel {
    IntervalUnion supp_a;
    std::vector<EnvelopeSegment> envelope;  ///< sorted by lo
    double beta_sup = 0.0;                  ///< sup supp β (0 when β = 0, +inf when unbounded)
    std::optional<SupportTail> tail;

    void validate() const {
        supp_a.validate();
        for (std::size_t k = 0; k < envelope.size(); ++k) {
            const auto& s = envelope[k];
            if (!(s.hi > s.lo)) throw InvalidInput("support: envelope segment with hi <= lo");
            if (k > 0 && s.lo < envelope[k - 1].hi) throw InvalidInput("support: envelope segments overlap");
            if (s.value_at_lo < 0.0 || s.value_at_lo > s.lo + 1e-15)
                throw InvalidInput("support: envelope must satisfy 0 <= b(y) <= y at segment start");
            if (std::isinf(s.hi)) {
                if (s.slope < 0.0 || s.slope >= 1.0)
                    throw InvalidInput("support: unbounded envelope segment needs slope in [0, 1)");
            } else {
                const double v = s.value(s.hi);
                if (v < -1e-15 || v > s.hi + 1e-15)
                    throw InvalidInput("support: envelope must satisfy 0 <= b(y) <= y at segment end");
            }
        }
        if (beta_sup < 0.0) throw InvalidInput("support: beta_sup must be nonnegative");
        if (tail) {
            if (const auto* f = std::get_if<ConstantFloor>(&*tail); f && f->value < 0.0)
                throw InvalidInput("support: constant floor must be nonnegative");
        }
    }

    /// Right end of the described envelope (0 if none).
    double described_end() const { return envelope.empty() ? 0.0 : envelope.back().hi; }
};

}  // namespace gfrag
