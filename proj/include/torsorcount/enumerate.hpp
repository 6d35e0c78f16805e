#pragma once

#include <algorithm>
#include <functional>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "qfamily.hpp"

namespace torsorcount {

// Residue conditions at finitely many tame places: the set of star points a
// torsor's residue may take at p.  An absent prime is unconstrained.
struct LocalConditions {
    std::map<long long, std::set<int>> allowed;

    bool constrains(long long p) const { return allowed.count(p) != 0; }
};

using int128 = __int128;
using uint128 = unsigned __int128;

namespace detail {

// p^k with a clamp at limit+1 so overflow cannot occur
inline uint128 pow_clamped(long long p, long long k, uint128 limit) {
    uint128 r = 1;
    for (long long i = 0; i < k; ++i) {
        if (r > limit / static_cast<uint128>(p)) return limit + 1;
        r *= static_cast<uint128>(p);
    }
    return r;
}

} // namespace detail

// The tame enumeration core shared by counting and streaming: walks
// squarefree supports of primes outside the bad set in increasing order,
// assigning each support prime a ramified residue point permitted by the
// Frobenius and the conditions, with multiplicative height p^c(point).
//
// Counting functions may take rational values; heights are compared through
// the D-th powers with D the common denominator, kept in 128-bit integers.
class TameWalker {
public:
    TameWalker(const QFamily& fam, const HeightSpec& h, long long max_bound,
               const LocalConditions& cond = {})
        : fam_(fam), h_(h), cond_(cond) {
        validate_height_spec(fam, h);
        for (auto& [p, pts] : cond_.allowed) {
            if (h.is_bad(p))
                throw capability_error("condition at a bad place without tabulated local data");
            for (int pt : pts)
                if (pt < 0 || pt >= fam.star().size()) throw group_error("condition point out of range");
        }
        // scale the counting function to integers
        long long D = 1;
        for (int pt = 1; pt < fam.star().size(); ++pt)
            D = std::lcm(D, h.counting.values[pt].den());
        scale_ = D;
        scaled_c_.assign(fam.star().size(), 0);
        long long cmin = 0;
        for (int pt = 1; pt < fam.star().size(); ++pt) {
            scaled_c_[pt] = h.counting.values[pt].num() * (D / h.counting.values[pt].den());
            if (cmin == 0 || scaled_c_[pt] < cmin) cmin = scaled_c_[pt];
        }
        cmin_ = cmin;
        // threshold = max_bound^D
        if (max_bound < 1) throw group_error("height bound must be at least 1");
        double bits = static_cast<double>(D) * std::log2(static_cast<double>(max_bound));
        if (bits > 120) throw resource_error("height bound too large for the counting denominator");
        threshold_ = 1;
        for (long long i = 0; i < D; ++i) threshold_ *= static_cast<uint128>(max_bound);
        // primes usable at all: p^cmin <= threshold
        long long limit = static_cast<long long>(
            std::pow(static_cast<double>(max_bound), static_cast<double>(D) / cmin_)) + 2;
        while (detail::pow_clamped(limit + 1, cmin_, threshold_) <= threshold_) ++limit;
        while (limit > 2 && detail::pow_clamped(limit, cmin_, threshold_) > threshold_) --limit;
        for (long long p : primes_up_to(limit))
            if (!h_.is_bad(p)) primes_.push_back(p);
        // fixed nonidentity points by residue class of p mod e
        long long e = fam.e();
        fixed_by_class_.resize(static_cast<std::size_t>(std::max<long long>(e, 1)));
        for (long long r = 0; r < std::max<long long>(e, 1); ++r) {
            if (e > 1 && std::gcd(r, e) != 1) continue;
            int fr = e == 1 ? 0 : fam.frob_index(r == 0 ? 1 : r);
            for (int pt = 1; pt < fam.star().size(); ++pt)
                if (fam.star().act(fr, pt) == pt)
                    fixed_by_class_[static_cast<std::size_t>(r)].push_back(pt);
        }
        // forced primes: conditions excluding the unramified residue
        for (auto& [p, pts] : cond_.allowed)
            if (!pts.count(0)) forced_.push_back(p);
        std::sort(forced_.begin(), forced_.end());
    }

    long long scale() const { return scale_; }
    uint128 threshold() const { return threshold_; }

    // scaled height of a decorated support, clamped at threshold+1
    uint128 scaled_height(const std::vector<std::pair<long long, int>>& support) const {
        uint128 hgt = 1;
        for (auto& [p, pt] : support) {
            uint128 f = detail::pow_clamped(p, scaled_c_[pt], threshold_);
            if (f > threshold_ || hgt > threshold_ / f) return threshold_ + 1;
            hgt *= f;
        }
        return hgt;
    }

    // Visit every tame decoration with scaled height <= threshold.  The
    // callback receives the support (sorted by prime) and the scaled height.
    // Partitioning splits by the index of the smallest non-forced support
    // prime; the empty tail belongs to partition 0.
    void walk(const std::function<void(const std::vector<std::pair<long long, int>>&, uint128)>& visit,
              int part_index = 0, int part_count = 1) const {
        std::vector<std::pair<long long, int>> support;
        walk_forced(0, 1, support, visit, part_index, part_count);
    }

    const std::vector<long long>& primes() const { return primes_; }

    const std::vector<int>& fixed_points_at(long long p) const {
        long long e = fam_.e();
        return fixed_by_class_[static_cast<std::size_t>(e <= 1 ? 0 : p % e)];
    }

    bool point_allowed(long long p, int pt) const {
        auto it = cond_.allowed.find(p);
        return it == cond_.allowed.end() || it->second.count(pt) != 0;
    }

private:
    void walk_forced(std::size_t fi, uint128 hgt, std::vector<std::pair<long long, int>>& support,
                     const std::function<void(const std::vector<std::pair<long long, int>>&, uint128)>& visit,
                     int part_index, int part_count) const {
        if (fi < forced_.size()) {
            long long p = forced_[fi];
            for (int pt : fixed_points_at(p)) {
                if (!point_allowed(p, pt)) continue;
                uint128 f = detail::pow_clamped(p, scaled_c_[pt], threshold_);
                if (f > threshold_ || hgt > threshold_ / f) continue;
                support.emplace_back(p, pt);
                walk_forced(fi + 1, hgt * f, support, visit, part_index, part_count);
                support.pop_back();
            }
            return;
        }
        // sorted merge of forced + free primes happens at emission time
        walk_free(0, hgt, support, visit, part_index, part_count, true);
    }

    void walk_free(std::size_t i, uint128 hgt, std::vector<std::pair<long long, int>>& support,
                   const std::function<void(const std::vector<std::pair<long long, int>>&, uint128)>& visit,
                   int part_index, int part_count, bool at_root) const {
        if (!at_root || part_index == 0) {
            auto sorted = support;
            std::sort(sorted.begin(), sorted.end());
            visit(sorted, hgt);
        }
        for (std::size_t j = i; j < primes_.size(); ++j) {
            long long p = primes_[j];
            if (detail::pow_clamped(p, cmin_, threshold_) > threshold_ / std::max<uint128>(hgt, 1))
                break;  // primes ascend, nothing later fits either
            if (at_root && part_count > 1 &&
                static_cast<int>(j % static_cast<std::size_t>(part_count)) != part_index)
                continue;
            if (std::binary_search(forced_.begin(), forced_.end(), p)) continue;
            for (int pt : fixed_points_at(p)) {
                if (!point_allowed(p, pt)) continue;
                uint128 f = detail::pow_clamped(p, scaled_c_[pt], threshold_);
                if (f > threshold_ || hgt > threshold_ / f) continue;
                support.emplace_back(p, pt);
                walk_free(j + 1, hgt * f, support, visit, part_index, part_count, false);
                support.pop_back();
            }
        }
    }

    const QFamily& fam_;
    const HeightSpec& h_;
    LocalConditions cond_;
    long long scale_ = 1;
    std::vector<long long> scaled_c_;
    long long cmin_ = 1;
    uint128 threshold_ = 1;
    std::vector<long long> primes_;
    std::vector<long long> forced_;
    std::vector<std::vector<int>> fixed_by_class_;
};

// ---- counting ------------------------------------------------------------

struct CountResult {
    std::vector<long long> bounds;
    std::vector<long long> counts;        // N(B) at each bound
    std::vector<Rational> weighted;       // N(B)/#G(Q)
};

// Counts at every schedule point in one walk.  Conditions restrict residues
// at tame places; classes supported inside the bad set count with height 1.
inline CountResult count_torsors(const QFamily& fam, const HeightSpec& h,
                                 std::vector<long long> bounds,
                                 const LocalConditions& cond = {}, int part_index = 0,
                                 int part_count = 1) {
    std::sort(bounds.begin(), bounds.end());
    if (bounds.empty() || bounds.front() < 1) throw group_error("bounds must be at least 1");
    TameWalker walker(fam, h, bounds.back(), cond);
    long long D = walker.scale();
    std::vector<uint128> thresholds;
    for (long long b : bounds) {
        uint128 t = 1;
        for (long long i = 0; i < D; ++i) t *= static_cast<uint128>(b);
        thresholds.push_back(t);
    }
    std::vector<long long> hist(bounds.size(), 0);
    walker.walk(
        [&](const std::vector<std::pair<long long, int>>&, uint128 hgt) {
            auto it = std::lower_bound(thresholds.begin(), thresholds.end(), hgt);
            if (it != thresholds.end()) ++hist[static_cast<std::size_t>(it - thresholds.begin())];
        },
        part_index, part_count);
    long long bad = bad_block_size(fam, h);
    CountResult out;
    out.bounds = bounds;
    long long acc = 0;
    for (std::size_t j = 0; j < bounds.size(); ++j) {
        acc += hist[j];
        out.counts.push_back(acc * bad);
        out.weighted.push_back(Rational(acc * bad, fam.desc().g_of_q()));
    }
    return out;
}

// ---- typed enumeration ----------------------------------------------------

inline Rational height_of_support(const QFamily&, const HeightSpec& h,
                                  const std::vector<std::pair<long long, int>>& support) {
    Rational hgt(1);
    for (auto& [p, pt] : support) {
        const Rational& c = h.counting.values[pt];
        if (!c.is_integer())
            throw capability_error("exact heights need an integer-valued counting function");
        std::int64_t f = 1;
        for (std::int64_t i = 0; i < c.num(); ++i) f *= p;
        hgt = hgt * Rational(f);
    }
    return hgt;
}

// Complete list of mu_m classes of height <= B, streamed in nondecreasing
// height, ties by radical then class data.
inline std::vector<KummerClass> enumerate_mu(const QFamily& fam, const HeightSpec& h,
                                             long long bound, const LocalConditions& cond = {}) {
    if (fam.desc().kind != FamilyKind::Mu) throw group_error("enumerate_mu needs a mu family");
    int m = fam.desc().m();
    TameWalker walker(fam, h, bound, cond);
    struct Item { Rational height; long long radical; KummerClass cls; };
    std::vector<Item> items;
    std::vector<long long> bad(h.bad_primes.begin(), h.bad_primes.end());
    walker.walk([&](const std::vector<std::pair<long long, int>>& support, uint128) {
        KummerClass base;
        base.m = m;
        long long rad = 1;
        for (auto& [p, pt] : support) {
            base.exponents[p] = pt;  // star points of mu_m are exponents
            rad *= p;
        }
        Rational hgt = height_of_support(fam, h, support);
        // cross with every class supported in the bad set
        std::vector<KummerClass> block{base};
        for (long long p : bad) {
            std::vector<KummerClass> next;
            for (const auto& k : block)
                for (int epow = 0; epow < m; ++epow) {
                    KummerClass k2 = k;
                    if (epow) k2.exponents[p] = epow;
                    next.push_back(std::move(k2));
                }
            block = std::move(next);
        }
        if (m % 2 == 0) {
            std::vector<KummerClass> next;
            for (const auto& k : block)
                for (bool neg : {false, true}) {
                    KummerClass k2 = k;
                    k2.negative = neg;
                    next.push_back(std::move(k2));
                }
            block = std::move(next);
        }
        for (auto& k : block) items.push_back({hgt, rad, std::move(k)});
    });
    std::sort(items.begin(), items.end(), [](const Item& x, const Item& y) {
        if (x.height != y.height) return x.height < y.height;
        if (x.radical != y.radical) return x.radical < y.radical;
        if (x.cls.negative != y.cls.negative) return !x.cls.negative;
        return std::vector<std::pair<long long, int>>(x.cls.exponents.begin(), x.cls.exponents.end()) <
               std::vector<std::pair<long long, int>>(y.cls.exponents.begin(), y.cls.exponents.end());
    });
    std::vector<KummerClass> out;
    out.reserve(items.size());
    for (auto& it : items) out.push_back(std::move(it.cls));
    return out;
}

// Complete list of order-m cyclic torsors (characters Gamma_Q -> Z/m) of
// height <= B, streamed in nondecreasing height, ties by conductor then
// component data.
inline std::vector<CyclicTorsor> enumerate_cyclic(const QFamily& fam, const HeightSpec& h,
                                                  long long bound,
                                                  const LocalConditions& cond = {}) {
    if (fam.desc().kind != FamilyKind::Cyclic) throw group_error("enumerate_cyclic needs a cyclic family");
    int m = fam.desc().m();
    TameWalker walker(fam, h, bound, cond);
    struct Item { Rational height; long long conductor; CyclicTorsor t; };
    std::vector<Item> items;
    std::vector<long long> bad(h.bad_primes.begin(), h.bad_primes.end());
    std::map<long long, std::vector<LocalCharacter>> bad_tables;
    for (long long p : bad) bad_tables[p] = local_characters(p, m);
    walker.walk([&](const std::vector<std::pair<long long, int>>& support, uint128) {
        CyclicTorsor base;
        base.m = m;
        long long n_tame = 1;
        for (auto& [p, pt] : support) {
            base.tame[p] = pt;
            n_tame *= p;
        }
        Rational hgt = height_of_support(fam, h, support);
        std::vector<std::pair<CyclicTorsor, long long>> block{{base, n_tame}};
        for (long long p : bad) {
            std::vector<std::pair<CyclicTorsor, long long>> next;
            const auto& table = bad_tables[p];
            for (const auto& [t, n] : block)
                for (std::size_t j = 0; j < table.size(); ++j) {
                    CyclicTorsor t2 = t;
                    if (j) t2.bad[p] = static_cast<int>(j);
                    next.push_back({std::move(t2), n * table[j].conductor});
                }
            block = std::move(next);
        }
        for (auto& [t, n] : block) items.push_back({hgt, n, std::move(t)});
    });
    std::sort(items.begin(), items.end(), [](const Item& x, const Item& y) {
        if (x.height != y.height) return x.height < y.height;
        if (x.conductor != y.conductor) return x.conductor < y.conductor;
        auto key = [](const CyclicTorsor& t) {
            std::vector<std::tuple<long long, int, int>> k;
            for (auto& [p, a] : t.tame) k.emplace_back(p, 0, a);
            for (auto& [p, j] : t.bad) k.emplace_back(p, 1, j);
            return k;
        };
        return key(x.t) < key(y.t);
    });
    std::vector<CyclicTorsor> out;
    out.reserve(items.size());
    for (auto& it : items) out.push_back(std::move(it.t));
    return out;
}

inline Rational height_of_kummer(const QFamily& fam, const HeightSpec& h, const KummerClass& x) {
    std::vector<std::pair<long long, int>> support;
    for (auto& [p, e] : x.exponents)
        if (!h.is_bad(p)) support.emplace_back(p, fam.star().point_of(e % x.m));
    return height_of_support(fam, h, support);
}

inline Rational height_of_cyclic(const QFamily& fam, const HeightSpec& h, const CyclicTorsor& t) {
    std::vector<std::pair<long long, int>> support;
    for (auto& [p, a] : t.tame)
        if (!h.is_bad(p)) support.emplace_back(p, fam.star().point_of(a % t.m));
    return height_of_support(fam, h, support);
}

} // namespace torsorcount
