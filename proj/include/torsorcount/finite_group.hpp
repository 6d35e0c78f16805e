#pragma once

#include <algorithm>
#include <cstdint>
#include <istream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace torsorcount {

class group_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class resource_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A finite group given by its multiplication table.  Elements are indices
// 0..n-1 with 0 the identity.  A permutation representation can be attached
// for index counting functions.
class FiniteGroup {
public:
    FiniteGroup() = default;

    // table[i*n+j] = i*j
    FiniteGroup(std::string name, std::vector<int> table)
        : name_(std::move(name)), n_(0), table_(std::move(table)) {
        std::size_t n = 1;
        while (n * n < table_.size()) ++n;
        if (n * n != table_.size()) throw group_error("multiplication table is not square");
        n_ = static_cast<int>(n);
        validate();
        compute_inverses_and_orders();
    }

    const std::string& name() const { return name_; }
    int order() const { return n_; }
    int mul(int a, int b) const { return table_[static_cast<std::size_t>(a) * n_ + b]; }
    int inv(int a) const { return inverse_[a]; }
    int element_order(int a) const { return elt_order_[a]; }
    int exponent() const { return exponent_; }

    int pow(int a, long long k) const {
        int m = elt_order_[a];
        k %= m;
        if (k < 0) k += m;
        int r = 0;
        for (long long i = 0; i < k; ++i) r = mul(r, a);
        return r;
    }

    bool is_abelian() const {
        for (int a = 0; a < n_; ++a)
            for (int b = a + 1; b < n_; ++b)
                if (mul(a, b) != mul(b, a)) return false;
        return true;
    }

    // Conjugacy classes sorted by their minimal element; the class of the
    // identity comes first.
    std::vector<std::vector<int>> conjugacy_classes() const {
        std::vector<char> seen(n_, 0);
        std::vector<std::vector<int>> classes;
        for (int a = 0; a < n_; ++a) {
            if (seen[a]) continue;
            std::set<int> cls;
            for (int k = 0; k < n_; ++k) cls.insert(mul(mul(inv(k), a), k));
            std::vector<int> v(cls.begin(), cls.end());
            for (int x : v) seen[x] = 1;
            classes.push_back(std::move(v));
        }
        return classes;
    }

    // Subgroup generated by a set of elements, as a sorted element list.
    std::vector<int> generated_subgroup(const std::vector<int>& gens) const {
        std::vector<char> in(n_, 0);
        in[0] = 1;
        std::vector<int> work{0};
        for (int g : gens)
            if (!in[g]) { in[g] = 1; work.push_back(g); }
        for (std::size_t i = 0; i < work.size(); ++i) {
            for (std::size_t j = 0; j < work.size(); ++j) {
                int p = mul(work[i], work[j]);
                if (!in[p]) { in[p] = 1; work.push_back(p); }
                p = mul(work[j], work[i]);
                if (!in[p]) { in[p] = 1; work.push_back(p); }
            }
        }
        std::sort(work.begin(), work.end());
        return work;
    }

    // All subgroups, each a sorted element list; sorted by (size, elements).
    // Closure-growing search; fine for the desk-scale orders this library
    // deals with (|J| <= 64 needed for the bitmask).
    std::vector<std::vector<int>> all_subgroups() const {
        if (n_ > 64) throw resource_error("subgroup enumeration limited to order <= 64");
        std::set<std::uint64_t> found;
        std::vector<std::vector<int>> out;
        std::vector<std::uint64_t> work;
        auto mask_of = [](const std::vector<int>& v) {
            std::uint64_t m = 0;
            for (int x : v) m |= (1ull << x);
            return m;
        };
        std::vector<int> triv{0};
        found.insert(mask_of(triv));
        out.push_back(triv);
        work.push_back(mask_of(triv));
        for (std::size_t i = 0; i < work.size(); ++i) {
            std::uint64_t m = work[i];
            std::vector<int> base;
            for (int x = 0; x < n_; ++x)
                if (m & (1ull << x)) base.push_back(x);
            for (int g = 0; g < n_; ++g) {
                if (m & (1ull << g)) continue;
                std::vector<int> gens = base;
                gens.push_back(g);
                auto sub = generated_subgroup(gens);
                auto sm = mask_of(sub);
                if (found.insert(sm).second) {
                    out.push_back(sub);
                    work.push_back(sm);
                }
            }
        }
        std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
            if (a.size() != b.size()) return a.size() < b.size();
            return a < b;
        });
        return out;
    }

    // Optional faithful permutation representation: perm_rep()[g] is the image
    // of g acting on {0..degree-1}.
    bool has_perm_rep() const { return !perm_rep_.empty(); }
    int perm_degree() const { return perm_degree_; }
    const std::vector<std::vector<int>>& perm_rep() const { return perm_rep_; }

    void attach_perm_rep(std::vector<std::vector<int>> rep) {
        if (static_cast<int>(rep.size()) != n_) throw group_error("permutation rep size mismatch");
        perm_degree_ = static_cast<int>(rep[0].size());
        for (const auto& p : rep) {
            if (static_cast<int>(p.size()) != perm_degree_)
                throw group_error("permutation rep degree mismatch");
            std::vector<char> hit(perm_degree_, 0);
            for (int x : p) {
                if (x < 0 || x >= perm_degree_ || hit[x]) throw group_error("not a permutation");
                hit[x] = 1;
            }
        }
        // homomorphism and faithfulness
        std::set<std::vector<int>> images;
        for (int a = 0; a < n_; ++a) {
            images.insert(rep[a]);
            for (int b = 0; b < n_; ++b) {
                const auto& pa = rep[a];
                const auto& pb = rep[b];
                const auto& pc = rep[mul(a, b)];
                for (int x = 0; x < perm_degree_; ++x)
                    if (pc[x] != pa[pb[x]]) throw group_error("permutation rep is not a homomorphism");
            }
        }
        if (static_cast<int>(images.size()) != n_)
            throw group_error("permutation rep is not faithful");
        perm_rep_ = std::move(rep);
    }

    bool perm_rep_transitive() const {
        if (!has_perm_rep()) return false;
        std::vector<char> reach(perm_degree_, 0);
        reach[0] = 1;
        std::vector<int> work{0};
        for (std::size_t i = 0; i < work.size(); ++i)
            for (int g = 0; g < n_; ++g) {
                int y = perm_rep_[g][work[i]];
                if (!reach[y]) { reach[y] = 1; work.push_back(y); }
            }
        return std::all_of(reach.begin(), reach.end(), [](char c) { return c != 0; });
    }

    int perm_orbit_count(int g) const {
        std::vector<char> seen(perm_degree_, 0);
        int orbits = 0;
        for (int x = 0; x < perm_degree_; ++x) {
            if (seen[x]) continue;
            ++orbits;
            int y = x;
            do {
                seen[y] = 1;
                y = perm_rep_[g][y];
            } while (y != x);
        }
        return orbits;
    }

    // ---- constructors for standard groups ----

    static FiniteGroup cyclic(int m) {
        if (m < 1) throw group_error("cyclic group of nonpositive order");
        std::vector<int> t(static_cast<std::size_t>(m) * m);
        for (int a = 0; a < m; ++a)
            for (int b = 0; b < m; ++b) t[static_cast<std::size_t>(a) * m + b] = (a + b) % m;
        return FiniteGroup("Z/" + std::to_string(m), std::move(t));
    }

    static FiniteGroup direct_product(const FiniteGroup& A, const FiniteGroup& B) {
        int n = A.order() * B.order();
        std::vector<int> t(static_cast<std::size_t>(n) * n);
        auto idx = [&](int a, int b) { return a * B.order() + b; };
        for (int a1 = 0; a1 < A.order(); ++a1)
            for (int b1 = 0; b1 < B.order(); ++b1)
                for (int a2 = 0; a2 < A.order(); ++a2)
                    for (int b2 = 0; b2 < B.order(); ++b2)
                        t[static_cast<std::size_t>(idx(a1, b1)) * n + idx(a2, b2)] =
                            idx(A.mul(a1, a2), B.mul(b1, b2));
        return FiniteGroup(A.name() + "x" + B.name(), std::move(t));
    }

    // Group generated by permutations of {0..degree-1}; elements get indexed
    // with the identity first, then in BFS discovery order made canonical by
    // sorting the permutation images.  The natural permutation representation
    // is attached.
    static FiniteGroup from_permutations(const std::string& name, int degree,
                                         const std::vector<std::vector<int>>& gens);

    static FiniteGroup symmetric(int n);

    // The same group carrying its left-regular permutation representation.
    FiniteGroup with_regular_perm_rep() const {
        FiniteGroup G = *this;
        std::vector<std::vector<int>> rep(n_, std::vector<int>(n_));
        for (int g = 0; g < n_; ++g)
            for (int x = 0; x < n_; ++x) rep[g][x] = mul(g, x);
        G.attach_perm_rep(std::move(rep));
        return G;
    }

    // ---- text format ----
    //
    //   group <name> order <n>
    //   table
    //   <n rows of n indices>
    //
    // or
    //
    //   group <name> order <n>
    //   perm <degree>
    //   <one generator per line in cycle notation, e.g. (0 1)(2 3)>
    static FiniteGroup parse(std::istream& in);

private:
    void validate() const {
        for (int a = 0; a < n_; ++a) {
            if (mul(0, a) != a || mul(a, 0) != a) throw group_error("index 0 is not an identity");
            bool has_inv = false;
            for (int b = 0; b < n_; ++b) {
                if (table_[static_cast<std::size_t>(a) * n_ + b] < 0 ||
                    table_[static_cast<std::size_t>(a) * n_ + b] >= n_)
                    throw group_error("table entry out of range");
                if (mul(a, b) == 0 && mul(b, a) == 0) has_inv = true;
            }
            if (!has_inv) throw group_error("element without inverse");
        }
        for (int a = 0; a < n_; ++a)
            for (int b = 0; b < n_; ++b)
                for (int c = 0; c < n_; ++c)
                    if (mul(mul(a, b), c) != mul(a, mul(b, c)))
                        throw group_error("multiplication table is not associative");
    }

    void compute_inverses_and_orders() {
        inverse_.assign(n_, 0);
        elt_order_.assign(n_, 1);
        exponent_ = 1;
        for (int a = 0; a < n_; ++a) {
            for (int b = 0; b < n_; ++b)
                if (mul(a, b) == 0) inverse_[a] = b;
            int x = a, m = 1;
            while (x != 0) { x = mul(x, a); ++m; }
            elt_order_[a] = m;
            exponent_ = std::lcm(exponent_, m);
        }
    }

    std::string name_;
    int n_ = 0;
    std::vector<int> table_;
    std::vector<int> inverse_;
    std::vector<int> elt_order_;
    int exponent_ = 1;
    int perm_degree_ = 0;
    std::vector<std::vector<int>> perm_rep_;
};

inline FiniteGroup FiniteGroup::from_permutations(const std::string& name, int degree,
                                                  const std::vector<std::vector<int>>& gens) {
    std::vector<int> id(degree);
    std::iota(id.begin(), id.end(), 0);
    std::set<std::vector<int>> elems;
    elems.insert(id);
    std::vector<std::vector<int>> work{id};
    for (std::size_t i = 0; i < work.size(); ++i) {
        for (const auto& g : gens) {
            std::vector<int> p(degree);
            for (int x = 0; x < degree; ++x) p[x] = g[work[i][x]];
            if (elems.insert(p).second) work.push_back(p);
        }
    }
    std::vector<std::vector<int>> sorted(elems.begin(), elems.end());
    // identity first, remaining in lexicographic order
    std::stable_partition(sorted.begin(), sorted.end(),
                          [&](const std::vector<int>& p) { return p == id; });
    std::map<std::vector<int>, int> index;
    for (std::size_t i = 0; i < sorted.size(); ++i) index[sorted[i]] = static_cast<int>(i);
    int n = static_cast<int>(sorted.size());
    std::vector<int> table(static_cast<std::size_t>(n) * n);
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
            std::vector<int> p(degree);
            for (int x = 0; x < degree; ++x) p[x] = sorted[a][sorted[b][x]];
            table[static_cast<std::size_t>(a) * n + b] = index[p];
        }
    FiniteGroup G(name, std::move(table));
    G.attach_perm_rep(std::move(sorted));
    return G;
}

inline FiniteGroup FiniteGroup::symmetric(int n) {
    std::vector<std::vector<int>> gens;
    if (n >= 2) {
        std::vector<int> t(n);
        std::iota(t.begin(), t.end(), 0);
        std::swap(t[0], t[1]);
        gens.push_back(t);
        std::vector<int> c(n);
        for (int i = 0; i < n; ++i) c[i] = (i + 1) % n;
        gens.push_back(c);
    }
    return from_permutations("S" + std::to_string(n), n, gens);
}

inline std::vector<int> parse_cycles(const std::string& line, int degree) {
    std::vector<int> p(degree);
    std::iota(p.begin(), p.end(), 0);
    std::size_t i = 0;
    while (i < line.size()) {
        if (line[i] != '(') { ++i; continue; }
        std::size_t j = line.find(')', i);
        if (j == std::string::npos) throw group_error("unbalanced cycle notation");
        std::istringstream cyc(line.substr(i + 1, j - i - 1));
        std::vector<int> pts;
        int x;
        while (cyc >> x) {
            if (x < 0 || x >= degree) throw group_error("cycle point out of range");
            pts.push_back(x);
        }
        for (std::size_t k = 0; k < pts.size(); ++k) p[pts[k]] = pts[(k + 1) % pts.size()];
        i = j + 1;
    }
    return p;
}

inline FiniteGroup FiniteGroup::parse(std::istream& in) {
    std::string kw, name, kw2;
    int n = 0;
    if (!(in >> kw >> name >> kw2 >> n) || kw != "group" || kw2 != "order")
        throw group_error("expected 'group <name> order <n>'");
    std::string mode;
    in >> mode;
    if (mode == "table") {
        std::vector<int> t;
        t.reserve(static_cast<std::size_t>(n) * n);
        for (int i = 0; i < n * n; ++i) {
            int v;
            if (!(in >> v)) throw group_error("truncated multiplication table");
            t.push_back(v);
        }
        return FiniteGroup(name, std::move(t));
    }
    if (mode == "perm") {
        int degree;
        if (!(in >> degree)) throw group_error("expected permutation degree");
        std::string line;
        std::getline(in, line);
        std::vector<std::vector<int>> gens;
        while (std::getline(in, line)) {
            if (line.find('(') == std::string::npos) break;
            gens.push_back(parse_cycles(line, degree));
        }
        FiniteGroup G = from_permutations(name, degree, gens);
        if (G.order() != n) throw group_error("declared order does not match generated group");
        return G;
    }
    throw group_error("expected 'table' or 'perm <degree>'");
}

} // namespace torsorcount
