#pragma once

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>

#include "config.hpp"
#include "fit.hpp"
#include "local.hpp"
#include "star_rep.hpp"
#include "zeta_analysis.hpp"

namespace torsorcount {

// A realized experiment: either a built-in family over Q or an explicit
// Gamma-group read from a group file.
struct Experiment {
    ExperimentConfig config;
    std::optional<QFamily> fam;
    std::optional<GammaGroup> group;  // explicit-group path
    std::unique_ptr<StarSet> group_star;
    CountingFunction counting;

    const StarSet& star() const { return fam ? fam->star() : *group_star; }
    const GammaGroup& gamma_group() const { return fam ? fam->gamma() : *group; }

    HeightSpec height() const {
        if (!fam) throw config_error("this command needs a built-in family");
        return HeightSpec{counting, config.bad_primes};
    }
};

// Group file format: the finite_group text format, optionally followed by
//   galois order <m> cyclotomic <v_0 ... v_{m-1}>
//   action
//   <n generator images>       (automorphism attached to the Gamma generator)
inline GammaGroup parse_group_with_galois(std::istream& in, const std::string& model) {
    FiniteGroup J = FiniteGroup::parse(in);
    std::string kw;
    if (in >> kw && kw == "galois") {
        std::string kw2, kw3;
        int m;
        if (!(in >> kw2 >> m >> kw3) || kw2 != "order" || kw3 != "cyclotomic")
            throw config_error("expected 'galois order <m> cyclotomic <list>'");
        long long modulus = J.exponent();
        std::vector<long long> chi(m);
        for (auto& v : chi)
            if (!(in >> v)) throw config_error("truncated cyclotomic list");
        std::vector<int> gen_action(J.order());
        std::iota(gen_action.begin(), gen_action.end(), 0);
        if (in >> kw && kw == "action")
            for (auto& v : gen_action)
                if (!(in >> v)) throw config_error("truncated action row");
        FiniteGroup Zm = FiniteGroup::cyclic(m);
        std::vector<std::vector<int>> action(m);
        std::vector<int> id(J.order());
        std::iota(id.begin(), id.end(), 0);
        action[0] = id;
        for (int k = 1; k < m; ++k) {
            action[k].resize(J.order());
            for (int j = 0; j < J.order(); ++j) action[k][j] = gen_action[action[k - 1][j]];
        }
        return GammaGroup(std::move(J), GaloisQuotient(std::move(Zm), modulus, std::move(chi)),
                          std::move(action));
    }
    // no galois block: fall back to the configured model
    long long e = J.exponent();
    if (model == "trivial") {
        return GammaGroup::trivial_action(std::move(J), GaloisQuotient::trivial(e));
    }
    // cyclotomic: (Z/e)^x with the identity character and constant action
    std::vector<long long> units;
    for (long long u = 1; u < e; ++u)
        if (std::gcd(u, e) == 1) units.push_back(u);
    if (e == 1) units = {1};
    int n = static_cast<int>(units.size());
    std::vector<int> table(static_cast<std::size_t>(n) * n);
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
            long long prod = e == 1 ? 1 : units[a] * units[b] % e;
            for (int i = 0; i < n; ++i)
                if (units[i] == prod) table[static_cast<std::size_t>(a) * n + b] = i;
        }
    FiniteGroup U("(Z/" + std::to_string(e) + ")^x", std::move(table));
    return GammaGroup::trivial_action(std::move(J),
                                      GaloisQuotient(std::move(U), e, units));
}

inline Experiment realize(const ExperimentConfig& ec) {
    Experiment ex;
    ex.config = ec;
    if (ec.family) {
        ex.fam.emplace(QFamily::make(*ec.family));
    } else {
        std::ifstream in(ec.group_file);
        if (!in) throw config_error("cannot open group file: " + ec.group_file);
        ex.group = parse_group_with_galois(in, ec.galois_model);
        ex.group_star = std::make_unique<StarSet>(*ex.group);
    }
    const StarSet& s = ex.star();
    if (ec.counting_type == "discriminant") ex.counting = c_discriminant(s);
    else if (ec.counting_type == "constant") ex.counting = constant_counting(s);
    else if (ec.counting_type == "index") ex.counting = c_index(s);
    else if (ec.counting_type == "custom") {
        std::ifstream in(ec.counting_file);
        if (!in) throw config_error("cannot open counting file: " + ec.counting_file);
        ex.counting = parse_counting(s, in);
    } else throw config_error("unknown counting type: " + ec.counting_type);
    return ex;
}

// ---- invariants and scan ----------------------------------------------------

inline int cmd_invariants(const ExperimentConfig& ec, std::ostream& out) {
    Experiment ex = realize(ec);
    const StarSet& s = ex.star();
    auto mi = invariants(s, ex.counting);
    out << "star set: " << s.size() << " points, group " << ex.gamma_group().base().name()
        << ", Galois quotient of order " << ex.gamma_group().gamma().order() << "\n";
    out << "orbits and counting values:\n";
    for (const auto& orb : s.orbits()) {
        out << " ";
        for (int p : orb) out << " " << p << "(rep " << s.rep(p) << ")";
        out << "  c = " << ex.counting(orb[0]).str() << "\n";
    }
    out << "a = " << mi.a.str() << "\n";
    out << "b = " << mi.b << "\n";
    out << "lambda = " << mi.lambda.str() << "\n";
    H1Options h1opt;
    h1opt.budget = ec.h1_budget;
    auto rep = breaking_thin_scan(ex.gamma_group(), s, ex.counting, h1opt);
    out << "breaking-thin scan over " << rep.quotient << ":\n";
    if (!rep.any_breaking) out << "  all elements secure\n";
    for (const auto& row : rep.rows)
        if (row.breaking)
            out << "  breaking: sigma " << row.sigma_id << " subgroup " << row.subgroup_id
                << " (a, b) = (" << row.a.str() << ", " << row.b << ")\n";
    return 0;
}

inline int cmd_scan(const ExperimentConfig& ec, std::ostream& out) {
    Experiment ex = realize(ec);
    H1Options h1opt;
    h1opt.budget = ec.h1_budget;
    auto rep = breaking_thin_scan(ex.gamma_group(), ex.star(), ex.counting, h1opt);
    std::filesystem::create_directories(ec.out_dir);
    std::string path = ec.out_dir + "/" + ec.name + ".scan.csv";
    std::ofstream f(path);
    f << rep.csv();
    out << "scan of " << rep.quotient << ": " << rep.rows.size() << " pairs, "
        << (rep.any_breaking ? "breaking maps found" : "all elements secure") << "\n";
    out << "wrote " << path << "\n";
    return 0;
}

// ---- counting with checkpoints ------------------------------------------------

struct CountRow {
    long long bound;
    long long count;
    Rational weighted;
};

inline std::string counts_csv_path(const ExperimentConfig& ec) {
    return ec.out_dir + "/" + ec.name + ".counts.csv";
}

inline std::vector<CountRow> read_counts_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot open counts file: " + path);
    std::vector<CountRow> rows;
    std::string line;
    std::getline(in, line);  // header
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string b, n, wn, wd;
        std::getline(ls, b, ',');
        std::getline(ls, n, ',');
        std::getline(ls, wn, ',');
        std::getline(ls, wd, ',');
        rows.push_back({std::stoll(b), std::stoll(n), Rational(std::stoll(wn), std::stoll(wd))});
    }
    return rows;
}

// Counts at every schedule point, checkpointed per point: each finished
// bound appends a CSV row and refreshes a manifest carrying the config hash
// and a checksum of the CSV body, so interrupted runs resume and corrupted
// state is detected.
inline int cmd_count(const ExperimentConfig& ec, std::ostream& out) {
    Experiment ex = realize(ec);
    if (!ex.fam) throw config_error("count needs a built-in family");
    if (ec.schedule.empty()) throw config_error("count needs a [schedule] section");
    HeightSpec h = ex.height();
    std::filesystem::create_directories(ec.out_dir);
    std::string csv_path = counts_csv_path(ec);
    std::string manifest_path = ec.out_dir + "/" + ec.name + ".manifest";

    std::vector<CountRow> done;
    std::string csv_body = "B,N,weighted_num,weighted_den\n";
    if (std::filesystem::exists(manifest_path)) {
        ConfigFile mf = ConfigFile::parse_file(manifest_path);
        std::ostringstream want;
        want << std::hex << ec.config_hash();
        if (mf.get(".config") != want.str())
            throw config_error("manifest belongs to a different configuration");
        std::ifstream cf(csv_path);
        if (!cf) throw config_error("manifest without counts file");
        std::ostringstream body;
        body << cf.rdbuf();
        std::ostringstream sum;
        sum << std::hex << fnv1a(body.str());
        if (mf.get(".checksum") != sum.str())
            throw config_error("interrupted-state corruption detected by checksum");
        done = read_counts_csv(csv_path);
        for (std::size_t i = 0; i < done.size(); ++i)
            if (i >= ec.schedule.size() || done[i].bound != ec.schedule[i])
                throw config_error("manifest schedule does not match the configuration");
        csv_body = body.str();
        out << "resuming after " << done.size() << " completed bounds\n";
    }

    auto write_state = [&]() {
        std::ofstream cf(csv_path, std::ios::trunc);
        cf << csv_body;
        cf.close();
        std::ofstream mf(manifest_path, std::ios::trunc);
        mf << "config=" << std::hex << ec.config_hash() << "\n";
        mf << std::dec << "rows=" << done.size() << "\n";
        mf << "checksum=" << std::hex << fnv1a(csv_body) << "\n";
    };
    if (done.empty()) write_state();

    for (std::size_t i = done.size(); i < ec.schedule.size(); ++i) {
        long long B = ec.schedule[i];
        auto r = count_torsors(*ex.fam, h, {B}, ec.conditions);
        CountRow row{B, r.counts[0], r.weighted[0]};
        done.push_back(row);
        std::ostringstream line;
        line << row.bound << ',' << row.count << ',' << row.weighted.num() << ','
             << row.weighted.den() << '\n';
        csv_body += line.str();
        write_state();
        out << "N(" << row.bound << ") = " << row.count << "\n";
    }
    out << "wrote " << csv_path << "\n";
    return 0;
}

// Streamed per-torsor CSV: family, m, descriptor, height, residues at the
// requested tame places; rows in nondecreasing height.
inline int cmd_count_stream(const ExperimentConfig& ec, std::ostream& out, long long max_height,
                            bool weighted, const std::vector<long long>& residue_places) {
    Experiment ex = realize(ec);
    if (!ex.fam) throw config_error("streaming needs a built-in family");
    const QFamily& fam = *ex.fam;
    HeightSpec h = ex.height();
    for (long long p : residue_places)
        if (h.is_bad(p)) throw config_error("residues can only be requested at tame places");
    out << "family,m,descriptor,height_num,height_den";
    for (long long p : residue_places) out << ",res_" << p;
    if (weighted) out << ",weight_num,weight_den";
    out << "\n";
    auto emit = [&](const std::string& desc, const Rational& hgt, const std::vector<int>& res) {
        out << fam.desc().name() << ',' << fam.e() << ',' << desc << ',' << hgt.num() << ','
            << hgt.den();
        for (int r : res) out << ',' << r;
        if (weighted) out << ",1," << fam.desc().g_of_q();
        out << "\n";
    };
    if (fam.desc().kind == FamilyKind::Mu) {
        for (const auto& k : enumerate_mu(fam, h, max_height, ec.conditions)) {
            std::vector<int> res;
            for (long long p : residue_places) res.push_back(residue_of_kummer(k, h, p));
            emit(k.str(), height_of_kummer(fam, h, k), res);
        }
    } else if (fam.desc().kind == FamilyKind::Cyclic) {
        for (const auto& t : enumerate_cyclic(fam, h, max_height, ec.conditions)) {
            std::vector<int> res;
            for (long long p : residue_places) res.push_back(residue_of_character(t, h, p));
            emit(t.str(), height_of_cyclic(fam, h, t), res);
        }
    } else {
        // product families: descriptors from the walker decorations crossed
        // with bad-block indices
        TameWalker walker(fam, h, max_height, ec.conditions);
        struct Row { Rational height; long long radical; std::string desc; std::vector<int> res; };
        std::vector<Row> rows;
        std::vector<long long> bad(h.bad_primes.begin(), h.bad_primes.end());
        std::vector<long long> block_sizes;
        for (long long p : bad) {
            long long n = 1;
            for (int f : fam.desc().factors)
                n *= static_cast<long long>(local_characters(p, f).size());
            block_sizes.push_back(n);
        }
        walker.walk([&](const std::vector<std::pair<long long, int>>& support, uint128) {
            Rational hgt = height_of_support(fam, h, support);
            long long rad = 1;
            std::ostringstream base;
            for (auto& [p, pt] : support) {
                base << (rad > 1 ? "*" : "") << p << ":" << pt;
                rad *= p;
            }
            std::vector<int> res;
            for (long long q : residue_places) {
                int r = 0;
                for (auto& [p, pt] : support)
                    if (p == q) r = pt;
                res.push_back(r);
            }
            // cross with bad blocks by odometer
            std::vector<long long> odo(bad.size(), 0);
            while (true) {
                std::ostringstream desc;
                desc << (base.str().empty() ? "1" : base.str());
                for (std::size_t i = 0; i < bad.size(); ++i)
                    if (odo[i]) desc << "*" << bad[i] << "^loc" << odo[i];
                rows.push_back({hgt, rad, desc.str(), res});
                std::size_t pos = 0;
                while (pos < odo.size() && odo[pos] + 1 == block_sizes[pos]) odo[pos++] = 0;
                if (pos == odo.size()) break;
                ++odo[pos];
            }
        });
        std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
            if (a.height != b.height) return a.height < b.height;
            if (a.radical != b.radical) return a.radical < b.radical;
            return a.desc < b.desc;
        });
        for (auto& r : rows) emit(r.desc, r.height, r.res);
    }
    return 0;
}

// ---- prediction ---------------------------------------------------------------

inline ZetaResult run_prediction(const Experiment& ex) {
    const ExperimentConfig& ec = ex.config;
    if (!ex.fam) throw config_error("predict needs a built-in family");
    HeightSpec h = ex.height();
    ZetaOptions opt;
    opt.truncation = ec.truncation;
    opt.tolerance = ec.tolerance;
    std::set<std::string> free;
    std::set<long long> extra;
    for (auto& [p, pts] : ec.conditions.allowed) {
        free.insert(std::to_string(p));
        extra.insert(p);
    }
    auto support = character_support(*ex.fam, h, free, extra);
    return zeta_measure(*ex.fam, h, ec.arithmetic(), support, ec.conditions, opt);
}

inline void write_predict_report(const ExperimentConfig& ec, const ZetaResult& res,
                                 std::ostream& out) {
    out << std::setprecision(12);
    out << "family:            " << (ec.family ? ec.family->name() : "-") << "\n";
    out << "counting function: " << ec.counting_type << "\n";
    out << "finite quotient:   " << res.quotient << "\n";
    out << "a =                " << res.a.str() << "\n";
    out << "pole order b =     " << res.b << "\n";
    out << "lambda =           " << res.lambda.str() << "\n";
    out << "tau_BG =           " << res.tau_bg.str() << "\n";
    out << "omega_H(U) =       " << res.omega << "\n";
    out << "count constant =   " << res.count_constant << "\n";
    if (res.b == 2)
        out << "log shift kappa =  " << res.kappa << (res.kappa_exact ? "" : " (approximate)")
            << "\n";
    out << "truncation =       " << res.truncation << "\n";
    out << "tail bound =       " << res.tail_bound << "\n";
    out << "characters:\n";
    for (const auto& cc : res.per_character)
        out << "  " << cc.name << ": fixed dim " << cc.fixed_dim
            << (cc.contributes ? "" : " (skipped)") << ", contribution " << cc.value.real()
            << (std::abs(cc.value.imag()) > 1e-12 ? " + i..." : "") << "\n";
}

inline int cmd_predict(const ExperimentConfig& ec, std::ostream& out) {
    Experiment ex = realize(ec);
    auto res = run_prediction(ex);
    write_predict_report(ec, res, out);
    std::filesystem::create_directories(ec.out_dir);
    std::string path = ec.out_dir + "/" + ec.name + ".predict.csv";
    std::ofstream f(path);
    f << std::setprecision(17);
    f << "family,counting,a,b,tau_bg,omega,count_constant,kappa,kappa_exact,truncation,tail_bound\n";
    f << (ec.family ? ec.family->name() : "-") << ',' << ec.counting_type << ',' << res.a.str()
      << ',' << res.b << ',' << res.tau_bg.str() << ',' << res.omega << ',' << res.count_constant
      << ',' << res.kappa << ',' << (res.kappa_exact ? 1 : 0) << ',' << res.truncation << ','
      << res.tail_bound << "\n";
    if (!ec.schedule.empty()) {
        f << "B,predicted\n";
        for (long long B : ec.schedule)
            f << B << ',' << res.predicted_count(static_cast<double>(B)) << "\n";
    }
    out << "wrote " << path << "\n";
    return 0;
}

// ---- verification ---------------------------------------------------------------

// Compares a finished count CSV against the analytic prediction: slope of
// the empirical counts, last-decade spread, and the ratio to the predicted
// count at the largest bound.  Exit code 0 on PASS, 1 on FAIL.
inline int cmd_verify(const ExperimentConfig& ec, std::ostream& out) {
    Experiment ex = realize(ec);
    auto res = run_prediction(ex);
    auto rows = read_counts_csv(counts_csv_path(ec));
    if (rows.empty()) throw config_error("counts file is empty");
    long long b_eff = ec.force_b.value_or(res.b);

    std::vector<FitSample> samples;
    for (const auto& r : rows)
        samples.push_back({static_cast<double>(r.bound), static_cast<double>(r.count)});
    auto fit = empirical_fit(samples, res.a, b_eff);

    auto predicted = [&](double B) {
        if (b_eff == res.b) return res.predicted_count(B);
        double poly = 1;
        for (long long j = 0; j < b_eff - 1; ++j) poly *= res.a.to_double() * std::log(B);
        return res.count_constant * std::pow(B, res.a.to_double()) * poly;
    };

    out << std::setprecision(6);
    out << "ratios N(B)/prediction per decade:\n";
    double last_ratio = 0;
    double last_b = 0;
    for (const auto& r : rows) {
        double ratio = static_cast<double>(r.count) / predicted(static_cast<double>(r.bound));
        if (static_cast<double>(r.bound) >= 10.0 * last_b || &r == &rows.back()) {
            out << "  B = " << r.bound << "  N = " << r.count << "  ratio = " << ratio << "\n";
            last_b = static_cast<double>(r.bound);
        }
        last_ratio = ratio;
    }
    double slope = b_eff == 1 ? fit.slope : fit.slope_corrected;
    bool slope_ok = std::abs(slope - res.a.to_double()) <= ec.slope_tol;
    bool ratio_ok = last_ratio >= 1.0 - ec.ratio_tol && last_ratio <= 1.0 + ec.ratio_tol;
    bool spread_ok = fit.last_decade_spread <= ec.spread_tol;
    out << "slope = " << slope << " (target " << res.a.to_double() << ", tol " << ec.slope_tol
        << "): " << (slope_ok ? "ok" : "off") << "\n";
    out << "final ratio = " << last_ratio << " (tol " << ec.ratio_tol
        << "): " << (ratio_ok ? "ok" : "off") << "\n";
    out << "last-decade spread = " << fit.last_decade_spread << " (tol " << ec.spread_tol
        << "): " << (spread_ok ? "ok" : "off") << "\n";
    bool pass = slope_ok && ratio_ok && spread_ok;
    out << (pass ? "PASS" : "FAIL") << "\n";
    return pass ? 0 : 1;
}

// ---- local tables ---------------------------------------------------------------

// Fourier / L-factor tables at tame places for every unramified character
// datum, written as CSV (q_v, Re s, Im s, Re value, Im value).
inline int cmd_local(const ExperimentConfig& ec, std::ostream& out) {
    Experiment ex = realize(ec);
    const GammaGroup& gg = ex.gamma_group();
    const StarSet& s = ex.star();
    if (!gg.base().is_abelian()) throw capability_error("local tables need an abelian group");
    long long e = gg.base().exponent();
    long long qmax = ec.file.get_int("local.qmax", 50);
    std::vector<LocalPlace> places;
    std::string places_file = ec.file.get("local.places_file");
    if (!places_file.empty()) {
        std::ifstream in(places_file);
        if (!in) throw config_error("cannot open places file: " + places_file);
        std::string kw;
        while (in >> kw) {
            if (kw != "place") throw config_error("expected 'place q=<n> frob=<element-index>'");
            std::string qa, fa;
            in >> qa >> fa;
            if (qa.rfind("q=", 0) != 0 || fa.rfind("frob=", 0) != 0)
                throw config_error("expected 'place q=<n> frob=<element-index>'");
            LocalPlace v{std::stoll(qa.substr(2)), static_cast<int>(std::stoll(fa.substr(5))), true};
            validate_place(gg, v);
            places.push_back(v);
        }
    } else {
        for (long long q : primes_up_to(qmax)) {
            if (std::gcd(q, static_cast<long long>(gg.base().order())) != 1) continue;
            for (int g = 0; g < gg.gamma().order(); ++g)
                if (gg.quotient().cyclotomic_mod(g, e) == q % e) {
                    places.push_back(LocalPlace{q, g, true});
                    break;
                }
        }
    }
    auto homs = homs_to_cyclic(gg.base(), e);
    std::vector<double> regrid;
    for (auto& t : split_list(ec.file.get("local.re", "0.8,1.0,1.5,2.0")))
        regrid.push_back(std::stod(t));
    double im = ec.file.get_double("local.im", 0.0);
    LocalHeight lh{ex.counting, {}};
    auto cn = normalized(s, ex.counting);
    std::vector<int> w1;
    for (int p = 1; p < s.size(); ++p)
        if (cn.values[p] == Rational(1)) w1.push_back(p);

    std::filesystem::create_directories(ec.out_dir);
    for (std::size_t j = 0; j < homs.size(); ++j) {
        std::ofstream ff(ec.out_dir + "/" + ec.name + ".fourier.chi" + std::to_string(j) + ".csv");
        std::ofstream lf(ec.out_dir + "/" + ec.name + ".lfactor.chi" + std::to_string(j) + ".csv");
        ff << "q_v,re_s,im_s,re_value,im_value\n";
        lf << "q_v,re_s,im_s,re_value,im_value\n";
        ff << std::setprecision(17);
        lf << std::setprecision(17);
        for (const auto& v : places) {
            LocalCohomology lc(gg, s, v);
            for (double re : regrid) {
                std::complex<double> sc(re, im);
                auto hf = local_fourier(lc, lh, homs[j], sc);
                ff << v.q << ',' << re << ',' << im << ',' << hf.real() << ',' << hf.imag() << "\n";
                // orbit-factorized L-factor of the minimum locus with the
                // same character datum
                std::complex<double> L = 1.0;
                std::vector<char> seen(s.size(), 0);
                for (int pt : w1) {
                    if (seen[pt]) continue;
                    long long zeta = 0;
                    int len = 0;
                    int cur = pt;
                    do {
                        seen[cur] = 1;
                        zeta += homs[j][s.rep(cur)];
                        ++len;
                        cur = s.act(v.frob, cur);
                    } while (cur != pt);
                    L /= 1.0 - unit_root(zeta, e) *
                                   std::exp(-sc * (double(len) * std::log(double(v.q))));
                }
                lf << v.q << ',' << re << ',' << im << ',' << L.real() << ',' << L.imag() << "\n";
            }
        }
    }
    out << "wrote " << places.size() << " places x " << homs.size() << " characters under "
        << ec.out_dir << "\n";
    return 0;
}

} // namespace torsorcount
