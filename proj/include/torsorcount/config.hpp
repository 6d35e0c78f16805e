#pragma once

#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "enumerate.hpp"
#include "qfamily.hpp"
#include "zeta_analysis.hpp"

namespace torsorcount {

class config_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Flat key-value configuration with [section] headers; # starts a comment.
struct ConfigFile {
    std::map<std::string, std::string> values;  // "section.key" -> value
    std::string raw;

    static ConfigFile parse_stream(std::istream& in) {
        ConfigFile cf;
        std::ostringstream rawcopy;
        std::string line, section;
        while (std::getline(in, line)) {
            rawcopy << line << '\n';
            auto hash = line.find('#');
            if (hash != std::string::npos) line = line.substr(0, hash);
            auto trim = [](std::string s) {
                auto b = s.find_first_not_of(" \t\r");
                auto e = s.find_last_not_of(" \t\r");
                return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
            };
            line = trim(line);
            if (line.empty()) continue;
            if (line.front() == '[' && line.back() == ']') {
                section = trim(line.substr(1, line.size() - 2));
                continue;
            }
            auto eq = line.find('=');
            if (eq == std::string::npos) throw config_error("expected key = value: " + line);
            cf.values[section + "." + trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
        }
        cf.raw = rawcopy.str();
        return cf;
    }

    static ConfigFile parse_file(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw config_error("cannot open config file: " + path);
        ConfigFile cf = parse_stream(in);
        auto slash = path.find_last_of('/');
        cf.base_dir = slash == std::string::npos ? "" : path.substr(0, slash + 1);
        return cf;
    }

    // files named in a config resolve relative to the config's directory
    std::string resolve(const std::string& rel) const {
        if (rel.empty() || rel.front() == '/') return rel;
        return base_dir + rel;
    }

    std::string base_dir;

    bool has(const std::string& key) const { return values.count(key) != 0; }
    std::string get(const std::string& key, const std::string& dflt = "") const {
        auto it = values.find(key);
        return it == values.end() ? dflt : it->second;
    }
    long long get_int(const std::string& key, long long dflt) const {
        auto it = values.find(key);
        return it == values.end() ? dflt : std::stoll(it->second);
    }
    double get_double(const std::string& key, double dflt) const {
        auto it = values.find(key);
        return it == values.end() ? dflt : std::stod(it->second);
    }
};

inline std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == ',' || c == ' ' || c == '\t') {
            if (!cur.empty()) out.push_back(cur);
            cur.clear();
        } else cur.push_back(c);
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

// FNV-1a over the canonical config text; used to tie checkpoints to the
// configuration that produced them.
inline std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

struct ExperimentConfig {
    ConfigFile file;

    // family or explicit group input
    std::optional<FamilyDescriptor> family;
    std::string group_file;
    std::string galois_model = "cyclotomic";  // or "trivial"

    std::string counting_type = "discriminant";  // discriminant | index | constant | custom
    std::string counting_file;

    std::set<long long> bad_primes;
    std::vector<long long> schedule;
    LocalConditions conditions;

    long long sha1 = 1, sha2 = 1;
    std::optional<long long> gF, gStarF;

    long long truncation = 1000000;
    double tolerance = 1e-5;
    long long h1_budget = 10000;

    double slope_tol = 0.05;
    double ratio_tol = 0.05;
    double spread_tol = 0.2;
    std::optional<long long> force_b;  // negative-control override

    std::string out_dir = "out";
    std::string name = "experiment";

    std::uint64_t config_hash() const { return fnv1a(file.raw); }

    static ExperimentConfig from(const ConfigFile& cf) {
        ExperimentConfig ec;
        ec.file = cf;
        std::string kind = cf.get("family.kind");
        if (!kind.empty()) {
            if (kind == "mu") ec.family = FamilyDescriptor::mu(static_cast<int>(cf.get_int("family.m", 2)));
            else if (kind == "cyclic")
                ec.family = FamilyDescriptor::cyclic(static_cast<int>(cf.get_int("family.m", 2)));
            else if (kind == "product") {
                std::vector<int> fs;
                for (auto& t : split_list(cf.get("family.factors")))
                    fs.push_back(static_cast<int>(std::stoll(t)));
                if (fs.empty()) throw config_error("product family needs factors");
                ec.family = FamilyDescriptor::product(fs);
            } else throw config_error("unknown family kind: " + kind);
        }
        ec.group_file = cf.get("group.file").empty() ? "" : cf.resolve(cf.get("group.file"));
        ec.galois_model = cf.get("group.galois", "cyclotomic");
        if (!ec.family && ec.group_file.empty())
            throw config_error("config needs a [family] or a [group] section");

        ec.counting_type = cf.get("counting.type", "discriminant");
        ec.counting_file =
            cf.get("counting.file").empty() ? "" : cf.resolve(cf.get("counting.file"));
        if (ec.counting_type == "custom" && ec.counting_file.empty())
            throw config_error("custom counting function needs counting.file");

        for (auto& t : split_list(cf.get("height.bad"))) ec.bad_primes.insert(std::stoll(t));
        if (ec.family)
            for (int f : ec.family->factors)
                for (long long p = 2; p <= f; ++p)
                    if (f % p == 0 && is_prime(p)) ec.bad_primes.insert(p);

        for (auto& t : split_list(cf.get("schedule.bounds"))) {
            double v = std::stod(t);
            ec.schedule.push_back(static_cast<long long>(v));
        }
        for (std::size_t i = 1; i < ec.schedule.size(); ++i)
            if (ec.schedule[i] <= ec.schedule[i - 1])
                throw config_error("schedule must be strictly increasing");

        for (auto& [key, val] : cf.values) {
            if (key.rfind("conditions.p", 0) != 0) continue;
            long long p = std::stoll(key.substr(std::string("conditions.p").size()));
            std::set<int> pts;
            for (auto& t : split_list(val)) pts.insert(static_cast<int>(std::stoll(t)));
            ec.conditions.allowed[p] = pts;
        }

        ec.sha1 = cf.get_int("arithmetic.sha1", 1);
        ec.sha2 = cf.get_int("arithmetic.sha2", 1);
        if (cf.has("arithmetic.gF")) ec.gF = cf.get_int("arithmetic.gF", 1);
        if (cf.has("arithmetic.gStarF")) ec.gStarF = cf.get_int("arithmetic.gStarF", 1);
        if (ec.sha1 <= 0 || ec.sha2 <= 0) throw config_error("arithmetic inputs must be positive");

        ec.truncation = cf.get_int("analytic.truncation", 1000000);
        ec.tolerance = cf.get_double("analytic.tolerance", 1e-5);
        ec.h1_budget = cf.get_int("analytic.h1_budget", 10000);

        ec.slope_tol = cf.get_double("verify.slope_tol", 0.05);
        ec.ratio_tol = cf.get_double("verify.ratio_tol", 0.05);
        ec.spread_tol = cf.get_double("verify.spread_tol", 0.2);
        if (cf.has("verify.force_b")) ec.force_b = cf.get_int("verify.force_b", 1);

        ec.out_dir = cf.get("output.dir", "out");
        ec.name = cf.get("output.name", "experiment");
        return ec;
    }

    ArithmeticInputs arithmetic() const {
        ArithmeticInputs in;
        if (family) in = ArithmeticInputs::defaults_for(*family);
        in.sha1 = sha1;
        in.sha2 = sha2;
        if (gF) { in.gF = *gF; in.source = "user-supplied"; }
        if (gStarF) { in.gStarF = *gStarF; in.source = "user-supplied"; }
        return in;
    }
};

} // namespace torsorcount
