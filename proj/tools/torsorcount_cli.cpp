// Command-line front end: invariants, count, predict, verify, scan, local.
// Exit codes: 0 success / PASS, 1 FAIL, 2 usage or configuration error.

#include <CLI11.hpp>

#include <torsorcount/experiments.hpp>

#include <iostream>

using namespace torsorcount;

namespace {

constexpr const char* kConfigHelp = R"(configuration file (flat key = value with [section] headers)

  [family]     kind = mu | cyclic | product ; m = <int> ; factors = 2,4
  [group]      file = <group text file> ; galois = cyclotomic | trivial
  [counting]   type = discriminant | index | constant | custom ; file = <path>
  [height]     bad = 2, 5       (finite bad places; primes dividing the order
                                 and the infinite place are always included)
  [schedule]   bounds = 1e3, 1e4, 1e5, 1e6
  [conditions] p3 = 0           (allowed residue points at p = 3)
  [arithmetic] sha1 = 1 ; sha2 = 1 ; gF = ... ; gStarF = ...
               (defaults: built-in family values, Sha trivial)
  [analytic]   truncation = 1000000 ; tolerance = 1e-5
  [verify]     slope_tol = 0.05 ; ratio_tol = 0.05 ; spread_tol = 0.2 ;
               force_b = <int>  (negative control: deliberately wrong b)
  [local]      qmax = 50 ; re = 0.8,1.0,1.5,2.0 ; im = 0 ; places_file = <path>
  [output]     dir = out ; name = experiment
)";

int run(int argc, char** argv) {
    CLI::App app{"torsor counting by height over Q: invariants, enumeration, predictions"};
    app.require_subcommand(1);

    std::string config_path;
    long long max_height = 0;
    bool weighted = false;
    bool stream = false;
    std::vector<std::string> condition_args;
    std::vector<long long> residue_places;

    auto add_config = [&](CLI::App* sub) {
        sub->add_option("-c,--config", config_path, kConfigHelp)->required();
    };

    auto* inv = app.add_subcommand("invariants", "star-set orbits, a, b, lambda, breaking-thin scan");
    add_config(inv);
    auto* cnt = app.add_subcommand("count", "count torsors at the scheduled bounds (resumable)");
    add_config(cnt);
    cnt->add_flag("--stream", stream, "emit one CSV row per torsor instead of counting");
    cnt->add_option("--max-height", max_height, "height bound for --stream");
    cnt->add_flag("--weighted", weighted, "append 1/#G(Q) weight columns to --stream rows");
    cnt->add_option("--condition", condition_args,
                    "extra residue condition p=<prime>:<residues>, e.g. --condition p=3:0");
    cnt->add_option("--residues", residue_places, "tame places to report residues at in --stream");
    auto* prd = app.add_subcommand("predict", "Tamagawa constant, omega_H, predicted leading constant");
    add_config(prd);
    auto* ver = app.add_subcommand("verify", "compare finished counts against the prediction");
    add_config(ver);
    auto* scn = app.add_subcommand("scan", "breaking-thin scan report as CSV");
    add_config(scn);
    auto* loc = app.add_subcommand("local", "local Fourier transform and L-factor tables");
    add_config(loc);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        auto ec = ExperimentConfig::from(ConfigFile::parse_file(config_path));
        for (const auto& ca : condition_args) {
            if (ca.rfind("p=", 0) != 0) throw config_error("condition must look like p=3:0,1");
            auto colon = ca.find(':');
            if (colon == std::string::npos) throw config_error("condition must look like p=3:0,1");
            long long p = std::stoll(ca.substr(2, colon - 2));
            std::set<int> pts;
            for (auto& t : split_list(ca.substr(colon + 1)))
                pts.insert(static_cast<int>(std::stoll(t)));
            ec.conditions.allowed[p] = pts;
        }
        if (inv->parsed()) return cmd_invariants(ec, std::cout);
        if (cnt->parsed()) {
            if (stream) {
                if (max_height <= 0) throw config_error("--stream needs --max-height");
                return cmd_count_stream(ec, std::cout, max_height, weighted, residue_places);
            }
            return cmd_count(ec, std::cout);
        }
        if (prd->parsed()) return cmd_predict(ec, std::cout);
        if (ver->parsed()) return cmd_verify(ec, std::cout);
        if (scn->parsed()) return cmd_scan(ec, std::cout);
        if (loc->parsed()) return cmd_local(ec, std::cout);
    } catch (const config_error& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return 2;
    } catch (const capability_error& e) {
        std::cerr << "unsupported: " << e.what() << "\n";
        return 2;
    } catch (const resource_error& e) {
        std::cerr << "resource limit: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}

} // namespace

int main(int argc, char** argv) { return run(argc, argv); }
