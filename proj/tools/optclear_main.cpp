#include <array>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "optclear/combo_match.hpp"
#include "optclear/generators.hpp"
#include "optclear/io.hpp"
#include "optclear/market.hpp"
#include "optclear/standard_match.hpp"

namespace {

using namespace optclear;
using Clock = std::chrono::steady_clock;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;       // parse / validation / configuration errors
constexpr int kExitNoConverge = 3;  // solver did not converge

double ms_since(Clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

void write_output(const std::string& text, const std::string& out_path) {
    if (out_path.empty()) {
        std::cout << text;
        if (!text.empty() && text.back() != '\n') std::cout << '\n';
    } else {
        std::ofstream out(out_path, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write " + out_path);
        out << text;
    }
}

std::string fmt6(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

bool all_standard(const MarketInstance& m) {
    std::string_view underlying;
    for (const auto* side : {&m.buys, &m.sells}) {
        for (const Order& o : *side) {
            if (!o.contract.is_standard()) return false;
            if (underlying.empty()) underlying = o.contract.underlying();
            else if (underlying != o.contract.underlying()) return false;
        }
    }
    return true;
}

std::vector<std::string> split_list(const std::string& s, char sep = ',') {
    std::vector<std::string> out;
    std::stringstream ss{s};
    std::string item;
    while (std::getline(ss, item, sep))
        if (!item.empty()) out.push_back(item);
    return out;
}

std::uint64_t effective_seed(std::uint64_t flag_seed) {
    if (const char* env = std::getenv("OPTCLEAR_SEED")) return std::strtoull(env, nullptr, 10);
    return flag_seed;
}

struct MatchFlags {
    bool combinatorial = false;
    bool fix_L_zero = false;
    bool prefer_volume = false;
    double eps = 1e-6;
    long max_iter = 0;
    std::uint64_t seed = 0;  // accepted for report reproducibility; matching is deterministic
    double year_fraction = 0.0;
    std::string out;
};

int run_match(const std::string& path, const MatchFlags& f) {
    MarketInstance m = parse_orders(path);
    auto t0 = Clock::now();
    MatchResult res;
    std::string mechanism;
    if (f.combinatorial || !all_standard(m)) {
        mechanism = "combinatorial";
        ComboMatchOptions opts;
        opts.fix_L_zero = f.fix_L_zero;
        opts.prefer_volume = f.prefer_volume;
        opts.eps = f.eps;
        opts.max_iter = f.max_iter;
        res = match_combinatorial(m, opts);
    } else {
        mechanism = "standard";
        StandardMatchOptions opts;
        opts.fix_L_zero = f.fix_L_zero;
        opts.prefer_volume = f.prefer_volume;
        res = match_standard(m, opts);
    }
    double wall = ms_since(t0);

    std::optional<double> yf;
    if (f.year_fraction > 0.0) yf = f.year_fraction;
    MatchReport rep = make_report(m, res, path, mechanism, wall, yf);
    write_output(report_to_json(rep), f.out);

    std::cerr << "status=" << rep.status << " objective=" << fmt6(rep.objective)
              << " L=" << fmt6(rep.offset_L)
              << (rep.objective > kMatchTol ? " (match found)" : " (no match)");
    if (rep.implied_rate)
        std::cerr << " implied_rate=" << fmt6(*rep.implied_rate * 100.0) << "%";
    std::cerr << "\n";
    return res.status == MatchStatus::Optimal ? kExitOk : kExitNoConverge;
}

OptionContract contract_from_flags(const std::string& kind, const std::string& legs,
                                   double strike) {
    OptionKind k;
    if (kind == "call") k = OptionKind::Call;
    else if (kind == "put") k = OptionKind::Put;
    else throw std::invalid_argument("kind must be call or put");
    std::map<std::string, double> weights;
    for (const std::string& leg : split_list(legs, ';')) {
        auto colon = leg.find(':');
        if (colon == std::string::npos)
            throw std::invalid_argument("leg '" + leg + "' is not TICKER:weight");
        weights[leg.substr(0, colon)] += std::stod(leg.substr(colon + 1));
    }
    return normalize(k, std::move(weights), strike);
}

int run_quote(const std::string& path, const std::string& kind, const std::string& legs,
              double strike, const std::string& out) {
    MarketInstance m = parse_orders(path);
    OptionContract target = contract_from_flags(kind, legs, strike);
    for (const auto& [t, w] : target.weights)
        if (!m.universe.contains(t)) {
            // Quoting against a book that never references the asset:
            // extend the universe so payoffs are well defined.
            std::vector<std::string> assets = m.universe.assets();
            assets.push_back(t);
            m.universe = AssetUniverse::sorted(std::move(assets));
        }

    bool standard = all_standard(m) && target.is_standard() &&
                    (m.num_orders() == 0 ||
                     (m.buys.empty() ? m.sells.front() : m.buys.front())
                             .contract.underlying() == target.underlying());

    double bid = 0.0;
    std::optional<double> ask;
    if (standard) {
        if (match_standard(m).objective > kMatchTol)
            throw std::invalid_argument("market has a match; quotes are undefined");
        bid = quote_bid(m, target);
        double a = quote_ask(m, target);
        if (std::isfinite(a)) ask = a;
    } else {
        MatchResult pre = match_combinatorial(m);
        if (pre.status != MatchStatus::Optimal)
            return kExitNoConverge;
        if (pre.objective > kMatchTol)
            throw std::invalid_argument("market has a match; quotes are undefined");
        auto b = combo_quote_bid(m, target);
        if (!b) return kExitNoConverge;
        bid = *b;
        ask = combo_quote_ask(m, target);
    }

    nlohmann::json j;
    j["kind"] = kind;
    j["legs"] = legs;
    j["strike"] = strike;
    j["bid"] = bid;
    if (ask) j["ask"] = *ask;
    else j["ask"] = nullptr;
    write_output(j.dump(2), out);
    std::cerr << "bid=" << fmt6(bid) << " ask=" << (ask ? fmt6(*ask) : "none") << "\n";
    return kExitOk;
}

int run_frontier(const std::string& path, const std::string& out) {
    MarketInstance m = parse_orders(path);
    if (!all_standard(m))
        throw std::invalid_argument("frontier analysis applies to standard option books");
    if (match_standard(m).objective > kMatchTol)
        throw std::invalid_argument("market has a match; the frontier is undefined");
    auto frontier = compute_frontier(m);

    nlohmann::json j;
    j["frontier"] = frontier;
    j["orders"] = m.num_orders();
    j["fraction"] =
        m.num_orders() == 0 ? 0.0
                            : static_cast<double>(frontier.size()) /
                                  static_cast<double>(m.num_orders());
    write_output(j.dump(2), out);
    std::cerr << "frontier " << frontier.size() << "/" << m.num_orders() << " orders\n";
    return kExitOk;
}

int run_gen(const std::string& chains_path, const std::string& universe_csv, std::size_t orders,
            double eta, std::uint64_t seed, const std::string& pairs_csv,
            const std::string& out) {
    auto chains = parse_chain(chains_path);
    GenConfig cfg;
    cfg.universe = split_list(universe_csv);
    cfg.n_orders = orders;
    cfg.eta = eta;
    cfg.seed = effective_seed(seed);
    if (!pairs_csv.empty()) {
        std::vector<std::pair<std::string, std::string>> ps;
        for (const std::string& p : split_list(pairs_csv)) {
            auto colon = p.find(':');
            if (colon == std::string::npos)
                throw std::invalid_argument("pair '" + p + "' is not A:B");
            ps.emplace_back(p.substr(0, colon), p.substr(colon + 1));
        }
        cfg.pair_set = std::move(ps);
    }
    ChainCalibrator cal(chains);
    MarketInstance m = gen_synthetic_market(cal, cfg);
    write_output(serialize_orders(m), out);
    std::cerr << "generated " << m.num_orders() << " orders over " << m.universe.size()
              << " assets (seed " << cfg.seed << ")\n";
    return kExitOk;
}

HardnessConfig graph_from_spec(const std::string& graph, int k, double L) {
    HardnessConfig cfg;
    cfg.k = k;
    cfg.L = L;
    std::map<std::string, std::size_t> seen;
    for (const std::string& e : split_list(graph)) {
        auto dash = e.find('-');
        if (dash == std::string::npos)
            throw std::invalid_argument("edge '" + e + "' is not A-B");
        std::string a = e.substr(0, dash), b = e.substr(dash + 1);
        for (const std::string& v : {a, b})
            if (!seen.count(v)) {
                seen[v] = cfg.vertices.size();
                cfg.vertices.push_back(v);
            }
        cfg.edges.emplace_back(seen[a], seen[b]);
    }
    return cfg;
}

int run_gen_vc(const std::string& graph, int k, double L, const std::string& out) {
    HardnessConfig cfg = graph_from_spec(graph, k, L);
    VertexCoverInstance inst = gen_vertex_cover_instance(cfg);
    write_output(serialize_orders(inst.market), out);
    std::cerr << "vertex-cover instance: |V|=" << cfg.vertices.size()
              << " |E|=" << cfg.edges.size() << " k=" << k << " K1=" << inst.K1
              << " K2=" << inst.K2 << " M=" << inst.market.num_buys()
              << " N=" << inst.market.num_sells() << "\n";
    return kExitOk;
}

struct CellStats {
    double mean_obj = 0.0, se_obj = 0.0;
    double mean_iter = 0.0, se_iter = 0.0;
    double mean_ms = 0.0, se_ms = 0.0;
    int failures = 0;
};

CellStats aggregate(const std::vector<std::optional<std::array<double, 3>>>& runs) {
    CellStats cs;
    std::vector<std::array<double, 3>> ok;
    for (const auto& r : runs) {
        if (r) ok.push_back(*r);
        else ++cs.failures;
    }
    if (ok.empty()) return cs;
    auto mean_se = [&](int idx, double& mean, double& se) {
        double s = 0.0;
        for (auto& r : ok) s += r[idx];
        mean = s / static_cast<double>(ok.size());
        double v = 0.0;
        for (auto& r : ok) v += (r[idx] - mean) * (r[idx] - mean);
        if (ok.size() > 1)
            se = std::sqrt(v / static_cast<double>(ok.size() - 1)) /
                 std::sqrt(static_cast<double>(ok.size()));
    };
    mean_se(0, cs.mean_obj, cs.se_obj);
    mean_se(1, cs.mean_iter, cs.se_iter);
    mean_se(2, cs.mean_ms, cs.se_ms);
    return cs;
}

struct ExperimentFlags {
    std::string chains;
    std::string sweep = "eta";  // eta | orders | assets
    std::string values;
    std::string universe;
    std::size_t orders = 150;
    double eta = 0.0625;
    int seeds = 40;
    std::uint64_t seed = 1;
    bool with_pairs = false;
    int jobs = 0;
    std::string vc_graph;
    std::string k_values;
    double vc_L = 0.0;
    std::string out;
};

int run_experiment(const ExperimentFlags& f) {
    std::ostringstream table;

    if (!f.vc_graph.empty()) {
        table << "k,violation,z,wall_ms,status\n";
        for (const std::string& ks : split_list(f.k_values)) {
            int k = std::stoi(ks);
            auto t0 = Clock::now();
            try {
                HardnessConfig cfg = graph_from_spec(f.vc_graph, k, f.vc_L);
                VertexCoverInstance inst = gen_vertex_cover_instance(cfg);
                ComboScale sc = combo_scale(inst.market, {});
                auto mip = build_lower_milp(inst.market, inst.gamma, inst.delta, inst.L,
                                            sc.big_M, sc.s_max);
                auto rep = lp::solve_milp(mip, {});
                bool violated = rep.status == lp::SolveStatus::Optimal &&
                                rep.objective > kMatchTol;
                table << k << ',' << (violated ? "yes" : "no") << ','
                      << format_number(rep.objective) << ',' << format_number(ms_since(t0))
                      << ',' << lp::to_string(rep.status) << "\n";
            } catch (const std::exception& e) {
                table << k << ",error,,," << e.what() << "\n";
            }
        }
        write_output(table.str(), f.out);
        return kExitOk;
    }

    auto chains = parse_chain(f.chains);
    std::vector<std::string> universe = split_list(f.universe);
    if (universe.empty()) throw std::invalid_argument("--universe is required");
    std::vector<std::string> values = split_list(f.values);
    if (values.empty()) throw std::invalid_argument("--values is required");
    std::uint64_t base_seed = effective_seed(f.seed);

    struct Task {
        GenConfig cfg;
        std::size_t cell, slot;
    };
    std::vector<Task> tasks;
    for (std::size_t c = 0; c < values.size(); ++c) {
        GenConfig cfg;
        cfg.universe = universe;
        cfg.n_orders = f.orders;
        cfg.eta = f.eta;
        if (f.sweep == "eta") cfg.eta = std::stod(values[c]);
        else if (f.sweep == "orders") cfg.n_orders = static_cast<std::size_t>(std::stoul(values[c]));
        else if (f.sweep == "assets") {
            std::size_t u = std::stoul(values[c]);
            if (u < 2 || u > universe.size())
                throw std::invalid_argument("asset sweep value out of range");
            cfg.universe.assign(universe.begin(), universe.begin() + u);
        } else {
            throw std::invalid_argument("sweep must be eta, orders, or assets");
        }
        if (f.with_pairs) {
            // |P| = U pairs covering the universe: a cycle over the assets.
            std::vector<std::pair<std::string, std::string>> ps;
            for (std::size_t i = 0; i < cfg.universe.size(); ++i)
                ps.emplace_back(cfg.universe[i],
                                cfg.universe[(i + 1) % cfg.universe.size()]);
            cfg.pair_set = std::move(ps);
        }
        for (int s = 0; s < f.seeds; ++s) {
            Task t;
            t.cfg = cfg;
            t.cfg.seed = base_seed + static_cast<std::uint64_t>(s);
            t.cell = c;
            t.slot = static_cast<std::size_t>(s);
            tasks.push_back(std::move(t));
        }
    }

    std::vector<std::vector<std::optional<std::array<double, 3>>>> results(
        values.size(), std::vector<std::optional<std::array<double, 3>>>(
                           static_cast<std::size_t>(f.seeds)));

    std::atomic<std::size_t> next{0};
    int jobs = f.jobs > 0 ? f.jobs
                          : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    auto worker = [&]() {
        while (true) {
            std::size_t i = next.fetch_add(1);
            if (i >= tasks.size()) return;
            const Task& t = tasks[i];
            auto t0 = Clock::now();
            try {
                ChainCalibrator cal(chains);
                MarketInstance m = gen_synthetic_market(cal, t.cfg);
                MatchResult res = match_combinatorial(m);
                if (res.status != MatchStatus::Optimal) {
                    results[t.cell][t.slot] = std::nullopt;
                    continue;
                }
                results[t.cell][t.slot] =
                    std::array<double, 3>{res.objective, static_cast<double>(res.iterations),
                                          ms_since(t0)};
            } catch (const std::exception&) {
                results[t.cell][t.slot] = std::nullopt;
            }
        }
    };
    std::vector<std::thread> pool;
    for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
    for (auto& th : pool) th.join();

    table << "sweep,value,seeds,mean_objective,se_objective,mean_iterations,se_iterations,"
             "mean_wall_ms,se_wall_ms,failures\n";
    for (std::size_t c = 0; c < values.size(); ++c) {
        CellStats cs = aggregate(results[c]);
        table << f.sweep << ',' << values[c] << ',' << f.seeds << ','
              << format_number(cs.mean_obj) << ',' << format_number(cs.se_obj) << ','
              << format_number(cs.mean_iter) << ',' << format_number(cs.se_iter) << ','
              << format_number(cs.mean_ms) << ',' << format_number(cs.se_ms) << ','
              << cs.failures << "\n";
    }
    write_output(table.str(), f.out);
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "optclear: risk-free clearing, quoting and analysis for standard and\n"
        "combinatorial option order books.\n\n"
        "Tolerances: a match is reported when the objective exceeds 1e-6 price\n"
        "units; the combinatorial loop stops when the worst violation is below\n"
        "--eps (default 1e-6); LP solves use a 1e-7 feasibility tolerance.\n"
        "Monetary values in human-readable summaries carry 6 decimal places;\n"
        "file and JSON outputs are full precision."};
    app.require_subcommand(1);

    MatchFlags mf;
    std::string path, out;

    auto* match = app.add_subcommand("match", "Clear an order book (exit 0 even on no-match)");
    match->add_option("orders", path, "order CSV file")->required();
    match->add_flag("--combinatorial", mf.combinatorial,
                    "force the combinatorial mechanism (auto for multi-asset books)");
    match->add_flag("--fix-L-zero", mf.fix_L_zero, "pin the worst-case offset L to 0");
    match->add_flag("--prefer-volume", mf.prefer_volume,
                    "among optimal matches, maximize total fills");
    match->add_option("--eps", mf.eps, "combinatorial convergence tolerance (default 1e-6)");
    match->add_option("--max-iter", mf.max_iter,
                      "iteration cap (default 10*(M+N)+100)");
    match->add_option("--seed", mf.seed, "recorded for reproducibility (matching is deterministic)");
    match->add_option("--year-fraction", mf.year_fraction,
                      "report the implied interest rate for negative-L matches");
    match->add_option("-o,--output", mf.out, "write the JSON report here instead of stdout");

    std::string kind = "call", legs;
    double strike = 0.0;
    auto* quote = app.add_subcommand("quote", "Best bid/ask for a custom contract");
    quote->add_option("orders", path, "order CSV file")->required();
    quote->add_option("--kind", kind, "call or put")->required();
    quote->add_option("--legs", legs, "TICKER:weight[;TICKER:weight...]")->required();
    quote->add_option("--strike", strike, "strike price")->required();
    quote->add_option("-o,--output", out, "write the JSON quote here instead of stdout");

    auto* frontier = app.add_subcommand("frontier", "Frontier set of a standard book");
    frontier->add_option("orders", path, "order CSV file")->required();
    frontier->add_option("-o,--output", out, "write the JSON report here instead of stdout");

    std::string chains, universe_csv, pairs_csv;
    std::size_t n_orders = 150;
    double eta = 0.0625;
    std::uint64_t seed = 1;
    auto* gen = app.add_subcommand("gen", "Generate a synthetic combinatorial market");
    gen->add_option("--chains", chains, "chain CSV used for calibration")->required();
    gen->add_option("--universe", universe_csv, "comma-separated tickers")->required();
    gen->add_option("--orders", n_orders, "number of orders (default 150)");
    gen->add_option("--eta", eta, "price noise level (default 2^-4)");
    gen->add_option("--seed", seed, "RNG seed (env OPTCLEAR_SEED overrides)");
    gen->add_option("--pairs", pairs_csv, "prescriptive pair set, e.g. A:B,B:C");
    gen->add_option("-o,--output", out, "write the order CSV here instead of stdout");

    std::string graph;
    int k = 1;
    double vc_L = 0.0;
    auto* genvc = app.add_subcommand("gen-vc", "Vertex-cover hardness instance");
    genvc->add_option("--graph", graph, "edge list, e.g. A-B,B-C,C-A")->required();
    genvc->add_option("--k", k, "cover size")->required();
    genvc->add_option("--L", vc_L, "offset L (default 0)");
    genvc->add_option("-o,--output", out, "write the order CSV here instead of stdout");

    ExperimentFlags ef;
    auto* exp = app.add_subcommand("experiment", "Sweep synthetic markets and tabulate results");
    exp->add_option("--chains", ef.chains, "chain CSV used for calibration");
    exp->add_option("--sweep", ef.sweep, "eta | orders | assets (default eta)");
    exp->add_option("--values", ef.values, "comma-separated sweep values");
    exp->add_option("--universe", ef.universe, "comma-separated tickers");
    exp->add_option("--orders", ef.orders, "orders per market when not swept");
    exp->add_option("--eta", ef.eta, "noise when not swept (default 2^-4)");
    exp->add_option("--seeds", ef.seeds, "markets per cell (default 40)");
    exp->add_option("--seed", ef.seed, "base seed (env OPTCLEAR_SEED overrides)");
    exp->add_flag("--with-pairs", ef.with_pairs, "restrict to a covering pair set of size U");
    exp->add_option("--jobs", ef.jobs, "worker threads (default: hardware)");
    exp->add_option("--vc-graph", ef.vc_graph, "vertex-cover mode: edge list");
    exp->add_option("--k-values", ef.k_values, "vertex-cover mode: cover sizes to test");
    exp->add_option("--vc-L", ef.vc_L, "vertex-cover mode: offset L");
    exp->add_option("-o,--output", ef.out, "write the CSV table here instead of stdout");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (match->parsed()) return run_match(path, mf);
        if (quote->parsed()) return run_quote(path, kind, legs, strike, out);
        if (frontier->parsed()) return run_frontier(path, out);
        if (gen->parsed())
            return run_gen(chains, universe_csv, n_orders, eta, seed, pairs_csv, out);
        if (genvc->parsed()) return run_gen_vc(graph, k, vc_L, out);
        if (exp->parsed()) return run_experiment(ef);
    } catch (const ParseError& e) {
        std::cerr << "optclear: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::invalid_argument& e) {
        std::cerr << "optclear: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "optclear: " << e.what() << "\n";
        return kExitNoConverge;
    }
    return kExitUsage;
}
