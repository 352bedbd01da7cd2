#include "optclear/generators.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace optclear {

namespace {

std::string contract_key(const OptionContract& c, Side side) {
    std::ostringstream os;
    os << to_string(side) << '|' << to_string(c.kind) << '|' << c.strike;
    for (const auto& [t, w] : c.weights) os << '|' << t << ':' << w;
    return os.str();
}

void check_chain(const ChainQuote& q) {
    if (!(q.strike > 0.0)) throw std::invalid_argument("chain strike must be positive");
    if (q.best_bid < 0.0 || q.best_ask < q.best_bid)
        throw std::invalid_argument("crossed or negative chain quote on " + q.ticker);
}

}  // namespace

ChainCalibrator::ChainCalibrator(std::vector<ChainQuote> chains, ComboMatchOptions opts)
    : chains_(std::move(chains)), opts_(opts) {
    std::vector<Order> orders;
    std::size_t n = 0;
    for (const ChainQuote& q : chains_) {
        check_chain(q);
        OptionContract c{q.kind, {{q.ticker, 1.0}}, q.strike};
        if (q.best_bid > 0.0)
            orders.push_back(Order{"cb" + std::to_string(n), Side::Buy, c, q.best_bid, 1.0});
        if (q.best_ask > 0.0 && std::isfinite(q.best_ask))
            orders.push_back(Order{"ca" + std::to_string(n), Side::Sell, c, q.best_ask, 1.0});
        strikes_[q.ticker].push_back(q.strike);
        ++n;
    }
    for (auto& [t, ks] : strikes_) {
        std::sort(ks.begin(), ks.end());
        ks.erase(std::unique(ks.begin(), ks.end()), ks.end());
    }
    book_ = MarketInstance::from_orders(std::move(orders));
}

const std::vector<double>& ChainCalibrator::strikes(const std::string& ticker) const {
    static const std::vector<double> empty;
    auto it = strikes_.find(ticker);
    return it == strikes_.end() ? empty : it->second;
}

std::optional<double> ChainCalibrator::reference_price(const OptionContract& contract,
                                                       Side side) {
    std::string key = contract_key(contract, side);
    if (auto it = cache_.find(key); it != cache_.end()) return it->second;

    // Extend the book universe with any contract assets the chains never
    // mention, so the quote is still well defined (e.g. an empty chain).
    MarketInstance book = book_;
    std::vector<std::string> assets = book.universe.assets();
    bool extended = false;
    for (const auto& [t, w] : contract.weights)
        if (!book.universe.contains(t)) {
            assets.push_back(t);
            extended = true;
        }
    if (extended) book.universe = AssetUniverse::sorted(std::move(assets));

    std::optional<double> value = side == Side::Buy ? combo_quote_bid(book, contract, opts_)
                                                    : combo_quote_ask(book, contract, opts_);
    if (value && !std::isfinite(*value)) value = std::nullopt;
    cache_.emplace(std::move(key), value);
    return value;
}

std::optional<double> derive_reference_price(const std::vector<ChainQuote>& chains,
                                             const OptionContract& contract, Side side) {
    ChainCalibrator cal(chains);
    return cal.reference_price(contract, side);
}

MarketInstance gen_synthetic_market(ChainCalibrator& calibrator, const GenConfig& cfg) {
    if (cfg.universe.size() < 2)
        throw std::invalid_argument("synthetic generation needs at least two assets");
    if (cfg.eta < 0.0) throw std::invalid_argument("eta must be nonnegative");
    for (const std::string& t : cfg.universe)
        if (calibrator.strikes(t).empty())
            throw std::invalid_argument("no chain strikes for asset " + t);

    // Tradable pairs: the prescriptive set when given, else all U-choose-2 in
    // index order.
    std::vector<std::pair<std::string, std::string>> pairs;
    if (cfg.pair_set) {
        pairs = *cfg.pair_set;
        std::vector<char> covered(cfg.universe.size(), 0);
        for (auto& [x, y] : pairs) {
            auto ix = std::find(cfg.universe.begin(), cfg.universe.end(), x);
            auto iy = std::find(cfg.universe.begin(), cfg.universe.end(), y);
            if (ix == cfg.universe.end() || iy == cfg.universe.end() || x == y)
                throw std::invalid_argument("pair set references assets outside the universe");
            covered[static_cast<std::size_t>(ix - cfg.universe.begin())] = 1;
            covered[static_cast<std::size_t>(iy - cfg.universe.begin())] = 1;
        }
        if (std::find(covered.begin(), covered.end(), 0) != covered.end())
            throw std::invalid_argument("pair set does not cover the declared universe");
    } else {
        for (std::size_t i = 0; i < cfg.universe.size(); ++i)
            for (std::size_t j = i + 1; j < cfg.universe.size(); ++j)
                pairs.emplace_back(cfg.universe[i], cfg.universe[j]);
    }

    Rng rng(cfg.seed);
    // Weight draw: u in [0,18) maps to {1..9, -1..-9}.
    auto draw_weight = [&rng]() {
        std::size_t u = rng.uniform_index(18);
        return u < 9 ? static_cast<long>(u) + 1 : -(static_cast<long>(u) - 8);
    };

    std::vector<Order> orders;
    for (std::size_t n = 0; n < cfg.n_orders; ++n) {
        bool placed = false;
        for (int attempt = 0; attempt < 20 && !placed; ++attempt) {
            const auto& [ti, tj] = pairs[rng.uniform_index(pairs.size())];
            long wi = draw_weight();
            long wj = draw_weight();
            long g = std::gcd(std::abs(wi), std::abs(wj));
            wi /= g;
            wj /= g;
            const auto& ki_set = calibrator.strikes(ti);
            const auto& kj_set = calibrator.strikes(tj);
            double ki = ki_set[rng.uniform_index(ki_set.size())];
            double kj = kj_set[rng.uniform_index(kj_set.size())];
            double K = static_cast<double>(wi) * ki + static_cast<double>(wj) * kj;
            Side side = rng.coin() ? Side::Buy : Side::Sell;
            double zeta = rng.uniform_unit() * cfg.eta;

            OptionContract c = normalize(
                OptionKind::Call,
                {{ti, static_cast<double>(wi)}, {tj, static_cast<double>(wj)}}, K);
            std::optional<double> ref = calibrator.reference_price(c, side);
            if (!ref || !(*ref > kValidationTol)) continue;
            double price = side == Side::Buy ? *ref * (1.0 + zeta) : *ref * (1.0 - zeta);
            if (!(price > 0.0)) continue;
            orders.push_back(
                Order{"o" + std::to_string(n + 1), side, std::move(c), price, 1.0});
            placed = true;
        }
        if (!placed)
            throw std::runtime_error("could not price a synthetic order after 20 attempts");
    }

    MarketInstance m = MarketInstance::from_orders(std::move(orders));
    // Keep the declared universe even when some assets end up unused.
    std::vector<std::string> tickers = m.universe.assets();
    tickers.insert(tickers.end(), cfg.universe.begin(), cfg.universe.end());
    m.universe = AssetUniverse::sorted(std::move(tickers));
    return m;
}

VertexCoverInstance gen_vertex_cover_instance(const HardnessConfig& cfg) {
    const std::size_t V = cfg.vertices.size();
    const std::size_t E = cfg.edges.size();
    if (V == 0) throw std::invalid_argument("graph has no vertices");
    const double gstar = static_cast<double>(E) - cfg.k - cfg.L - 0.5;
    if (!(gstar > 0.0))
        throw std::invalid_argument("construction requires |E| - k - L - 0.5 > 0");
    if (cfg.k < 0) throw std::invalid_argument("cover size k must be nonnegative");
    std::vector<std::vector<char>> adj(V, std::vector<char>(V, 0));
    for (auto& [i, j] : cfg.edges) {
        if (i >= V || j >= V || i == j)
            throw std::invalid_argument("edge endpoints must be distinct declared vertices");
        if (adj[i][j]) throw std::invalid_argument("duplicate edge in graph");
        adj[i][j] = adj[j][i] = 1;
    }

    const double K1 = 10.0 * static_cast<double>(E);
    const double K2 = 100.0 * static_cast<double>(E);

    VertexCoverInstance inst;
    inst.K1 = K1;
    inst.K2 = K2;
    inst.L = cfg.L;
    MarketInstance& m = inst.market;
    m.universe = AssetUniverse(cfg.vertices);

    auto call = [](std::map<std::string, double> w, double K) {
        return OptionContract{OptionKind::Call, std::move(w), K};
    };

    for (std::size_t i = 0; i < V; ++i) {
        const std::string& v = cfg.vertices[i];
        m.buys.push_back(Order{"f_" + v, Side::Buy, call({{v, 2.0 * K1}}, K1), 1.0, 1.0});
        m.sells.push_back(Order{"g1_" + v, Side::Sell, call({{v, K1}}, 0.0), 1.0, 1.0});
        m.sells.push_back(Order{"g2_" + v, Side::Sell, call({{v, K2}}, K2), 1.0, 1.0});
        m.sells.push_back(Order{"g3_" + v, Side::Sell, call({{v, 1.0}}, 0.0), 1.0, 1.0});
    }
    for (auto& [i, j] : cfg.edges) {
        const std::string& a = cfg.vertices[i];
        const std::string& b = cfg.vertices[j];
        std::string tag = a + "_" + b;
        m.buys.push_back(Order{"fe_" + tag, Side::Buy, call({{a, 1.0}, {b, 1.0}}, 0.0), 1.0, 1.0});
        m.sells.push_back(
            Order{"ge_" + tag, Side::Sell, call({{a, 1.0}, {b, 1.0}}, 1.0), 1.0, 1.0});
    }
    // Constant payoff |E| - k - L - 0.5, encoded as a zero-weight put.
    m.sells.push_back(Order{"gstar", Side::Sell,
                            OptionContract{OptionKind::Put, {}, gstar}, 1.0, 1.0});

    inst.gamma.assign(m.num_buys(), 1.0);
    inst.delta.assign(m.num_sells(), 1.0);
    return inst;
}

}  // namespace optclear
