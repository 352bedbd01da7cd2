#include "optclear/market.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

namespace optclear {

std::string_view to_string(OptionKind k) { return k == OptionKind::Call ? "call" : "put"; }
std::string_view to_string(Side s) { return s == Side::Buy ? "buy" : "sell"; }

std::string_view to_string(MatchStatus s) {
    switch (s) {
        case MatchStatus::Optimal: return "optimal";
        case MatchStatus::Unconverged: return "unconverged";
        case MatchStatus::Stalled: return "stalled";
    }
    return "unknown";
}

AssetUniverse::AssetUniverse(std::vector<std::string> tickers) : assets_(std::move(tickers)) {
    for (std::size_t i = 0; i < assets_.size(); ++i) {
        if (assets_[i].empty()) throw std::invalid_argument("empty asset identifier");
        if (!index_.emplace(assets_[i], i).second)
            throw std::invalid_argument("duplicate asset identifier: " + assets_[i]);
    }
}

AssetUniverse AssetUniverse::sorted(std::vector<std::string> tickers) {
    std::sort(tickers.begin(), tickers.end());
    tickers.erase(std::unique(tickers.begin(), tickers.end()), tickers.end());
    return AssetUniverse(std::move(tickers));
}

std::optional<std::size_t> AssetUniverse::index_of(std::string_view ticker) const {
    auto it = index_.find(ticker);
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

bool OptionContract::is_standard() const {
    return weights.size() == 1 && std::abs(weights.begin()->second - 1.0) <= kValidationTol;
}

std::string_view OptionContract::underlying() const {
    if (!is_standard()) throw std::logic_error("underlying() on a non-standard contract");
    return weights.begin()->first;
}

OptionContract normalize(OptionKind kind, std::map<std::string, double> weights, double strike) {
    OptionContract c{kind, std::move(weights), strike};
    if (c.strike < 0.0) {
        c.kind = (c.kind == OptionKind::Call) ? OptionKind::Put : OptionKind::Call;
        c.strike = -c.strike;
        for (auto& [ticker, w] : c.weights) w = -w;
    }
    // Drop exact-zero weights so equal payoffs compare equal.
    std::erase_if(c.weights, [](const auto& kv) { return kv.second == 0.0; });
    return c;
}

OptionContract normalize(const OptionContract& c) { return normalize(c.kind, c.weights, c.strike); }

MarketInstance MarketInstance::from_orders(std::vector<Order> orders) {
    std::vector<std::string> tickers;
    for (const Order& o : orders)
        for (const auto& [ticker, w] : o.contract.weights) tickers.push_back(ticker);
    MarketInstance m;
    m.universe = AssetUniverse::sorted(std::move(tickers));
    for (Order& o : orders)
        (o.side == Side::Buy ? m.buys : m.sells).push_back(std::move(o));
    return m;
}

std::vector<double> dense_weights(const OptionContract& c, const AssetUniverse& u) {
    std::vector<double> w(u.size(), 0.0);
    for (const auto& [ticker, weight] : c.weights) {
        auto idx = u.index_of(ticker);
        if (!idx) throw std::invalid_argument("unknown asset: " + ticker);
        w[*idx] = weight;
    }
    return w;
}

double payoff(const OptionContract& c, const AssetUniverse& u, std::span<const double> prices) {
    if (prices.size() != u.size())
        throw std::invalid_argument("price vector size does not match universe");
    double acc = -c.strike;
    for (const auto& [ticker, weight] : c.weights) {
        auto idx = u.index_of(ticker);
        if (!idx) throw std::invalid_argument("unknown asset: " + ticker);
        acc += weight * prices[*idx];
    }
    return std::max(kind_sign(c.kind) * acc, 0.0);
}

double payoff(const OptionContract& c, const AssetUniverse& u, const PriceVector& prices) {
    return payoff(c, u, std::span<const double>(prices.values));
}

double net_exchange_payoff(const MarketInstance& m, std::span<const double> gamma,
                           std::span<const double> delta, std::span<const double> prices) {
    if (gamma.size() != m.buys.size() || delta.size() != m.sells.size())
        throw std::invalid_argument("fill vector size mismatch");
    double net = 0.0;
    for (std::size_t i = 0; i < m.buys.size(); ++i)
        net += gamma[i] * m.buys[i].quantity * payoff(m.buys[i].contract, m.universe, prices);
    for (std::size_t i = 0; i < m.sells.size(); ++i)
        net -= delta[i] * m.sells[i].quantity * payoff(m.sells[i].contract, m.universe, prices);
    return net;
}

std::vector<Violation> validate_market(const MarketInstance& m) {
    std::vector<Violation> out;
    std::set<std::string> seen_ids;

    auto check_order = [&](const Order& o, Side expected) {
        if (o.id.empty()) out.push_back({o.id, "empty order id"});
        else if (!seen_ids.insert(o.id).second) out.push_back({o.id, "duplicate order id"});
        if (o.side != expected) out.push_back({o.id, "order listed on the wrong side"});
        if (!(o.price > 0.0) || !std::isfinite(o.price))
            out.push_back({o.id, "nonpositive price"});
        if (!(o.quantity > 0.0) || !std::isfinite(o.quantity))
            out.push_back({o.id, "nonpositive quantity"});
        if (o.contract.strike < -kValidationTol || !std::isfinite(o.contract.strike))
            out.push_back({o.id, "negative strike (normalize first)"});
        if (std::abs(o.contract.strike) > kMagnitudeWarnLimit)
            out.push_back({o.id, "strike magnitude exceeds 1e9", true});
        for (const auto& [ticker, w] : o.contract.weights) {
            if (!m.universe.contains(ticker))
                out.push_back({o.id, "unknown asset: " + ticker});
            if (!std::isfinite(w)) out.push_back({o.id, "non-finite weight on " + ticker});
            else if (std::abs(w) > kMagnitudeWarnLimit)
                out.push_back({o.id, "weight magnitude exceeds 1e9 on " + ticker, true});
        }
    };

    if (m.universe.size() < 1 && m.num_orders() > 0)
        out.push_back({"", "empty asset universe"});
    for (const Order& o : m.buys) check_order(o, Side::Buy);
    for (const Order& o : m.sells) check_order(o, Side::Sell);
    return out;
}

bool is_valid(const std::vector<Violation>& violations) {
    return std::none_of(violations.begin(), violations.end(),
                        [](const Violation& v) { return !v.warning; });
}

}  // namespace optclear
