#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace optclear {

/// Absolute tolerance used by data validation (not by the solvers).
inline constexpr double kValidationTol = 1e-9;

/// Objective values above this count as "a match exists" (price units).
inline constexpr double kMatchTol = 1e-6;

/// Weight/strike magnitudes above this are flagged as validation warnings.
inline constexpr double kMagnitudeWarnLimit = 1e9;

enum class OptionKind { Call, Put };
enum class Side { Buy, Sell };

/// +1 for calls, -1 for puts.
inline double kind_sign(OptionKind k) { return k == OptionKind::Call ? 1.0 : -1.0; }

std::string_view to_string(OptionKind k);
std::string_view to_string(Side s);

/// Ordered set of underlying asset identifiers. Weight vectors and price
/// vectors index into this ordering, which is fixed for the life of a market.
class AssetUniverse {
public:
    AssetUniverse() = default;

    /// Keeps the given order. Throws std::invalid_argument on duplicates or
    /// empty identifiers.
    explicit AssetUniverse(std::vector<std::string> tickers);

    /// Builds a universe in lexicographic ticker order.
    static AssetUniverse sorted(std::vector<std::string> tickers);

    const std::vector<std::string>& assets() const { return assets_; }
    std::size_t size() const { return assets_.size(); }

    std::optional<std::size_t> index_of(std::string_view ticker) const;
    bool contains(std::string_view ticker) const { return index_of(ticker).has_value(); }

private:
    std::vector<std::string> assets_;
    std::map<std::string, std::size_t, std::less<>> index_;
};

/// An option on a linear combination of underlyings: pays
/// max{chi * (w'S - K), 0} at expiration. A standard option is the
/// special case of a single weight equal to 1. Weights are stored sparse;
/// an empty weight map encodes a constant-payoff contract.
struct OptionContract {
    OptionKind kind = OptionKind::Call;
    std::map<std::string, double> weights;
    double strike = 0.0;

    bool is_standard() const;
    /// The single underlying of a standard option.
    std::string_view underlying() const;

    bool operator==(const OptionContract&) const = default;
};

/// Flips representation so the strike is nonnegative: a negative-strike
/// contract becomes the opposite kind with negated weights and strike.
/// Idempotent and payoff-preserving.
OptionContract normalize(OptionKind kind, std::map<std::string, double> weights, double strike);
OptionContract normalize(const OptionContract& c);

/// A resting limit order. Prices are per unit of quantity.
struct Order {
    std::string id;
    Side side = Side::Buy;
    OptionContract contract;
    double price = 0.0;
    double quantity = 1.0;
};

/// Dense vector of nonnegative asset values, indexed by the universe order.
struct PriceVector {
    std::vector<double> values;

    double operator[](std::size_t i) const { return values[i]; }
    std::size_t size() const { return values.size(); }
};

/// All open orders over a declared asset universe, split by side.
struct MarketInstance {
    AssetUniverse universe;
    std::vector<Order> buys;
    std::vector<Order> sells;

    std::size_t num_buys() const { return buys.size(); }
    std::size_t num_sells() const { return sells.size(); }
    std::size_t num_orders() const { return buys.size() + sells.size(); }

    /// Builds a market from a flat order list; the universe is inferred from
    /// the contracts' weight keys in lexicographic order.
    static MarketInstance from_orders(std::vector<Order> orders);
};

/// Realized payoffs of every order at one price point; one row of the
/// generated constraint set. Entries are quantity-scaled.
struct ConstraintRecord {
    std::vector<double> price_point;
    std::vector<double> f;   // buy-side payoffs
    std::vector<double> g;   // sell-side payoffs
};

enum class MatchStatus { Optimal, Unconverged, Stalled };

std::string_view to_string(MatchStatus s);

/// Outcome of a clearing run: fill fractions, the worst-case offset L, and
/// solver diagnostics.
struct MatchResult {
    std::vector<double> gamma;   // per buy order, in [0,1]
    std::vector<double> delta;   // per sell order, in [0,1]
    double offset_L = 0.0;
    double objective = 0.0;
    long iterations = 0;
    std::vector<ConstraintRecord> constraints;
    MatchStatus status = MatchStatus::Optimal;
};

/// Weight vector of `c` densified over `u`. Throws std::invalid_argument on
/// a weight key absent from the universe.
std::vector<double> dense_weights(const OptionContract& c, const AssetUniverse& u);

/// max{chi * (w'S - K), 0}. Throws std::invalid_argument on unknown keys or
/// a size mismatch between S and the universe.
double payoff(const OptionContract& c, const AssetUniverse& u, std::span<const double> prices);
double payoff(const OptionContract& c, const AssetUniverse& u, const PriceVector& prices);

/// Exchange's net liability at a price point for given fills: the
/// quantity-scaled payoff of options sold minus options bought.
double net_exchange_payoff(const MarketInstance& m, std::span<const double> gamma,
                           std::span<const double> delta, std::span<const double> prices);

/// One validation finding; warnings do not make a market invalid.
struct Violation {
    std::string order_id;   // empty when the market itself is at fault
    std::string message;
    bool warning = false;
};

/// Checks every type invariant (positive prices and quantities, nonnegative
/// strikes, known assets, unique ids). Violations are data, not exceptions.
std::vector<Violation> validate_market(const MarketInstance& m);

/// True when no non-warning violation is present.
bool is_valid(const std::vector<Violation>& violations);

}  // namespace optclear
