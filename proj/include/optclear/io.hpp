#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "optclear/generators.hpp"
#include "optclear/market.hpp"

namespace optclear {

/// Parse/validation failure carrying the 1-based line number.
class ParseError : public std::runtime_error {
public:
    ParseError(int line, const std::string& msg)
        : std::runtime_error("line " + std::to_string(line) + ": " + msg), line_(line) {}
    int line() const { return line_; }

private:
    int line_ = 0;
};

/// Order file: header `id,side,kind,legs,strike,price,qty`; legs are
/// semicolon-joined TICKER:weight pairs. Contracts are normalized on load
/// and the market is validated; violations are fatal with line numbers.
MarketInstance parse_orders_text(std::string_view text);
MarketInstance parse_orders(const std::string& path);
std::string serialize_orders(const MarketInstance& m);

/// Chain file: header `ticker,kind,strike,bid,ask`. Crossed rows are
/// rejected; duplicate (ticker,kind,strike) rows keep the last one, with a
/// warning on stderr.
std::vector<ChainQuote> parse_chain_text(std::string_view text);
std::vector<ChainQuote> parse_chain(const std::string& path);
std::string serialize_chain(const std::vector<ChainQuote>& chain);

/// Clearing outcome in reportable form; serializes losslessly to JSON.
struct MatchReport {
    std::string market_id;
    std::string mechanism;  // "standard" or "combinatorial"
    std::string status;
    double objective = 0.0;
    double offset_L = 0.0;
    std::vector<std::pair<std::string, double>> fills;  // order id -> fraction
    long iterations = 0;
    std::size_t constraint_count = 0;
    double wall_ms = 0.0;
    std::optional<double> implied_rate;
};

/// When `year_fraction` is given and the match has L < 0 with a positive
/// cash outlay, the report carries the implied interest rate.
MatchReport make_report(const MarketInstance& m, const MatchResult& r, std::string market_id,
                        std::string mechanism, double wall_ms,
                        std::optional<double> year_fraction = std::nullopt);

std::string report_to_json(const MatchReport& r);
MatchReport report_from_json(std::string_view text);

/// Shortest decimal text that parses back to exactly the same double.
std::string format_number(double v);

}  // namespace optclear
