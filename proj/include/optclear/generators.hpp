#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "optclear/combo_match.hpp"
#include "optclear/market.hpp"

namespace optclear {

/// Best quotes for one standard option series, the calibration input for
/// synthetic order generation.
struct ChainQuote {
    std::string ticker;
    OptionKind kind = OptionKind::Call;
    double strike = 0.0;
    double best_bid = 0.0;
    double best_ask = 0.0;
};

struct GenConfig {
    std::vector<std::string> universe;
    std::size_t n_orders = 0;
    double eta = 0.0;          // price noise level; zeta ~ Uniform[0, eta]
    std::uint64_t seed = 0;
    /// Optional prescriptive pair set; when given its pairs must cover the
    /// declared universe.
    std::optional<std::vector<std::pair<std::string, std::string>>> pair_set;
};

struct HardnessConfig {
    std::vector<std::string> vertices;
    std::vector<std::pair<std::size_t, std::size_t>> edges;  // vertex indices
    int k = 0;      // cover size being decided
    double L = 0.0; // offset the decision is taken against
};

/// Deterministic random stream used by the generators. The stream is pinned
/// so markets are reproducible from the seed alone: mt19937_64 seeded
/// directly, integers in [0,n) by modulo, unit doubles from the top 53 bits,
/// coins from the low bit. No std::*_distribution (those vary by platform).
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }
    std::size_t uniform_index(std::size_t n) { return static_cast<std::size_t>(next() % n); }
    double uniform_unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
    bool coin() { return (next() & 1u) != 0; }

private:
    std::mt19937_64 engine_;
};

/// Reference-price engine over a chain book: prices a contract as the value
/// of the best dominated (bid side) or dominating (ask side) portfolio of
/// standard options, via the combinatorial matcher. Quotes are memoized per
/// (contract, side).
class ChainCalibrator {
public:
    explicit ChainCalibrator(std::vector<ChainQuote> chains, ComboMatchOptions opts = {});

    const MarketInstance& book() const { return book_; }
    const std::vector<ChainQuote>& chains() const { return chains_; }

    /// Strikes offered for `ticker`, ascending. Empty when unknown.
    const std::vector<double>& strikes(const std::string& ticker) const;

    /// nullopt when no finite reference price exists; callers resample.
    std::optional<double> reference_price(const OptionContract& contract, Side side);

private:
    std::vector<ChainQuote> chains_;
    MarketInstance book_;
    ComboMatchOptions opts_;
    std::map<std::string, std::vector<double>> strikes_;
    std::map<std::string, std::optional<double>> cache_;
};

/// One-shot form of ChainCalibrator::reference_price.
std::optional<double> derive_reference_price(const std::vector<ChainQuote>& chains,
                                             const OptionContract& contract, Side side);

/// Generates a synthetic two-underlying combinatorial market calibrated from
/// standard chains. Per order the draws are, in order: asset pair, the two
/// weights from {+-1..+-9} (reduced to relatively prime), one strike per leg
/// from that asset's chain, the side, and the price noise. Orders whose
/// reference price is unusable are redrawn, up to 20 attempts each.
MarketInstance gen_synthetic_market(ChainCalibrator& calibrator, const GenConfig& cfg);

struct VertexCoverInstance {
    MarketInstance market;
    std::vector<double> gamma;  // all ones
    std::vector<double> delta;  // all ones
    double K1 = 0.0;
    double K2 = 0.0;
    double L = 0.0;
};

/// Hardness instance from a vertex-cover decision problem: four options per
/// vertex, two per edge, and one constant-payoff sell order. With gamma =
/// delta = 1, a price vector violating the dominance constraint by 0.5
/// exists exactly when the graph has a vertex cover of size k.
VertexCoverInstance gen_vertex_cover_instance(const HardnessConfig& cfg);

}  // namespace optclear
