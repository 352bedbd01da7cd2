#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "optclear/market.hpp"
#include "support.hpp"

using namespace optclear;
using testsupport::make_order;

TEST_CASE("payoff of a standard call") {
    AssetUniverse u({"SPX"});
    OptionContract c{OptionKind::Call, {{"SPX", 1.0}}, 4500.0};
    CHECK(payoff(c, u, std::vector<double>{4700.0}) == doctest::Approx(200.0));
    CHECK(payoff(c, u, std::vector<double>{4200.0}) == doctest::Approx(0.0));
}

TEST_CASE("payoff at the at-the-money boundary is zero") {
    AssetUniverse u({"A"});
    OptionContract put{OptionKind::Put, {{"A", 1.0}}, 100.0};
    CHECK(payoff(put, u, std::vector<double>{100.0}) == doctest::Approx(0.0));
}

TEST_CASE("payoff of a basket call") {
    AssetUniverse u({"AAPL", "MSFT"});
    OptionContract c{OptionKind::Call, {{"AAPL", 1.0}, {"MSFT", 3.0}}, 300.0};
    // max{250 + 90 - 300, 0}
    CHECK(payoff(c, u, std::vector<double>{250.0, 30.0}) == doctest::Approx(40.0));
}

TEST_CASE("payoff rejects unknown assets and size mismatches") {
    AssetUniverse u({"A"});
    OptionContract c{OptionKind::Call, {{"B", 1.0}}, 10.0};
    CHECK_THROWS_AS(payoff(c, u, std::vector<double>{1.0}), std::invalid_argument);
    OptionContract ok{OptionKind::Call, {{"A", 1.0}}, 10.0};
    CHECK_THROWS_AS(payoff(ok, u, std::vector<double>{1.0, 2.0}), std::invalid_argument);
}

TEST_CASE("zero-weight contracts have constant payoff") {
    AssetUniverse u({"A"});
    OptionContract c{OptionKind::Put, {}, 2.5};
    CHECK(payoff(c, u, std::vector<double>{0.0}) == doctest::Approx(2.5));
    CHECK(payoff(c, u, std::vector<double>{123.0}) == doctest::Approx(2.5));
}

TEST_CASE("normalize flips negative strikes") {
    OptionContract c = normalize(OptionKind::Call, {{"A", -2.0}, {"B", 1.0}}, -50.0);
    CHECK(c.kind == OptionKind::Put);
    CHECK(c.strike == doctest::Approx(50.0));
    CHECK(c.weights.at("A") == doctest::Approx(2.0));
    CHECK(c.weights.at("B") == doctest::Approx(-1.0));
}

TEST_CASE("normalize leaves positive strikes unchanged") {
    OptionContract c = normalize(OptionKind::Call, {{"A", 1.0}}, 100.0);
    CHECK(c.kind == OptionKind::Call);
    CHECK(c.strike == doctest::Approx(100.0));
    CHECK(c.weights.at("A") == doctest::Approx(1.0));
}

TEST_CASE("the spread call equals the mirrored put on a price grid") {
    AssetUniverse u({"AAPL", "MSFT"});
    OptionContract call{OptionKind::Call, {{"MSFT", 1.0}, {"AAPL", -1.0}}, 0.0};
    OptionContract put{OptionKind::Put, {{"AAPL", 1.0}, {"MSFT", -1.0}}, 0.0};
    for (double a = 0.0; a <= 200.0; a += 25.0)
        for (double m = 0.0; m <= 200.0; m += 25.0) {
            std::vector<double> S{a, m};
            CHECK(payoff(call, u, S) == doctest::Approx(payoff(put, u, S)));
        }
}

TEST_CASE("normalize is idempotent and payoff-preserving on random grids") {
    testsupport::Rng rng(7);
    AssetUniverse u({"A", "B", "C"});
    for (int trial = 0; trial < 50; ++trial) {
        std::map<std::string, double> w;
        w["A"] = std::floor(10.0 * (rng.uniform_unit() - 0.5));
        w["B"] = std::floor(10.0 * (rng.uniform_unit() - 0.5));
        w["C"] = std::floor(10.0 * (rng.uniform_unit() - 0.5));
        double K = 200.0 * (rng.uniform_unit() - 0.5);
        OptionKind kind = rng.coin() ? OptionKind::Call : OptionKind::Put;
        OptionContract raw{kind, w, K};
        OptionContract once = normalize(raw);
        OptionContract twice = normalize(once);
        CHECK(once == twice);
        CHECK(once.strike >= 0.0);
        for (int s = 0; s < 10; ++s) {
            std::vector<double> S{300.0 * rng.uniform_unit(), 300.0 * rng.uniform_unit(),
                                  300.0 * rng.uniform_unit()};
            CHECK(payoff(raw, u, S) == doctest::Approx(payoff(once, u, S)).epsilon(1e-12));
        }
    }
}

TEST_CASE("payoff is positively homogeneous of degree 1 in (S, K)") {
    testsupport::Rng rng(11);
    AssetUniverse u({"A", "B"});
    for (int trial = 0; trial < 40; ++trial) {
        OptionContract c{rng.coin() ? OptionKind::Call : OptionKind::Put,
                         {{"A", std::floor(8.0 * rng.uniform_unit()) - 4.0},
                          {"B", std::floor(8.0 * rng.uniform_unit()) - 4.0}},
                         100.0 * rng.uniform_unit()};
        std::vector<double> S{150.0 * rng.uniform_unit(), 150.0 * rng.uniform_unit()};
        double base = payoff(c, u, S);
        for (double scale : {0.5, 2.0, 7.25}) {
            OptionContract cs = c;
            cs.strike *= scale;
            std::vector<double> Ss{S[0] * scale, S[1] * scale};
            CHECK(payoff(cs, u, Ss) == doctest::Approx(scale * base).epsilon(1e-12));
        }
    }
}

TEST_CASE("call payoff is convex along lines in S") {
    AssetUniverse u({"A", "B"});
    OptionContract c{OptionKind::Call, {{"A", 2.0}, {"B", -1.0}}, 30.0};
    testsupport::Rng rng(13);
    for (int trial = 0; trial < 40; ++trial) {
        std::vector<double> x{200.0 * rng.uniform_unit(), 200.0 * rng.uniform_unit()};
        std::vector<double> y{200.0 * rng.uniform_unit(), 200.0 * rng.uniform_unit()};
        std::vector<double> mid{(x[0] + y[0]) / 2.0, (x[1] + y[1]) / 2.0};
        double lhs = payoff(c, u, mid);
        double rhs = 0.5 * payoff(c, u, x) + 0.5 * payoff(c, u, y);
        CHECK(lhs <= rhs + 1e-9);
    }
}

TEST_CASE("validate_market accepts the DIS example book") {
    auto violations = validate_market(testsupport::market_dis());
    CHECK(is_valid(violations));
    CHECK(violations.empty());
}

TEST_CASE("validate_market flags bad orders") {
    MarketInstance m = testsupport::market_dis();
    m.buys[0].price = 0.0;
    m.sells[0].contract.weights["GME"] = 1.0;
    auto violations = validate_market(m);
    CHECK_FALSE(is_valid(violations));
    bool price_flagged = false, asset_flagged = false;
    for (const auto& v : violations) {
        if (v.order_id == "b1" && v.message.find("price") != std::string::npos)
            price_flagged = true;
        if (v.order_id == "s1" && v.message.find("unknown asset") != std::string::npos)
            asset_flagged = true;
    }
    CHECK(price_flagged);
    CHECK(asset_flagged);
}

TEST_CASE("validate_market warns on extreme magnitudes") {
    MarketInstance m = MarketInstance::from_orders(
        {make_order("w", Side::Buy, OptionKind::Call, {{"A", 5e9}}, 10.0, 1.0)});
    auto violations = validate_market(m);
    CHECK(is_valid(violations));  // warnings only
    REQUIRE_FALSE(violations.empty());
    CHECK(violations.front().warning);
}

TEST_CASE("duplicate order ids are rejected") {
    MarketInstance m = MarketInstance::from_orders({
        make_order("x", Side::Buy, OptionKind::Call, {{"A", 1.0}}, 10.0, 1.0),
        make_order("x", Side::Sell, OptionKind::Call, {{"A", 1.0}}, 10.0, 2.0),
    });
    CHECK_FALSE(is_valid(validate_market(m)));
}

TEST_CASE("universe inference sorts tickers") {
    MarketInstance m = testsupport::market_combo_gain();
    REQUIRE(m.universe.size() == 2);
    CHECK(m.universe.assets()[0] == "AAPL");
    CHECK(m.universe.assets()[1] == "MSFT");
    CHECK(m.universe.index_of("MSFT").value() == 1);
    CHECK_FALSE(m.universe.index_of("GOOG").has_value());
}

TEST_CASE("net_exchange_payoff nets sold against bought") {
    MarketInstance m = testsupport::market_dis();
    std::vector<double> ones{1.0, 1.0};
    for (double S : {0.0, 110.0, 130.0, 150.0, 400.0}) {
        double net = net_exchange_payoff(m, ones, ones, std::vector<double>{S});
        CHECK(net == doctest::Approx(40.0));  // the DIS match loses exactly 40 everywhere
    }
}
