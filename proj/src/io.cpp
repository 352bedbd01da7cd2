#include "optclear/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include <json.hpp>

namespace optclear {

namespace {

std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        std::size_t pos = s.find(sep, start);
        if (pos == std::string_view::npos) {
            out.push_back(s.substr(start));
            return out;
        }
        out.push_back(s.substr(start, pos - start));
        start = pos + 1;
    }
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r'))
        s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
        s.remove_suffix(1);
    return s;
}

double parse_number(std::string_view s, int line, const std::string& what) {
    s = trim(s);
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size())
        throw ParseError(line, "bad " + what + ": '" + std::string(s) + "'");
    return v;
}

OptionKind parse_kind(std::string_view s, int line) {
    s = trim(s);
    if (s == "call") return OptionKind::Call;
    if (s == "put") return OptionKind::Put;
    throw ParseError(line, "kind must be call or put, got '" + std::string(s) + "'");
}

Side parse_side(std::string_view s, int line) {
    s = trim(s);
    if (s == "buy") return Side::Buy;
    if (s == "sell") return Side::Sell;
    throw ParseError(line, "side must be buy or sell, got '" + std::string(s) + "'");
}

std::map<std::string, double> parse_legs(std::string_view s, int line) {
    std::map<std::string, double> weights;
    s = trim(s);
    if (s.empty()) return weights;  // constant-payoff contract
    for (std::string_view leg : split(s, ';')) {
        leg = trim(leg);
        auto colon = leg.find(':');
        if (colon == std::string_view::npos)
            throw ParseError(line, "leg '" + std::string(leg) + "' is not TICKER:weight");
        std::string ticker{trim(leg.substr(0, colon))};
        if (ticker.empty()) throw ParseError(line, "empty ticker in legs");
        double w = parse_number(leg.substr(colon + 1), line, "leg weight");
        weights[ticker] += w;  // repeated tickers accumulate
    }
    return weights;
}

std::vector<std::string> non_empty_lines(std::string_view text, std::vector<int>& line_no) {
    std::vector<std::string> lines;
    int n = 0;
    for (std::string_view raw : split(text, '\n')) {
        ++n;
        std::string_view t = trim(raw);
        if (t.empty()) continue;
        lines.emplace_back(t);
        line_no.push_back(n);
    }
    return lines;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

constexpr std::string_view kOrderHeader = "id,side,kind,legs,strike,price,qty";
constexpr std::string_view kChainHeader = "ticker,kind,strike,bid,ask";

}  // namespace

std::string format_number(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;
    return std::string(buf, ptr);
}

MarketInstance parse_orders_text(std::string_view text) {
    std::vector<int> line_no;
    std::vector<std::string> lines = non_empty_lines(text, line_no);
    if (lines.empty()) throw ParseError(1, "missing header");
    if (trim(lines[0]) != kOrderHeader)
        throw ParseError(line_no[0], "expected header '" + std::string(kOrderHeader) + "'");

    std::vector<Order> orders;
    std::map<std::string, int> id_line;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        int ln = line_no[i];
        auto cols = split(lines[i], ',');
        if (cols.size() != 7)
            throw ParseError(ln, "expected 7 columns, got " + std::to_string(cols.size()));
        Order o;
        o.id = std::string(trim(cols[0]));
        if (o.id.empty()) throw ParseError(ln, "empty order id");
        o.side = parse_side(cols[1], ln);
        OptionKind kind = parse_kind(cols[2], ln);
        auto weights = parse_legs(cols[3], ln);
        double strike = parse_number(cols[4], ln, "strike");
        o.contract = normalize(kind, std::move(weights), strike);
        o.price = parse_number(cols[5], ln, "price");
        o.quantity = parse_number(cols[6], ln, "qty");
        id_line[o.id] = ln;
        orders.push_back(std::move(o));
    }

    MarketInstance m = MarketInstance::from_orders(std::move(orders));
    auto violations = validate_market(m);
    for (const Violation& v : violations) {
        if (v.warning) {
            std::cerr << "optclear: warning: order " << v.order_id << ": " << v.message << "\n";
            continue;
        }
        int ln = id_line.count(v.order_id) ? id_line[v.order_id] : line_no[0];
        throw ParseError(ln, "order " + v.order_id + ": " + v.message);
    }
    return m;
}

MarketInstance parse_orders(const std::string& path) { return parse_orders_text(read_file(path)); }

std::string serialize_orders(const MarketInstance& m) {
    std::ostringstream os;
    os << kOrderHeader << "\n";
    auto emit = [&os](const Order& o) {
        os << o.id << ',' << to_string(o.side) << ',' << to_string(o.contract.kind) << ',';
        bool first = true;
        for (const auto& [t, w] : o.contract.weights) {
            if (!first) os << ';';
            os << t << ':' << format_number(w);
            first = false;
        }
        os << ',' << format_number(o.contract.strike) << ',' << format_number(o.price) << ','
           << format_number(o.quantity) << "\n";
    };
    for (const Order& o : m.buys) emit(o);
    for (const Order& o : m.sells) emit(o);
    return os.str();
}

std::vector<ChainQuote> parse_chain_text(std::string_view text) {
    std::vector<int> line_no;
    std::vector<std::string> lines = non_empty_lines(text, line_no);
    if (lines.empty()) throw ParseError(1, "missing header");
    if (trim(lines[0]) != kChainHeader)
        throw ParseError(line_no[0], "expected header '" + std::string(kChainHeader) + "'");

    std::vector<ChainQuote> out;
    std::map<std::string, std::size_t> last;  // (ticker|kind|strike) -> index
    for (std::size_t i = 1; i < lines.size(); ++i) {
        int ln = line_no[i];
        auto cols = split(lines[i], ',');
        if (cols.size() != 5)
            throw ParseError(ln, "expected 5 columns, got " + std::to_string(cols.size()));
        ChainQuote q;
        q.ticker = std::string(trim(cols[0]));
        if (q.ticker.empty()) throw ParseError(ln, "empty ticker");
        q.kind = parse_kind(cols[1], ln);
        q.strike = parse_number(cols[2], ln, "strike");
        q.best_bid = parse_number(cols[3], ln, "bid");
        q.best_ask = parse_number(cols[4], ln, "ask");
        if (!(q.strike > 0.0)) throw ParseError(ln, "strike must be positive");
        if (q.best_bid < 0.0) throw ParseError(ln, "negative bid");
        if (q.best_bid > q.best_ask)
            throw ParseError(ln, "crossed quote: bid exceeds ask");

        std::string key = q.ticker + '|' + std::string(to_string(q.kind)) + '|' +
                          format_number(q.strike);
        if (auto it = last.find(key); it != last.end()) {
            std::cerr << "optclear: warning: line " << ln << ": duplicate series " << key
                      << ", keeping the last row\n";
            out[it->second] = q;
        } else {
            last.emplace(std::move(key), out.size());
            out.push_back(std::move(q));
        }
    }
    return out;
}

std::vector<ChainQuote> parse_chain(const std::string& path) {
    return parse_chain_text(read_file(path));
}

std::string serialize_chain(const std::vector<ChainQuote>& chain) {
    std::ostringstream os;
    os << kChainHeader << "\n";
    for (const ChainQuote& q : chain)
        os << q.ticker << ',' << to_string(q.kind) << ',' << format_number(q.strike) << ','
           << format_number(q.best_bid) << ',' << format_number(q.best_ask) << "\n";
    return os.str();
}

MatchReport make_report(const MarketInstance& m, const MatchResult& r, std::string market_id,
                        std::string mechanism, double wall_ms,
                        std::optional<double> year_fraction) {
    MatchReport rep;
    rep.market_id = std::move(market_id);
    rep.mechanism = std::move(mechanism);
    rep.status = std::string(to_string(r.status));
    rep.objective = r.objective;
    rep.offset_L = r.offset_L;
    for (std::size_t i = 0; i < m.num_buys(); ++i)
        rep.fills.emplace_back(m.buys[i].id, r.gamma[i]);
    for (std::size_t i = 0; i < m.num_sells(); ++i)
        rep.fills.emplace_back(m.sells[i].id, r.delta[i]);
    rep.iterations = r.iterations;
    rep.constraint_count = r.constraints.size();
    rep.wall_ms = wall_ms;
    if (year_fraction && r.offset_L < 0.0) {
        double outlay = 0.0;
        for (std::size_t i = 0; i < m.num_sells(); ++i)
            outlay += m.sells[i].price * m.sells[i].quantity * r.delta[i];
        for (std::size_t i = 0; i < m.num_buys(); ++i)
            outlay -= m.buys[i].price * m.buys[i].quantity * r.gamma[i];
        if (outlay > 0.0)
            rep.implied_rate = std::log(-r.offset_L / outlay) / *year_fraction;
    }
    return rep;
}

std::string report_to_json(const MatchReport& r) {
    nlohmann::json j;
    j["market_id"] = r.market_id;
    j["mechanism"] = r.mechanism;
    j["status"] = r.status;
    j["objective"] = r.objective;
    j["L"] = r.offset_L;
    nlohmann::json fills = nlohmann::json::array();
    for (const auto& [id, frac] : r.fills) fills.push_back({{"id", id}, {"fraction", frac}});
    j["fills"] = fills;
    j["iterations"] = r.iterations;
    j["constraints"] = r.constraint_count;
    j["wall_ms"] = r.wall_ms;
    if (r.implied_rate) j["implied_rate"] = *r.implied_rate;
    return j.dump(2);
}

MatchReport report_from_json(std::string_view text) {
    nlohmann::json j = nlohmann::json::parse(text);
    MatchReport r;
    r.market_id = j.at("market_id").get<std::string>();
    r.mechanism = j.at("mechanism").get<std::string>();
    r.status = j.at("status").get<std::string>();
    r.objective = j.at("objective").get<double>();
    r.offset_L = j.at("L").get<double>();
    for (const auto& f : j.at("fills"))
        r.fills.emplace_back(f.at("id").get<std::string>(), f.at("fraction").get<double>());
    r.iterations = j.at("iterations").get<long>();
    r.constraint_count = j.at("constraints").get<std::size_t>();
    r.wall_ms = j.at("wall_ms").get<double>();
    if (j.contains("implied_rate")) r.implied_rate = j.at("implied_rate").get<double>();
    return r;
}

}  // namespace optclear
