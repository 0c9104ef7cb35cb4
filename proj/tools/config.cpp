#include "config.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

#include "uwarrant/errors.hpp"

namespace uwarrant::cli {

namespace {

struct Entry {
    std::string value;
    int line = 0;
};

using Table = std::map<std::string, std::map<std::string, Entry>>;

[[noreturn]] void fail(const std::string& origin, int line, const std::string& msg) {
    std::ostringstream os;
    os << origin << ":" << line << ": " << msg;
    throw DomainError(os.str());
}

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) return {};
    const auto end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

// Strips an unquoted trailing comment, then surrounding quotes if present.
std::string clean_value(const std::string& raw, const std::string& origin, int line) {
    std::string v;
    bool quoted = false;
    for (char ch : raw) {
        if (ch == '"') quoted = !quoted;
        if (ch == '#' && !quoted) break;
        v.push_back(ch);
    }
    if (quoted) fail(origin, line, "unterminated quote in value");
    v = trim(v);
    if (v.size() >= 2 && v.front() == '"' && v.back() == '"') v = v.substr(1, v.size() - 2);
    return v;
}

Table parse_table(const std::string& text, const std::string& origin) {
    Table table;
    std::string section;  // "" is the top level
    std::istringstream in(text);
    std::string raw;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        const std::string s = trim(raw);
        if (s.empty() || s.front() == '#') continue;
        if (s.front() == '[') {
            if (s.back() != ']') fail(origin, line, "malformed section header '" + s + "'");
            section = trim(s.substr(1, s.size() - 2));
            if (section.empty()) fail(origin, line, "empty section name");
            continue;
        }
        const auto eq = s.find('=');
        if (eq == std::string::npos) fail(origin, line, "expected 'key = value', got '" + s + "'");
        const std::string key = trim(s.substr(0, eq));
        if (key.empty()) fail(origin, line, "missing key before '='");
        const std::string value = clean_value(s.substr(eq + 1), origin, line);
        if (value.empty()) fail(origin, line, "missing value for key '" + key + "'");
        auto [it, inserted] = table[section].emplace(key, Entry{value, line});
        if (!inserted) {
            fail(origin, line,
                 "duplicate key '" + key + "' (first set on line " + std::to_string(it->second.line) +
                     ")");
        }
    }
    return table;
}

// Typed access to the raw table that tracks which keys were consumed so
// unknown keys can be reported by name.
class Reader {
public:
    Reader(Table table, std::string origin) : table_(std::move(table)), origin_(std::move(origin)) {}

    [[nodiscard]] bool has_section(const std::string& section) const {
        return table_.count(section) != 0;
    }

    [[nodiscard]] std::optional<std::string> take_string(const std::string& section,
                                                         const std::string& key) {
        const auto sec = table_.find(section);
        if (sec == table_.end()) return std::nullopt;
        const auto it = sec->second.find(key);
        if (it == sec->second.end()) return std::nullopt;
        std::string value = it->second.value;
        last_line_ = it->second.line;
        sec->second.erase(it);
        return value;
    }

    [[nodiscard]] std::optional<double> take_double(const std::string& section,
                                                    const std::string& key) {
        const auto s = take_string(section, key);
        if (!s) return std::nullopt;
        return parse_double(*s, section, key);
    }

    [[nodiscard]] std::optional<long long> take_int(const std::string& section,
                                                    const std::string& key) {
        const auto s = take_string(section, key);
        if (!s) return std::nullopt;
        const char* text = s->c_str();
        char* end = nullptr;
        const long long v = std::strtoll(text, &end, 10);
        if (end == text || *end != '\0') {
            fail(origin_, last_line_,
                 spot(section, key) + " must be an integer, got '" + *s + "'");
        }
        return v;
    }

    [[nodiscard]] std::optional<std::vector<double>> take_list(const std::string& section,
                                                               const std::string& key) {
        const auto s = take_string(section, key);
        if (!s) return std::nullopt;
        std::vector<double> values;
        std::istringstream in(*s);
        std::string item;
        while (std::getline(in, item, ',')) {
            item = trim(item);
            if (item.empty()) fail(origin_, last_line_, spot(section, key) + " has an empty item");
            values.push_back(parse_double(item, section, key));
        }
        if (values.empty()) fail(origin_, last_line_, spot(section, key) + " must not be empty");
        return values;
    }

    // Every key must have been consumed by now.
    void finish() const {
        for (const auto& [section, keys] : table_) {
            for (const auto& [key, entry] : keys) {
                fail(origin_, entry.line, "unknown key '" + spot(section, key) + "'");
            }
        }
    }

    [[noreturn]] void reject(const std::string& section, const std::string& key,
                             const std::string& why) const {
        fail(origin_, last_line_, spot(section, key) + " " + why);
    }

    [[nodiscard]] const std::string& origin() const { return origin_; }

private:
    [[nodiscard]] static std::string spot(const std::string& section, const std::string& key) {
        return section.empty() ? key : section + "." + key;
    }

    double parse_double(const std::string& s, const std::string& section, const std::string& key) {
        const char* text = s.c_str();
        char* end = nullptr;
        const double v = std::strtod(text, &end);
        if (end == text || *end != '\0') {
            fail(origin_, last_line_, spot(section, key) + " must be a number, got '" + s + "'");
        }
        return v;
    }

    Table table_;
    std::string origin_;
    int last_line_ = 0;
};

}  // namespace

RunConfig parse_config_text(const std::string& text, const std::string& origin) {
    Reader r(parse_table(text, origin), origin);
    RunConfig cfg;

    if (const auto cmd = r.take_string("", "command")) {
        static const char* kCommands[] = {"price", "calibrate", "alpha-paths", "expect"};
        if (std::find(std::begin(kCommands), std::end(kCommands), *cmd) == std::end(kCommands)) {
            r.reject("", "command",
                     "must be one of price, calibrate, alpha-paths, expect; got '" + *cmd + "'");
        }
        cfg.command = *cmd;
    }

    if (r.has_section("capital")) {
        const auto need = [&](const char* key) {
            const auto v = r.take_double("capital", key);
            if (!v) throw DomainError(origin + ": [capital] is missing key '" + key + "'");
            return *v;
        };
        const double shares = need("shares");
        const double warrants = need("warrants");
        const double exercise_ratio = need("exercise_ratio");
        const double exercise_payment = need("exercise_payment");
        cfg.capital.emplace(shares, warrants, exercise_ratio, exercise_payment);
    }

    if (r.has_section("market")) {
        const auto need = [&](const char* key) {
            const auto v = r.take_double("market", key);
            if (!v) throw DomainError(origin + ": [market] is missing key '" + key + "'");
            return *v;
        };
        const double stock_price = need("stock_price");
        const double stock_vol = need("stock_vol");
        const double rate = need("rate");
        const double horizon = need("horizon");
        const double drift = need("drift");
        cfg.market.emplace(stock_price, stock_vol, rate, horizon, drift);
    }

    if (const auto v = r.take_double("model", "firm_value")) {
        if (!(*v > 0.0)) r.reject("model", "firm_value", "must be positive");
        cfg.model_firm_value = *v;
    }
    if (const auto v = r.take_double("model", "sigma")) {
        if (!(*v >= 0.0)) r.reject("model", "sigma", "must be nonnegative");
        cfg.model_sigma = *v;
    }

    if (const auto v = r.take_double("numerics", "abs_tol")) {
        if (!(*v > 0.0)) r.reject("numerics", "abs_tol", "must be positive");
        cfg.solver.quadrature.abs_tol = *v;
    }
    if (const auto v = r.take_double("numerics", "rel_tol")) {
        if (!(*v > 0.0)) r.reject("numerics", "rel_tol", "must be positive");
        cfg.solver.quadrature.rel_tol = *v;
    }
    if (const auto v = r.take_int("numerics", "max_nodes")) {
        if (*v < 1) r.reject("numerics", "max_nodes", "must be at least 1");
        cfg.solver.quadrature.max_nodes = static_cast<std::size_t>(*v);
    }
    if (const auto v = r.take_double("numerics", "tol")) {
        if (!(*v > 0.0)) r.reject("numerics", "tol", "must be positive");
        cfg.solver.tol = *v;
    }
    if (const auto v = r.take_int("numerics", "max_iter")) {
        if (*v < 1) r.reject("numerics", "max_iter", "must be at least 1");
        cfg.solver.max_iterations = static_cast<int>(*v);
    }
    if (const auto v = r.take_double("numerics", "damping")) {
        if (!(*v > 0.0 && *v <= 1.0)) r.reject("numerics", "damping", "must lie in (0, 1]");
        cfg.solver.damping = *v;
    }
    if (const auto v = r.take_int("numerics", "scan_points")) {
        if (*v < 2) r.reject("numerics", "scan_points", "must be at least 2");
        cfg.solver.scan_points = static_cast<int>(*v);
    }
    if (const auto v = r.take_int("numerics", "steps")) {
        if (*v < 1) r.reject("numerics", "steps", "must be at least 1");
        cfg.steps = static_cast<std::size_t>(*v);
    }

    if (const auto v = r.take_list("paths", "alphas")) {
        for (double a : *v) {
            if (!(a > 0.0 && a < 1.0)) {
                r.reject("paths", "alphas", "levels must lie strictly inside (0, 1)");
            }
        }
        cfg.path_alphas = *v;
    }
    if (const auto v = r.take_int("paths", "alpha_levels")) {
        if (*v < 1) r.reject("paths", "alpha_levels", "must be at least 1");
        cfg.alpha_levels = static_cast<int>(*v);
    }
    if (const auto v = r.take_list("paths", "times")) {
        for (double t : *v) {
            if (!(t >= 0.0)) r.reject("paths", "times", "times must be nonnegative");
        }
        cfg.path_times = *v;
    }

    if (const auto v = r.take_string("output", "path")) cfg.out_path = *v;
    if (const auto v = r.take_string("output", "format")) {
        if (*v != "json" && *v != "csv") {
            r.reject("output", "format", "must be json or csv, got '" + *v + "'");
        }
        cfg.format = *v;
    }

    r.finish();
    return cfg;
}

RunConfig parse_config_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DomainError("cannot open config file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str(), path);
}

}  // namespace uwarrant::cli
