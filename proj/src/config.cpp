#include "mlpde/config.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

namespace mlpde {

using nlohmann::json;

namespace {

class TomlParser {
public:
    explicit TomlParser(const std::string& text) : s_(text) {}

    json parse() {
        json root = json::object();
        json* table = &root;
        for (;;) {
            skip_ws_comments_newlines();
            if (eof()) break;
            if (peek() == '[') {
                const bool array = s_.compare(pos_, 2, "[[") == 0;
                pos_ += array ? 2 : 1;
                const auto keys = parse_key_path();
                skip_inline_ws();
                if (!consume(']') || (array && !consume(']'))) fail("expected ']' after table name");
                table = array ? &open_array_table(root, keys) : &open_table(root, keys);
            } else {
                const auto keys = parse_key_path();
                skip_inline_ws();
                if (!consume('=')) fail("expected '=' after key");
                skip_inline_ws();
                json value = parse_value();
                assign(*table, keys, std::move(value));
            }
            skip_inline_ws();
            if (!eof() && peek() == '#') skip_comment();
            if (!eof() && peek() != '\n' && peek() != '\r') fail("unexpected trailing characters");
        }
        return root;
    }

private:
    [[noreturn]] void fail(const std::string& what) const {
        int line = 1;
        for (std::size_t i = 0; i < pos_ && i < s_.size(); ++i)
            if (s_[i] == '\n') ++line;
        throw ConfigError("line " + std::to_string(line), what);
    }

    bool eof() const { return pos_ >= s_.size(); }
    char peek() const { return s_[pos_]; }
    bool consume(char c) {
        if (!eof() && peek() == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    void skip_inline_ws() {
        while (!eof() && (peek() == ' ' || peek() == '\t')) ++pos_;
    }
    void skip_comment() {
        while (!eof() && peek() != '\n') ++pos_;
    }
    void skip_ws_comments_newlines() {
        for (;;) {
            while (!eof() && std::isspace(static_cast<unsigned char>(peek()))) ++pos_;
            if (!eof() && peek() == '#') {
                skip_comment();
                continue;
            }
            return;
        }
    }

    std::string parse_key() {
        skip_inline_ws();
        if (!eof() && (peek() == '"' || peek() == '\'')) return parse_string();
        const std::size_t start = pos_;
        while (!eof() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_' ||
                          peek() == '-'))
            ++pos_;
        if (start == pos_) fail("expected a key");
        return s_.substr(start, pos_ - start);
    }

    std::vector<std::string> parse_key_path() {
        std::vector<std::string> keys{parse_key()};
        for (;;) {
            skip_inline_ws();
            if (!consume('.')) break;
            keys.push_back(parse_key());
        }
        return keys;
    }

    std::string parse_string() {
        const char quote = s_[pos_++];
        std::string out;
        while (!eof() && peek() != quote) {
            if (peek() == '\n') fail("newline in string");
            char c = s_[pos_++];
            if (c == '\\' && quote == '"') {
                if (eof()) break;
                const char e = s_[pos_++];
                switch (e) {
                case 'n': c = '\n'; break;
                case 't': c = '\t'; break;
                case '\\': c = '\\'; break;
                case '"': c = '"'; break;
                default: fail(std::string("unsupported escape \\") + e);
                }
            }
            out.push_back(c);
        }
        if (!consume(quote)) fail("unterminated string");
        return out;
    }

    json parse_value() {
        if (eof()) fail("expected a value");
        const char c = peek();
        if (c == '"' || c == '\'') return parse_string();
        if (c == '[') return parse_array();
        if (c == '{') return parse_inline_table();
        if (s_.compare(pos_, 4, "true") == 0) {
            pos_ += 4;
            return true;
        }
        if (s_.compare(pos_, 5, "false") == 0) {
            pos_ += 5;
            return false;
        }
        return parse_number();
    }

    json parse_number() {
        const std::size_t start = pos_;
        while (!eof() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '+' ||
                          peek() == '-' || peek() == '.' || peek() == '_'))
            ++pos_;
        std::string tok;
        for (char ch : s_.substr(start, pos_ - start))
            if (ch != '_') tok.push_back(ch);
        if (tok.empty()) fail("expected a value");
        if (tok == "inf" || tok == "+inf") return std::numeric_limits<double>::infinity();
        if (tok == "-inf") return -std::numeric_limits<double>::infinity();
        const bool is_float = tok.find_first_of(".eE") != std::string::npos;
        try {
            std::size_t used = 0;
            if (is_float) {
                const double v = std::stod(tok, &used);
                if (used == tok.size()) return v;
            } else {
                const long long v = std::stoll(tok, &used);
                if (used == tok.size()) return v;
            }
        } catch (const std::exception&) {
        }
        pos_ = start;
        fail("invalid value '" + tok + "'");
    }

    json parse_array() {
        ++pos_;
        json arr = json::array();
        for (;;) {
            skip_ws_comments_newlines();
            if (consume(']')) return arr;
            arr.push_back(parse_value());
            skip_ws_comments_newlines();
            if (consume(']')) return arr;
            if (!consume(',')) fail("expected ',' or ']' in array");
        }
    }

    json parse_inline_table() {
        ++pos_;
        json obj = json::object();
        skip_inline_ws();
        if (consume('}')) return obj;
        for (;;) {
            const auto keys = parse_key_path();
            skip_inline_ws();
            if (!consume('=')) fail("expected '=' in inline table");
            skip_inline_ws();
            assign(obj, keys, parse_value());
            skip_inline_ws();
            if (consume('}')) return obj;
            if (!consume(',')) fail("expected ',' or '}' in inline table");
        }
    }

    void assign(json& table, const std::vector<std::string>& keys, json value) {
        json* t = &table;
        for (std::size_t i = 0; i + 1 < keys.size(); ++i) {
            json& next = (*t)[keys[i]];
            if (next.is_null()) next = json::object();
            if (!next.is_object()) fail("key '" + keys[i] + "' is not a table");
            t = &next;
        }
        if (t->contains(keys.back())) fail("duplicate key '" + keys.back() + "'");
        (*t)[keys.back()] = std::move(value);
    }

    json& open_table(json& root, const std::vector<std::string>& keys) {
        json* t = &root;
        for (const auto& k : keys) {
            json& next = (*t)[k];
            if (next.is_null()) next = json::object();
            if (next.is_array() && !next.empty() && next.back().is_object()) {
                t = &next.back();
                continue;
            }
            if (!next.is_object()) fail("key '" + k + "' is not a table");
            t = &next;
        }
        return *t;
    }

    json& open_array_table(json& root, const std::vector<std::string>& keys) {
        json& parent = open_table(root, {keys.begin(), keys.end() - 1});
        json& arr = parent[keys.back()];
        if (arr.is_null()) arr = json::array();
        if (!arr.is_array()) fail("key '" + keys.back() + "' is not an array of tables");
        arr.push_back(json::object());
        return arr.back();
    }

    const std::string& s_;
    std::size_t pos_ = 0;
};

// Typed field access with path-qualified errors.
class Fields {
public:
    Fields(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw ConfigError(path_.empty() ? "config" : path_, "expected a table");
    }

    bool has(const char* key) const { return j_.contains(key); }
    std::string where(const char* key) const { return path_.empty() ? key : path_ + "." + key; }
    const json& at(const char* key) const { return j_.at(key); }

    template <class T>
    T get(const char* key, T fallback) const {
        if (!j_.contains(key)) return fallback;
        return as<T>(j_.at(key), where(key));
    }

    template <class T>
    std::vector<T> list(const char* key, std::vector<T> fallback) const {
        if (!j_.contains(key)) return fallback;
        const json& v = j_.at(key);
        if (!v.is_array() || v.empty()) throw ConfigError(where(key), "expected a nonempty array");
        std::vector<T> out;
        for (std::size_t i = 0; i < v.size(); ++i)
            out.push_back(as<T>(v[i], where(key) + "[" + std::to_string(i) + "]"));
        return out;
    }

    template <class T>
    static T as(const json& v, const std::string& where) {
        if constexpr (std::is_same_v<T, std::string>) {
            if (!v.is_string()) throw ConfigError(where, "expected a string");
            return v.get<std::string>();
        } else if constexpr (std::is_floating_point_v<T>) {
            if (!v.is_number()) throw ConfigError(where, "expected a number");
            return v.get<double>();
        } else {
            if (!v.is_number_integer()) throw ConfigError(where, "expected an integer");
            if (std::is_unsigned_v<T> && v.get<long long>() < 0 && !v.is_number_unsigned())
                throw ConfigError(where, "expected a nonnegative integer");
            return v.get<T>();
        }
    }

private:
    const json& j_;
    std::string path_;
};

}  // namespace

json parse_toml(const std::string& text) { return TomlParser(text).parse(); }

std::string to_string(Mode m) {
    switch (m) {
    case Mode::convergence: return "convergence";
    case Mode::dimension_scan: return "dimension-scan";
    case Mode::em_rate: return "em-rate";
    case Mode::cost_audit: return "cost-audit";
    case Mode::residual: return "residual";
    }
    return "unknown";
}

Mode mode_from_string(const std::string& s) {
    for (Mode m : {Mode::convergence, Mode::dimension_scan, Mode::em_rate, Mode::cost_audit,
                   Mode::residual})
        if (to_string(m) == s) return m;
    throw ConfigError("mode", "unknown mode '" + s + "'");
}

bool operator==(const ExperimentConfig& a, const ExperimentConfig& b) {
    return config_to_json(a) == config_to_json(b);
}

ExperimentConfig config_from_json(const json& j) {
    const Fields root(j, "");
    ExperimentConfig c;

    if (!root.has("problem")) throw ConfigError("problem", "missing");
    const Fields prob(root.at("problem"), "problem");
    c.problem.id = prob.get<std::string>("id", "");
    c.problem.d = prob.get<int>("d", 1);
    c.problem.T = prob.get<double>("T", 1.0);
    c.problem.kappa = prob.get<double>("kappa", 0.5);
    bool known = false;
    for (const auto& [id, _] : builtin_problems()) known = known || id == c.problem.id;
    if (!known) throw ConfigError("problem.id", "unknown problem '" + c.problem.id + "'");
    if (c.problem.d < 1) throw ConfigError("problem.d", "must be >= 1");
    if (!(c.problem.T > 0.0)) throw ConfigError("problem.T", "must be > 0");

    if (!root.has("mode")) throw ConfigError("mode", "missing");
    c.mode = mode_from_string(root.get<std::string>("mode", ""));
    c.levels = root.list<int>("levels", c.levels);
    c.dimensions = root.list<int>("dimensions", c.dimensions);
    c.grids = root.list<int>("grids", c.grids);
    c.K_ref = root.get<int>("K_ref", c.K_ref);
    c.replications = root.get<int>("replications", c.replications);
    c.paths = root.get<std::int64_t>("paths", c.paths);
    c.candidate_paths = root.get<std::int64_t>("candidate_paths", c.candidate_paths);
    c.weight_gap = root.get<double>("weight_gap", c.weight_gap);
    c.seed = root.get<std::uint64_t>("seed", c.seed);
    c.t_cap = root.get<double>("t_cap", c.t_cap);

    for (int n : c.levels)
        if (n < 0) throw ConfigError("levels", "levels must be >= 0");
    for (int d : c.dimensions)
        if (d < 1) throw ConfigError("dimensions", "dimensions must be >= 1");
    for (int K : c.grids)
        if (K < 1) throw ConfigError("grids", "grid counts must be >= 1");
    if (c.replications < 1) throw ConfigError("replications", "must be >= 1");
    if (c.paths < 2) throw ConfigError("paths", "must be >= 2");
    if (c.candidate_paths < 2) throw ConfigError("candidate_paths", "must be >= 2");
    if (c.K_ref < 1) throw ConfigError("K_ref", "must be >= 1");
    if (!(c.weight_gap > 0.0 && c.weight_gap <= c.problem.T))
        throw ConfigError("weight_gap", "must lie in (0, T]");

    if (root.has("points")) {
        const Fields pts(root.at("points"), "points");
        if (pts.has("explicit")) {
            const json& list = pts.at("explicit");
            if (!list.is_array() || list.empty())
                throw ConfigError("points.explicit", "expected a nonempty array");
            for (std::size_t i = 0; i < list.size(); ++i) {
                const Fields p(list[i], "points.explicit[" + std::to_string(i) + "]");
                PointSpec ps;
                ps.t = p.get<double>("t", 0.0);
                ps.x = p.list<double>("x", {});
                if (ps.x.empty()) throw ConfigError(p.where("x"), "missing");
                c.points.explicit_points.push_back(std::move(ps));
            }
        } else {
            c.points.k = pts.get<double>("k", 1.0);
            c.points.per_axis = pts.get<int>("per_axis", 1);
            c.points.times = pts.list<double>("times", {0.0});
            if (c.points.per_axis < 1) throw ConfigError("points.per_axis", "must be >= 1");
            if (!(c.points.k >= 0.0)) throw ConfigError("points.k", "must be >= 0");
        }
    }

    if (root.has("output")) {
        const Fields out(root.at("output"), "output");
        c.csv_name = out.get<std::string>("csv", c.csv_name);
        c.json_name = out.get<std::string>("json", c.json_name);
    }
    return c;
}

json config_to_json(const ExperimentConfig& c) {
    json j;
    j["problem"] = {{"id", c.problem.id}, {"d", c.problem.d}, {"T", c.problem.T},
                    {"kappa", c.problem.kappa}};
    j["mode"] = to_string(c.mode);
    j["levels"] = c.levels;
    j["dimensions"] = c.dimensions;
    j["grids"] = c.grids;
    j["K_ref"] = c.K_ref;
    j["replications"] = c.replications;
    j["paths"] = c.paths;
    j["candidate_paths"] = c.candidate_paths;
    j["weight_gap"] = c.weight_gap;
    j["seed"] = c.seed;
    j["t_cap"] = c.t_cap;
    if (c.points.is_grid()) {
        j["points"] = {{"k", c.points.k}, {"per_axis", c.points.per_axis}, {"times", c.points.times}};
    } else {
        json list = json::array();
        for (const auto& p : c.points.explicit_points) list.push_back({{"t", p.t}, {"x", p.x}});
        j["points"] = {{"explicit", list}};
    }
    j["output"] = {{"csv", c.csv_name}, {"json", c.json_name}};
    return j;
}

ExperimentConfig parse_config(const std::string& text, bool toml) {
    json j;
    if (toml) {
        j = parse_toml(text);
    } else {
        try {
            j = json::parse(text);
        } catch (const json::parse_error& e) {
            throw ConfigError("byte " + std::to_string(e.byte), e.what());
        }
    }
    return config_from_json(j);
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path, "cannot open config file");
    std::stringstream ss;
    ss << in.rdbuf();
    const std::string text = ss.str();
    bool toml;
    if (path.size() >= 5 && path.substr(path.size() - 5) == ".toml") {
        toml = true;
    } else if (path.size() >= 5 && path.substr(path.size() - 5) == ".json") {
        toml = false;
    } else {
        const auto first = text.find_first_not_of(" \t\r\n");
        toml = first == std::string::npos || text[first] != '{';
    }
    return parse_config(text, toml);
}

std::string config_hash(const ExperimentConfig& c) {
    json j = config_to_json(c);
    j.erase("output");
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : j.dump()) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::vector<std::pair<double, std::vector<double>>> expand_points(const ExperimentConfig& c, int d,
                                                                   double T) {
    std::vector<std::pair<double, std::vector<double>>> out;
    auto check_t = [&](double t, const std::string& where) {
        if (!(t >= 0.0 && t <= T - c.t_cap))
            throw ConfigError(where, "evaluation time must lie in [0, T - t_cap]");
    };
    if (!c.points.is_grid()) {
        for (std::size_t i = 0; i < c.points.explicit_points.size(); ++i) {
            const auto& p = c.points.explicit_points[i];
            const std::string where = "points.explicit[" + std::to_string(i) + "]";
            check_t(p.t, where + ".t");
            if (static_cast<int>(p.x.size()) != d)
                throw ConfigError(where + ".x", "expected " + std::to_string(d) + " coordinates");
            out.emplace_back(p.t, p.x);
        }
        return out;
    }
    const int n = c.points.per_axis;
    if (n < 1 || c.points.times.empty()) throw ConfigError("points", "no evaluation points");
    const double total = std::pow(static_cast<double>(n), d);
    if (total * c.points.times.size() > 1e5)
        throw ConfigError("points.per_axis", "grid has too many points for d=" + std::to_string(d));
    const std::size_t count = static_cast<std::size_t>(total);
    for (std::size_t ti = 0; ti < c.points.times.size(); ++ti) {
        const double t = c.points.times[ti];
        check_t(t, "points.times[" + std::to_string(ti) + "]");
        for (std::size_t idx = 0; idx < count; ++idx) {
            std::vector<double> x(d);
            std::size_t rest = idx;
            for (int k = 0; k < d; ++k) {
                const int a = static_cast<int>(rest % n);
                rest /= n;
                x[k] = n == 1 ? 0.0 : -c.points.k + 2.0 * c.points.k * a / (n - 1);
            }
            out.emplace_back(t, std::move(x));
        }
    }
    return out;
}

}  // namespace mlpde
