#pragma once
// Run configuration: line-oriented `key = value` parsing and emission.

#include <algorithm>
#include <cctype>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "swd/common.hpp"
#include "swd/search.hpp"

namespace swd {

struct parse_error : std::runtime_error {
    int line;
    std::string key;
    parse_error(const std::string& msg, int line_, std::string key_)
        : std::runtime_error(msg), line(line_), key(std::move(key_)) {}
};

enum class Command { analyze, optimal, enumerate_cmd, sample, recommend, moments };
enum class OutputFormat { table, csv };

struct RunConfig {
    std::optional<Command> command;
    int periods = 0;
    std::optional<double> lambda;
    std::optional<double> icc;
    std::optional<double> mu;
    std::vector<int> sizes;
    std::optional<double> mean;
    std::optional<double> cv;
    std::vector<int> alloc;
    SearchMode mode = SearchMode::random_cluster_balanced;
    std::uint64_t reps = 1000;
    std::optional<std::uint64_t> seed;
    double threshold = 0.99;
    bool mirror_dedup = false;
    ExtraClusterRule extra_rule = ExtraClusterRule::outer_symmetric;
    OutputFormat output = OutputFormat::table;
    std::size_t top_k = 10;

    bool has_sizes() const { return !sizes.empty(); }
    bool has_moments() const { return mean.has_value() || cv.has_value(); }

    double resolved_lambda() const {
        if (lambda) return *lambda;
        return (1.0 - *icc) / *icc;
    }

    TrialConfig trial() const {
        TrialConfig t = TrialConfig::from_lambda(periods, resolved_lambda());
        if (mu) t = t.with_cohort(*mu);
        return t;
    }

    bool operator==(const RunConfig&) const = default;
};

namespace detail {

inline std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline std::vector<int> parse_int_list(const std::string& v, int line,
                                       const std::string& key) {
    std::vector<int> out;
    std::stringstream ss(v);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        tok = trim(tok);
        try {
            std::size_t pos = 0;
            const int x = std::stoi(tok, &pos);
            if (pos != tok.size()) throw std::invalid_argument(tok);
            out.push_back(x);
        } catch (const std::exception&) {
            throw parse_error("key '" + key + "' (line " + std::to_string(line) +
                                  "): expected an integer list, got '" + v + "'",
                              line, key);
        }
    }
    if (out.empty())
        throw parse_error("key '" + key + "' (line " + std::to_string(line) +
                              "): empty list",
                          line, key);
    return out;
}

inline double parse_double(const std::string& v, int line, const std::string& key) {
    try {
        std::size_t pos = 0;
        const double x = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw parse_error("key '" + key + "' (line " + std::to_string(line) +
                              "): expected a number, got '" + v + "'",
                          line, key);
    }
}

inline long long parse_int(const std::string& v, int line, const std::string& key) {
    try {
        std::size_t pos = 0;
        const long long x = std::stoll(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw parse_error("key '" + key + "' (line " + std::to_string(line) +
                              "): expected an integer, got '" + v + "'",
                          line, key);
    }
}

inline bool parse_bool(const std::string& v, int line, const std::string& key) {
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw parse_error("key '" + key + "' (line " + std::to_string(line) +
                          "): expected a boolean, got '" + v + "'",
                      line, key);
}

inline Command parse_command(const std::string& v, int line, const std::string& key) {
    if (v == "analyze") return Command::analyze;
    if (v == "optimal") return Command::optimal;
    if (v == "enumerate") return Command::enumerate_cmd;
    if (v == "sample") return Command::sample;
    if (v == "recommend") return Command::recommend;
    if (v == "moments") return Command::moments;
    throw parse_error("key '" + key + "' (line " + std::to_string(line) +
                          "): unknown command '" + v + "'",
                      line, key);
}

inline const char* command_name(Command c) {
    switch (c) {
        case Command::analyze: return "analyze";
        case Command::optimal: return "optimal";
        case Command::enumerate_cmd: return "enumerate";
        case Command::sample: return "sample";
        case Command::recommend: return "recommend";
        case Command::moments: return "moments";
    }
    return "?";
}

inline const char* extra_rule_name(ExtraClusterRule r) {
    switch (r) {
        case ExtraClusterRule::outer_symmetric: return "outer";
        case ExtraClusterRule::inner_symmetric: return "inner";
        case ExtraClusterRule::free: return "free";
    }
    return "?";
}

inline ExtraClusterRule parse_extra_rule(const std::string& v, int line,
                                         const std::string& key) {
    if (v == "outer") return ExtraClusterRule::outer_symmetric;
    if (v == "inner") return ExtraClusterRule::inner_symmetric;
    if (v == "free") return ExtraClusterRule::free;
    throw parse_error("key '" + key + "' (line " + std::to_string(line) +
                          "): expected outer|inner|free, got '" + v + "'",
                      line, key);
}

}  // namespace detail

// Cross-field validation shared by file and flag input paths.
inline void validate_config(const RunConfig& cfg) {
    if (!cfg.command) throw parse_error("missing 'command'", 0, "command");
    if (cfg.periods < 2)
        throw parse_error("'periods' must be at least 2", 0, "periods");
    if (cfg.lambda && cfg.icc)
        throw parse_error("'lambda' and 'icc' conflict; supply exactly one", 0,
                          "lambda");
    if (!cfg.lambda && !cfg.icc)
        throw parse_error("one of 'lambda' or 'icc' is required", 0, "lambda");
    if (cfg.icc && (*cfg.icc <= 0.0 || *cfg.icc > 1.0))
        throw parse_error("'icc' must lie in (0, 1]", 0, "icc");
    if (cfg.lambda && *cfg.lambda < 0.0)
        throw parse_error("'lambda' must be nonnegative", 0, "lambda");
    if (cfg.has_sizes() && cfg.has_moments())
        throw parse_error("'sizes' and 'mean'/'cv' conflict; supply exactly one",
                          0, "sizes");
    if (!cfg.has_sizes() && !cfg.has_moments())
        throw parse_error("either 'sizes' or 'mean'+'cv' is required", 0, "sizes");
    if (cfg.has_moments() && (!cfg.mean || !cfg.cv))
        throw parse_error("'mean' and 'cv' must be supplied together", 0, "mean");
    const Command cmd = *cfg.command;
    if (!cfg.has_sizes() && (cmd == Command::analyze || cmd == Command::enumerate_cmd ||
                             cmd == Command::sample))
        throw parse_error("command '" + std::string(detail::command_name(cmd)) +
                              "' needs individual cluster sizes",
                          0, "sizes");
    if (cmd == Command::analyze && cfg.alloc.empty())
        throw parse_error("command 'analyze' needs 'alloc'", 0, "alloc");
    if (!cfg.alloc.empty() && cfg.has_sizes() &&
        cfg.alloc.size() != cfg.sizes.size())
        throw parse_error("'alloc' length must match 'sizes'", 0, "alloc");
}

// Key-value parsing only; cross-field validation is separate so CLI flag
// overrides can be applied in between.
inline RunConfig parse_config_keys(const std::string& text) {
    RunConfig cfg;
    std::istringstream in(text);
    std::string raw;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        std::string s = detail::trim(raw);
        if (s.empty() || s[0] == '#') continue;
        const std::size_t eq = s.find('=');
        if (eq == std::string::npos)
            throw parse_error("line " + std::to_string(line) +
                                  ": expected 'key = value'",
                              line, "");
        const std::string key = detail::trim(s.substr(0, eq));
        const std::string val = detail::trim(s.substr(eq + 1));
        using namespace detail;
        if (key == "periods")
            cfg.periods = int(parse_int(val, line, key));
        else if (key == "lambda")
            cfg.lambda = parse_double(val, line, key);
        else if (key == "icc")
            cfg.icc = parse_double(val, line, key);
        else if (key == "mu")
            cfg.mu = parse_double(val, line, key);
        else if (key == "sizes")
            cfg.sizes = parse_int_list(val, line, key);
        else if (key == "mean")
            cfg.mean = parse_double(val, line, key);
        else if (key == "cv")
            cfg.cv = parse_double(val, line, key);
        else if (key == "alloc")
            cfg.alloc = parse_int_list(val, line, key);
        else if (key == "command")
            cfg.command = parse_command(val, line, key);
        else if (key == "mode") {
            if (val == "exhaustive")
                cfg.mode = SearchMode::exhaustive;
            else if (val == "unrestricted")
                cfg.mode = SearchMode::random_unrestricted;
            else if (val == "cluster-balanced")
                cfg.mode = SearchMode::random_cluster_balanced;
            else
                throw parse_error(
                    "key 'mode' (line " + std::to_string(line) +
                        "): expected exhaustive|unrestricted|cluster-balanced",
                    line, key);
        } else if (key == "reps")
            cfg.reps = std::uint64_t(parse_int(val, line, key));
        else if (key == "seed")
            cfg.seed = std::uint64_t(parse_int(val, line, key));
        else if (key == "threshold")
            cfg.threshold = parse_double(val, line, key);
        else if (key == "mirror_dedup")
            cfg.mirror_dedup = parse_bool(val, line, key);
        else if (key == "extra_rule")
            cfg.extra_rule = parse_extra_rule(val, line, key);
        else if (key == "output") {
            if (val == "table")
                cfg.output = OutputFormat::table;
            else if (val == "csv")
                cfg.output = OutputFormat::csv;
            else
                throw parse_error("key 'output' (line " + std::to_string(line) +
                                      "): expected table|csv",
                                  line, key);
        } else if (key == "top_k")
            cfg.top_k = std::size_t(parse_int(val, line, key));
        else
            throw parse_error("line " + std::to_string(line) + ": unknown key '" +
                                  key + "'",
                              line, key);
    }
    return cfg;
}

inline RunConfig parse_config(const std::string& text) {
    RunConfig cfg = parse_config_keys(text);
    validate_config(cfg);
    return cfg;
}

inline std::string emit_config(const RunConfig& cfg) {
    std::ostringstream os;
    os << "command = " << detail::command_name(*cfg.command) << "\n";
    os << "periods = " << cfg.periods << "\n";
    os.precision(17);
    if (cfg.lambda) os << "lambda = " << *cfg.lambda << "\n";
    if (cfg.icc) os << "icc = " << *cfg.icc << "\n";
    if (cfg.mu) os << "mu = " << *cfg.mu << "\n";
    auto list = [&os](const char* key, const std::vector<int>& v) {
        os << key << " = ";
        for (std::size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << v[i];
        os << "\n";
    };
    if (cfg.has_sizes()) list("sizes", cfg.sizes);
    if (cfg.mean) os << "mean = " << *cfg.mean << "\n";
    if (cfg.cv) os << "cv = " << *cfg.cv << "\n";
    if (!cfg.alloc.empty()) list("alloc", cfg.alloc);
    os << "mode = "
       << (cfg.mode == SearchMode::exhaustive
               ? "exhaustive"
               : cfg.mode == SearchMode::random_unrestricted ? "unrestricted"
                                                             : "cluster-balanced")
       << "\n";
    os << "reps = " << cfg.reps << "\n";
    if (cfg.seed) os << "seed = " << *cfg.seed << "\n";
    os << "threshold = " << cfg.threshold << "\n";
    os << "mirror_dedup = " << (cfg.mirror_dedup ? "true" : "false") << "\n";
    os << "extra_rule = " << detail::extra_rule_name(cfg.extra_rule) << "\n";
    os << "output = " << (cfg.output == OutputFormat::csv ? "csv" : "table") << "\n";
    os << "top_k = " << cfg.top_k << "\n";
    return os.str();
}

}  // namespace swd
