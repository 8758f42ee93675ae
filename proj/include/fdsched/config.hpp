#pragma once

#include <cstdlib>
#include <fstream>
#include <istream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "model.hpp"

namespace fdsched {

struct ConfigError : std::runtime_error {
    int line;
    ConfigError(const std::string& where, int line_no, const std::string& what)
        : std::runtime_error(line_no > 0 ? where + ":" + std::to_string(line_no) + ": " + what
                                         : where + ": " + what),
          line(line_no) {}
};

// Closed integer interval of file sizes, attached to a subsystem when the
// config asks for uniformly distributed file lengths in robustness runs.
struct UniformRange {
    bool set = false;
    long long lo = 0, hi = 0;
};

struct LoadedConfig {
    SystemSpec system;
    std::vector<UniformRange> uniform_ranges;  // parallel to system.subsystems
};

namespace detail {

inline std::vector<std::string> config_tokens(const std::string& raw) {
    std::string line = raw;
    size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ss(line);
    std::vector<std::string> tokens;
    std::string tok;
    while (ss >> tok) tokens.push_back(tok);
    return tokens;
}

inline double config_number(const std::string& where, int line, const std::string& tok) {
    const char* begin = tok.c_str();
    char* end = nullptr;
    double v = std::strtod(begin, &end);
    if (end == begin || *end != '\0')
        throw ConfigError(where, line, "expected a number, got '" + tok + "'");
    return v;
}

}  // namespace detail

// Plain-text system description: top-level "key value" lines plus one
// "subsystem { ... }" block per subsystem. '#' starts a comment. Keys:
//   power_budget X   max_concurrent N   tradeoff V
// and inside a block:
//   idle_rate X   mean_file_size X   weight X
//   completion_prob v0 v1 ...   power v0 v1 ...
//   uniform_range lo hi          (optional, robustness runs only)
inline LoadedConfig load_config(std::istream& in, const std::string& where = "<config>") {
    LoadedConfig cfg;
    cfg.system.tradeoff = 0.0;

    bool in_block = false;
    int block_line = 0;
    SubsystemSpec sub;
    UniformRange range;
    std::string raw;
    int line = 0;

    auto close_block = [&]() {
        try {
            validate(sub, "subsystem " + std::to_string(cfg.system.subsystems.size()));
        } catch (const std::invalid_argument& e) {
            throw ConfigError(where, block_line, e.what());
        }
        cfg.system.subsystems.push_back(sub);
        cfg.uniform_ranges.push_back(range);
    };

    while (std::getline(in, raw)) {
        ++line;
        std::vector<std::string> tok = detail::config_tokens(raw);
        if (tok.empty()) continue;
        const std::string& key = tok[0];

        if (!in_block) {
            if (key == "subsystem") {
                if (tok.size() != 2 || tok[1] != "{")
                    throw ConfigError(where, line, "expected 'subsystem {'");
                in_block = true;
                block_line = line;
                sub = SubsystemSpec{};
                range = UniformRange{};
                continue;
            }
            if (tok.size() != 2)
                throw ConfigError(where, line, "expected 'key value', got " +
                                                   std::to_string(tok.size()) + " tokens");
            double v = detail::config_number(where, line, tok[1]);
            if (key == "power_budget") cfg.system.power_budget = v;
            else if (key == "max_concurrent") cfg.system.max_concurrent = static_cast<int>(v);
            else if (key == "tradeoff") cfg.system.tradeoff = v;
            else throw ConfigError(where, line, "unknown key '" + key + "'");
            continue;
        }

        if (key == "}") {
            if (tok.size() != 1)
                throw ConfigError(where, line, "unexpected tokens after '}'");
            close_block();
            in_block = false;
            continue;
        }
        if (key == "idle_rate" || key == "mean_file_size" || key == "weight") {
            if (tok.size() != 2)
                throw ConfigError(where, line, "'" + key + "' takes one value");
            double v = detail::config_number(where, line, tok[1]);
            if (key == "idle_rate") sub.idle_rate = v;
            else if (key == "mean_file_size") sub.mean_file_size = v;
            else sub.weight = v;
        } else if (key == "completion_prob" || key == "power") {
            if (tok.size() < 2)
                throw ConfigError(where, line, "'" + key + "' needs one value per action");
            std::vector<double> values;
            for (size_t i = 1; i < tok.size(); ++i)
                values.push_back(detail::config_number(where, line, tok[i]));
            if (key == "completion_prob") sub.completion_prob = std::move(values);
            else sub.power = std::move(values);
        } else if (key == "uniform_range") {
            if (tok.size() != 3)
                throw ConfigError(where, line, "'uniform_range' takes lo and hi");
            range.set = true;
            range.lo = static_cast<long long>(detail::config_number(where, line, tok[1]));
            range.hi = static_cast<long long>(detail::config_number(where, line, tok[2]));
            if (range.lo < 1 || range.hi < range.lo)
                throw ConfigError(where, line, "need 1 <= lo <= hi");
        } else {
            throw ConfigError(where, line, "unknown subsystem key '" + key + "'");
        }
    }

    if (in_block)
        throw ConfigError(where, block_line, "subsystem block never closed");
    try {
        validate(cfg.system);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(where, 0, e.what());
    }
    return cfg;
}

inline LoadedConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path, 0, "cannot open file");
    return load_config(in, path);
}

}  // namespace fdsched
