#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "cpbis/eval.hpp"
#include "cpbis/sweep.hpp"
#include "cpbis/types.hpp"

namespace cpbis {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// -- minimal TOML subset ------------------------------------------------------
//
// Supports `[table]`, `[[array_of_tables]]`, `key = value` with numbers,
// "strings", booleans and flat arrays of numbers, and `#` comments.

struct ConfigValue {
    std::variant<double, std::string, bool, std::vector<double>> data;
    std::size_t line = 0;
};

struct ConfigTable {
    std::map<std::string, ConfigValue> entries;
    std::size_t line = 0;
};

struct ConfigDocument {
    std::string source;
    std::map<std::string, ConfigTable> tables;
    std::map<std::string, std::vector<ConfigTable>> arrays;
};

ConfigDocument parse_document(std::string_view text, std::string source = "<config>");

// -- typed run configuration --------------------------------------------------

struct ReferencePair {
    Micros a_left{};
    Micros a_right{};
    double delta = 0.0;
};

struct RunConfig {
    std::vector<ScanMode> catalog;
    SweepGrid grid;
    ConstraintConfig constraint;
    AdvertiserConfig advertiser;
    std::uint64_t seed = 1;
    unsigned workers = 0;
    std::filesystem::path output_dir = "cpbis_out";
    Micros eval_limit{40'000'000};
    std::size_t eval_trials = 1000;
    std::vector<BroadcastSchedule> schedules;
    std::optional<ReferencePair> reference;
};

/// Parses and validates. Errors name the source, line and dotted field.
RunConfig parse_config(std::string_view text, std::string source = "<config>");
RunConfig load_config(const std::filesystem::path& path);

}  // namespace cpbis
