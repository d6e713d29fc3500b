#include "cpbis/config.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "cpbis/format.hpp"

namespace cpbis {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) {
        s.remove_prefix(1);
    }
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
        s.remove_suffix(1);
    }
    return s;
}

std::string_view strip_comment(std::string_view line) {
    bool in_string = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        if (line[i] == '"' && (i == 0 || line[i - 1] != '\\')) {
            in_string = !in_string;
        } else if (line[i] == '#' && !in_string) {
            return line.substr(0, i);
        }
    }
    return line;
}

bool valid_name(std::string_view s) {
    if (s.empty()) {
        return false;
    }
    for (char c : s) {
        if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-')) {
            return false;
        }
    }
    return true;
}

std::optional<double> parse_toml_number(std::string_view s) {
    std::string cleaned;
    for (char c : s) {
        if (c != '_') {
            cleaned.push_back(c);
        }
    }
    return parse_number(cleaned);
}

struct Parser {
    ConfigDocument doc;
    std::string where(std::size_t line) const { return doc.source + ":" + std::to_string(line) + ": "; }

    ConfigValue parse_value(std::string_view text, std::size_t line) const {
        ConfigValue v;
        v.line = line;
        if (text.empty()) {
            throw ConfigError(where(line) + "missing value");
        }
        if (text.front() == '"') {
            std::string out;
            std::size_t i = 1;
            for (; i < text.size() && text[i] != '"'; ++i) {
                if (text[i] == '\\' && i + 1 < text.size()) {
                    ++i;
                }
                out.push_back(text[i]);
            }
            if (i >= text.size() || !trim(text.substr(i + 1)).empty()) {
                throw ConfigError(where(line) + "malformed string");
            }
            v.data = out;
        } else if (text == "true" || text == "false") {
            v.data = text == "true";
        } else if (text.front() == '[') {
            if (text.back() != ']') {
                throw ConfigError(where(line) + "unterminated array");
            }
            std::vector<double> items;
            std::string_view body = trim(text.substr(1, text.size() - 2));
            while (!body.empty()) {
                const auto comma = body.find(',');
                const auto item = trim(body.substr(0, comma));
                if (!item.empty()) {
                    const auto n = parse_toml_number(item);
                    if (!n) {
                        throw ConfigError(where(line) + "array items must be numbers");
                    }
                    items.push_back(*n);
                }
                body = comma == std::string_view::npos ? std::string_view{} : trim(body.substr(comma + 1));
            }
            v.data = items;
        } else {
            const auto n = parse_toml_number(text);
            if (!n) {
                throw ConfigError(where(line) + "cannot parse value '" + std::string(text) + "'");
            }
            v.data = *n;
        }
        return v;
    }
};

}  // namespace

ConfigDocument parse_document(std::string_view text, std::string source) {
    Parser p;
    p.doc.source = std::move(source);
    ConfigTable* current = &p.doc.tables[""];
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto eol = text.find('\n', pos);
        const auto raw = text.substr(pos, eol == std::string_view::npos ? std::string_view::npos : eol - pos);
        pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
        ++line_no;

        const auto line = trim(strip_comment(raw));
        if (line.empty()) {
            continue;
        }
        if (line.starts_with("[[")) {
            if (!line.ends_with("]]")) {
                throw ConfigError(p.where(line_no) + "malformed table header");
            }
            const std::string name(trim(line.substr(2, line.size() - 4)));
            if (!valid_name(name)) {
                throw ConfigError(p.where(line_no) + "invalid table name '" + name + "'");
            }
            auto& list = p.doc.arrays[name];
            list.emplace_back();
            list.back().line = line_no;
            current = &list.back();
            continue;
        }
        if (line.front() == '[') {
            if (line.back() != ']') {
                throw ConfigError(p.where(line_no) + "malformed table header");
            }
            const std::string name(trim(line.substr(1, line.size() - 2)));
            if (!valid_name(name)) {
                throw ConfigError(p.where(line_no) + "invalid table name '" + name + "'");
            }
            if (p.doc.tables.count(name)) {
                throw ConfigError(p.where(line_no) + "duplicate table [" + name + "]");
            }
            current = &p.doc.tables[name];
            current->line = line_no;
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            throw ConfigError(p.where(line_no) + "expected 'key = value'");
        }
        const std::string key(trim(line.substr(0, eq)));
        if (!valid_name(key)) {
            throw ConfigError(p.where(line_no) + "invalid key '" + key + "'");
        }
        if (current->entries.count(key)) {
            throw ConfigError(p.where(line_no) + "duplicate key '" + key + "'");
        }
        current->entries.emplace(key, p.parse_value(trim(line.substr(eq + 1)), line_no));
    }
    return p.doc;
}

namespace {

class TableReader {
public:
    TableReader(const ConfigDocument& doc, std::string prefix, const ConfigTable* table)
        : doc_(doc), prefix_(std::move(prefix)), table_(table) {}

    std::optional<double> opt_number(const std::string& key) {
        const ConfigValue* v = find(key);
        if (!v) {
            return std::nullopt;
        }
        if (const auto* d = std::get_if<double>(&v->data)) {
            return *d;
        }
        throw error(*v, key, "expected a number");
    }

    double number(const std::string& key) {
        if (auto v = opt_number(key)) {
            return *v;
        }
        throw missing(key);
    }

    std::optional<std::string> opt_string(const std::string& key) {
        const ConfigValue* v = find(key);
        if (!v) {
            return std::nullopt;
        }
        if (const auto* s = std::get_if<std::string>(&v->data)) {
            return *s;
        }
        throw error(*v, key, "expected a string");
    }

    std::string string(const std::string& key) {
        if (auto v = opt_string(key)) {
            return *v;
        }
        throw missing(key);
    }

    std::vector<double> numbers(const std::string& key) {
        const ConfigValue* v = find(key);
        if (!v) {
            throw missing(key);
        }
        if (const auto* a = std::get_if<std::vector<double>>(&v->data)) {
            return *a;
        }
        if (const auto* d = std::get_if<double>(&v->data)) {
            return {*d};
        }
        throw error(*v, key, "expected a number or an array of numbers");
    }

    std::optional<std::uint64_t> opt_count(const std::string& key) {
        const auto v = opt_number(key);
        if (!v) {
            return std::nullopt;
        }
        if (*v < 0 || std::floor(*v) != *v || *v > 1.8e19) {
            throw error_for(key, "expected a non-negative integer");
        }
        return static_cast<std::uint64_t>(*v);
    }

    // Converts with `convert`, attaching the field name to validation errors.
    template <class Fn>
    auto convert(const std::string& key, double value, Fn&& fn) {
        try {
            return fn(value);
        } catch (const ValidationError& e) {
            throw error_for(key, e.what());
        }
    }

    ConfigError error_for(const std::string& key, const std::string& what) {
        if (const ConfigValue* v = find(key)) {
            return error(*v, key, what);
        }
        const std::string at = table_ && table_->line ? ":" + std::to_string(table_->line) : "";
        return ConfigError(doc_.source + at + ": " + field(key) + ": " + what);
    }

    void reject_unknown() const {
        if (!table_) {
            return;
        }
        for (const auto& [key, value] : table_->entries) {
            if (!used_.count(key)) {
                throw error(value, key, "unknown field");
            }
        }
    }

    ConfigError error(const ConfigValue& v, const std::string& key, const std::string& what) const {
        return ConfigError(doc_.source + ":" + std::to_string(v.line) + ": " + field(key) + ": " + what);
    }

    ConfigError missing(const std::string& key) const {
        const std::string at = table_ && table_->line ? ":" + std::to_string(table_->line) : "";
        return ConfigError(doc_.source + at + ": missing required field '" + field(key) + "'");
    }

    std::string field(const std::string& key) const { return prefix_.empty() ? key : prefix_ + "." + key; }

private:
    const ConfigValue* find(const std::string& key) {
        used_.insert(key);
        if (!table_) {
            return nullptr;
        }
        const auto it = table_->entries.find(key);
        return it == table_->entries.end() ? nullptr : &it->second;
    }

    const ConfigDocument& doc_;
    std::string prefix_;
    const ConfigTable* table_;
    std::set<std::string> used_;
};

const ConfigTable* table_or_null(const ConfigDocument& doc, const std::string& name) {
    const auto it = doc.tables.find(name);
    return it == doc.tables.end() ? nullptr : &it->second;
}

}  // namespace

RunConfig parse_config(std::string_view text, std::string source) {
    const ConfigDocument doc = parse_document(text, std::move(source));
    RunConfig cfg;

    const std::set<std::string> known_tables{"", "sweep", "constraint", "advertiser", "run", "evaluate", "reference"};
    for (const auto& [name, table] : doc.tables) {
        if (!known_tables.count(name)) {
            throw ConfigError(doc.source + ":" + std::to_string(table.line) + ": unknown table [" + name + "]");
        }
    }
    for (const auto& [name, list] : doc.arrays) {
        if (name != "scan_mode" && name != "schedule") {
            throw ConfigError(doc.source + ":" + std::to_string(list.front().line) + ": unknown table [[" + name + "]]");
        }
    }
    if (const auto* root = table_or_null(doc, ""); root && !root->entries.empty()) {
        const auto& [key, v] = *root->entries.begin();
        throw ConfigError(doc.source + ":" + std::to_string(v.line) + ": field '" + key + "' must sit inside a table");
    }

    {
        TableReader r(doc, "constraint", table_or_null(doc, "constraint"));
        cfg.constraint.a_min = r.convert("a_min_ms", r.number("a_min_ms"), from_ms);
        cfg.constraint.quantile_p = r.number("quantile_p");
        r.convert("quantile_p", 0.0, [&](double) { validate(cfg.constraint); return 0; });
        r.reject_unknown();
    }
    {
        TableReader r(doc, "sweep", table_or_null(doc, "sweep"));
        cfg.grid.a_start = r.convert("a_start_ms", r.number("a_start_ms"), from_ms);
        cfg.grid.a_end = r.convert("a_end_ms", r.number("a_end_ms"), from_ms);
        if (auto v = r.opt_number("a_step_ms")) {
            cfg.grid.a_step = r.convert("a_step_ms", *v, from_ms);
        }
        if (auto v = r.opt_count("n_runs")) {
            cfg.grid.n_runs = *v;
        }
        if (auto v = r.opt_number("horizon_ms")) {
            cfg.grid.horizon = r.convert("horizon_ms", *v, from_ms);
        }
        cfg.grid.quantile_p = cfg.constraint.quantile_p;
        r.convert("a_step_ms", 0.0, [&](double) { validate(cfg.grid); return 0; });
        r.reject_unknown();
    }
    {
        TableReader r(doc, "advertiser", table_or_null(doc, "advertiser"));
        if (auto v = r.opt_number("adv_delay_max_ms")) {
            cfg.advertiser.adv_delay_max = r.convert("adv_delay_max_ms", *v, from_ms);
        }
        if (auto v = r.opt_number("pdu_duration_us")) {
            cfg.advertiser.pdu_duration = r.convert("pdu_duration_us", *v, from_us);
        }
        if (auto v = r.opt_number("channel_gap_us")) {
            cfg.advertiser.channel_gap = r.convert("channel_gap_us", *v, from_us);
        }
        if (auto v = r.opt_count("channels")) {
            cfg.advertiser.channels = static_cast<int>(std::min<std::uint64_t>(*v, 1000));
        }
        if (auto v = r.opt_number("block_period_s")) {
            cfg.advertiser.block_period = r.convert("block_period_s", *v, from_s);
        }
        r.convert("channels", 0.0, [&](double) { validate(single_interval(cfg.grid.a_start, cfg.advertiser)); return 0; });
        r.reject_unknown();
    }
    {
        TableReader r(doc, "run", table_or_null(doc, "run"));
        if (auto v = r.opt_count("seed")) {
            cfg.seed = *v;
        }
        if (auto v = r.opt_count("workers")) {
            cfg.workers = static_cast<unsigned>(std::min<std::uint64_t>(*v, 1024));
        }
        if (auto v = r.opt_string("output_dir")) {
            cfg.output_dir = *v;
        }
        r.reject_unknown();
    }
    {
        TableReader r(doc, "evaluate", table_or_null(doc, "evaluate"));
        if (auto v = r.opt_number("limit_s")) {
            cfg.eval_limit = r.convert("limit_s", *v, from_s);
        }
        if (auto v = r.opt_count("n_trials")) {
            cfg.eval_trials = *v;
        }
        if (cfg.eval_trials == 0) {
            throw ConfigError(doc.source + ": evaluate.n_trials must be at least 1");
        }
        r.reject_unknown();
    }
    if (const auto* t = table_or_null(doc, "reference")) {
        TableReader r(doc, "reference", t);
        ReferencePair ref;
        ref.a_left = r.convert("a_left_ms", r.number("a_left_ms"), from_ms);
        ref.a_right = r.convert("a_right_ms", r.number("a_right_ms"), from_ms);
        ref.delta = r.number("delta");
        r.reject_unknown();
        cfg.reference = ref;
    }

    const auto modes = doc.arrays.find("scan_mode");
    if (modes == doc.arrays.end()) {
        throw ConfigError(doc.source + ": missing required table [[scan_mode]]");
    }
    for (std::size_t i = 0; i < modes->second.size(); ++i) {
        TableReader r(doc, "scan_mode[" + std::to_string(i) + "]", &modes->second[i]);
        ScanMode m;
        m.scan_interval = r.convert("scan_interval_ms", r.number("scan_interval_ms"), from_ms);
        m.scan_window = r.convert("scan_window_ms", r.number("scan_window_ms"), from_ms);
        m.market_share = r.number("market_share");
        m.name = r.opt_string("name").value_or("T" + format_ms(m.scan_interval) + "_W" + format_ms(m.scan_window));
        r.convert("scan_window_ms", 0.0, [&](double) { validate(m); return 0; });
        r.reject_unknown();
        cfg.catalog.push_back(std::move(m));
    }
    try {
        cfg.catalog = validate_catalog(std::move(cfg.catalog));
    } catch (const ValidationError& e) {
        throw ConfigError(doc.source + ": scan_mode: " + e.what());
    }

    if (const auto it = doc.arrays.find("schedule"); it != doc.arrays.end()) {
        for (std::size_t i = 0; i < it->second.size(); ++i) {
            TableReader r(doc, "schedule[" + std::to_string(i) + "]", &it->second[i]);
            BroadcastSchedule s;
            s.name = r.string("name");
            const auto intervals = r.numbers("interval_ms");
            const auto durations = r.numbers("duration_s");
            if (intervals.size() != durations.size()) {
                throw r.missing("duration_s (one per interval)");
            }
            for (std::size_t b = 0; b < intervals.size(); ++b) {
                s.blocks.push_back({r.convert("interval_ms", intervals[b], from_ms),
                                    r.convert("duration_s", durations[b], from_s)});
            }
            r.convert("interval_ms", 0.0, [&](double) { validate(s); return 0; });
            r.reject_unknown();
            cfg.schedules.push_back(std::move(s));
        }
    }
    return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ConfigError("cannot open config file " + path.string());
    }
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str(), path.string());
}

}  // namespace cpbis
