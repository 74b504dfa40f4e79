#include "fedmesh/scenario.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <set>
#include <sstream>
#include <variant>

namespace fedmesh {

std::string_view to_string(Topology t) { return t == Topology::Hub ? "hub" : "full_p2p"; }

const CloudConfig* Scenario::find_cloud(std::string_view id) const {
    for (const auto& c : clouds)
        if (c.cloud_id == id) return &c;
    return nullptr;
}

std::string Diagnostic::to_string() const {
    std::string s;
    if (line > 0) s += fmt::format("line {}: ", line);
    if (!field.empty()) s += field + ": ";
    return s + message;
}

std::vector<Diagnostic> validate_scenario(const Scenario& s) {
    std::vector<Diagnostic> out;
    auto bad = [&](std::string field, std::string msg) { out.push_back({0, std::move(field), std::move(msg)}); };

    if (s.schema_version != kSchemaVersion) {
        bad("schema_version", fmt::format("unsupported schema version {} (expected {})", s.schema_version, kSchemaVersion));
    }
    if (s.inbox_capacity < 1) bad("inbox_capacity", "must be >= 1");
    if (s.latency.intra_cloud_ms < 0) bad("latency.intra_cloud_ms", "must be >= 0");
    if (s.latency.inter_cloud_ms < 0) bad("latency.inter_cloud_ms", "must be >= 0");

    if (s.f_min < 1) bad("space.f_min", fmt::format("must be >= 1, got {}", s.f_min));
    if (s.f_max < s.f_min) bad("space.f_max", fmt::format("must be >= f_min ({}), got {}", s.f_min, s.f_max));
    if (s.dims.empty()) bad("space.dim", "at least one dimension is required");

    std::set<std::string> dim_names;
    const spatial::DimensionSpec* service_dim = nullptr;
    const spatial::DimensionSpec* cpu_dim = nullptr;
    const spatial::DimensionSpec* proc_dim = nullptr;
    const spatial::DimensionSpec* speed_dim = nullptr;
    for (std::size_t j = 0; j < s.dims.size(); ++j) {
        const auto& d = s.dims[j];
        const auto field = fmt::format("space.dim[{}]", j);
        try {
            d.validate();
        } catch (const std::exception& e) {
            bad(field, e.what());
        }
        if (!dim_names.insert(d.name).second) bad(field + ".name", "duplicate dimension '" + d.name + "'");
        const bool categorical = d.kind == spatial::DimKind::Categorical;
        if (d.name == kDimServiceType || d.name == kDimCpuType) {
            if (!categorical) bad(field + ".kind", "'" + d.name + "' must be categorical");
            (d.name == kDimServiceType ? service_dim : cpu_dim) = &d;
        } else if (d.name == kDimProcessors || d.name == kDimSpeed) {
            if (categorical) bad(field + ".kind", "'" + d.name + "' must be numeric");
            (d.name == kDimProcessors ? proc_dim : speed_dim) = &d;
        } else {
            bad(field + ".name", fmt::format("unknown attribute '{}' (known: {}, {}, {}, {})", d.name, kDimServiceType,
                                             kDimProcessors, kDimCpuType, kDimSpeed));
        }
    }
    if (!s.dims.empty() && !service_dim) bad("space.dim", "a 'service_type' dimension is required");
    if (s.f_min >= 1 && !s.dims.empty()) {
        double cells = std::pow(double(s.f_min), double(s.dims.size()));
        if (cells > double(kMaxCells)) {
            bad("space.f_min", fmt::format("f_min^dim = {} exceeds the limit of {}", cells, kMaxCells));
        }
    }

    auto has_label = [](const spatial::DimensionSpec* d, const std::string& l) {
        return std::find(d->labels.begin(), d->labels.end(), l) != d->labels.end();
    };

    std::set<std::string> cloud_ids;
    for (std::size_t i = 0; i < s.clouds.size(); ++i) {
        const auto& c = s.clouds[i];
        const auto field = fmt::format("cloud[{}]", i);
        if (c.cloud_id.empty()) bad(field + ".id", "must not be empty");
        if (!cloud_ids.insert(c.cloud_id).second) bad(field + ".id", "duplicate cloud id '" + c.cloud_id + "'");
        if (c.node_count < 1) bad(field + ".nodes", fmt::format("must be >= 1, got {}", c.node_count));
        if (!(c.node_speed_ghz > 0)) bad(field + ".speed_ghz", "must be > 0");
        if (c.processors_per_node < 1) bad(field + ".processors", "must be >= 1");
        if (c.update_interval_lo_ms < 1 || c.update_interval_hi_ms < c.update_interval_lo_ms) {
            bad(field + ".update_interval_ms", "need 1 <= lo <= hi");
        }
        if (c.service_types.empty()) bad(field + ".service_types", "at least one service type is required");
        for (const auto& st : c.service_types) {
            if (service_dim && !has_label(service_dim, st)) {
                bad(field + ".service_types", "service type '" + st + "' is not a label of 'service_type'");
            }
        }
        if (cpu_dim && !has_label(cpu_dim, c.cpu_type)) {
            bad(field + ".cpu_type", "cpu type '" + c.cpu_type + "' is not a label of 'cpu_type'");
        }
        if (speed_dim && !(c.node_speed_ghz >= speed_dim->lo && c.node_speed_ghz <= speed_dim->hi)) {
            bad(field + ".speed_ghz", fmt::format("{} outside speed bounds [{}, {}]", c.node_speed_ghz, speed_dim->lo,
                                                  speed_dim->hi));
        }
        if (proc_dim && !(c.processors_per_node >= proc_dim->lo && c.processors_per_node <= proc_dim->hi)) {
            bad(field + ".processors", "outside processor bounds");
        }
        if (proc_dim && !(1.0 >= proc_dim->lo && 1.0 <= proc_dim->hi)) {
            bad("space.dim", "'processors' bounds must include 1 (claims request one processor)");
        }
    }

    std::set<std::string> app_ids;
    for (std::size_t i = 0; i < s.workloads.size(); ++i) {
        const auto& w = s.workloads[i];
        const auto field = fmt::format("workload[{}]", i);
        if (!w.app_id.empty() && !app_ids.insert(w.app_id).second) bad(field + ".id", "duplicate workload id");
        if (w.rows < 1) bad(field + ".rows", "must be >= 1");
        if (w.cols < 1) bad(field + ".cols", "must be >= 1");
        if (w.submit_time_ms < 0) bad(field + ".submit_time_ms", "must be >= 0");
        const auto* cloud = s.find_cloud(w.submit_cloud);
        if (!cloud) bad(field + ".submit_cloud", "unknown cloud_id '" + w.submit_cloud + "'");
        if (service_dim && !has_label(service_dim, std::string(workload::service_label(w.model)))) {
            bad(field + ".model", "service label for this model is missing from 'service_type'");
        }
        if (!(w.demand.lo > 0) || w.demand.hi < w.demand.lo) bad(field + ".demand", "need 0 < lo <= hi");
    }
    return out;
}

// ---------------------------------------------------------------------------
// Parser for the line-oriented format:
//   # comment
//   key = value                top-level keys
//   [latency] / [space]        tables
//   [[space.dim]] [[cloud]] [[workload]]   repeated tables
//   value := "string" | number | true | false | [ value, ... ]

namespace {

struct RawValue;
using RawArray = std::vector<RawValue>;
struct RawValue {
    std::variant<std::string, double, bool, RawArray> v;
    bool is_integer = false;
};

struct RawField {
    RawValue value;
    int line = 0;
};

struct RawTable {
    std::string path;  // field path prefix, e.g. "cloud[1]"
    int line = 0;
    std::map<std::string, RawField> fields;
};

class Parser {
public:
    explicit Parser(std::string_view text) : text_(text) {}

    std::vector<Diagnostic> diags;
    RawTable root{"", 0, {}};
    std::map<std::string, RawTable> tables;
    std::map<std::string, std::vector<RawTable>> arrays;

    void parse() {
        RawTable* cur = &root;
        std::istringstream in{std::string(text_)};
        std::string raw;
        int lineno = 0;
        while (std::getline(in, raw)) {
            ++lineno;
            std::string_view line = strip_comment(raw);
            line = trim(line);
            if (line.empty()) continue;
            if (line.front() == '[') {
                cur = open_section(line, lineno);
                continue;
            }
            auto eq = line.find('=');
            if (eq == std::string_view::npos) {
                diags.push_back({lineno, "", "expected 'key = value'"});
                continue;
            }
            std::string key(trim(line.substr(0, eq)));
            std::string_view rest = trim(line.substr(eq + 1));
            if (key.empty() || !valid_key(key)) {
                diags.push_back({lineno, key, "invalid key"});
                continue;
            }
            std::size_t pos = 0;
            auto value = parse_value(rest, pos, lineno);
            if (!value) continue;
            if (trim(rest.substr(pos)).size() != 0) {
                diags.push_back({lineno, key, "trailing characters after value"});
                continue;
            }
            if (!cur) continue;  // inside an unknown section; already reported
            if (cur->fields.count(key)) {
                diags.push_back({lineno, path_of(*cur, key), "duplicate key"});
                continue;
            }
            cur->fields.emplace(key, RawField{std::move(*value), lineno});
        }
    }

    static std::string path_of(const RawTable& t, const std::string& key) {
        return t.path.empty() ? key : t.path + "." + key;
    }

private:
    static std::string_view trim(std::string_view s) {
        while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
        while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
        return s;
    }

    static std::string_view strip_comment(std::string_view s) {
        bool in_str = false;
        for (std::size_t i = 0; i < s.size(); ++i) {
            if (s[i] == '"') in_str = !in_str;
            if (s[i] == '#' && !in_str) return s.substr(0, i);
        }
        return s;
    }

    static bool valid_key(std::string_view k) {
        return std::all_of(k.begin(), k.end(), [](char c) {
            return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-';
        });
    }

    RawTable* open_section(std::string_view line, int lineno) {
        const bool array = line.size() >= 2 && line[1] == '[';
        const std::size_t open = array ? 2 : 1;
        if (line.size() < 2 * open + 1 || line.substr(line.size() - open) != (array ? "]]" : "]")) {
            diags.push_back({lineno, "", "malformed section header"});
            return nullptr;
        }
        std::string name(trim(line.substr(open, line.size() - 2 * open)));
        static const std::set<std::string> kTables = {"latency", "space"};
        static const std::set<std::string> kArrays = {"space.dim", "cloud", "workload"};
        if (array) {
            if (!kArrays.count(name)) {
                diags.push_back({lineno, name, "unknown repeated section [[" + name + "]]"});
                return nullptr;
            }
            auto& vec = arrays[name];
            const std::string leaf = name == "space.dim" ? "space.dim" : name;
            vec.push_back(RawTable{fmt::format("{}[{}]", leaf, vec.size()), lineno, {}});
            return &vec.back();
        }
        if (!kTables.count(name)) {
            diags.push_back({lineno, name, "unknown section [" + name + "]"});
            return nullptr;
        }
        if (tables.count(name)) {
            diags.push_back({lineno, name, "section declared twice"});
            return nullptr;
        }
        return &tables.emplace(name, RawTable{name, lineno, {}}).first->second;
    }

    std::optional<RawValue> parse_value(std::string_view s, std::size_t& pos, int lineno) {
        while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
        if (pos >= s.size()) {
            diags.push_back({lineno, "", "missing value"});
            return std::nullopt;
        }
        const char c = s[pos];
        if (c == '"') {
            std::string out;
            ++pos;
            while (pos < s.size() && s[pos] != '"') {
                if (s[pos] == '\\' && pos + 1 < s.size()) ++pos;
                out += s[pos++];
            }
            if (pos >= s.size()) {
                diags.push_back({lineno, "", "unterminated string"});
                return std::nullopt;
            }
            ++pos;
            return RawValue{out, false};
        }
        if (c == '[') {
            ++pos;
            RawArray items;
            for (;;) {
                while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
                if (pos < s.size() && s[pos] == ']') {
                    ++pos;
                    return RawValue{std::move(items), false};
                }
                auto item = parse_value(s, pos, lineno);
                if (!item) return std::nullopt;
                items.push_back(std::move(*item));
                while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
                if (pos < s.size() && s[pos] == ',') {
                    ++pos;
                } else if (pos >= s.size() || s[pos] != ']') {
                    diags.push_back({lineno, "", "expected ',' or ']' in array"});
                    return std::nullopt;
                }
            }
        }
        if (s.substr(pos, 4) == "true") {
            pos += 4;
            return RawValue{true, false};
        }
        if (s.substr(pos, 5) == "false") {
            pos += 5;
            return RawValue{false, false};
        }
        std::size_t end = pos;
        while (end < s.size() && (std::isalnum(static_cast<unsigned char>(s[end])) || s[end] == '.' ||
                                  s[end] == '-' || s[end] == '+' || s[end] == '_')) {
            ++end;
        }
        std::string tok(s.substr(pos, end - pos));
        tok.erase(std::remove(tok.begin(), tok.end(), '_'), tok.end());
        double d = 0;
        auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), d);
        if (tok.empty() || ec != std::errc() || p != tok.data() + tok.size() || !std::isfinite(d)) {
            diags.push_back({lineno, "", "invalid value '" + std::string(s.substr(pos, end - pos)) + "'"});
            return std::nullopt;
        }
        pos = end;
        const bool integral = tok.find_first_of(".eE") == std::string::npos;
        return RawValue{d, integral};
    }

    std::string_view text_;
};

// Typed field extraction with diagnostics.
class Reader {
public:
    Reader(RawTable& t, std::vector<Diagnostic>& diags, std::map<std::string, int>& lines)
        : t_(t), diags_(diags), lines_(lines) {
        lines_[t_.path] = t_.line;
        for (const auto& [k, f] : t_.fields) lines_[Parser::path_of(t_, k)] = f.line;
    }

    ~Reader() {
        for (const auto& [k, f] : t_.fields)
            if (!used_.count(k)) diags_.push_back({f.line, Parser::path_of(t_, k), "unknown key"});
    }

    template <class T>
    void get(const std::string& key, T& out, bool required) {
        auto it = t_.fields.find(key);
        used_.insert(key);
        if (it == t_.fields.end()) {
            if (required) diags_.push_back({t_.line, Parser::path_of(t_, key), "missing required key"});
            return;
        }
        if (!convert(it->second.value, out)) {
            diags_.push_back({it->second.line, Parser::path_of(t_, key), std::string("expected ") + type_name(out)});
        }
    }

    bool has(const std::string& key) const { return t_.fields.count(key) != 0; }
    int line_of(const std::string& key) const {
        auto it = t_.fields.find(key);
        return it == t_.fields.end() ? t_.line : it->second.line;
    }

private:
    static const char* type_name(const std::string&) { return "a string"; }
    static const char* type_name(const double&) { return "a number"; }
    static const char* type_name(const bool&) { return "true or false"; }
    static const char* type_name(const std::int64_t&) { return "an integer"; }
    static const char* type_name(const int&) { return "an integer"; }
    static const char* type_name(const std::uint64_t&) { return "a non-negative integer"; }
    static const char* type_name(const std::vector<std::string>&) { return "an array of strings"; }
    static const char* type_name(const std::vector<std::int64_t>&) { return "an array of integers"; }

    static bool convert(const RawValue& v, std::string& out) {
        if (auto p = std::get_if<std::string>(&v.v)) return out = *p, true;
        return false;
    }
    static bool convert(const RawValue& v, double& out) {
        if (auto p = std::get_if<double>(&v.v)) return out = *p, true;
        return false;
    }
    static bool convert(const RawValue& v, bool& out) {
        if (auto p = std::get_if<bool>(&v.v)) return out = *p, true;
        return false;
    }
    template <class I>
    static bool convert_int(const RawValue& v, I& out) {
        auto p = std::get_if<double>(&v.v);
        if (!p || !v.is_integer || std::abs(*p) > 9.0e15) return false;
        if constexpr (std::is_unsigned_v<I>) {
            if (*p < 0) return false;
        }
        out = static_cast<I>(*p);
        return true;
    }
    static bool convert(const RawValue& v, std::int64_t& out) { return convert_int(v, out); }
    static bool convert(const RawValue& v, int& out) { return convert_int(v, out); }
    static bool convert(const RawValue& v, std::uint64_t& out) { return convert_int(v, out); }
    template <class E>
    static bool convert(const RawValue& v, std::vector<E>& out) {
        auto p = std::get_if<RawArray>(&v.v);
        if (!p) return false;
        std::vector<E> tmp;
        for (const auto& item : *p) {
            E e{};
            if (!convert(item, e)) return false;
            tmp.push_back(std::move(e));
        }
        out = std::move(tmp);
        return true;
    }

    RawTable& t_;
    std::vector<Diagnostic>& diags_;
    std::map<std::string, int>& lines_;
    std::set<std::string> used_;
};

int line_for(const std::map<std::string, int>& lines, std::string field) {
    // Longest known prefix of the dotted path.
    while (!field.empty()) {
        if (auto it = lines.find(field); it != lines.end()) return it->second;
        auto cut = field.find_last_of(".[");
        if (cut == std::string::npos) break;
        field.resize(cut);
    }
    return 0;
}

}  // namespace

ParseResult parse_scenario(std::string_view text) {
    ParseResult result;
    Parser p(text);
    p.parse();
    auto& diags = result.diagnostics;
    diags = p.diags;
    std::map<std::string, int> lines;

    Scenario s;
    s.clouds.clear();
    {
        Reader r(p.root, diags, lines);
        r.get("schema_version", s.schema_version, true);
        r.get("seed", s.seed, false);
        r.get("eager_tickets", s.eager_tickets, false);
        r.get("inbox_capacity", s.inbox_capacity, false);
    }
    if (auto it = p.tables.find("latency"); it != p.tables.end()) {
        Reader r(it->second, diags, lines);
        r.get("intra_cloud_ms", s.latency.intra_cloud_ms, false);
        r.get("inter_cloud_ms", s.latency.inter_cloud_ms, false);
    }
    if (auto it = p.tables.find("space"); it != p.tables.end()) {
        Reader r(it->second, diags, lines);
        r.get("f_min", s.f_min, true);
        r.get("f_max", s.f_max, true);
    } else {
        diags.push_back({0, "space", "missing [space] section"});
    }
    for (auto& t : p.arrays["space.dim"]) {
        Reader r(t, diags, lines);
        spatial::DimensionSpec d;
        std::string kind;
        r.get("name", d.name, true);
        r.get("kind", kind, true);
        if (kind == "numeric") {
            d.kind = spatial::DimKind::Numeric;
            r.get("lo", d.lo, true);
            r.get("hi", d.hi, true);
        } else if (kind == "categorical") {
            d.kind = spatial::DimKind::Categorical;
            r.get("labels", d.labels, true);
        } else if (!kind.empty()) {
            diags.push_back({r.line_of("kind"), t.path + ".kind", "must be 'numeric' or 'categorical'"});
        }
        s.dims.push_back(std::move(d));
    }
    for (auto& t : p.arrays["cloud"]) {
        Reader r(t, diags, lines);
        CloudConfig c;
        std::string topology = "hub";
        std::vector<std::int64_t> interval;
        r.get("id", c.cloud_id, true);
        r.get("nodes", c.node_count, true);
        r.get("speed_ghz", c.node_speed_ghz, true);
        r.get("cpu_type", c.cpu_type, true);
        r.get("service_types", c.service_types, true);
        r.get("processors", c.processors_per_node, false);
        r.get("topology", topology, false);
        if (r.has("update_interval_ms")) {
            r.get("update_interval_ms", interval, true);
            if (interval.size() == 2) {
                c.update_interval_lo_ms = interval[0];
                c.update_interval_hi_ms = interval[1];
            } else {
                diags.push_back({r.line_of("update_interval_ms"), t.path + ".update_interval_ms",
                                 "expected [lo, hi]"});
            }
        }
        if (topology == "hub") {
            c.topology = Topology::Hub;
        } else if (topology == "full_p2p") {
            c.topology = Topology::FullP2P;
        } else {
            diags.push_back({r.line_of("topology"), t.path + ".topology", "must be 'hub' or 'full_p2p'"});
        }
        s.clouds.push_back(std::move(c));
    }
    for (auto& t : p.arrays["workload"]) {
        Reader r(t, diags, lines);
        workload::WorkloadSpec w;
        std::string model, demand = "uniform";
        r.get("id", w.app_id, false);
        r.get("model", model, true);
        r.get("rows", w.rows, true);
        r.get("cols", w.cols, true);
        r.get("submit_cloud", w.submit_cloud, true);
        r.get("submit_time_ms", w.submit_time_ms, false);
        r.get("demand", demand, false);
        if (demand == "constant") {
            double d = 0;
            r.get("demand_ghz_s", d, true);
            w.demand = workload::Demand::constant(d);
        } else if (demand == "uniform") {
            r.get("demand_lo", w.demand.lo, false);
            r.get("demand_hi", w.demand.hi, false);
        } else {
            diags.push_back({r.line_of("demand"), t.path + ".demand", "must be 'constant' or 'uniform'"});
        }
        if (auto m = workload::parse_model(model)) {
            w.model = *m;
        } else if (!model.empty()) {
            diags.push_back({r.line_of("model"), t.path + ".model", "must be 'task' or 'thread'"});
        }
        s.workloads.push_back(std::move(w));
    }

    if (!diags.empty()) return result;

    for (auto d : validate_scenario(s)) {
        d.line = line_for(lines, d.field);
        diags.push_back(std::move(d));
    }
    if (diags.empty()) result.scenario = std::move(s);
    return result;
}

std::string serialize_scenario(const Scenario& s) {
    auto quote = [](const std::string& v) { return "\"" + v + "\""; };
    auto list = [&](const std::vector<std::string>& v) {
        std::string out = "[";
        for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ", " : "") + quote(v[i]);
        return out + "]";
    };
    std::string o;
    o += fmt::format("schema_version = {}\nseed = {}\neager_tickets = {}\ninbox_capacity = {}\n\n", s.schema_version,
                     s.seed, s.eager_tickets, s.inbox_capacity);
    o += fmt::format("[latency]\nintra_cloud_ms = {}\ninter_cloud_ms = {}\n\n", s.latency.intra_cloud_ms,
                     s.latency.inter_cloud_ms);
    o += fmt::format("[space]\nf_min = {}\nf_max = {}\n\n", s.f_min, s.f_max);
    for (const auto& d : s.dims) {
        o += "[[space.dim]]\nname = " + quote(d.name) + "\n";
        if (d.kind == spatial::DimKind::Numeric) {
            o += fmt::format("kind = \"numeric\"\nlo = {}\nhi = {}\n\n", d.lo, d.hi);
        } else {
            o += "kind = \"categorical\"\nlabels = " + list(d.labels) + "\n\n";
        }
    }
    for (const auto& c : s.clouds) {
        o += fmt::format(
            "[[cloud]]\nid = {}\nnodes = {}\nspeed_ghz = {}\ncpu_type = {}\nservice_types = {}\nprocessors = {}\n"
            "update_interval_ms = [{}, {}]\ntopology = \"{}\"\n\n",
            quote(c.cloud_id), c.node_count, c.node_speed_ghz, quote(c.cpu_type), list(c.service_types),
            c.processors_per_node, c.update_interval_lo_ms, c.update_interval_hi_ms, to_string(c.topology));
    }
    for (const auto& w : s.workloads) {
        o += "[[workload]]\n";
        if (!w.app_id.empty()) o += "id = " + quote(w.app_id) + "\n";
        o += fmt::format("model = \"{}\"\nrows = {}\ncols = {}\nsubmit_cloud = {}\nsubmit_time_ms = {}\n",
                         workload::to_string(w.model), w.rows, w.cols, quote(w.submit_cloud), w.submit_time_ms);
        if (w.demand.kind == workload::Demand::Kind::Constant) {
            o += fmt::format("demand = \"constant\"\ndemand_ghz_s = {}\n\n", w.demand.lo);
        } else {
            o += fmt::format("demand = \"uniform\"\ndemand_lo = {}\ndemand_hi = {}\n\n", w.demand.lo, w.demand.hi);
        }
    }
    return o;
}

}  // namespace fedmesh
