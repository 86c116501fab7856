#include "ksns/harness/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

namespace ksns::harness {

namespace {

struct Token {
    std::string text;
    bool quoted = false;
};

struct Fail {
    std::string message;
};

std::vector<Token> tokenize(const std::string& value)
{
    std::vector<Token> out;
    std::size_t i = 0;
    while (i < value.size()) {
        const char ch = value[i];
        if (ch == ' ' || ch == '\t' || ch == ',') {
            ++i;
            continue;
        }
        if (ch == '"') {
            const std::size_t end = value.find('"', i + 1);
            if (end == std::string::npos) throw Fail{"unterminated string"};
            out.push_back({value.substr(i + 1, end - i - 1), true});
            i = end + 1;
            continue;
        }
        std::size_t end = i;
        while (end < value.size() && value[end] != ' ' && value[end] != '\t' && value[end] != ',' && value[end] != '"')
            ++end;
        out.push_back({value.substr(i, end - i), false});
        i = end;
    }
    return out;
}

std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

// Strips a trailing comment, ignoring '#' inside quotes.
std::string strip_comment(const std::string& line)
{
    bool in_string = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        if (line[i] == '"') in_string = !in_string;
        if (line[i] == '#' && !in_string) return line.substr(0, i);
    }
    return line;
}

double to_real(const Token& t)
{
    if (t.quoted) throw Fail{"expected a number, got a string"};
    double v = 0.0;
    const char* b = t.text.data();
    const char* e = b + t.text.size();
    auto r = std::from_chars(b, e, v);
    if (r.ec != std::errc() || r.ptr != e) throw Fail{"'" + t.text + "' is not a number"};
    return v;
}

long long to_integer(const Token& t)
{
    if (t.quoted) throw Fail{"expected an integer, got a string"};
    long long v = 0;
    const char* b = t.text.data();
    const char* e = b + t.text.size();
    auto r = std::from_chars(b, e, v);
    if (r.ec != std::errc() || r.ptr != e) throw Fail{"'" + t.text + "' is not an integer"};
    return v;
}

bool to_bool(const Token& t)
{
    if (!t.quoted && t.text == "true") return true;
    if (!t.quoted && t.text == "false") return false;
    throw Fail{"expected true or false"};
}

const Token& single(const std::vector<Token>& v)
{
    if (v.size() != 1) throw Fail{"expected exactly one value"};
    return v.front();
}

std::string to_string_value(const std::vector<Token>& v)
{
    const Token& t = single(v);
    if (!t.quoted) throw Fail{"expected a double-quoted string"};
    return t.text;
}

model::Expression to_expression(const Token& t)
{
    if (!t.quoted) throw Fail{"expressions must be double-quoted"};
    try {
        return model::Expression::parse(t.text);
    } catch (const model::ExpressionError& e) {
        throw Fail{e.what()};
    }
}

std::string real(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string quote(const std::string& s) { return "\"" + s + "\""; }

struct Key {
    std::function<void(ScenarioConfig&, const std::vector<Token>&)> set;
    std::function<std::string(const ScenarioConfig&)> get;
};

using KeyTable = std::vector<std::pair<std::string, Key>>;

template <class Get>
Key real_field(Get field)
{
    return {[field](ScenarioConfig& c, const std::vector<Token>& v) { field(c) = to_real(single(v)); },
            [field](const ScenarioConfig& c) { return real(field(const_cast<ScenarioConfig&>(c))); }};
}

template <class Get>
Key bool_field(Get field)
{
    return {[field](ScenarioConfig& c, const std::vector<Token>& v) { field(c) = to_bool(single(v)); },
            [field](const ScenarioConfig& c) {
                return std::string(field(const_cast<ScenarioConfig&>(c)) ? "true" : "false");
            }};
}

template <class Get>
Key expression_field(Get field)
{
    return {[field](ScenarioConfig& c, const std::vector<Token>& v) { field(c) = to_expression(single(v)); },
            [field](const ScenarioConfig& c) { return quote(field(const_cast<ScenarioConfig&>(c)).source()); }};
}

const KeyTable& key_table()
{
    static const KeyTable table = [] {
        KeyTable t;
        t.emplace_back("name", Key{[](ScenarioConfig& c, const std::vector<Token>& v) {
                                       c.name = to_string_value(v);
                                   },
                                   [](const ScenarioConfig& c) { return quote(c.name); }});
        t.emplace_back("grid.dim", Key{[](ScenarioConfig& c, const std::vector<Token>& v) {
                                           c.grid.dim = static_cast<int>(to_integer(single(v)));
                                       },
                                       [](const ScenarioConfig& c) { return std::to_string(c.grid.dim); }});
        t.emplace_back("grid.cells", Key{[](ScenarioConfig& c, const std::vector<Token>& v) {
                                             if (v.empty() || v.size() > 3) throw Fail{"expected 2 or 3 cell counts"};
                                             c.grid.cells = {1, 1, 1};
                                             for (std::size_t a = 0; a < v.size(); ++a) {
                                                 const long long n = to_integer(v[a]);
                                                 if (n < 1 || n > (1 << 24)) throw Fail{"cell count out of range"};
                                                 c.grid.cells[a] = static_cast<int>(n);
                                             }
                                         },
                                         [](const ScenarioConfig& c) {
                                             std::string s;
                                             for (int a = 0; a < c.grid.dim; ++a)
                                                 s += (a ? " " : "") + std::to_string(c.grid.cells[a]);
                                             return s;
                                         }});
        t.emplace_back("grid.lengths", Key{[](ScenarioConfig& c, const std::vector<Token>& v) {
                                               if (v.empty() || v.size() > 3) throw Fail{"expected 2 or 3 lengths"};
                                               c.grid.lengths = {1.0, 1.0, 1.0};
                                               for (std::size_t a = 0; a < v.size(); ++a) c.grid.lengths[a] = to_real(v[a]);
                                           },
                                           [](const ScenarioConfig& c) {
                                               std::string s;
                                               for (int a = 0; a < c.grid.dim; ++a)
                                                   s += (a ? " " : "") + real(c.grid.lengths[a]);
                                               return s;
                                           }});
        t.emplace_back("grid.max_cells", Key{[](ScenarioConfig& c, const std::vector<Token>& v) {
                                                 const long long n = to_integer(single(v));
                                                 if (n < 1) throw Fail{"must be positive"};
                                                 c.grid.max_cells = static_cast<std::size_t>(n);
                                             },
                                             [](const ScenarioConfig& c) { return std::to_string(c.grid.max_cells); }});

#define KSNS_REAL(key, member) t.emplace_back(key, real_field([](ScenarioConfig& c) -> double& { return c.member; }))
        KSNS_REAL("model.chi1", model.chi1);
        KSNS_REAL("model.chi2", model.chi2);
        KSNS_REAL("model.a1", model.a1);
        KSNS_REAL("model.a2", model.a2);
        KSNS_REAL("model.mu1", model.mu1);
        KSNS_REAL("model.mu2", model.mu2);
        KSNS_REAL("model.alpha", model.alpha);
        KSNS_REAL("model.beta", model.beta);
        KSNS_REAL("model.gamma", model.gamma);
        KSNS_REAL("model.delta", model.delta);
        t.emplace_back("model.kappa", Key{[](ScenarioConfig& c, const std::vector<Token>& v) {
                                              c.model.kappa = static_cast<int>(to_integer(single(v)));
                                          },
                                          [](const ScenarioConfig& c) { return std::to_string(c.model.kappa); }});
        KSNS_REAL("model.eps", model.eps);

#define KSNS_EXPR(key, member) \
    t.emplace_back(key, expression_field([](ScenarioConfig& c) -> model::Expression& { return c.member; }))
        KSNS_EXPR("init.n1", init.n1);
        KSNS_EXPR("init.n2", init.n2);
        KSNS_EXPR("init.c", init.c);
        t.emplace_back("init.u", Key{[](ScenarioConfig& c, const std::vector<Token>& v) {
                                         if (v.size() > 3) throw Fail{"at most 3 velocity components"};
                                         c.init.u.clear();
                                         for (const Token& tok : v) c.init.u.push_back(to_expression(tok));
                                     },
                                     [](const ScenarioConfig& c) {
                                         std::string s;
                                         for (const auto& e : c.init.u) s += (s.empty() ? "" : ", ") + quote(e.source());
                                         return s;
                                     }});
        KSNS_EXPR("potential.phi", potential);
#undef KSNS_EXPR

        KSNS_REAL("energy.chi", energy.chi);
        KSNS_REAL("energy.kbar", energy.kbar);
        KSNS_REAL("energy.B", energy.B);
        KSNS_REAL("flow.poisson_tol", flow.poisson_tol);
        KSNS_REAL("flow.helmholtz_tol", flow.helmholtz_tol);
        KSNS_REAL("flow.cfl_safety", flow.cfl_safety);
        KSNS_REAL("transport.cfl_safety", transport.cfl_safety);
        KSNS_REAL("transport.dt_max", transport.dt_max);
        KSNS_REAL("transport.dt_min", transport.dt_min);
        KSNS_REAL("transport.helmholtz_tol", transport.helmholtz_tol);
        KSNS_REAL("run.t_end", run.t_end);
        KSNS_REAL("run.dt_fixed", run.dt_fixed);
        KSNS_REAL("run.blowup_ceiling", run.blowup_ceiling);
        KSNS_REAL("run.w1q_exponent", run.w1q_exponent);
        t.emplace_back("run.seed", Key{[](ScenarioConfig& c, const std::vector<Token>& v) {
                                           const long long s = to_integer(single(v));
                                           if (s < 0) throw Fail{"seed must be nonnegative"};
                                           c.run.seed = static_cast<std::uint64_t>(s);
                                       },
                                       [](const ScenarioConfig& c) { return std::to_string(c.run.seed); }});
        KSNS_REAL("output.cadence", output.cadence);
#undef KSNS_REAL
        t.emplace_back("output.snapshots", bool_field([](ScenarioConfig& c) -> bool& { return c.output.snapshots; }));
        t.emplace_back("output.vtk", bool_field([](ScenarioConfig& c) -> bool& { return c.output.vtk; }));
        t.emplace_back("output.dir", Key{[](ScenarioConfig& c, const std::vector<Token>& v) {
                                             c.output.dir = to_string_value(v);
                                         },
                                         [](const ScenarioConfig& c) { return quote(c.output.dir); }});
        return t;
    }();
    return table;
}

const Key* find_key(const std::string& name)
{
    for (const auto& [k, v] : key_table())
        if (k == name) return &v;
    return nullptr;
}

// Line of each key in the text being parsed, for semantic errors.
using LineMap = std::map<std::string, int>;

void apply_text(ScenarioConfig& cfg, const std::string& text, const std::string& source, LineMap& lines)
{
    std::istringstream in(text);
    std::string raw;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        const std::string line = trim(strip_comment(raw));
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError(source, line_no, "expected 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        const Key* k = find_key(key);
        if (!k) throw ConfigError(source, line_no, "unknown key '" + key + "'");
        if (lines.count(key)) throw ConfigError(source, line_no, "duplicate key '" + key + "'");
        lines[key] = line_no;
        try {
            const std::vector<Token> tokens = tokenize(value);
            if (tokens.empty() && key != "init.u") throw Fail{"missing value"};
            k->set(cfg, tokens);
        } catch (const Fail& f) {
            throw ConfigError(source, line_no, key + ": " + f.message);
        }
    }
}

void validate_with_lines(const ScenarioConfig& c, const std::string& source, const LineMap& lines)
{
    auto fail = [&](const std::string& key, const std::string& msg) {
        const auto it = lines.find(key);
        throw ConfigError(source, it == lines.end() ? 0 : it->second, key + ": " + msg);
    };
    auto positive = [&](const std::string& key, double v) {
        if (!(std::isfinite(v) && v > 0.0)) fail(key, "must be a positive finite number");
    };
    if (c.grid.dim != 2 && c.grid.dim != 3) fail("grid.dim", "must be 2 or 3");
    for (int a = c.grid.dim; a < 3; ++a) {
        if (c.grid.cells[a] != 1) fail("grid.cells", "expected one cell count per axis");
        if (c.grid.lengths[a] != 1.0) fail("grid.lengths", "expected one length per axis");
    }
    try {
        (void)c.grid.make();
    } catch (const core::GridError& e) {
        fail(lines.count("grid.cells") ? "grid.cells" : "grid.dim", e.what());
    }
    try {
        c.model.validate();
    } catch (const model::ParameterError& e) {
        const std::string msg = e.what();
        const std::string key = msg.substr(0, msg.find(' '));
        fail(key, msg.substr(msg.find(' ') + 1));
    }
    if (!c.init.u.empty() && static_cast<int>(c.init.u.size()) != c.grid.dim)
        fail("init.u", "needs one expression per axis");
    positive("energy.chi", c.energy.chi);
    positive("energy.kbar", c.energy.kbar);
    positive("energy.B", c.energy.B);
    positive("flow.poisson_tol", c.flow.poisson_tol);
    positive("flow.helmholtz_tol", c.flow.helmholtz_tol);
    positive("flow.cfl_safety", c.flow.cfl_safety);
    if (c.flow.cfl_safety > 1.0) fail("flow.cfl_safety", "must not exceed 1");
    positive("transport.cfl_safety", c.transport.cfl_safety);
    if (c.transport.cfl_safety > 1.0) fail("transport.cfl_safety", "must not exceed 1");
    positive("transport.dt_max", c.transport.dt_max);
    positive("transport.dt_min", c.transport.dt_min);
    positive("transport.helmholtz_tol", c.transport.helmholtz_tol);
    if (c.transport.dt_min > c.transport.dt_max) fail("transport.dt_min", "must not exceed transport.dt_max");
    positive("run.t_end", c.run.t_end);
    if (!(std::isfinite(c.run.dt_fixed) && c.run.dt_fixed >= 0.0)) fail("run.dt_fixed", "must be >= 0");
    if (c.run.dt_fixed > 0.0) {
        const double steps = c.run.t_end / c.run.dt_fixed;
        if (std::abs(steps - std::round(steps)) > 1e-9 * steps)
            fail("run.dt_fixed", "must divide run.t_end into a whole number of steps");
        const double per_output = c.output.cadence / c.run.dt_fixed;
        if (std::abs(per_output - std::round(per_output)) > 1e-9 * per_output || std::round(per_output) < 1.0)
            fail("output.cadence", "must be a whole multiple of run.dt_fixed");
    }
    positive("run.blowup_ceiling", c.run.blowup_ceiling);
    if (!(c.run.w1q_exponent > 3.0) || !std::isfinite(c.run.w1q_exponent)) fail("run.w1q_exponent", "must exceed 3");
    positive("output.cadence", c.output.cadence);
    if (c.output.dir.empty()) fail("output.dir", "must not be empty");
}

}  // namespace

ConfigError::ConfigError(const std::string& src, int ln, const std::string& message)
    : std::runtime_error(src + (ln > 0 ? ":" + std::to_string(ln) : std::string()) + ": " + message),
      source(src),
      line(ln)
{
}

core::Grid GridSpec::make() const
{
    return core::Grid::make(dim, std::span<const int>(cells.data(), static_cast<std::size_t>(dim)),
                            std::span<const double>(lengths.data(), static_cast<std::size_t>(dim)), max_cells);
}

ScenarioConfig parse_config(const std::string& text, const std::string& source)
{
    ScenarioConfig cfg;
    LineMap lines;
    apply_text(cfg, text, source, lines);
    validate_with_lines(cfg, source, lines);
    return cfg;
}

ScenarioConfig load_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw ConfigError(path, 0, "cannot open file");
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str(), path);
}

ScenarioConfig apply_overrides(ScenarioConfig cfg, const std::vector<std::string>& overrides)
{
    std::string text;
    for (const auto& o : overrides) text += o + "\n";
    LineMap lines;
    apply_text(cfg, text, "<overrides>", lines);
    validate_with_lines(cfg, "<overrides>", lines);
    return cfg;
}

void validate_config(const ScenarioConfig& cfg, const std::string& source) { validate_with_lines(cfg, source, {}); }

const std::vector<std::string>& config_keys()
{
    static const std::vector<std::string> keys = [] {
        std::vector<std::string> k;
        for (const auto& [name, _] : key_table()) k.push_back(name);
        return k;
    }();
    return keys;
}

std::string serialize_config(const ScenarioConfig& cfg)
{
    std::string out;
    std::string section;
    for (const auto& [name, key] : key_table()) {
        const auto dot = name.find('.');
        const std::string sec = dot == std::string::npos ? std::string() : name.substr(0, dot);
        if (sec != section && !out.empty()) out += "\n";
        section = sec;
        out += name + " = " + key.get(cfg) + "\n";
    }
    return out;
}

std::string config_hash(const ScenarioConfig& cfg)
{
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char ch : serialize_config(cfg)) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace ksns::harness
