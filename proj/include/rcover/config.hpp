#ifndef RCOVER_CONFIG_HPP
#define RCOVER_CONFIG_HPP

// Experiment configuration in a small TOML-style format:
//
//   # comment
//   [family]
//   kind = "balls"            # balls | boxes | affine
//   dim = 1
//   coefficients = [1.0]
//   exponents = [1.3]
//
//   [run]
//   seed = 7
//   t = 0.5
//
// Supported values are quoted strings, integers, reals, booleans and flat
// arrays of numbers. Unknown sections or keys are errors.

#include <rcover/errors.hpp>
#include <rcover/family.hpp>
#include <rcover/frostman.hpp>
#include <rcover/shapes.hpp>

#include <cctype>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

namespace rcover {

class ConfigError : public DomainError {
public:
    using DomainError::DomainError;
};

struct FamilyConfig {
    std::string kind = "balls";
    int dim = 1;
    std::vector<double> coefficients{1.0};
    std::vector<double> exponents{1.3};
    std::vector<double> rotation; ///< row-major d x d; empty means identity

    friend bool operator==(const FamilyConfig&, const FamilyConfig&) = default;
};

struct ShapeConfig {
    std::string kind = "interval"; ///< interval | ball | box | affine
    int dim = 1;
    double radius = 0.5;
    std::vector<double> sides{1.0};
    std::vector<double> rotation;

    friend bool operator==(const ShapeConfig&, const ShapeConfig&) = default;
};

struct RunConfig {
    std::uint64_t seed = 1;
    double t = 0.5;
    std::int64_t n = 100000;
    int resolution = 4096;
    std::vector<std::int64_t> m_list{1, 5, 10, 20};
    int m = 10;
    std::vector<std::int64_t> k_list{100, 1000, 10000};
    int trials = 200;
    std::string phi = "cos2pi_x1";
    std::string schedule = "log_ratio";
    std::string method = "quadrature"; ///< closed_form | quadrature | monte_carlo
    std::int64_t n_pairs = 1000000;
    int level = kDefaultQuadratureLevel;
    double slack = kDefaultVarianceSlack;

    friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

/// Invocation options; not part of the canonical config or its hash.
struct OutputConfig {
    int threads = 1;
    std::string out;
    std::string format = "csv";
    bool report = false;

    friend bool operator==(const OutputConfig&, const OutputConfig&) = default;
};

struct ExperimentConfig {
    FamilyConfig family;
    ShapeConfig shape;
    RunConfig run;
    OutputConfig output;

    friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

namespace config_detail {

using Value = std::variant<std::string, double, std::int64_t, bool, std::vector<double>>;

inline std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) {
        return "";
    }
    std::size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

// Drops a trailing comment outside of quotes.
inline std::string strip_comment(const std::string& s) {
    bool quoted = false;
    for (std::size_t q = 0; q < s.size(); ++q) {
        if (s[q] == '"') {
            quoted = !quoted;
        } else if (s[q] == '#' && !quoted) {
            return s.substr(0, q);
        }
    }
    return s;
}

inline double parse_real(const std::string& tok, int line) {
    // strtod rather than stod: subnormal values are valid and must round-trip
    char* end = nullptr;
    double v = std::strtod(tok.c_str(), &end);
    if (tok.empty() || end != tok.c_str() + tok.size() || std::isspace(static_cast<unsigned char>(tok[0]))) {
        throw ConfigError("config line " + std::to_string(line) + ": malformed number '" + tok + "'");
    }
    return v;
}

inline bool is_integer_token(const std::string& tok) {
    if (tok.empty()) {
        return false;
    }
    std::size_t q = (tok[0] == '-' || tok[0] == '+') ? 1 : 0;
    if (q == tok.size()) {
        return false;
    }
    for (; q < tok.size(); ++q) {
        if (!std::isdigit(static_cast<unsigned char>(tok[q]))) {
            return false;
        }
    }
    return true;
}

inline Value parse_value(const std::string& raw, int line) {
    std::string v = trim(raw);
    if (v.empty()) {
        throw ConfigError("config line " + std::to_string(line) + ": missing value");
    }
    if (v.front() == '"') {
        if (v.size() < 2 || v.back() != '"') {
            throw ConfigError("config line " + std::to_string(line) + ": unterminated string");
        }
        return v.substr(1, v.size() - 2);
    }
    if (v == "true" || v == "false") {
        return v == "true";
    }
    if (v.front() == '[') {
        if (v.back() != ']') {
            throw ConfigError("config line " + std::to_string(line) + ": unterminated array");
        }
        std::vector<double> xs;
        std::stringstream ss(v.substr(1, v.size() - 2));
        std::string item;
        while (std::getline(ss, item, ',')) {
            item = trim(item);
            if (item.empty()) {
                continue;
            }
            xs.push_back(parse_real(item, line));
        }
        return xs;
    }
    if (is_integer_token(v)) {
        try {
            return static_cast<std::int64_t>(std::stoll(v));
        } catch (const std::exception&) {
            throw ConfigError("config line " + std::to_string(line) + ": integer out of range '" + v + "'");
        }
    }
    return parse_real(v, line);
}

using Table = std::map<std::string, std::map<std::string, std::pair<Value, int>>>;

inline Table parse_table(const std::string& text) {
    Table table;
    std::string section;
    std::stringstream in(text);
    std::string raw;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        std::string s = trim(strip_comment(raw));
        if (s.empty()) {
            continue;
        }
        if (s.front() == '[') {
            if (s.back() != ']') {
                throw ConfigError("config line " + std::to_string(line) + ": malformed section header");
            }
            section = trim(s.substr(1, s.size() - 2));
            continue;
        }
        auto eq = s.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("config line " + std::to_string(line) + ": expected key = value");
        }
        if (section.empty()) {
            throw ConfigError("config line " + std::to_string(line) + ": key outside of a section");
        }
        std::string key = trim(s.substr(0, eq));
        auto& sec = table[section];
        if (sec.count(key) != 0) {
            throw ConfigError("config line " + std::to_string(line) + ": duplicate key '" + key + "'");
        }
        sec.emplace(key, std::make_pair(parse_value(s.substr(eq + 1), line), line));
    }
    return table;
}

struct Reader {
    const std::pair<Value, int>& entry;
    std::string name;

    [[noreturn]] void fail(const std::string& what) const {
        throw ConfigError("config line " + std::to_string(entry.second) + ": '" + name + "' " + what);
    }

    std::string str() const {
        if (auto p = std::get_if<std::string>(&entry.first)) {
            return *p;
        }
        fail("must be a string");
    }
    double real() const {
        if (auto p = std::get_if<double>(&entry.first)) {
            return *p;
        }
        if (auto p = std::get_if<std::int64_t>(&entry.first)) {
            return static_cast<double>(*p);
        }
        fail("must be a number");
    }
    std::int64_t integer() const {
        if (auto p = std::get_if<std::int64_t>(&entry.first)) {
            return *p;
        }
        fail("must be an integer");
    }
    int small_int() const {
        std::int64_t v = integer();
        if (v < -(std::int64_t{1} << 30) || v > (std::int64_t{1} << 30)) {
            fail("is out of range");
        }
        return static_cast<int>(v);
    }
    std::uint64_t seed() const {
        std::int64_t v = integer();
        if (v < 0) {
            fail("must be non-negative");
        }
        return static_cast<std::uint64_t>(v);
    }
    bool boolean() const {
        if (auto p = std::get_if<bool>(&entry.first)) {
            return *p;
        }
        fail("must be true or false");
    }
    std::vector<double> reals() const {
        if (auto p = std::get_if<std::vector<double>>(&entry.first)) {
            return *p;
        }
        fail("must be an array of numbers");
    }
    std::vector<std::int64_t> integers() const {
        std::vector<std::int64_t> out;
        for (double x : reals()) {
            if (x != std::floor(x) || std::abs(x) > 9.0e15) {
                fail("must contain integers");
            }
            out.push_back(static_cast<std::int64_t>(x));
        }
        return out;
    }
};

inline std::string fmt_real(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    std::string s(buf);
    // keep reals distinguishable from integers on re-read
    if (s.find_first_of(".eEn") == std::string::npos) {
        s += ".0";
    }
    return s;
}

inline std::string fmt_reals(const std::vector<double>& xs) {
    std::string s = "[";
    for (std::size_t q = 0; q < xs.size(); ++q) {
        s += (q ? ", " : "") + fmt_real(xs[q]);
    }
    return s + "]";
}

inline std::string fmt_ints(const std::vector<std::int64_t>& xs) {
    std::string s = "[";
    for (std::size_t q = 0; q < xs.size(); ++q) {
        s += (q ? ", " : "") + std::to_string(xs[q]);
    }
    return s + "]";
}

inline std::string quote(const std::string& s) { return "\"" + s + "\""; }

} // namespace config_detail

/// Parses config text; every key is optional and defaults as in ExperimentConfig.
inline ExperimentConfig parse_config(const std::string& text) {
    using namespace config_detail;
    Table table = parse_table(text);
    ExperimentConfig c;
    for (const auto& [section, entries] : table) {
        for (const auto& [key, entry] : entries) {
            Reader r{entry, section + "." + key};
            if (section == "family") {
                if (key == "kind") c.family.kind = r.str();
                else if (key == "dim") c.family.dim = r.small_int();
                else if (key == "coefficients") c.family.coefficients = r.reals();
                else if (key == "exponents") c.family.exponents = r.reals();
                else if (key == "rotation") c.family.rotation = r.reals();
                else r.fail("is not a known key");
            } else if (section == "shape") {
                if (key == "kind") c.shape.kind = r.str();
                else if (key == "dim") c.shape.dim = r.small_int();
                else if (key == "radius") c.shape.radius = r.real();
                else if (key == "sides") c.shape.sides = r.reals();
                else if (key == "rotation") c.shape.rotation = r.reals();
                else r.fail("is not a known key");
            } else if (section == "run") {
                if (key == "seed") c.run.seed = r.seed();
                else if (key == "t") c.run.t = r.real();
                else if (key == "N") c.run.n = r.integer();
                else if (key == "resolution") c.run.resolution = r.small_int();
                else if (key == "M_list") c.run.m_list = r.integers();
                else if (key == "M") c.run.m = r.small_int();
                else if (key == "k_list") c.run.k_list = r.integers();
                else if (key == "trials") c.run.trials = r.small_int();
                else if (key == "phi") c.run.phi = r.str();
                else if (key == "schedule") c.run.schedule = r.str();
                else if (key == "method") c.run.method = r.str();
                else if (key == "n_pairs") c.run.n_pairs = r.integer();
                else if (key == "level") c.run.level = r.small_int();
                else if (key == "slack") c.run.slack = r.real();
                else r.fail("is not a known key");
            } else if (section == "output") {
                if (key == "threads") c.output.threads = r.small_int();
                else if (key == "out") c.output.out = r.str();
                else if (key == "format") c.output.format = r.str();
                else if (key == "report") c.output.report = r.boolean();
                else r.fail("is not a known key");
            } else {
                throw ConfigError("config line " + std::to_string(entry.second) + ": unknown section [" + section +
                                  "]");
            }
        }
    }
    return c;
}

/// Canonical text of the experiment-defining fields (no [output] section).
inline std::string canonical_config(const ExperimentConfig& c) {
    using namespace config_detail;
    std::ostringstream os;
    os << "[family]\n"
       << "kind = " << quote(c.family.kind) << "\n"
       << "dim = " << c.family.dim << "\n"
       << "coefficients = " << fmt_reals(c.family.coefficients) << "\n"
       << "exponents = " << fmt_reals(c.family.exponents) << "\n"
       << "rotation = " << fmt_reals(c.family.rotation) << "\n"
       << "\n[shape]\n"
       << "kind = " << quote(c.shape.kind) << "\n"
       << "dim = " << c.shape.dim << "\n"
       << "radius = " << fmt_real(c.shape.radius) << "\n"
       << "sides = " << fmt_reals(c.shape.sides) << "\n"
       << "rotation = " << fmt_reals(c.shape.rotation) << "\n"
       << "\n[run]\n"
       << "seed = " << c.run.seed << "\n"
       << "t = " << fmt_real(c.run.t) << "\n"
       << "N = " << c.run.n << "\n"
       << "resolution = " << c.run.resolution << "\n"
       << "M_list = " << fmt_ints(c.run.m_list) << "\n"
       << "M = " << c.run.m << "\n"
       << "k_list = " << fmt_ints(c.run.k_list) << "\n"
       << "trials = " << c.run.trials << "\n"
       << "phi = " << quote(c.run.phi) << "\n"
       << "schedule = " << quote(c.run.schedule) << "\n"
       << "method = " << quote(c.run.method) << "\n"
       << "n_pairs = " << c.run.n_pairs << "\n"
       << "level = " << c.run.level << "\n"
       << "slack = " << fmt_real(c.run.slack) << "\n";
    return os.str();
}

/// Full text including the [output] section; parse_config inverts it exactly.
inline std::string serialize_config(const ExperimentConfig& c) {
    using namespace config_detail;
    std::ostringstream os;
    os << canonical_config(c) << "\n[output]\n"
       << "threads = " << c.output.threads << "\n"
       << "out = " << quote(c.output.out) << "\n"
       << "format = " << quote(c.output.format) << "\n"
       << "report = " << (c.output.report ? "true" : "false") << "\n";
    return os.str();
}

/// FNV-1a 64 of the canonical text, as 16 hex digits.
inline std::string config_hash(const ExperimentConfig& c) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : canonical_config(c)) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

namespace config_detail {

inline Matrix rotation_from(const std::vector<double>& r, int d) {
    if (r.empty()) {
        return identity_matrix(d);
    }
    detail::require(static_cast<int>(r.size()) == d * d,
                    "rotation must have d*d = " + std::to_string(d * d) + " entries");
    Matrix m{};
    for (int a = 0; a < d; ++a) {
        for (int b = 0; b < d; ++b) {
            m[static_cast<std::size_t>(a * kMaxDim + b)] = r[static_cast<std::size_t>(a * d + b)];
        }
    }
    return m;
}

} // namespace config_detail

inline SequenceFamily build_family(const FamilyConfig& fc) {
    if (fc.kind == "balls") {
        detail::require(fc.coefficients.size() == 1 && fc.exponents.size() == 1,
                        "ball family takes one coefficient and one exponent");
        return SequenceFamily::balls(fc.dim, fc.coefficients[0], fc.exponents[0]);
    }
    detail::require(static_cast<int>(fc.exponents.size()) == fc.dim,
                    "family: expected dim = " + std::to_string(fc.dim) + " exponents");
    if (fc.kind == "boxes") {
        return SequenceFamily::boxes(fc.coefficients, fc.exponents);
    }
    if (fc.kind == "affine") {
        return SequenceFamily::affine_cubes(fc.coefficients, fc.exponents,
                                            config_detail::rotation_from(fc.rotation, fc.dim));
    }
    throw ConfigError("family.kind must be balls, boxes or affine, got '" + fc.kind + "'");
}

inline ShapeSpec build_shape(const ShapeConfig& sc) {
    if (sc.kind == "interval") {
        detail::require(sc.sides.size() == 1, "interval takes one side length");
        return ShapeSpec::interval(sc.sides[0]);
    }
    if (sc.kind == "ball") {
        return ShapeSpec::ball(sc.dim, sc.radius);
    }
    detail::require(static_cast<int>(sc.sides.size()) == sc.dim,
                    "shape: expected dim = " + std::to_string(sc.dim) + " sides");
    if (sc.kind == "box") {
        return ShapeSpec::box(sc.sides);
    }
    if (sc.kind == "affine") {
        return ShapeSpec::affine_cube(sc.sides, config_detail::rotation_from(sc.rotation, sc.dim));
    }
    throw ConfigError("shape.kind must be interval, ball, box or affine, got '" + sc.kind + "'");
}

inline WindowSchedule build_schedule(const std::string& s) {
    if (s == "log_ratio") {
        return WindowSchedule::log_ratio();
    }
    if (s.rfind("fixed:", 0) == 0) {
        std::string rest = s.substr(6);
        if (config_detail::is_integer_token(rest)) {
            std::int64_t start = std::stoll(rest);
            detail::require(start >= 1, "schedule: fixed start must be >= 1");
            return WindowSchedule::fixed(start);
        }
    }
    throw ConfigError("schedule must be 'log_ratio' or 'fixed:<start>', got '" + s + "'");
}

/// Extracts the embedded config from an artifact, or returns the text unchanged.
///
/// CSV and .dat artifacts carry it as "# " lines after "# config:"; JSON
/// artifacts carry it in the "config" string field.
inline std::string embedded_config_text(const std::string& text) {
    std::size_t first = text.find_first_not_of(" \t\r\n");
    if (first != std::string::npos && text[first] == '{') {
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(text);
        } catch (const nlohmann::json::exception& e) {
            throw ConfigError(std::string("malformed JSON artifact: ") + e.what());
        }
        if (!j.contains("config") || !j["config"].is_string()) {
            throw ConfigError("JSON artifact has no embedded config");
        }
        return j["config"].get<std::string>();
    }
    std::stringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line.rfind("# rcover artifact", 0) != 0) {
        return text;
    }
    std::string out;
    bool inside = false;
    while (std::getline(in, line)) {
        if (line.rfind("#", 0) != 0) {
            break;
        }
        if (line == "# config:") {
            inside = true;
            continue;
        }
        if (line == "# end config") {
            break;
        }
        if (inside) {
            out += line.size() >= 2 ? line.substr(2) : std::string();
            out += "\n";
        }
    }
    if (!inside) {
        throw ConfigError("artifact header has no embedded config");
    }
    return out;
}

inline ExperimentConfig load_config_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ConfigError("cannot read config file '" + path + "'");
    }
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(embedded_config_text(ss.str()));
}

} // namespace rcover

#endif
