#include "tsync/config.hpp"

#include "tsync/errors.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace tsync {

using nlohmann::json;

namespace {

// Error with a dotted key path; converted to a line number once the text is known.
struct KeyError {
    std::string path;
    std::string message;
};

[[noreturn]] void fail(const std::string& path, const std::string& message)
{
    throw KeyError{path, message};
}

std::string join(const std::string& prefix, const std::string& key)
{
    return prefix.empty() ? key : prefix + "." + key;
}

void reject_unknown(const json& object, const std::string& prefix,
                    std::initializer_list<const char*> known)
{
    if (!object.is_object()) {
        fail(prefix, "must be an object");
    }
    const std::set<std::string> allowed(known.begin(), known.end());
    for (const auto& item : object.items()) {
        if (!allowed.contains(item.key())) {
            fail(join(prefix, item.key()), "unknown key");
        }
    }
}

double read_double(const json& object, const std::string& prefix, const char* key, double fallback)
{
    if (!object.contains(key)) {
        return fallback;
    }
    const json& v = object.at(key);
    if (!v.is_number()) {
        fail(join(prefix, key), "must be a number");
    }
    const double x = v.get<double>();
    if (!std::isfinite(x)) {
        fail(join(prefix, key), "must be finite");
    }
    return x;
}

std::optional<double> read_optional(const json& object, const std::string& prefix, const char* key,
                                    std::optional<double> fallback)
{
    if (!object.contains(key)) {
        return fallback;
    }
    if (object.at(key).is_null()) {
        return std::nullopt;
    }
    return read_double(object, prefix, key, 0.0);
}

std::uint64_t read_unsigned(const json& object, const std::string& prefix, const char* key,
                            std::uint64_t fallback)
{
    if (!object.contains(key)) {
        return fallback;
    }
    const json& v = object.at(key);
    if (v.is_number_unsigned()) {
        return v.get<std::uint64_t>();
    }
    if (v.is_number_integer() && v.get<std::int64_t>() >= 0) {
        return static_cast<std::uint64_t>(v.get<std::int64_t>());
    }
    fail(join(prefix, key), "must be a nonnegative integer");
}

bool read_bool(const json& object, const std::string& prefix, const char* key, bool fallback)
{
    if (!object.contains(key)) {
        return fallback;
    }
    if (!object.at(key).is_boolean()) {
        fail(join(prefix, key), "must be true or false");
    }
    return object.at(key).get<bool>();
}

std::vector<double> read_doubles(const json& object, const std::string& prefix, const char* key,
                                 std::vector<double> fallback)
{
    if (!object.contains(key)) {
        return fallback;
    }
    const json& v = object.at(key);
    if (!v.is_array()) {
        fail(join(prefix, key), "must be an array of numbers");
    }
    std::vector<double> out;
    for (const auto& x : v) {
        if (!x.is_number() || !std::isfinite(x.get<double>())) {
            fail(join(prefix, key), "must be an array of finite numbers");
        }
        out.push_back(x.get<double>());
    }
    return out;
}

std::vector<std::size_t> read_counts(const json& object, const std::string& prefix, const char* key,
                                     std::vector<std::size_t> fallback)
{
    if (!object.contains(key)) {
        return fallback;
    }
    const json& v = object.at(key);
    if (!v.is_array()) {
        fail(join(prefix, key), "must be an array of positive integers");
    }
    std::vector<std::size_t> out;
    for (const auto& x : v) {
        if (!x.is_number_unsigned()) {
            fail(join(prefix, key), "must be an array of positive integers");
        }
        out.push_back(x.get<std::size_t>());
    }
    return out;
}

const json& section(const json& root, const char* key)
{
    static const json empty = json::object();
    return root.contains(key) ? root.at(key) : empty;
}

ScenarioConfig from_json(const json& root)
{
    reject_unknown(root, "",
                   {"params", "populations", "initial", "horizon", "replicas", "seed", "output_dir",
                    "simulate", "two_particle", "pde", "scan"});
    ScenarioConfig c;

    const json& params = section(root, "params");
    reject_unknown(params, "params", {"v1", "v2", "alpha12", "alpha21"});
    c.params.v1 = read_double(params, "params", "v1", c.params.v1);
    c.params.v2 = read_double(params, "params", "v2", c.params.v2);
    c.params.alpha12 = read_double(params, "params", "alpha12", c.params.alpha12);
    c.params.alpha21 = read_double(params, "params", "alpha21", c.params.alpha21);

    const json& pop = section(root, "populations");
    reject_unknown(pop, "populations", {"n1", "n2", "total", "c1"});
    const bool has_counts = pop.contains("n1") || pop.contains("n2");
    const bool has_fraction = pop.contains("total") || pop.contains("c1");
    if (has_counts && has_fraction) {
        fail("populations", "give either n1/n2 or total/c1, not both");
    }
    c.populations.fractional = has_fraction;
    c.populations.n1 = read_unsigned(pop, "populations", "n1", c.populations.n1);
    c.populations.n2 = read_unsigned(pop, "populations", "n2", c.populations.n2);
    c.populations.total = read_unsigned(pop, "populations", "total", c.populations.total);
    c.populations.c1 = read_double(pop, "populations", "c1", c.populations.c1);

    if (root.contains("initial")) {
        const json& init = root.at("initial");
        if (!init.is_object() || !init.contains("kind") || !init.at("kind").is_string()) {
            fail("initial.kind", "must be one of \"zero\", \"explicit\", \"gaussian\"");
        }
        const auto kind = init.at("kind").get<std::string>();
        if (kind == "zero") {
            reject_unknown(init, "initial", {"kind"});
            c.initial = SingularStart{};
        } else if (kind == "explicit") {
            reject_unknown(init, "initial", {"kind", "positions1", "positions2"});
            c.initial = ExplicitStart{read_doubles(init, "initial", "positions1", {}),
                                      read_doubles(init, "initial", "positions2", {})};
        } else if (kind == "gaussian") {
            reject_unknown(init, "initial", {"kind", "mean1", "sd1", "mean2", "sd2"});
            GaussianStart g;
            g.mean1 = read_double(init, "initial", "mean1", g.mean1);
            g.sd1 = read_double(init, "initial", "sd1", g.sd1);
            g.mean2 = read_double(init, "initial", "mean2", g.mean2);
            g.sd2 = read_double(init, "initial", "sd2", g.sd2);
            c.initial = g;
        } else {
            fail("initial.kind", "must be one of \"zero\", \"explicit\", \"gaussian\"");
        }
    }

    c.horizon = read_double(root, "", "horizon", c.horizon);
    c.replicas = read_unsigned(root, "", "replicas", c.replicas);
    c.seed = read_unsigned(root, "", "seed", c.seed);
    if (root.contains("output_dir")) {
        if (!root.at("output_dir").is_string()) {
            fail("output_dir", "must be a string");
        }
        c.output_dir = root.at("output_dir").get<std::string>();
    }

    const json& sim = section(root, "simulate");
    reject_unknown(sim, "simulate", {"observations", "trajectory"});
    c.simulate.observations = read_unsigned(sim, "simulate", "observations", c.simulate.observations);
    c.simulate.trajectory = read_bool(sim, "simulate", "trajectory", c.simulate.trajectory);

    const json& two = section(root, "two_particle");
    reject_unknown(two, "two_particle", {"burnin", "samples", "spacing"});
    c.two_particle.burnin = read_double(two, "two_particle", "burnin", c.two_particle.burnin);
    c.two_particle.samples = read_unsigned(two, "two_particle", "samples", c.two_particle.samples);
    c.two_particle.spacing = read_optional(two, "two_particle", "spacing", c.two_particle.spacing);

    const json& pde = section(root, "pde");
    reject_unknown(pde, "pde",
                   {"min_cells", "times", "fv_dt", "disagreement_tolerance", "profile_extent",
                    "profile_step"});
    c.pde.min_cells = read_unsigned(pde, "pde", "min_cells", c.pde.min_cells);
    c.pde.times = read_doubles(pde, "pde", "times", c.pde.times);
    c.pde.fv_dt = read_optional(pde, "pde", "fv_dt", c.pde.fv_dt);
    c.pde.disagreement_tolerance =
        read_double(pde, "pde", "disagreement_tolerance", c.pde.disagreement_tolerance);
    c.pde.profile_extent = read_double(pde, "pde", "profile_extent", c.pde.profile_extent);
    c.pde.profile_step = read_double(pde, "pde", "profile_step", c.pde.profile_step);

    const json& scan = section(root, "scan");
    reject_unknown(scan, "scan", {"totals", "c1", "s_values", "replicas"});
    c.scan.totals = read_counts(scan, "scan", "totals", c.scan.totals);
    c.scan.c1 = read_double(scan, "scan", "c1", c.scan.c1);
    c.scan.s_values = read_doubles(scan, "scan", "s_values", c.scan.s_values);
    c.scan.replicas = read_unsigned(scan, "scan", "replicas", c.scan.replicas);
    return c;
}

void check(bool ok, const std::string& path, const std::string& message)
{
    if (!ok) {
        fail(path, message);
    }
}

std::string number(double x)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", x);
    return buf;
}

void validate_paths(const ScenarioConfig& c)
{
    const ModelParams& p = c.params;
    check(p.alpha12 > 0.0, "params.alpha12", "must be positive");
    check(p.alpha21 > 0.0, "params.alpha21", "must be positive");
    check(p.v1 <= p.v2, "params.v2", "must be >= params.v1");

    const PopulationSpec& pop = c.populations;
    if (pop.fractional) {
        check(pop.c1 > 0.0 && pop.c1 < 1.0, "populations.c1",
              "must lie in (0, 1), got " + number(pop.c1));
        const auto n1 = static_cast<std::size_t>(std::floor(pop.c1 * static_cast<double>(pop.total)));
        check(n1 >= 1 && n1 < pop.total, "populations.total",
              "leaves a type empty at c1 = " + number(pop.c1));
    } else {
        check(pop.n1 >= 1, "populations.n1", "must be at least 1");
        check(pop.n2 >= 1, "populations.n2", "must be at least 1");
    }

    if (const auto* e = std::get_if<ExplicitStart>(&c.initial)) {
        const auto [n1, n2] = pop.counts();
        check(e->positions1.size() == n1, "initial.positions1",
              "must list " + std::to_string(n1) + " positions");
        check(e->positions2.size() == n2, "initial.positions2",
              "must list " + std::to_string(n2) + " positions");
    }
    if (const auto* g = std::get_if<GaussianStart>(&c.initial)) {
        check(g->sd1 > 0.0, "initial.sd1", "must be positive");
        check(g->sd2 > 0.0, "initial.sd2", "must be positive");
    }

    check(c.horizon > 0.0, "horizon", "must be positive");
    check(c.replicas >= 2, "replicas", "must be at least 2");
    check(!c.output_dir.empty(), "output_dir", "must not be empty");
    check(c.simulate.observations >= 2, "simulate.observations", "must be at least 2");

    check(c.two_particle.burnin >= 0.0, "two_particle.burnin", "must be nonnegative");
    check(!c.two_particle.spacing || *c.two_particle.spacing > 0.0, "two_particle.spacing",
          "must be positive");

    check(c.pde.min_cells >= 8 && c.pde.min_cells <= (std::size_t{1} << 24), "pde.min_cells",
          "must lie in [8, 2^24]");
    check(!c.pde.times.empty(), "pde.times", "must not be empty");
    for (double t : c.pde.times) {
        check(t > 0.0, "pde.times", "must be positive");
    }
    check(!c.pde.fv_dt || *c.pde.fv_dt > 0.0, "pde.fv_dt", "must be positive");
    check(c.pde.disagreement_tolerance > 0.0, "pde.disagreement_tolerance", "must be positive");
    check(c.pde.profile_extent > 0.0, "pde.profile_extent", "must be positive");
    check(c.pde.profile_step > 0.0 && c.pde.profile_step <= c.pde.profile_extent, "pde.profile_step",
          "must lie in (0, profile_extent]");

    check(!c.scan.totals.empty(), "scan.totals", "must not be empty");
    check(c.scan.c1 > 0.0 && c.scan.c1 < 1.0, "scan.c1",
          "must lie in (0, 1), got " + number(c.scan.c1));
    for (std::size_t n : c.scan.totals) {
        const auto n1 = static_cast<std::size_t>(std::floor(c.scan.c1 * static_cast<double>(n)));
        check(n1 >= 1 && n1 < n, "scan.totals", "population " + std::to_string(n) +
                                                    " leaves a type empty");
    }
    std::set<double> distinct(c.scan.s_values.begin(), c.scan.s_values.end());
    check(distinct.size() >= 4, "scan.s_values", "needs at least 4 distinct values");
    for (double s : c.scan.s_values) {
        check(s > 0.0, "scan.s_values", "must be positive");
    }
    check(c.scan.replicas >= 2, "scan.replicas", "must be at least 2");
}

int line_of_offset(std::string_view text, std::size_t offset)
{
    offset = std::min(offset, text.size());
    int line = 1;
    for (std::size_t k = 0; k < offset; ++k) {
        if (text[k] == '\n') {
            ++line;
        }
    }
    return line;
}

// Line of the innermost key of a dotted path, found by walking the quoted
// keys in order; 0 when a key cannot be found (e.g. a defaulted field).
int line_of_path(std::string_view text, const std::string& path)
{
    if (path.empty()) {
        return 0;
    }
    std::size_t from = 0;
    std::size_t found = std::string_view::npos;
    std::stringstream parts(path);
    std::string key;
    while (std::getline(parts, key, '.')) {
        const std::string quoted = "\"" + key + "\"";
        std::size_t pos = text.find(quoted, from);
        while (pos != std::string_view::npos) {
            std::size_t after = pos + quoted.size();
            while (after < text.size() && std::isspace(static_cast<unsigned char>(text[after]))) {
                ++after;
            }
            if (after < text.size() && text[after] == ':') {
                break;
            }
            pos = text.find(quoted, pos + 1);
        }
        if (pos == std::string_view::npos) {
            return found == std::string_view::npos ? 0 : line_of_offset(text, found);
        }
        found = pos;
        from = pos + quoted.size();
    }
    return line_of_offset(text, found);
}

std::string located(int line, const std::string& message)
{
    return line > 0 ? "line " + std::to_string(line) + ": " + message : message;
}

} // namespace

std::pair<std::size_t, std::size_t> PopulationSpec::counts() const
{
    if (!fractional) {
        return {n1, n2};
    }
    const auto first = static_cast<std::size_t>(std::floor(c1 * static_cast<double>(total)));
    return {first, total - first};
}

void validate(const ScenarioConfig& config)
{
    try {
        validate_paths(config);
    } catch (const KeyError& e) {
        throw ConfigError(e.path + ": " + e.message, 0);
    }
}

ScenarioConfig parse_config(std::string_view text)
{
    json root;
    try {
        root = json::parse(text.begin(), text.end());
    } catch (const json::parse_error& e) {
        const int line = line_of_offset(text, e.byte > 0 ? e.byte - 1 : 0);
        throw ConfigError(located(line, std::string("malformed JSON: ") + e.what()), line);
    }
    try {
        ScenarioConfig config = from_json(root);
        validate_paths(config);
        return config;
    } catch (const KeyError& e) {
        const int line = line_of_path(text, e.path);
        throw ConfigError(located(line, e.path + ": " + e.message), line);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("invalid configuration: ") + e.what(), 0);
    }
}

ScenarioConfig load_config(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ConfigError("cannot read config file " + path.string(), 0);
    }
    std::stringstream buffer;
    buffer << in.rdbuf();
    try {
        return parse_config(buffer.str());
    } catch (const ConfigError& e) {
        throw ConfigError(path.string() + ":" + e.what(), e.line());
    }
}

json to_json(const ScenarioConfig& c)
{
    json out;
    out["params"] = {{"v1", c.params.v1},
                     {"v2", c.params.v2},
                     {"alpha12", c.params.alpha12},
                     {"alpha21", c.params.alpha21}};
    if (c.populations.fractional) {
        out["populations"] = {{"total", c.populations.total}, {"c1", c.populations.c1}};
    } else {
        out["populations"] = {{"n1", c.populations.n1}, {"n2", c.populations.n2}};
    }
    if (const auto* e = std::get_if<ExplicitStart>(&c.initial)) {
        out["initial"] = {{"kind", "explicit"}, {"positions1", e->positions1}, {"positions2", e->positions2}};
    } else if (const auto* g = std::get_if<GaussianStart>(&c.initial)) {
        out["initial"] = {{"kind", "gaussian"}, {"mean1", g->mean1}, {"sd1", g->sd1},
                          {"mean2", g->mean2},  {"sd2", g->sd2}};
    } else {
        out["initial"] = {{"kind", "zero"}};
    }
    out["horizon"] = c.horizon;
    out["replicas"] = c.replicas;
    out["seed"] = c.seed;
    out["output_dir"] = c.output_dir;
    out["simulate"] = {{"observations", c.simulate.observations}, {"trajectory", c.simulate.trajectory}};
    out["two_particle"] = {{"burnin", c.two_particle.burnin},
                           {"samples", c.two_particle.samples},
                           {"spacing", c.two_particle.spacing ? json(*c.two_particle.spacing) : json()}};
    out["pde"] = {{"min_cells", c.pde.min_cells},
                  {"times", c.pde.times},
                  {"fv_dt", c.pde.fv_dt ? json(*c.pde.fv_dt) : json()},
                  {"disagreement_tolerance", c.pde.disagreement_tolerance},
                  {"profile_extent", c.pde.profile_extent},
                  {"profile_step", c.pde.profile_step}};
    out["scan"] = {{"totals", c.scan.totals},
                   {"c1", c.scan.c1},
                   {"s_values", c.scan.s_values},
                   {"replicas", c.scan.replicas}};
    return out;
}

std::string canonical_dump(const ScenarioConfig& config)
{
    return to_json(config).dump();
}

std::string fnv1a_hex(std::string_view bytes)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const unsigned char ch : bytes) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string config_hash(const ScenarioConfig& config)
{
    return fnv1a_hex(canonical_dump(config));
}

} // namespace tsync
