#include "criticalwave/app/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <set>
#include <sstream>

namespace criticalwave::app {

using Json = nlohmann::ordered_json;

namespace {

constexpr Scenario kAll[] = {Scenario::ground_state,  Scenario::soliton,     Scenario::pseudoconformal,
                             Scenario::custom_gaussian, Scenario::gn_check,  Scenario::virial_scan,
                             Scenario::inout_check,   Scenario::kernel_scan, Scenario::gronwall_fuzz,
                             Scenario::dispersive_check};

using S = Scenario;
const std::vector<S> kGridded{S::ground_state, S::soliton,     S::pseudoconformal, S::custom_gaussian,
                              S::gn_check,     S::virial_scan, S::inout_check,     S::dispersive_check};
const std::vector<S> kTimed{S::soliton, S::pseudoconformal, S::custom_gaussian, S::virial_scan};

struct Key
{
    std::string name;
    std::vector<S> scenarios; // empty: every scenario
    std::function<void(ScenarioConfig&, const Json&)> read;
    std::function<Json(const ScenarioConfig&)> write;

    bool applies(S s) const { return scenarios.empty() || std::ranges::find(scenarios, s) != scenarios.end(); }
};

[[noreturn]] void bad_value(const std::string& key, const std::string& want)
{
    throw ConfigError("key \"" + key + "\" must be " + want);
}

double as_number(const std::string& key, const Json& v)
{
    if (!v.is_number())
        bad_value(key, "a number");
    const double x = v.get<double>();
    if (!std::isfinite(x))
        bad_value(key, "finite");
    return x;
}

long long as_integer(const std::string& key, const Json& v)
{
    if (!v.is_number_integer())
        bad_value(key, "an integer");
    return v.get<long long>();
}

Key number(std::string name, double ScenarioConfig::*field, std::vector<S> scenarios = {})
{
    return {name, std::move(scenarios), [name, field](ScenarioConfig& c, const Json& v) { c.*field = as_number(name, v); },
            [field](const ScenarioConfig& c) { return Json(c.*field); }};
}

Key integer(std::string name, int ScenarioConfig::*field, std::vector<S> scenarios = {})
{
    return {name, std::move(scenarios),
            [name, field](ScenarioConfig& c, const Json& v) {
                const long long x = as_integer(name, v);
                if (x < std::numeric_limits<int>::min() || x > std::numeric_limits<int>::max())
                    bad_value(name, "a 32-bit integer");
                c.*field = static_cast<int>(x);
            },
            [field](const ScenarioConfig& c) { return Json(c.*field); }};
}

Key number_list(std::string name, std::vector<double> ScenarioConfig::*field, std::vector<S> scenarios)
{
    return {name, std::move(scenarios),
            [name, field](ScenarioConfig& c, const Json& v) {
                if (!v.is_array() || v.empty())
                    bad_value(name, "a non-empty array of numbers");
                (c.*field).clear();
                for (const auto& e : v)
                    (c.*field).push_back(as_number(name, e));
            },
            [field](const ScenarioConfig& c) { return Json(c.*field); }};
}

const std::vector<Key>& key_table()
{
    static const std::vector<Key> table = [] {
        std::vector<Key> k;
        k.push_back({"schema_version", {}, [](ScenarioConfig&, const Json&) {}, [](const ScenarioConfig& c) { return Json(c.schema_version); }});
        k.push_back({"scenario", {}, [](ScenarioConfig&, const Json&) {}, [](const ScenarioConfig& c) { return Json(to_string(c.scenario)); }});
        k.push_back({"seed", {},
                     [](ScenarioConfig& c, const Json& v) {
                         if (!v.is_number_unsigned())
                             bad_value("seed", "a nonnegative integer");
                         c.seed = v.get<std::uint64_t>();
                     },
                     [](const ScenarioConfig& c) { return Json(c.seed); }});
        k.push_back({"output", {},
                     [](ScenarioConfig& c, const Json& v) {
                         if (!v.is_string() || v.get<std::string>().empty())
                             bad_value("output", "a non-empty string");
                         c.output = v.get<std::string>();
                     },
                     [](const ScenarioConfig& c) { return Json(c.output.generic_string()); }});
        k.push_back(integer("dimension", &ScenarioConfig::dimension,
                            {S::ground_state, S::soliton, S::pseudoconformal, S::custom_gaussian, S::gn_check, S::virial_scan,
                             S::inout_check, S::kernel_scan, S::dispersive_check}));
        k.push_back(integer("mu", &ScenarioConfig::mu, {S::custom_gaussian, S::virial_scan}));
        k.push_back({"grid", kGridded,
                     [](ScenarioConfig& c, const Json& v) {
                         if (!v.is_string())
                             bad_value("grid", "\"sine\" or \"dense\"");
                         try {
                             c.grid = parse_grid_scheme(v.get<std::string>());
                         } catch (const std::exception&) {
                             bad_value("grid", "\"sine\" or \"dense\"");
                         }
                     },
                     [](const ScenarioConfig& c) { return Json(to_string(c.grid)); }});
        k.push_back(integer("n", &ScenarioConfig::n, kGridded));
        k.push_back(number("r_max", &ScenarioConfig::r_max, kGridded));
        for (auto [name, field] : {std::pair{"t0", &ScenarioConfig::t0}, std::pair{"t1", &ScenarioConfig::t1},
                                   std::pair{"dt", &ScenarioConfig::dt}})
            k.push_back(number(name, field, kTimed));
        k.push_back(integer("record_stride", &ScenarioConfig::record_stride, kTimed));
        k.push_back(integer("snapshot_stride", &ScenarioConfig::snapshot_stride, kTimed));
        for (auto [name, field] : {std::pair{"gradient_cap", &ScenarioConfig::gradient_cap},
                                   std::pair{"tail_cap", &ScenarioConfig::tail_cap},
                                   std::pair{"boundary_cap", &ScenarioConfig::boundary_cap},
                                   std::pair{"eta", &ScenarioConfig::eta}})
            k.push_back(number(name, field, kTimed));
        k.push_back({"virial_radius", {S::custom_gaussian, S::virial_scan},
                     [](ScenarioConfig& c, const Json& v) {
                         if (v.is_string() && v.get<std::string>() == "inf")
                             c.virial_radius = std::numeric_limits<double>::infinity();
                         else if (v.is_number())
                             c.virial_radius = as_number("virial_radius", v);
                         else
                             bad_value("virial_radius", "a number or \"inf\"");
                     },
                     [](const ScenarioConfig& c) { return std::isinf(c.virial_radius) ? Json("inf") : Json(c.virial_radius); }});
        k.push_back(number("tol", &ScenarioConfig::tol, {S::ground_state, S::soliton, S::pseudoconformal, S::gn_check}));
        k.push_back(number("amplitude", &ScenarioConfig::amplitude, {S::pseudoconformal, S::custom_gaussian, S::virial_scan}));
        k.push_back(number("width", &ScenarioConfig::width, {S::custom_gaussian, S::virial_scan}));
        k.push_back(integer("trials", &ScenarioConfig::trials, {S::gn_check, S::inout_check, S::gronwall_fuzz, S::dispersive_check}));
        k.push_back(number("mass_fraction", &ScenarioConfig::mass_fraction, {S::gn_check}));
        k.push_back(number_list("probe_N", &ScenarioConfig::probe_N, {S::inout_check}));
        k.push_back(number_list("times", &ScenarioConfig::times, {S::dispersive_check}));
        k.push_back(number("N", &ScenarioConfig::kernel_N, {S::kernel_scan}));
        k.push_back(integer("sign", &ScenarioConfig::sign, {S::kernel_scan}));
        for (auto [name, field] : {std::pair{"x", &ScenarioConfig::x}, std::pair{"t_min", &ScenarioConfig::t_min},
                                   std::pair{"t_max", &ScenarioConfig::t_max}, std::pair{"y_min", &ScenarioConfig::y_min},
                                   std::pair{"y_max", &ScenarioConfig::y_max}})
            k.push_back(number(name, field, {S::kernel_scan}));
        k.push_back(integer("t_count", &ScenarioConfig::t_count, {S::kernel_scan}));
        k.push_back(integer("y_count", &ScenarioConfig::y_count, {S::kernel_scan}));
        k.push_back(number("ratio", &ScenarioConfig::ratio, {S::gronwall_fuzz}));
        k.push_back(integer("K", &ScenarioConfig::K, {S::gronwall_fuzz}));
        k.push_back(number("sigma", &ScenarioConfig::sigma, {S::gronwall_fuzz}));
        k.push_back(integer("length", &ScenarioConfig::length, {S::gronwall_fuzz}));
        k.push_back(number("envelope", &ScenarioConfig::envelope, {S::gronwall_fuzz}));
        return k;
    }();
    return table;
}

const Key* find_key(const std::string& name)
{
    for (const auto& k : key_table())
        if (k.name == name)
            return &k;
    return nullptr;
}

std::size_t edit_distance(const std::string& a, const std::string& b)
{
    std::vector<std::size_t> row(b.size() + 1);
    for (std::size_t j = 0; j <= b.size(); ++j)
        row[j] = j;
    for (std::size_t i = 1; i <= a.size(); ++i) {
        std::size_t diag = row[0];
        row[0] = i;
        for (std::size_t j = 1; j <= b.size(); ++j) {
            const std::size_t up = row[j];
            row[j] = std::min({row[j] + 1, row[j - 1] + 1, diag + (a[i - 1] == b[j - 1] ? 0 : 1)});
            diag = up;
        }
    }
    return row[b.size()];
}

std::string suggestion(const std::string& name)
{
    std::string best;
    std::size_t best_d = 3;
    for (const auto& k : key_table()) {
        const std::size_t d = edit_distance(name, k.name);
        if (d < best_d) {
            best_d = d;
            best = k.name;
        }
    }
    return best.empty() ? "" : " (did you mean \"" + best + "\"?)";
}

// 1-based line of the first occurrence of "key" in the source text.
int line_of_key(const std::string& text, const std::string& key)
{
    const auto pos = text.find('"' + key + '"');
    if (pos == std::string::npos)
        return 0;
    return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(pos), '\n'));
}

std::string where(const std::string& source, int line)
{
    return line > 0 ? source + ":" + std::to_string(line) + ": " : source + ": ";
}

void apply_defaults(ScenarioConfig& c)
{
    c.output = "run_" + to_string(c.scenario);
    switch (c.scenario) {
    case S::pseudoconformal:
        c.t0 = -1.0;
        c.t1 = -0.25;
        break;
    case S::custom_gaussian:
        c.mu = 1;
        break;
    case S::virial_scan:
        c.mu = 1;
        c.dt = 1e-4;
        c.virial_radius = 2.0;
        c.record_stride = 100;
        break;
    case S::gn_check:
        c.trials = 100;
        break;
    case S::inout_check:
        c.trials = 20;
        c.n = 512;
        c.probe_N = {1.0, 4.0, 16.0, 64.0};
        break;
    case S::gronwall_fuzz:
        c.trials = 1000;
        break;
    case S::dispersive_check:
        c.trials = 20;
        c.times = {0.1, 1.0, 10.0};
        c.r_max = 400.0;
        c.n = 8192;
        break;
    default:
        break;
    }
}

void validate(ScenarioConfig& c, const std::set<std::string>& given)
{
    const auto require = [](bool ok, const std::string& key, const std::string& want) {
        if (!ok)
            bad_value(key, want);
    };
    if (c.scenario == S::soliton || c.scenario == S::pseudoconformal)
        c.mu = -1;
    require(c.dimension >= 1 && c.dimension <= 6, "dimension", "between 1 and 6");
    require(c.mu >= -1 && c.mu <= 1, "mu", "-1, 0 or 1");

    const bool gridded = std::ranges::find(kGridded, c.scenario) != kGridded.end();
    if (gridded) {
        if (!given.contains("grid"))
            c.grid = c.dimension == 3 ? GridScheme::sine : GridScheme::dense;
        if (!given.contains("n") && c.grid == GridScheme::dense)
            c.n = c.scenario == S::dispersive_check ? 2048 : 512;
        require(c.grid == GridScheme::dense || c.dimension == 3, "grid", "\"dense\" unless dimension is 3");
        require(c.n >= 32 && c.n <= (1 << 16), "n", "between 32 and 65536");
        require(c.grid == GridScheme::sine || c.n <= 4096, "n", "at most 4096 on a dense grid");
        require(c.r_max > 0.0, "r_max", "positive");
    }
    if (std::ranges::find(kTimed, c.scenario) != kTimed.end()) {
        require(c.t1 > c.t0, "t1", "greater than t0");
        require(c.dt >= 0.0, "dt", "nonnegative (0 selects the default step)");
        require(c.record_stride >= 0, "record_stride", "nonnegative");
        require(c.snapshot_stride >= 0, "snapshot_stride", "nonnegative");
        require(c.gradient_cap > 0.0, "gradient_cap", "positive");
        require(c.tail_cap > 0.0, "tail_cap", "positive");
        require(c.boundary_cap > 0.0, "boundary_cap", "positive");
        require(c.eta > 0.0 && c.eta < 1.0, "eta", "in (0, 1)");
        require(c.virial_radius >= 0.0, "virial_radius", "nonnegative or \"inf\"");
    }
    if (c.scenario == S::pseudoconformal)
        require(c.t0 < 0.0, "t0", "negative (the pseudoconformal data are defined for t < 0)");
    require(c.tol > 0.0, "tol", "positive");
    require(c.amplitude > 0.0, "amplitude", "positive");
    require(c.width > 0.0, "width", "positive");
    if (c.scenario == S::gn_check || c.scenario == S::inout_check || c.scenario == S::gronwall_fuzz ||
        c.scenario == S::dispersive_check)
        require(c.trials >= 1, "trials", "positive");
    require(c.mass_fraction > 0.0 && c.mass_fraction < 1.0, "mass_fraction", "in (0, 1)");
    if (c.scenario == S::inout_check) {
        require(c.dimension >= 2, "dimension", "at least 2 for the in/out projections");
        for (double N : c.probe_N)
            require(N > 0.0, "probe_N", "positive");
        require(c.trials >= 10, "trials", "at least 10");
    }
    for (double t : c.times)
        require(t != 0.0, "times", "nonzero");
    if (c.scenario == S::kernel_scan) {
        require(c.dimension >= 2, "dimension", "at least 2 for the in/out kernel");
        require(c.kernel_N > 0.0, "N", "positive");
        require(c.sign == 1 || c.sign == -1, "sign", "1 or -1");
        require(c.kernel_N * c.x >= 0.1, "x", "at least 0.1 / N");
        require(c.t_min > 0.0, "t_min", "positive");
        require(c.t_max >= c.t_min, "t_max", "at least t_min");
        require(c.t_count >= 1 && c.t_count <= 1000, "t_count", "between 1 and 1000");
        require(c.y_min >= 0.0, "y_min", "nonnegative");
        require(c.y_max >= c.y_min, "y_max", "at least y_min");
        require(c.y_count >= 1 && c.y_count <= 10000, "y_count", "between 1 and 10000");
    }
    if (c.scenario == S::gronwall_fuzz) {
        require(c.ratio == 0.0 || (c.ratio > 0.0 && c.ratio < 1.0), "ratio", "in (0, 1), or 0 for a random instance");
        require(c.K >= 4, "K", "at least 4");
        require(c.sigma >= 0.0, "sigma", "nonnegative");
        require(c.length >= 1 && c.length <= 100000, "length", "between 1 and 100000");
        require(c.envelope >= 1.0, "envelope", "at least 1");
    }
}

} // namespace

std::string to_string(Scenario s) { return scenario_names()[static_cast<std::size_t>(s)]; }

const std::vector<std::string>& scenario_names()
{
    static const std::vector<std::string> names{"ground_state", "soliton",     "pseudoconformal", "custom_gaussian",
                                                "gn_check",     "virial_scan", "inout_check",     "kernel_scan",
                                                "gronwall_fuzz", "dispersive_check"};
    return names;
}

std::vector<std::string> config_keys(Scenario s)
{
    std::vector<std::string> out;
    for (const auto& k : key_table())
        if (k.applies(s))
            out.push_back(k.name);
    return out;
}

Json ScenarioConfig::echo() const
{
    Json j = Json::object();
    for (const auto& k : key_table())
        if (k.applies(scenario))
            j[k.name] = k.write(*this);
    return j;
}

ScenarioConfig parse_config(const std::string& text, const std::string& source)
{
    Json j;
    try {
        j = Json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        const auto upto = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
        const int line = 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(upto), '\n'));
        std::string what = e.what();
        // drop the library prefix "[json.exception.parse_error.101] "
        if (const auto p = what.find("] "); p != std::string::npos)
            what = what.substr(p + 2);
        throw ConfigError(where(source, line) + "invalid JSON: " + what);
    }
    if (!j.is_object())
        throw ConfigError(where(source, 0) + "the configuration must be a JSON object");

    for (const auto& [key, value] : j.items()) {
        if (!find_key(key))
            throw ConfigError(where(source, line_of_key(text, key)) + "unknown key \"" + key + "\"" + suggestion(key));
        if (value.is_object() || (value.is_array() && std::ranges::any_of(value, [](const Json& e) { return e.is_structured(); })))
            throw ConfigError(where(source, line_of_key(text, key)) + "key \"" + key + "\" is nested; the configuration is flat");
    }
    if (!j.contains("schema_version"))
        throw ConfigError(where(source, 0) + "missing key \"schema_version\"");
    if (!j["schema_version"].is_number_integer() || j["schema_version"].get<long long>() != kSchemaVersion)
        throw ConfigError(where(source, line_of_key(text, "schema_version")) + "unsupported schema_version (expected " +
                          std::to_string(kSchemaVersion) + ")");
    if (!j.contains("scenario"))
        throw ConfigError(where(source, 0) + "missing key \"scenario\"");
    const auto& names = scenario_names();
    const auto it = j["scenario"].is_string() ? std::ranges::find(names, j["scenario"].get<std::string>()) : names.end();
    if (it == names.end()) {
        std::string list;
        for (const auto& n : names)
            list += (list.empty() ? "" : ", ") + n;
        throw ConfigError(where(source, line_of_key(text, "scenario")) + "key \"scenario\" must be one of " + list);
    }

    ScenarioConfig c;
    c.scenario = kAll[it - names.begin()];
    apply_defaults(c);
    std::set<std::string> given;
    for (const auto& [key, value] : j.items()) {
        const Key* k = find_key(key);
        if (!k->applies(c.scenario))
            throw ConfigError(where(source, line_of_key(text, key)) + "key \"" + key + "\" does not apply to scenario \"" +
                              to_string(c.scenario) + "\"");
        try {
            k->read(c, value);
        } catch (const ConfigError& e) {
            throw ConfigError(where(source, line_of_key(text, key)) + e.what());
        }
        given.insert(key);
    }
    try {
        validate(c, given);
    } catch (const ConfigError& e) {
        const std::string msg = e.what();
        // messages start with: key "<name>"
        const auto a = msg.find('"');
        const auto b = msg.find('"', a + 1);
        const int line = a == std::string::npos ? 0 : line_of_key(text, msg.substr(a + 1, b - a - 1));
        throw ConfigError(where(source, line) + msg);
    }
    return c;
}

ScenarioConfig load_config(const std::filesystem::path& file)
{
    std::ifstream in(file, std::ios::binary);
    if (!in)
        throw ConfigError(file.string() + ": cannot open the configuration file");
    std::ostringstream text;
    text << in.rdbuf();
    return parse_config(text.str(), file.string());
}

} // namespace criticalwave::app
