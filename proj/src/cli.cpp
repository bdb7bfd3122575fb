#include "abpsim/cli.hpp"

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>

namespace abpsim {

namespace {

std::string_view trim(std::string_view s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos)
        return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string_view> split_list(std::string_view s)
{
    std::vector<std::string_view> out;
    while (true) {
        const auto comma = s.find(',');
        auto item = trim(s.substr(0, comma));
        if (!item.empty())
            out.push_back(item);
        if (comma == std::string_view::npos)
            break;
        s.remove_prefix(comma + 1);
    }
    return out;
}

[[noreturn]] void bad_value(std::string_view key, std::string_view expected, std::string_view got)
{
    throw ConfigError(std::string(key) + ": expected " + std::string(expected) + ", got '" + std::string(got) + "'");
}

double parse_double(std::string_view key, std::string_view v)
{
    double x = 0.0;
    auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
    if (ec != std::errc() || ptr != v.data() + v.size() || !std::isfinite(x))
        bad_value(key, "a number", v);
    return x;
}

long long parse_int(std::string_view key, std::string_view v)
{
    long long x = 0;
    auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
    if (ec != std::errc() || ptr != v.data() + v.size())
        bad_value(key, "an integer", v);
    return x;
}

int parse_small_int(std::string_view key, std::string_view v)
{
    const long long x = parse_int(key, v);
    if (x < -1'000'000 || x > 1'000'000)
        throw ConfigError(std::string(key) + ": value out of range");
    return static_cast<int>(x);
}

std::vector<std::uint64_t> parse_seeds(std::string_view key, std::string_view v)
{
    std::vector<std::uint64_t> out;
    for (auto item : split_list(v)) {
        const auto dots = item.find("..");
        if (dots != std::string_view::npos) {
            const auto lo = parse_int(key, trim(item.substr(0, dots)));
            const auto hi = parse_int(key, trim(item.substr(dots + 2)));
            if (lo < 0 || hi < lo || hi - lo > 100000)
                bad_value(key, "a seed range lo..hi", item);
            for (auto s = lo; s <= hi; ++s)
                out.push_back(static_cast<std::uint64_t>(s));
        } else {
            const auto s = parse_int(key, item);
            if (s < 0)
                bad_value(key, "a non-negative seed", item);
            out.push_back(static_cast<std::uint64_t>(s));
        }
    }
    return out;
}

using Setter = std::function<void(ExperimentSpec&, std::string_view key, std::string_view value)>;
using Getter = std::function<std::string(const ExperimentSpec&)>;

struct Key {
    Setter set;
    Getter get;
};

template <typename F>
Key num(F field)
{
    return {[field](ExperimentSpec& s, std::string_view k, std::string_view v) { field(s) = parse_double(k, v); },
            [field](const ExperimentSpec& s) { return format_number(field(const_cast<ExperimentSpec&>(s))); }};
}

template <typename F>
Key integer(F field)
{
    return {[field](ExperimentSpec& s, std::string_view k, std::string_view v) { field(s) = parse_small_int(k, v); },
            [field](const ExperimentSpec& s) { return std::to_string(field(const_cast<ExperimentSpec&>(s))); }};
}

template <typename T>
std::string join(const std::vector<T>& xs, const std::function<std::string(const T&)>& f)
{
    std::string out;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (i)
            out += ',';
        out += f(xs[i]);
    }
    return out;
}

// Ordered as echoed.
const std::vector<std::pair<std::string, Key>>& keys()
{
    static const std::vector<std::pair<std::string, Key>> table = [] {
        std::vector<std::pair<std::string, Key>> t;
        t.emplace_back("variant",
                       Key{[](ExperimentSpec& s, std::string_view k, std::string_view v) {
                               try {
                                   s.config.variant = parse_variant(v);
                               } catch (const std::exception&) {
                                   bad_value(k, "one of LID, HD, VC, ABP", v);
                               }
                           },
                           [](const ExperimentSpec& s) { return std::string(to_string(s.config.variant)); }});
        t.emplace_back("node_count", integer([](ExperimentSpec& s) -> int& { return s.config.node_count; }));
        t.emplace_back("terrain_width", num([](ExperimentSpec& s) -> double& { return s.config.terrain_width; }));
        t.emplace_back("terrain_height", num([](ExperimentSpec& s) -> double& { return s.config.terrain_height; }));
        t.emplace_back("speed_min", num([](ExperimentSpec& s) -> double& { return s.config.speed_min; }));
        t.emplace_back("speed_max", num([](ExperimentSpec& s) -> double& { return s.config.speed_max; }));
        t.emplace_back("battery_min", num([](ExperimentSpec& s) -> double& { return s.config.battery_min; }));
        t.emplace_back("battery_max", num([](ExperimentSpec& s) -> double& { return s.config.battery_max; }));
        t.emplace_back("duration", num([](ExperimentSpec& s) -> double& { return s.config.duration; }));
        t.emplace_back("radio_range", num([](ExperimentSpec& s) -> double& { return s.config.radio_range; }));
        t.emplace_back("heading_redraw_interval",
                       num([](ExperimentSpec& s) -> double& { return s.config.heading_redraw_interval; }));
        t.emplace_back("c1", num([](ExperimentSpec& s) -> double& { return s.config.c1; }));
        t.emplace_back("c2", num([](ExperimentSpec& s) -> double& { return s.config.c2; }));
        t.emplace_back("p", integer([](ExperimentSpec& s) -> int& { return s.config.p; }));
        t.emplace_back("T", integer([](ExperimentSpec& s) -> int& { return s.config.T; }));
        t.emplace_back("chc_scale", num([](ExperimentSpec& s) -> double& { return s.config.chc_scale; }));
        t.emplace_back("bp_min", num([](ExperimentSpec& s) -> double& { return s.config.bp_min; }));
        t.emplace_back("bp_max", num([](ExperimentSpec& s) -> double& { return s.config.bp_max; }));
        t.emplace_back("mr_ref", num([](ExperimentSpec& s) -> double& { return s.config.mr_ref; }));
        t.emplace_back("n", integer([](ExperimentSpec& s) -> int& { return s.config.history; }));
        t.emplace_back("baseline_bp", num([](ExperimentSpec& s) -> double& { return s.config.baseline_bp; }));
        t.emplace_back("tick", num([](ExperimentSpec& s) -> double& { return s.config.tick; }));
        t.emplace_back("energy.e_ordinary", num([](ExperimentSpec& s) -> double& { return s.config.energy.e_ordinary; }));
        t.emplace_back("energy.e_ch_base", num([](ExperimentSpec& s) -> double& { return s.config.energy.e_ch_base; }));
        t.emplace_back("energy.e_ch_per_member",
                       num([](ExperimentSpec& s) -> double& { return s.config.energy.e_ch_per_member; }));

        t.emplace_back("experiment.name",
                       Key{[](ExperimentSpec& s, std::string_view, std::string_view v) { s.name = std::string(v); },
                           [](const ExperimentSpec& s) { return s.name; }});
        t.emplace_back("experiment.axis",
                       Key{[](ExperimentSpec& s, std::string_view, std::string_view v) { s.axis = parse_axis(v); },
                           [](const ExperimentSpec& s) { return std::string(to_string(s.axis)); }});
        t.emplace_back("experiment.values",
                       Key{[](ExperimentSpec& s, std::string_view k, std::string_view v) {
                               s.values.clear();
                               for (auto item : split_list(v))
                                   s.values.push_back(parse_double(k, item));
                           },
                           [](const ExperimentSpec& s) {
                               return join<double>(s.values, [](const double& x) { return format_number(x); });
                           }});
        t.emplace_back("experiment.variants",
                       Key{[](ExperimentSpec& s, std::string_view k, std::string_view v) {
                               s.variants.clear();
                               for (auto item : split_list(v)) {
                                   try {
                                       s.variants.push_back(parse_variant(item));
                                   } catch (const std::exception&) {
                                       bad_value(k, "a list of LID, HD, VC, ABP", item);
                                   }
                               }
                           },
                           [](const ExperimentSpec& s) {
                               return join<ProtocolVariant>(s.variants, [](const ProtocolVariant& x) {
                                   return std::string(to_string(x));
                               });
                           }});
        t.emplace_back("experiment.seeds",
                       Key{[](ExperimentSpec& s, std::string_view k, std::string_view v) { s.seeds = parse_seeds(k, v); },
                           [](const ExperimentSpec& s) {
                               return join<std::uint64_t>(s.seeds,
                                                          [](const std::uint64_t& x) { return std::to_string(x); });
                           }});
        t.emplace_back("experiment.figures",
                       Key{[](ExperimentSpec& s, std::string_view k, std::string_view v) {
                               s.figures.clear();
                               for (auto item : split_list(v)) {
                                   try {
                                       figure_metric(item);
                                   } catch (const ConfigError&) {
                                       bad_value(k, "a list of fig6, fig7, fig8, fig9", item);
                                   }
                                   s.figures.emplace_back(item);
                               }
                           },
                           [](const ExperimentSpec& s) {
                               return join<std::string>(s.figures, [](const std::string& x) { return x; });
                           }});
        t.emplace_back("experiment.out",
                       Key{[](ExperimentSpec& s, std::string_view, std::string_view v) { s.out = std::string(v); },
                           [](const ExperimentSpec& s) { return s.out; }});
        return t;
    }();
    return table;
}

double sample_stddev(const std::vector<double>& xs)
{
    if (xs.size() < 2)
        return 0.0;
    double mean = 0.0;
    for (double x : xs)
        mean += x;
    mean /= static_cast<double>(xs.size());
    double acc = 0.0;
    for (double x : xs)
        acc += (x - mean) * (x - mean);
    return std::sqrt(acc / static_cast<double>(xs.size() - 1));
}

void write_file(const std::filesystem::path& path, const std::string& content)
{
    std::ofstream f(path, std::ios::binary);
    if (!f)
        throw std::runtime_error("cannot open " + path.string() + " for writing");
    f << content;
    f.close();
    if (!f)
        throw std::runtime_error("write failed: " + path.string());
}

} // namespace

std::string format_number(double x)
{
    if (x == 0.0)
        return "0"; // also folds -0
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, ptr);
}

void ExperimentSpec::validate() const
{
    config.validate();
    if (variants.empty())
        throw ConfigError("experiment.variants: at least one variant required");
    if (seeds.empty())
        throw ConfigError("experiment.seeds: at least one seed required");
    if (figures.empty())
        throw ConfigError("experiment.figures: at least one figure required");
    if (axis != SweepAxis::NONE && values.empty())
        throw ConfigError("experiment.values: a sweep axis needs values");
    for (double v : values) {
        SimConfig c = config;
        apply_axis(c, axis, v);
        c.validate();
    }
}

void apply_setting(ExperimentSpec& spec, std::string_view key, std::string_view value)
{
    key = trim(key);
    value = trim(value);
    for (const auto& [name, k] : keys())
        if (name == key) {
            k.set(spec, key, value);
            return;
        }
    throw ConfigError(std::string(key) + ": unknown configuration key");
}

void apply_config_text(ExperimentSpec& spec, std::string_view text, std::string_view origin)
{
    std::istringstream in{std::string(text)};
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string_view l = line;
        if (auto hash = l.find('#'); hash != std::string_view::npos)
            l = l.substr(0, hash);
        l = trim(l);
        if (l.empty())
            continue;
        const auto eq = l.find('=');
        if (eq == std::string_view::npos)
            throw ConfigError(std::string(origin) + ":" + std::to_string(lineno) + ": expected 'key = value'");
        apply_setting(spec, l.substr(0, eq), l.substr(eq + 1));
    }
}

ExperimentSpec load_config(const std::optional<std::string>& path, const std::vector<std::string>& overrides)
{
    ExperimentSpec spec;
    if (path) {
        std::ifstream f(*path);
        if (!f)
            throw ConfigError("--config: cannot read '" + *path + "'");
        std::stringstream ss;
        ss << f.rdbuf();
        apply_config_text(spec, ss.str(), *path);
    }
    for (const auto& o : overrides) {
        const auto eq = o.find('=');
        if (eq == std::string::npos)
            throw ConfigError("--set: expected key=value, got '" + o + "'");
        apply_setting(spec, std::string_view(o).substr(0, eq), std::string_view(o).substr(eq + 1));
    }
    spec.validate();
    return spec;
}

std::string echo_config(const ExperimentSpec& spec)
{
    std::string out = "# resolved configuration\n";
    for (const auto& [name, k] : keys())
        out += name + " = " + k.get(spec) + "\n";
    return out;
}

Metric figure_metric(std::string_view id)
{
    if (id == "fig6")
        return Metric::CONTROL_MSGS;
    if (id == "fig7")
        return Metric::CONTROL_BITS;
    if (id == "fig8")
        return Metric::CH_CHANGES;
    if (id == "fig9")
        return Metric::ENERGY_VARIANCE;
    throw ConfigError("experiment.figures: unknown figure '" + std::string(id) + "'");
}

std::string figure_filename(std::string_view id)
{
    static const std::map<std::string, std::string, std::less<>> names{{"fig6", "fig6_messages.csv"},
                                                                        {"fig7", "fig7_bits.csv"},
                                                                        {"fig8", "fig8_ch_changes.csv"},
                                                                        {"fig9", "fig9_energy_var.csv"}};
    auto it = names.find(id);
    if (it == names.end())
        throw ConfigError("experiment.figures: unknown figure '" + std::string(id) + "'");
    return it->second;
}

std::vector<FigureDataset> build_figures(const std::vector<SweepRow>& rows, const std::vector<std::string>& figures)
{
    std::vector<FigureDataset> out;
    for (const auto& id : figures) {
        FigureDataset fig{id, figure_metric(id), figure_filename(id), {}};
        for (const auto& r : rows) {
            std::vector<double> xs;
            for (const auto& rec : r.batch.per_seed)
                xs.push_back(metric_value(rec, fig.metric));
            fig.rows.push_back({r.variant, r.axis_value, metric_value(r.batch.mean, fig.metric), sample_stddev(xs)});
        }
        out.push_back(std::move(fig));
    }
    return out;
}

std::string figure_csv(const FigureDataset& fig, SweepAxis axis)
{
    std::string out = "variant,axis,value,mean,stddev\n";
    for (const auto& r : fig.rows)
        out += std::string(to_string(r.variant)) + "," + std::string(to_string(axis)) + "," + format_number(r.value) +
               "," + format_number(r.mean) + "," + format_number(r.stddev) + "\n";
    return out;
}

std::string long_csv(const std::vector<SweepRow>& rows, SweepAxis axis, const std::vector<std::string>& figures)
{
    std::string out = "variant,axis,value,seed,metric,value\n";
    for (const auto& r : rows)
        for (std::size_t i = 0; i < r.batch.per_seed.size(); ++i)
            for (const auto& id : figures) {
                const Metric m = figure_metric(id);
                out += std::string(to_string(r.variant)) + "," + std::string(to_string(axis)) + "," +
                       format_number(r.axis_value) + "," + std::to_string(r.batch.seeds[i]) + "," +
                       std::string(to_string(m)) + "," + format_number(metric_value(r.batch.per_seed[i], m)) + "\n";
            }
    return out;
}

std::vector<std::string> cmd_run(const ExperimentSpec& spec, unsigned threads)
{
    spec.validate();
    const auto rows = sweep(spec.config, spec.axis, spec.values, spec.variants, spec.seeds, threads);

    namespace fs = std::filesystem;
    const fs::path dir(spec.out);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec)
        throw std::runtime_error("cannot create output directory " + dir.string() + ": " + ec.message());

    std::vector<std::string> written;
    for (const auto& fig : build_figures(rows, spec.figures)) {
        write_file(dir / fig.filename, figure_csv(fig, spec.axis));
        written.push_back((dir / fig.filename).string());
    }
    write_file(dir / kLongCsvName, long_csv(rows, spec.axis, spec.figures));
    written.push_back((dir / kLongCsvName).string());
    write_file(dir / kResolvedConfigName, echo_config(spec));
    written.push_back((dir / kResolvedConfigName).string());
    return written;
}

std::vector<Table1Row> table1_fixture()
{
    return {{1, 6, 4},  {2, 4, 5},  {3, 4, 3},  {4, 3, 4},  {5, 2, 2},  {6, 5, 4},  {7, 5, 2},  {8, 5, 1},
            {9, 5, 4},  {10, 5, 5}, {11, 2, 4}, {12, 5, 2}, {13, 3, 4}, {14, 2, 7}, {15, 4, 2}};
}

Graph table1_graph()
{
    // Reconstructed placement: degrees match the d column.
    static constexpr std::pair<int, int> edges[] = {
        {1, 2},  {1, 3},  {1, 4},   {1, 5},   {1, 6},   {1, 7},  {10, 8}, {10, 9}, {10, 11}, {10, 12},
        {10, 13}, {14, 15}, {14, 7}, {2, 3},   {2, 6},   {3, 6},  {2, 4},  {3, 4},  {5, 6},   {6, 7},
        {7, 15}, {7, 9},  {8, 9},   {8, 12},  {8, 13},  {8, 15}, {9, 12}, {9, 11}, {12, 13}, {12, 15}};
    Graph g;
    for (int v = 1; v <= 15; ++v)
        g.add_node(static_cast<NodeId>(v));
    for (auto [a, b] : edges)
        g.add_edge(static_cast<NodeId>(a), static_cast<NodeId>(b));
    return g;
}

std::string format_table1(const std::vector<int>& d, const std::vector<double>& b, const ChcParams& params,
                          bool comma_decimal)
{
    if (d.size() != b.size())
        throw std::invalid_argument("d and b columns differ in length (" + std::to_string(d.size()) + " vs " +
                                    std::to_string(b.size()) + ")");
    auto fmt = [&](double x) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.2f", std::abs(x) < 0.005 ? 0.0 : x);
        std::string s = buf;
        while (s.back() == '0')
            s.pop_back();
        if (s.back() == '.')
            s.pop_back();
        if (comma_decimal)
            for (auto& c : s)
                if (c == '.')
                    c = ',';
        return s;
    };
    std::string out = "MH ID\td\tb\tCHC\n";
    for (std::size_t i = 0; i < d.size(); ++i)
        out += std::to_string(i + 1) + "\t" + std::to_string(d[i]) + "\t" + fmt(b[i]) + "\t" +
               fmt(chc(d[i], b[i], false, params)) + "\n";
    return out;
}

unsigned threads_from_env()
{
    const char* s = std::getenv("ABP_SIM_THREADS");
    if (!s || !*s)
        return 0;
    char* end = nullptr;
    const long v = std::strtol(s, &end, 10);
    if (*end != '\0' || v < 0)
        throw ConfigError("ABP_SIM_THREADS: expected a non-negative integer");
    return static_cast<unsigned>(v);
}

} // namespace abpsim
