// abp_sim: command-line front end.
//
//   abp_sim run    [--config F] [--set k=v]... [--seed S] [--out DIR]
//   abp_sim sweep  [--config F] [--set k=v]... [--seed S] [--out DIR]
//   abp_sim table1 [--d 6,4,...] [--b 4,5,...] [--c1 X --c2 Y --p P] [--decimal comma|dot]
//   abp_sim codec dump --variant ABP (--fields mh,ch,chc,opt,bp | --bits 0101...)

#include "abpsim/cli.hpp"
#include "abpsim/hello_codec.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

using namespace abpsim;

namespace {

struct CommonOpts {
    std::optional<std::string> config;
    std::vector<std::string> sets;
    std::string seed;
    std::string out;
    std::string trace_dir;
};

void add_common(CLI::App* cmd, CommonOpts& o)
{
    cmd->add_option("--config", o.config, "config file (key = value lines)");
    cmd->add_option("--set", o.sets, "override, key=value (repeatable)")->take_all();
    cmd->add_option("--seed", o.seed, "seed list, e.g. 7 or 1,2,3 or 1..10");
    cmd->add_option("--out", o.out, "output directory");
}

ExperimentSpec resolve(const CommonOpts& o)
{
    auto sets = o.sets;
    if (!o.seed.empty())
        sets.push_back("experiment.seeds=" + o.seed);
    if (!o.out.empty())
        sets.push_back("experiment.out=" + o.out);
    return load_config(o.config, sets);
}

int cmd_single(const CommonOpts& o)
{
    ExperimentSpec spec = resolve(o);
    spec.axis = SweepAxis::NONE;
    spec.values.clear();
    spec.variants = {spec.config.variant};
    std::cout << echo_config(spec);

    if (!o.trace_dir.empty()) {
        std::filesystem::create_directories(o.trace_dir);
        const auto base = std::filesystem::path(o.trace_dir);
        std::ofstream w(base / "world.csv"), e(base / "events.csv"), m(base / "metrics.csv");
        if (!w || !e || !m)
            throw std::runtime_error("cannot open trace files in " + o.trace_dir);
        run(spec.config, spec.seeds.front(), TraceSinks{&w, &e, &m});
    }

    const auto batch = run_batch(spec.config, spec.seeds, threads_from_env());
    std::cout << "seed,control_msgs,control_bits,ch_changes,ch_resignations,energy_variance\n";
    for (std::size_t i = 0; i < batch.seeds.size(); ++i) {
        const auto& r = batch.per_seed[i];
        std::cout << batch.seeds[i] << ',' << r.control_msgs << ',' << r.control_bits << ',' << r.ch_changes << ','
                  << r.ch_resignations << ',' << format_number(r.energy_variance) << '\n';
    }
    const auto& m = batch.mean;
    std::cout << "mean," << format_number(m.control_msgs) << ',' << format_number(m.control_bits) << ','
              << format_number(m.ch_changes) << ',' << format_number(m.ch_resignations) << ','
              << format_number(m.energy_variance) << '\n';
    if (!o.out.empty())
        for (const auto& p : cmd_run(spec, threads_from_env()))
            std::cerr << "wrote " << p << '\n';
    return 0;
}

int cmd_sweep(const CommonOpts& o)
{
    const ExperimentSpec spec = resolve(o);
    std::cout << echo_config(spec);
    for (const auto& p : cmd_run(spec, threads_from_env()))
        std::cerr << "wrote " << p << '\n';
    return 0;
}

std::vector<std::string_view> fields_of(std::string_view s)
{
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (start <= s.size()) {
        auto comma = s.find(',', start);
        if (comma == std::string_view::npos)
            comma = s.size();
        out.push_back(s.substr(start, comma - start));
        start = comma + 1;
    }
    return out;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Adaptive broadcast period clustering simulator"};
    app.require_subcommand(1);

    CommonOpts run_opts;
    auto* run_cmd = app.add_subcommand("run", "run one configuration over the seed list");
    add_common(run_cmd, run_opts);
    run_cmd->add_option("--trace-dir", run_opts.trace_dir, "write world/events/metrics traces of the first seed");

    CommonOpts sweep_opts;
    auto* sweep_cmd = app.add_subcommand("sweep", "run an experiment sweep and write figure CSVs");
    add_common(sweep_cmd, sweep_opts);

    auto* t1 = app.add_subcommand("table1", "print the CHC table");
    std::vector<int> d;
    std::vector<double> b;
    ChcParams tp{0.4, 0.6, 1, 10};
    std::string decimal = "comma";
    t1->add_option("--d", d, "degrees")->delimiter(',');
    t1->add_option("--b", b, "batteries")->delimiter(',');
    t1->add_option("--c1", tp.c1);
    t1->add_option("--c2", tp.c2);
    t1->add_option("--p", tp.p);
    t1->add_option("--decimal", decimal)->check(CLI::IsMember({"comma", "dot"}));

    auto* codec = app.add_subcommand("codec", "Hello packet codec tools");
    codec->require_subcommand(1);
    auto* dump = codec->add_subcommand("dump", "print a packet's bit layout");
    std::string variant_name = "ABP";
    std::string fields;
    std::string bits;
    dump->add_option("--variant", variant_name);
    auto* fopt = dump->add_option("--fields", fields, "mh,ch,chc_q,option,bp_code");
    dump->add_option("--bits", bits, "raw bit string to decode")->excludes(fopt);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        if (*run_cmd)
            return cmd_single(run_opts);
        if (*sweep_cmd)
            return cmd_sweep(sweep_opts);
        if (*t1) {
            tp.validate();
            if (d.empty() && b.empty())
                for (const auto& r : table1_fixture()) {
                    d.push_back(r.d);
                    b.push_back(r.b);
                }
            std::cout << format_table1(d, b, tp, decimal == "comma");
            return 0;
        }
        if (*dump) {
            const auto variant = parse_variant(variant_name);
            HelloPacket p;
            if (!bits.empty()) {
                p = decode_hello(BitString::from_string(bits), variant);
            } else {
                const auto f = fields_of(fields);
                std::uint8_t* slots[] = {&p.mh_id, &p.ch_id, &p.chc_q, &p.option, &p.bp_code};
                if (f.size() > 5)
                    throw ConfigError("--fields: at most 5 values");
                for (std::size_t i = 0; i < f.size(); ++i) {
                    if (f[i].empty())
                        continue;
                    const int v = std::stoi(std::string(f[i]));
                    if (v < 0 || v > 255)
                        throw ConfigError("--fields: value out of range");
                    *slots[i] = static_cast<std::uint8_t>(v);
                }
            }
            std::cout << dump_hello(p, variant);
            return 0;
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 1;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 2;
}
