#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "registry.hpp"

namespace fs = std::filesystem;
using namespace tempus;
using namespace tempus::cli;

namespace {

constexpr int exit_usage = 2;

struct RunOptions {
    std::map<std::string, double> num;
    std::map<std::string, std::string> text;
    std::map<std::string, CLI::Option*> opts;
    std::string config;
    std::string sweep;
};

std::string extension(Format f) { return f == Format::csv ? ".csv" : ".jsonl"; }

void write_plot_script(const fs::path& dir, const std::string& exp, const Result& r) {
    std::ofstream gp(dir / "plot.gp");
    gp << "set datafile separator ','\nset key autotitle columnhead\n";
    for (const auto& t : r.tables) {
        if (t.columns.size() < 2 || t.rows.empty()) continue;
        const std::string file = exp + "_" + t.name + ".csv";
        gp << "set title '" << exp << " " << t.name << "'\nset xlabel '" << t.columns[0] << "'\nplot ";
        for (std::size_t c = 1; c < t.columns.size(); ++c) {
            if (!std::holds_alternative<double>(t.rows.front()[c])) continue;
            gp << (c > 1 ? ", " : "") << "'" << file << "' using 1:" << c + 1 << " with linespoints";
        }
        gp << "\npause -1\n";
    }
}

void emit(const std::string& exp, const Result& r, Format fmt, const std::string& output) {
    const Table bounds = bounds_table(r.reports);
    if (output.empty()) {
        for (const auto& t : r.tables) {
            std::cout << "# " << exp << " " << t.name << '\n';
            write(std::cout, t, fmt);
            std::cout << '\n';
        }
        std::cout << "# bounds\n";
        write(std::cout, bounds, fmt);
        return;
    }
    const fs::path dir(output);
    fs::create_directories(dir);
    for (const auto& t : r.tables) {
        std::ofstream f(dir / (exp + "_" + t.name + extension(fmt)));
        write(f, t, fmt);
    }
    std::ofstream b(dir / ("bounds" + extension(fmt)));
    write(b, bounds, fmt);
    if (fmt == Format::csv) write_plot_script(dir, exp, r);
    std::cout << "wrote " << r.tables.size() + 1 + (fmt == Format::csv ? 1 : 0) << " files to " << dir.string() << '\n';
}

/// Values from a key=value file fill options not given on the command line.
void apply_config(CLI::App& sub, RunOptions& ro) {
    if (ro.config.empty()) return;
    std::vector<CLI::ConfigItem> items;
    try {
        items = CLI::ConfigINI().from_file(ro.config);
    } catch (const CLI::FileError&) {
        throw Error(ErrorCode::schema, "cannot read config " + ro.config);
    }
    for (const auto& it : items) {
        if (it.name == "++" || it.name == "--") continue;  // section markers
        const auto o = ro.opts.find(it.name);
        if (o == ro.opts.end()) throw Error(ErrorCode::schema, "config key '" + it.name + "' is not a parameter of " + sub.get_name());
        if (o->second->count() > 0) continue;
        o->second->add_result(it.inputs);
        o->second->run_callback();
    }
}

void print_list(bool json) {
    if (json) {
        nlohmann::ordered_json all = nlohmann::ordered_json::array();
        for (const auto& e : catalog()) {
            nlohmann::ordered_json j;
            j["name"] = e.name;
            j["summary"] = e.summary;
            j["tags"] = e.tags;
            j["parameters"] = nlohmann::ordered_json::array();
            for (const auto& s : e.schema) {
                nlohmann::ordered_json q;
                q["name"] = s.name;
                q["type"] = type_name(s.type);
                q["default"] = s.fallback;
                q["positive"] = s.positive;
                if (!s.choices.empty()) q["choices"] = s.choices;
                q["help"] = s.help;
                j["parameters"].push_back(q);
            }
            all.push_back(j);
        }
        std::cout << all.dump(2) << '\n';
        return;
    }
    for (const auto& e : catalog()) {
        std::cout << e.name << ": " << e.summary << "\n  tags:";
        for (const auto& t : e.tags) std::cout << ' ' << t;
        std::cout << '\n';
        for (const auto& s : e.schema) {
            std::cout << "  --" << s.name << " <" << type_name(s.type) << "> default " << s.fallback;
            if (s.positive) std::cout << ", > 0";
            if (!s.choices.empty()) {
                std::cout << ", one of";
                for (const auto& c : s.choices) std::cout << ' ' << c;
            }
            std::cout << "  " << s.help << '\n';
        }
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"tempus: time-energy uncertainty experiments"};
    app.require_subcommand(1);

    auto* list = app.add_subcommand("list", "print the experiment catalog");
    bool list_json = false;
    list->add_flag("--json", list_json, "machine-readable catalog");

    std::uint64_t seed = default_seed;
    std::string format = "csv", output;
    auto* run = app.add_subcommand("run", "run one experiment");
    run->require_subcommand(1);
    std::map<std::string, RunOptions> run_opts;
    for (const auto& e : catalog()) {
        auto* sub = run->add_subcommand(e.name, e.summary);
        auto& ro = run_opts[e.name];
        for (const auto& s : e.schema) {
            CLI::Option* o = nullptr;
            if (s.type == ParamType::text) {
                ro.text[s.name] = s.fallback;
                o = sub->add_option("--" + s.name, ro.text[s.name], s.help)->capture_default_str();
                if (!s.choices.empty()) o->check(CLI::IsMember(s.choices));
            } else {
                ro.num[s.name] = std::stod(s.fallback);
                o = sub->add_option("--" + s.name, ro.num[s.name], s.help)->capture_default_str();
                if (s.positive) o->check(CLI::PositiveNumber);
                if (s.type == ParamType::integer)
                    o->check(CLI::Validator(
                        [](std::string& v) {
                            const double x = std::stod(v);
                            return x == std::round(x) ? std::string{} : std::string("integer required");
                        },
                        "INT"));
            }
            ro.opts[s.name] = o;
        }
        sub->add_option("--sweep", ro.sweep, "key=lo..hi:log[:N] or key=lo..hi:lin[:N]");
        sub->add_option("--config", ro.config, "key=value file; command-line values take precedence");
        sub->add_option("--seed", seed, "random seed")->capture_default_str();
        sub->add_option("--format", format, "csv or jsonl")->check(CLI::IsMember({"csv", "jsonl"}))->capture_default_str();
        sub->add_option("--output,-o", output, "directory for data files, bounds and plot script");
    }

    auto* ver = app.add_subcommand("verify", "run every bound report with default parameters");
    bool all = false;
    std::vector<std::string> only;
    ver->add_flag("--all", all, "whole catalog with the coverage checklist");
    std::vector<std::string> names;
    for (const auto& e : catalog()) names.push_back(e.name);
    ver->add_option("--only", only, "restrict to these experiments")->check(CLI::IsMember(names));
    ver->add_option("--seed", seed, "random seed")->capture_default_str();
    ver->add_option("--format", format, "csv or jsonl")->check(CLI::IsMember({"csv", "jsonl"}))->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : exit_usage;
    }
    const Format fmt = format == "csv" ? Format::csv : Format::jsonl;

    try {
        if (list->parsed()) {
            print_list(list_json);
            return 0;
        }
        if (ver->parsed()) {
            if (all == !only.empty()) {
                std::cerr << "verify: give either --all or --only\n";
                return exit_usage;
            }
            const auto v = verify(all ? std::vector<std::string>{} : only, seed);
            write(std::cout, v.bounds, fmt);
            std::cout << '\n';
            write(std::cout, v.coverage, fmt);
            const bool ok = v.all_pass && v.covered;
            std::cout << "\n# verify: " << (v.all_pass ? "all asserted bounds pass" : "FAILED bounds")
                      << (all ? (v.covered ? ", checklist covered" : ", checklist NOT covered") : "") << '\n';
            return ok ? 0 : 1;
        }
        for (auto* sub : run->get_subcommands()) {
            if (!sub->parsed()) continue;
            const Experiment& e = *find_experiment(sub->get_name());
            auto& ro = run_opts[e.name];
            try {
                apply_config(*sub, ro);
            } catch (const CLI::ParseError& pe) {
                std::cerr << sub->get_name() << ": " << pe.what() << '\n';
                return exit_usage;
            }
            Params p;
            p.seed = seed;
            p.num = ro.num;
            p.text = ro.text;
            std::optional<Sweep> sw;
            if (!ro.sweep.empty()) sw = parse_sweep(e, ro.sweep);
            const Result r = run_experiment(e, p, sw);
            emit(e.name, r, fmt, output);
            return all_pass(r.reports) ? 0 : 1;
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return e.code() == ErrorCode::parameter || e.code() == ErrorCode::schema ? exit_usage : 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return exit_usage;
}
