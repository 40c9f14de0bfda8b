#pragma once

#include <functional>
#include <set>

#include "suite_dynamics.hpp"
#include "suite_povm.hpp"
#include "suite_spectra.hpp"

namespace tempus::cli {

struct Experiment {
    std::string name;
    std::string summary;
    std::vector<std::string> tags;
    std::vector<ParamSpec> schema;
    std::function<Result(const Params&)> run;
    std::function<void(Result&)> summarize;  // after a sweep; may be empty
};

namespace detail {

inline ParamSpec num(std::string name, std::string fallback, std::string help, bool positive = true) {
    return {std::move(name), ParamType::number, std::move(fallback), std::move(help), positive, {}};
}
inline ParamSpec whole(std::string name, std::string fallback, std::string help) {
    return {std::move(name), ParamType::integer, std::move(fallback), std::move(help), true, {}};
}

}  // namespace detail

inline const std::vector<Experiment>& catalog() {
    using detail::num;
    using detail::whole;
    static const std::vector<Experiment> all{
        {"mt", "characteristic times of random systems and the Mandelstam-Tamm inequality",
         {"MT-ur", "MS-tau", "MT-tau-pos"},
         {num("hbar", "1", "reduced Planck constant"), whole("max_dim", "10", "largest random dimension"),
          whole("count", "100", "random draws")},
         run_mt, {}},
        {"survival", "survival probability against the cosine bound and lifetime relations",
         {"pt", "MT-p", "MT-lifetime", "Grabo-lifetime", "Grabo-tau"},
         {num("hbar", "1", "reduced Planck constant"), whole("points", "401", "time samples per curve"),
          whole("max_dim", "10", "largest random dimension"), num("dh", "1", "two-level energy spread"),
          whole("count", "50", "random states")},
         run_survival, {}},
        {"decay", "exponential decay: Lorentzian line, Wigner moments, decay widths",
         {"life-line-ur", "ft-expon", "f-til-E-Lor", "Wig-ft", "Wig-ur", "Wig-moments", "Wig-lifetime", "Wig-life-ur",
          "decay-equiv-width-ur", "HU-lifetime-ur"},
         {num("gamma", "1", "line width"), num("e0", "10", "line centre", false), num("hbar", "1", "reduced Planck constant")},
         run_decay, {}},
        {"widths", "equivalent, overall and translation widths",
         {"BM-equiv-width", "equiv-width-ur", "HU-ove-width-ur", "HU-trans-width-ur"},
         {num("hbar", "1", "reduced Planck constant"), num("alpha", "0.9", "overall-width fraction")},
         run_widths, {}},
        {"clock", "orthogonalization time of quantum clocks and C(alpha)",
         {"MT-clock-ur", "HU-clock-ur", "C-alpha"},
         {num("omega", "1.3", "ladder frequency"), num("hbar", "1", "reduced Planck constant"),
          whole("n", "8", "extra ladder size"), whole("count", "100", "random ten-level states"),
          num("eps", "0.05", "overlap threshold for random states", false)},
         run_clock, {}},
        {"twoslit", "two-slit momentum amplitude on the q grid", {"two-slit"},
         {num("A", "2", "slit half separation"), num("a", "0.5", "slit half width")}, run_twoslit, {}},
        {"abm", "impulsive kinetic-energy measurement: confidence function, POVMs, inaccuracy",
         {"p-confid", "p-pov", "p-inacc", "p-reprod", "H-pov", "H-val", "H-var"},
         {num("m", "1", "object mass"), num("M", "2", "probe mass"), num("g0", "4", "coupling strength"),
          num("dt", "0.5", "interaction time"), num("p0", "20", "object mean momentum", false),
          num("sigma_x", "0.5", "object momentum spread"), num("sigma_y", "1", "probe momentum spread"),
          whole("samples", "16", "grid points per probe spread")},
         run_abm, abm_sweep_summary},
        {"falling", "uniformly accelerated particle: time operator, Weyl relation, covariant POVM",
         {"H-g", "T-g", "Weyl", "H-cov2", "T-cov", "time-cov", "time-var", "pov-ur"},
         {num("m", "1.3", "mass"), num("g", "0.8", "acceleration"), num("hbar", "1", "reduced Planck constant"),
          num("dp", "0.1", "momentum grid step"), whole("n", "128", "momentum grid points"),
          num("p0", "0.2", "packet mean momentum", false), num("sp", "0.5", "packet momentum spread"),
          num("x0", "0.5", "packet position", false)},
         run_falling, {}},
        {"oscillator", "truncated oscillator phase POVM and the Garrison-Wong operator", {"osc-phase", "garrison-wong", "pov-ur"},
         {whole("nmax", "16", "Fock truncation"), whole("bins", "32", "phase bins"),
          num("theta", "2", "phase window of the test state")},
         run_oscillator, {}},
        {"arrival", "free-particle arrival-time POVM", {"F-free"},
         {num("m", "1", "mass"), num("p0", "10", "mean momentum"), num("sp", "0.5", "momentum spread"),
          num("x0", "-20", "initial position", false), num("bin", "0.05", "time bin width"),
          num("tmin", "-2", "first bin edge", false), whole("bins", "160", "time bins"),
          num("shift", "0.5", "evolution time for the covariance check")},
         run_arrival, {}},
        {"bounded", "bounded-spectrum covariant POVM, time operators and variance floors",
         {"time-povm", "time-cov", "T-c-spec", "BF-effect", "BF-bound", "lambda-var"},
         {whole("n", "64", "energy grid points"), whole("bins", "256", "time bins per period"),
          num("phase", "0", "boundary phase arg c", false), whole("states", "200", "random states")},
         run_bounded, {}},
        {"chopper", "chopped decay: coherent and objective spectra",
         {"chopper-J", "chopper-Job", "chopper-t0-avg", "chopper-open", "chopper-plancherel", "HU-chopper"},
         {{"preset", ParamType::text, "none", "time units: none (natural) or hauser (ns internally, seconds on input)",
           false, {"none", "hauser"}},
          num("tau", "1", "lifetime, natural units; ignored with a preset"),
          num("tchop", "0", "chopping period, 0 keeps the default", false),
          num("topen", "0", "open time, 0 means tchop / 3", false), whole("windows", "16", "open windows"),
          whole("samples", "128", "t0 samples per period"), whole("harmonics", "6", "harmonics each side")},
         run_chopper, {}},
        {"moshinsky", "energy distribution of a shutter preparation of length T, five T values",
         {"prep-ur", "moshinsky-halving", "moshinsky-zero"},
         {num("e0", "20", "carrier energy"), num("tprep", "4", "middle preparation time"),
          num("hbar", "1", "reduced Planck constant")},
         run_moshinsky, {}},
    };
    return all;
}

inline const Experiment* find_experiment(const std::string& name) {
    for (const auto& e : catalog())
        if (e.name == name) return &e;
    return nullptr;
}

/// Tags that a full verification run must exercise.
inline const std::vector<std::string>& verify_checklist() {
    static const std::vector<std::string> tags{
        "p-confid", "p-pov", "p-inacc", "p-reprod", "H-pov", "H-val", "H-var", "prep-ur",
        "MS-tau", "MT-ur", "MT-tau-pos", "pt", "MT-p", "MT-lifetime", "Grabo-tau", "Grabo-lifetime",
        "Wig-ft", "Wig-moments", "Wig-ur", "ft-expon", "f-til-E-Lor", "life-line-ur", "Wig-lifetime", "Wig-life-ur",
        "BM-equiv-width", "equiv-width-ur", "decay-equiv-width-ur", "HU-ove-width-ur", "HU-trans-width-ur",
        "HU-lifetime-ur", "MT-clock-ur", "HU-clock-ur", "C-alpha",
        "time-cov", "time-var", "pov-ur", "H-g", "T-g", "Weyl", "H-cov2", "T-cov",
        "osc-phase", "garrison-wong", "F-free", "time-povm", "T-c-spec", "BF-effect", "BF-bound", "lambda-var",
        "chopper-J", "chopper-Job", "chopper-t0-avg", "two-slit"};
    return tags;
}

// ---------------------------------------------------------------- parameters and sweeps

inline Params defaults(const Experiment& e, std::uint64_t seed) {
    Params p;
    p.seed = seed;
    for (const auto& s : e.schema) {
        if (s.type == ParamType::text) p.text[s.name] = s.fallback;
        else p.num[s.name] = std::stod(s.fallback);
    }
    return p;
}

struct Sweep {
    std::string key;
    std::vector<double> values;
};

/// key=lo..hi:log[:N] or key=lo..hi:lin[:N]; log defaults to two points per decade, lin to five.
inline Sweep parse_sweep(const Experiment& e, const std::string& text) {
    auto fail = [&](const std::string& why) { throw Error(ErrorCode::schema, "sweep '" + text + "': " + why); };
    const auto eq = text.find('='), dots = text.find("..");
    if (eq == std::string::npos || dots == std::string::npos || dots < eq) fail("expected key=lo..hi:log|lin[:N]");
    Sweep s{text.substr(0, eq), {}};
    const auto it = std::find_if(e.schema.begin(), e.schema.end(), [&](const ParamSpec& q) { return q.name == s.key; });
    if (it == e.schema.end()) fail("unknown parameter " + s.key);
    if (it->type == ParamType::text) fail("cannot sweep a text parameter");
    const auto colon = text.find(':', dots);
    if (colon == std::string::npos) fail("missing :log or :lin");
    double lo = 0.0, hi = 0.0;
    std::size_t used = 0;
    try {
        lo = std::stod(text.substr(eq + 1, dots - eq - 1), &used);
        if (used != dots - eq - 1) fail("bad lower end");
        hi = std::stod(text.substr(dots + 2, colon - dots - 2), &used);
        if (used != colon - dots - 2) fail("bad upper end");
    } catch (const std::logic_error&) {
        fail("bad range");
    }
    std::string mode = text.substr(colon + 1);
    long n = 0;
    if (const auto c2 = mode.find(':'); c2 != std::string::npos) {
        try {
            n = std::stol(mode.substr(c2 + 1), &used);
        } catch (const std::logic_error&) {
            fail("bad point count");
        }
        if (used != mode.size() - c2 - 1 || n < 2) fail("point count must be an integer >= 2");
        mode.resize(c2);
    }
    if (mode == "log") {
        if (!(lo > 0.0 && hi > lo)) fail("log sweep needs 0 < lo < hi");
        if (n == 0) n = std::lround(2 * std::log10(hi / lo)) + 1;
        n = std::max(n, 2L);
        const double a = std::log10(lo), b = std::log10(hi);
        for (long i = 0; i < n; ++i) s.values.push_back(std::pow(10.0, a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1)));
    } else if (mode == "lin") {
        if (!(hi > lo)) fail("lin sweep needs lo < hi");
        if (n == 0) n = 5;
        for (long i = 0; i < n; ++i) s.values.push_back(lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1));
    } else {
        fail("mode must be log or lin");
    }
    for (double& v : s.values) {
        if (it->type == ParamType::integer) v = std::round(v);
        if (it->positive && !(v > 0.0)) fail(s.key + " must be positive");
    }
    return s;
}

/// Runs every sweep point and prepends the swept value to each table.
inline Result run_experiment(const Experiment& e, const Params& base, const std::optional<Sweep>& sweep) {
    if (!sweep) return e.run(base);
    Result all;
    for (double v : sweep->values) {
        Params p = base;
        p.num[sweep->key] = v;
        Result r = e.run(p);
        for (auto& t : r.tables) {
            t.columns.insert(t.columns.begin(), "sweep_" + sweep->key);
            for (auto& row : t.rows) row.insert(row.begin(), v);
        }
        all.append(std::move(r));
    }
    if (e.summarize) e.summarize(all);
    return all;
}

// ---------------------------------------------------------------- verification

struct VerifyRun {
    std::string experiment;
    std::map<std::string, double> overrides;
    std::optional<std::string> sweep;
};

inline std::vector<VerifyRun> verify_plan() {
    std::vector<VerifyRun> plan;
    for (const auto& e : catalog()) {
        if (e.name == "abm") plan.push_back({e.name, {{"dt", 1.0}}, std::string("g0=1..1000:log")});
        else plan.push_back({e.name, {}, {}});
    }
    return plan;
}

struct VerifyOutcome {
    Table bounds{"verify", {"experiment", "tag", "lhs", "rhs", "slack", "tolerance", "asserted", "pass", "note"}, {}};
    Table coverage{"coverage", {"tag", "reports", "asserted", "passed"}, {}};
    bool all_pass = true;
    bool covered = true;
};

/// `only` empty means the whole catalog; coverage is asserted only for the whole catalog.
inline VerifyOutcome verify(const std::vector<std::string>& only, std::uint64_t seed) {
    VerifyOutcome v;
    std::map<std::string, std::array<long long, 3>> count;
    for (const auto& run : verify_plan()) {
        if (!only.empty() && std::find(only.begin(), only.end(), run.experiment) == only.end()) continue;
        const Experiment& e = *find_experiment(run.experiment);
        Params p = defaults(e, seed);
        for (const auto& [k, x] : run.overrides) p.num[k] = x;
        std::optional<Sweep> sw;
        if (run.sweep) sw = parse_sweep(e, *run.sweep);
        const Result r = run_experiment(e, p, sw);
        for (const auto& b : r.reports) {
            v.bounds.add({e.name, b.tag, b.lhs, b.rhs, b.slack, b.tolerance, b.asserted, b.pass, b.note});
            auto& c = count[b.tag];
            ++c[0];
            if (b.asserted) ++c[1];
            if (b.asserted && b.pass) ++c[2];
            if (b.asserted && !b.pass) v.all_pass = false;
        }
    }
    std::set<std::string> tags(verify_checklist().begin(), verify_checklist().end());
    for (const auto& [tag, c] : count) tags.insert(tag);
    for (const auto& tag : tags) {
        const auto it = count.find(tag);
        const std::array<long long, 3> c = it == count.end() ? std::array<long long, 3>{0, 0, 0} : it->second;
        v.coverage.add({tag, c[0], c[1], c[2]});
        const bool listed = std::find(verify_checklist().begin(), verify_checklist().end(), tag) != verify_checklist().end();
        if (only.empty() && listed && c[1] == 0) v.covered = false;
    }
    return v;
}

}  // namespace tempus::cli
