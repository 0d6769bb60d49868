#include <CLI11.hpp>

#include <cstdlib>
#include <functional>
#include <iostream>
#include <iterator>
#include <map>

#include "report.hpp"

#ifndef FATOULAB_VERSION
#define FATOULAB_VERSION "0.0.0"
#endif

using namespace fatou;
using fatou::cli::Json;

namespace {

constexpr int kExitOk = 0, kExitUsage = 1, kExitNumerical = 2, kExitFalsified = 3;

struct Config {
    std::string map_text, qd_text, point_text, points_text;
    std::optional<unsigned> precision;
    std::string format = "json";
    int period_max = 2;
    int iter_cap = 1000;
    int max_period = 64;
    double r0 = 0.1;
    int levels = 6;
    double quad_tol = 1e-10;
    double tol = 1e-3;
    long budget = 50'000'000;
    bool dimension_check = false;
    std::map<std::string, double> eps;
    std::optional<unsigned> degree_cap;
    std::optional<int> k_root;
};

const std::vector<std::string> kEpsNames{"rank", "cluster", "orbit", "super", "ind", "unity", "beta", "push", "series", "coprime"};

Tolerances tolerances_for(unsigned bits, const Config& c) {
    Tolerances t = Tolerances::for_bits(bits);
    std::map<std::string, double*> slots{{"rank", &t.eps_rank},     {"cluster", &t.eps_cluster}, {"orbit", &t.eps_orbit},
                                         {"super", &t.eps_super},   {"ind", &t.eps_ind},         {"unity", &t.eps_unity},
                                         {"beta", &t.eps_beta},     {"push", &t.eps_push},       {"series", &t.eps_series},
                                         {"coprime", &t.eps_coprime}};
    for (const auto& [name, value] : c.eps) *slots.at(name) = value;
    if (c.degree_cap) t.degree_cap = *c.degree_cap;
    if (c.k_root) t.k_root = *c.k_root;
    return t;
}

unsigned precision_bits(const Config& c) {
    if (c.precision) return *c.precision;
    if (const char* env = std::getenv("FATOULAB_PRECISION")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end == env || *end != '\0' || v < 53 || v > 1 << 20)
            throw Error(ErrorKind::Usage, std::string("FATOULAB_PRECISION='") + env + "' is not a precision in bits");
        return static_cast<unsigned>(v);
    }
    return kDefaultPrecisionBits;
}

struct Context {
    const Config& cfg;
    Tolerances tol;
    Json& out;

    std::string map_source() const {
        if (cfg.map_text != "-") return cfg.map_text;
        return std::string(std::istreambuf_iterator<char>(std::cin), std::istreambuf_iterator<char>());
    }
    RationalMap map(int min_degree) const {
        if (cfg.map_text.empty()) throw Error(ErrorKind::Usage, "--map is required");
        const MapExpression m = parse_map(map_source());
        if (m.map.degree() < min_degree)
            throw Error(ErrorKind::DegreeTooSmall, "this command needs degree at least " + std::to_string(min_degree));
        out["map"] = cli::map(m.map);
        return m.map;
    }
    RationalQD qd() const {
        if (cfg.qd_text.empty()) throw Error(ErrorKind::Usage, "--qd is required");
        const RationalQD q = parse_qd(cfg.qd_text);
        out["differential"] = cli::qd(q);
        return q;
    }
    SpherePoint point() const {
        if (cfg.point_text.empty()) throw Error(ErrorKind::Usage, "--point is required");
        return parse_point(cfg.point_text);
    }
};

void merge(Json& out, const Json& fields) {
    for (auto it = fields.begin(); it != fields.end(); ++it) out[it.key()] = it.value();
}

int run_cycles(Context& cx) {
    const auto f = cx.map(2);
    merge(cx.out, cli::gamma(gamma(f, cx.cfg.period_max, cx.tol)));
    return kExitOk;
}

int run_classify(Context& cx) {
    const auto f = cx.map(2);
    const Cycle c = cycle_through(f, cx.point(), cx.tol, cx.cfg.max_period);
    cx.out["class"] = std::string(to_string(c.cls));
    cx.out["cycle"] = cli::cycle(c);
    return kExitOk;
}

int run_parabolic(Context& cx) {
    const auto f = cx.map(2);
    const Cycle c = cycle_through(f, cx.point(), cx.tol, cx.cfg.max_period);
    if (c.cls != CycleClass::Parabolic || !c.parabolic)
        throw Error(ErrorKind::NotParabolic, "the cycle is " + std::string(to_string(c.cls)));
    merge(cx.out, cli::parabolic(*c.parabolic));
    cx.out["gamma"] = *c.gamma;
    cx.out["cycle"] = cli::cycle(c);
    return kExitOk;
}

int run_gamma(Context& cx) {
    const auto f = cx.map(2);
    merge(cx.out, cli::gamma(gamma(f, cx.cfg.period_max, cx.tol)));
    return kExitOk;
}

int run_delta(Context& cx) {
    const auto f = cx.map(2);
    merge(cx.out, cli::delta(delta(f, cx.cfg.iter_cap, cx.tol)));
    return kExitOk;
}

int run_check_fs(Context& cx) {
    const auto f = cx.map(2);
    const FSReport r = check_fs(f, cx.cfg.period_max, cx.cfg.iter_cap, cx.tol, cx.cfg.dimension_check);
    merge(cx.out, cli::fs(r));
    if (r.pass && r.classical_pass) return kExitOk;
    std::cerr << "fatoulab: falsification event: gamma_partial " << r.gamma.gamma_partial << ", delta " << r.delta.count
              << ", classical " << r.classical_count << "/" << r.classical_bound
              << "; this indicates a numerical defect, the full report follows on stdout\n";
    return kExitFalsified;
}

int run_qd_push(Context& cx) {
    const auto f = cx.map(1);
    const auto q = cx.qd();
    PushforwardInfo info;
    const RationalQD r = pushforward(f, q, cx.tol, &info);
    cx.out["result"] = cli::qd(r);
    cx.out["candidate_poles"] = cli::points(info.candidate_poles);
    cx.out["samples"] = info.samples;
    cx.out["residual"] = cli::number(info.residual);
    cx.out["reconstruction_exact"] = info.exact;
    return kExitOk;
}

int run_qd_pull(Context& cx) {
    const auto f = cx.map(1);
    const auto q = cx.qd();
    cx.out["result"] = cli::qd(pullback(f, q, cx.tol));
    return kExitOk;
}

int run_nabla(Context& cx) {
    const auto f = cx.map(2);
    if (cx.cfg.points_text.empty() && cx.cfg.qd_text.empty())
        throw Error(ErrorKind::Usage, "nabla needs --points (operator matrix) or --qd (norm of q - f_*q)");
    if (!cx.cfg.points_text.empty()) cx.out["operator"] = cli::nabla(nabla_matrix(f, parse_points(cx.cfg.points_text), cx.tol));
    if (!cx.cfg.qd_text.empty()) cx.out["nabla_norm"] = cli::integral(nabla_norm(f, cx.qd(), cx.cfg.tol, cx.cfg.budget));
    return kExitOk;
}

int run_residue(Context& cx) {
    const auto f = cx.map(2);
    Cycle c = cycle_through(f, cx.point(), cx.tol, cx.cfg.max_period);
    RationalQD q;
    if (!cx.cfg.qd_text.empty()) {
        q = cx.qd();
    } else {
        // Completion of the canonical divergence: q_f on a parabolic cycle, dw^2/w^2 otherwise.
        const auto basis = invariant_divergence_basis(f, c, cx.tol);
        const std::string want = c.cls == CycleClass::Parabolic ? "q_f" : "dw2/w2";
        const Divergence* d = nullptr;
        for (const auto& e : basis.elements)
            if (e.label == want) d = &e;
        if (!d) throw Error(ErrorKind::UnsupportedDivergence, "no " + want + " divergence on this cycle");
        q = complete_divergence(f, c, d->c, cx.tol).q;
        cx.out["differential"] = cli::qd(q);
        cx.out["divergence"] = want;
    }
    FluxOptions opts;
    opts.r0 = cx.cfg.r0;
    opts.levels = cx.cfg.levels;
    opts.quad_tol = cx.cfg.quad_tol;
    opts.budget = cx.cfg.budget;
    merge(cx.out, cli::residue(residue_flux(f, c, q, opts, cx.tol)));
    return kExitOk;
}

int run_balance(Context& cx) {
    const auto f = cx.map(2);
    merge(cx.out, cli::balance(balance_check(f, cx.qd(), cx.cfg.tol, cx.tol, cx.cfg.budget)));
    return kExitOk;
}

int run_lattes(Context& cx) {
    const auto f = cx.map(2);
    merge(cx.out, cli::lattes(lattes_test(f, cx.tol)));
    return kExitOk;
}

Json config_json(const Config& c, unsigned bits, const Tolerances& t) {
    Json j;
    j["precision_bits"] = bits;
    j["tolerances"] = cli::tolerances(t);
    j["period_max"] = c.period_max;
    j["iter_cap"] = c.iter_cap;
    j["max_period"] = c.max_period;
    j["radii"] = Json{{"r0", cli::number(c.r0)}, {"levels", c.levels}};
    j["quad_tol"] = cli::number(c.quad_tol);
    j["tol"] = cli::number(c.tol);
    j["budget"] = c.budget;
    j["format"] = c.format;
    return j;
}

bool usage_kind(ErrorKind k) {
    return k == ErrorKind::Usage || k == ErrorKind::SyntaxError || k == ErrorKind::NotRational ||
           k == ErrorKind::DegreeTooSmall;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Fatou-Shishikura counts and quadratic-differential calculus for rational maps", "fatoulab"};
    app.require_subcommand(1);
    app.set_version_flag("--version", FATOULAB_VERSION);
    Config cfg;

    using Runner = std::function<int(Context&)>;
    std::map<std::string, Runner> runners;
    auto command = [&](const std::string& name, const std::string& help, Runner run) {
        CLI::App* sub = app.add_subcommand(name, help);
        sub->add_option("--map", cfg.map_text, "rational map in z, or - for stdin")->required();
        sub->add_option("--precision", cfg.precision, "working precision in bits (overrides FATOULAB_PRECISION)")
            ->check(CLI::Range(53u, 1u << 20));
        sub->add_option("--format", cfg.format, "json or table")->check(CLI::IsMember({"json", "table"}));
        for (const auto& name : kEpsNames)
            sub->add_option_function<double>(
                   "--eps-" + name, [&cfg, name](double v) { cfg.eps[name] = v; }, "override eps_" + name)
                ->check(CLI::PositiveNumber);
        sub->add_option("--degree-cap", cfg.degree_cap, "largest degree of an iterate")->check(CLI::PositiveNumber);
        sub->add_option("--k-root", cfg.k_root, "root-of-unity order bound")->check(CLI::PositiveNumber);
        runners[name] = std::move(run);
        return sub;
    };
    auto period_max = [&](CLI::App* s) {
        s->add_option("--period-max", cfg.period_max, "largest period searched")->check(CLI::PositiveNumber);
    };
    auto point = [&](CLI::App* s) { s->add_option("--point", cfg.point_text, "periodic point (constant or inf)"); };
    auto budget = [&](CLI::App* s) {
        s->add_option("--budget", cfg.budget, "quadrature evaluation budget")->check(CLI::PositiveNumber);
        s->add_option("--tol", cfg.tol, "absolute quadrature tolerance")->check(CLI::PositiveNumber);
    };
    auto qd = [&](CLI::App* s, bool required) {
        auto* o = s->add_option("--qd", cfg.qd_text, "quadratic differential R dz^2: JSON {num, den} or an expression");
        if (required) o->required();
    };

    period_max(command("cycles", "cycles up to a period, classified", run_cycles));
    auto* classify = command("classify", "cycle through a periodic point", run_classify);
    point(classify);
    classify->add_option("--max-period", cfg.max_period)->check(CLI::PositiveNumber);
    auto* para = command("parabolic", "formal invariants of a parabolic cycle", run_parabolic);
    point(para);
    para->add_option("--max-period", cfg.max_period)->check(CLI::PositiveNumber);
    period_max(command("gamma", "partial nonrepelling count", run_gamma));
    command("delta", "infinite tails of critical orbits", run_delta)
        ->add_option("--iter-cap", cfg.iter_cap, "critical orbit iterations")
        ->check(CLI::PositiveNumber);
    auto* fs = command("check-fs", "Fatou-Shishikura certificate", run_check_fs);
    period_max(fs);
    fs->add_option("--iter-cap", cfg.iter_cap, "critical orbit iterations")->check(CLI::PositiveNumber);
    fs->add_flag("--dimension-check", cfg.dimension_check, "also run the rank cross-check");
    qd(command("qd-push", "pushforward f_* q", run_qd_push), true);
    qd(command("qd-pull", "pullback f^* q", run_qd_pull), true);
    auto* nab = command("nabla", "I - f_*: matrix on Q(A) or norm of q - f_*q", run_nabla);
    nab->add_option("--points", cfg.points_text, "comma-separated point set A");
    qd(nab, false);
    budget(nab);
    auto* res = command("residue", "dynamical residue by flux and closed form", run_residue);
    point(res);
    qd(res, false);
    res->add_option("--r0", cfg.r0, "largest radius")->check(CLI::PositiveNumber);
    res->add_option("--levels", cfg.levels, "radii r0 / 2^k for k up to levels")->check(CLI::Range(2, 30));
    res->add_option("--quad-tol", cfg.quad_tol, "flux quadrature tolerance")->check(CLI::PositiveNumber);
    res->add_option("--max-period", cfg.max_period)->check(CLI::PositiveNumber);
    res->add_option("--budget", cfg.budget)->check(CLI::PositiveNumber);
    auto* bal = command("balance", "Dec, residues and the norm of q - f_*q", run_balance);
    qd(bal, true);
    budget(bal);
    command("lattes", "Lattes test", run_lattes);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    const std::string name = app.get_subcommands().front()->get_name();
    Json out;
    out["schema"] = "fatoulab/1";
    out["command"] = name;
    int code = kExitOk;
    try {
        const unsigned bits = precision_bits(cfg);
        PrecisionScope scope(bits);
        Context cx{cfg, tolerances_for(bits, cfg), out};
        out["config"] = config_json(cfg, bits, cx.tol);
        code = runners.at(name)(cx);
    } catch (const Error& e) {
        code = usage_kind(e.kind()) ? kExitUsage : kExitNumerical;
        Json err{{"kind", std::string(to_string(e.kind()))}, {"message", e.what()}};
        if (const auto* p = dynamic_cast<const ParseError*>(&e)) err["position"] = p->position();
        out["error"] = err;
        std::cerr << "fatoulab: " << e.what() << "\n";
    } catch (const std::exception& e) {
        code = kExitNumerical;
        out["error"] = Json{{"kind", "Internal"}, {"message", e.what()}};
        std::cerr << "fatoulab: " << e.what() << "\n";
    }
    out["metadata"] = Json{{"library", "fatoulab"}, {"version", FATOULAB_VERSION}};
    if (cfg.format == "table") std::cout << cli::table(out);
    else std::cout << out.dump(2) << "\n";
    return code;
}
