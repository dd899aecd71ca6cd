#pragma once

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <memory>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "errors.hpp"
#include "extrapolation.hpp"
#include "falsifier.hpp"
#include "generate.hpp"
#include "norms.hpp"
#include "operators.hpp"
#include "rdf.hpp"
#include "report.hpp"
#include "weight.hpp"

// Command-line frontend. One binary, subcommands mirroring the library
// modules. Every report is a JSON/CSV/text rendering of
//   {"config": <resolved run configuration>, "report": <payload>}
// and identical (argv, input files, seed) produce byte-identical output.
//
// Exit codes: 0 success; 1 an asserted inequality failed or a bundled
// reference value mismatched (incl. NonconvergentSeries); 2 bad input.

namespace mk {

inline const char* format_name(Format f) {
    switch (f) {
        case Format::JsonFmt: return "json";
        case Format::Csv: return "csv";
        case Format::Text: return "text";
    }
    return "?";
}

struct RunConfig {
    std::string command;
    std::size_t n = 0;
    std::uint64_t seed = 0;
    std::string seed_source = "default"; // "default" | "flag" | "env"
    std::uint64_t budget = 10000;
    double safety = 1.5;
    unsigned threads = 0; // accepted for interface stability; execution is serial
    Format format = Format::JsonFmt;
    std::string out_path;
    std::map<std::string, double> tol = {{"lemma_slack", 1e-9}, {"verify_slack", 1e-9}};
    Json args = Json::object(); // per-command resolved arguments
};

inline Json config_json(const RunConfig& cfg) {
    Json tol = Json::object();
    for (const auto& [k, v] : cfg.tol) tol[k] = v;
    Json j = Json::object();
    j["command"] = cfg.command;
    j["n"] = cfg.n;
    j["seed"] = cfg.seed;
    j["seed_source"] = cfg.seed_source;
    j["budget"] = cfg.budget;
    j["safety"] = cfg.safety;
    j["threads"] = cfg.threads;
    j["format"] = format_name(cfg.format);
    j["out"] = cfg.out_path.empty() ? Json() : Json(cfg.out_path);
    j["tolerances"] = tol;
    j["args"] = cfg.args;
    return j;
}

namespace detail {

inline double parse_strict_double(const std::string& s, const char* what) {
    std::size_t pos = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &pos);
    } catch (const std::exception&) {
        throw UsageError(std::string(what) + ": bad number '" + s + "'");
    }
    if (pos != s.size() || !std::isfinite(v))
        throw UsageError(std::string(what) + ": bad number '" + s + "'");
    return v;
}

inline std::vector<double> parse_double_list(const std::string& s, const char* what) {
    std::vector<double> out;
    std::size_t start = 0;
    while (start <= s.size()) {
        std::size_t comma = s.find(',', start);
        if (comma == std::string::npos) comma = s.size();
        out.push_back(parse_strict_double(s.substr(start, comma - start), what));
        start = comma + 1;
    }
    return out;
}

inline Json seq_json(const Sequence& v) {
    Json a = Json::array();
    for (double x : v) a.push_back(x);
    return a;
}

inline Json norm_report_json(const NormReport& rep) {
    Json j = Json::object();
    j["kind"] = norm_kind_name(rep.kind);
    j["value"] = rep.value;
    j["argmax_n"] = rep.argmax_n;
    j["n"] = rep.n;
    if (rep.p) j["p"] = *rep.p;
    if (rep.per_n) j["per_window"] = seq_json(*rep.per_n);
    return j;
}

inline Json rdf_json(const RdfResult& res, bool emit_iterate) {
    Json j = Json::object();
    j["norm_exponent"] = res.norm_exponent;
    j["input_norm"] = res.input_norm;
    j["iterate_norm"] = res.iterate_norm;
    j["term_norm_sum"] = res.term_norm_sum;
    j["term_norms"] = seq_json(res.term_norms);
    j["tail_bound"] = res.tail_bound;
    j["terms_used"] = res.terms_used;
    j["a1_value"] = res.a1_report ? Json(res.a1_report->value) : Json();
    j["a1_slack"] = res.a1_slack;
    Json checks = Json::object();
    checks["dominates_input"] = res.checks.dominates_input;
    checks["norm_within_double"] = res.checks.norm_within_double;
    checks["a1_within_2k"] =
        res.checks.a1_within_2k ? Json(*res.checks.a1_within_2k) : Json();
    j["checks"] = checks;
    if (emit_iterate || res.iterate.size() <= 64) j["iterate"] = seq_json(res.iterate);
    return j;
}

inline Json lemma_json(const LemmaCheckReport& rep) {
    Json j = Json::object();
    j["lemma"] = rep.lemma;
    j["lhs"] = rep.lhs;
    j["rhs"] = rep.rhs;
    j["gap"] = rep.gap;
    j["holds"] = rep.holds;
    j["a1_value"] = rep.a1_value;
    j["base_ap_norm"] = rep.base_ap_norm;
    j["terms_used"] = rep.terms_used;
    j["instance_digest"] = rep.instance_digest;
    return j;
}

inline Json instance_json(const InequalityInstance& inst, const EvalSides& ev) {
    Json j = Json::object();
    j["form"] = form_name(inst.form);
    j["n"] = inst.v.size();
    j["alpha"] = inst.alpha;
    j["beta"] = inst.beta;
    if (inst.lam) j["lambda"] = seq_json(*inst.lam);
    j["v"] = seq_json(inst.v);
    j["lhs"] = ev.lhs;
    j["rhs"] = ev.rhs;
    j["margin"] = ev.margin;
    j["violated"] = ev.violated;
    return j;
}

// Shared state for one CLI invocation.
struct CliCtx {
    RunConfig cfg;
    std::ostream* out = nullptr;
    std::ostream* err = nullptr;
    int exit_code = 0;

    void resolve_seed() {
        if (const char* env = std::getenv("MK_SEED")) {
            std::string s(env);
            std::size_t pos = 0;
            std::uint64_t v = 0;
            try {
                v = std::stoull(s, &pos);
            } catch (const std::exception&) {
                throw UsageError("MK_SEED: bad integer '" + s + "'");
            }
            if (pos != s.size()) throw UsageError("MK_SEED: bad integer '" + s + "'");
            cfg.seed = v;
            cfg.seed_source = "env";
        }
    }

    void apply_tol_overrides(const std::vector<std::string>& items) {
        for (const auto& item : items) {
            const std::size_t eq = item.find('=');
            if (eq == std::string::npos || eq == 0)
                throw UsageError("--tol expects name=value, got '" + item + "'");
            const std::string name = item.substr(0, eq);
            if (!cfg.tol.count(name)) {
                std::string known;
                for (const auto& kv : cfg.tol) {
                    if (!known.empty()) known += ", ";
                    known += kv.first;
                }
                throw UsageError("--tol: unknown tolerance '" + name + "' (known: " + known +
                                 ")");
            }
            cfg.tol[name] = parse_strict_double(item.substr(eq + 1), "--tol");
        }
    }

    void emit(const Json& payload) {
        Json envelope = Json::object();
        envelope["config"] = config_json(cfg);
        envelope["report"] = payload;
        write_text(emit_report(envelope, cfg.format));
    }

    void write_text(const std::string& text) {
        if (cfg.out_path.empty()) {
            *out << text;
            return;
        }
        std::ofstream f(cfg.out_path, std::ios::binary);
        if (!f) throw UsageError("cannot open output file '" + cfg.out_path + "'");
        f << text;
    }
};

// Builds each weight/sequence from its generator spec at the configured n
// (n = 0 lets file: specs keep their full length), then requires all lengths
// to agree and records the resolved n.
struct Inputs {
    CliCtx& ctx;
    explicit Inputs(CliCtx& c) : ctx(c) {}

    Sequence sequence(const std::string& spec) {
        Sequence v = make_sequence(spec, ctx.cfg.n);
        settle(v.size(), spec);
        return v;
    }
    Weight weight(const std::string& spec) {
        Weight w = make_weight(spec, ctx.cfg.n);
        settle(w.size(), spec);
        return w;
    }

private:
    void settle(std::size_t len, const std::string& spec) {
        if (ctx.cfg.n == 0) {
            ctx.cfg.n = len;
            return;
        }
        require_same_length(len, ctx.cfg.n, ("input '" + spec + "'").c_str());
    }
};

} // namespace detail

// Parses argv (without the program name) and executes one command.
inline int run_cli(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
    detail::CliCtx ctx;
    ctx.out = &out;
    ctx.err = &err;

    CLI::App app{"discrete weight classes, maximal operators, and extrapolation checks"};
    app.require_subcommand(1);

    std::string format_str = "json";
    std::vector<std::string> tol_items;
    auto* seed_opt =
        app.add_option("--seed", ctx.cfg.seed, "rng seed (MK_SEED env overrides)");
    app.add_option("--budget", ctx.cfg.budget, "evaluation budget for randomized searches");
    app.add_option("--safety", ctx.cfg.safety, "inflation factor for estimated operator norms");
    app.add_option("--threads", ctx.cfg.threads,
                   "worker thread cap (accepted for interface stability; runs serially)");
    app.add_option("--format", format_str, "output format: json, csv, text");
    app.add_option("--out", ctx.cfg.out_path, "write the report to this file");
    app.add_option("--tol", tol_items, "override a named tolerance, e.g. lemma_slack=1e-8");
    app.add_option("--n", ctx.cfg.n, "sequence length for generators / truncation for files");

    // CLI11 stores callbacks beyond the enclosing block, so each command's
    // option holders live in a shared_ptr owned by its callback.
    auto prologue = [&](const char* command) {
        ctx.cfg.command = command;
        ctx.cfg.format = parse_format(format_str);
        ctx.apply_tol_overrides(tol_items);
        if (seed_opt->count() > 0) ctx.cfg.seed_source = "flag";
        ctx.resolve_seed(); // MK_SEED wins over the flag
        return detail::Inputs(ctx);
    };

    // ---- norm ----------------------------------------------------------
    auto* norm = app.add_subcommand("norm", "truncated weight-class constants");
    norm->require_subcommand(1);
    {
        struct O {
            std::string wspec;
            double p = 2.0;
            bool per_window = false;
        };
        auto o = std::make_shared<O>();
        auto* c = norm->add_subcommand("ap", "A_p constant over windows [1,m]");
        c->add_option("--weight", o->wspec, "weight generator spec")->required();
        c->add_option("--p", o->p, "exponent p > 1")->required();
        c->add_flag("--per-window", o->per_window, "include the per-window values");
        c->callback([&, o] {
            auto in = prologue("norm ap");
            const Weight w = in.weight(o->wspec);
            ctx.cfg.args = {{"weight", o->wspec}, {"p", o->p}, {"per_window", o->per_window}};
            ctx.emit(detail::norm_report_json(ap_norm(w, Exponent(o->p), o->per_window)));
        });
    }
    {
        struct O {
            std::string wspec;
            bool per_window = false;
        };
        auto o = std::make_shared<O>();
        auto* c = norm->add_subcommand("a1", "A_1 constant max_n Mw(n)/w(n)");
        c->add_option("--weight", o->wspec, "weight generator spec")->required();
        c->add_flag("--per-window", o->per_window, "include the per-window values");
        c->callback([&, o] {
            auto in = prologue("norm a1");
            const Weight w = in.weight(o->wspec);
            ctx.cfg.args = {{"weight", o->wspec}, {"per_window", o->per_window}};
            ctx.emit(detail::norm_report_json(a1_norm(w, o->per_window)));
        });
    }
    {
        struct O {
            std::string wspec;
            bool per_window = false;
        };
        auto o = std::make_shared<O>();
        auto* c = norm->add_subcommand("ainf", "A_inf constant (mean w) * exp(mean log 1/w)");
        c->add_option("--weight", o->wspec, "weight generator spec")->required();
        c->add_flag("--per-window", o->per_window, "include the per-window values");
        c->callback([&, o] {
            auto in = prologue("norm ainf");
            const Weight w = in.weight(o->wspec);
            ctx.cfg.args = {{"weight", o->wspec}, {"per_window", o->per_window}};
            ctx.emit(detail::norm_report_json(ainf_norm(w, o->per_window)));
        });
    }
    {
        struct O {
            std::string wspec;
            double p = 2.0;
            bool per_window = false;
            bool tail = false;
        };
        auto o = std::make_shared<O>();
        auto* c = norm->add_subcommand("bp", "B_p constant of the truncated tail sums");
        c->add_option("--weight", o->wspec, "weight generator spec")->required();
        c->add_option("--p", o->p, "exponent p > 1")->required();
        c->add_flag("--tail", o->tail,
                    "add the analytic tail beyond n (power:lambda= weights only)");
        c->add_flag("--per-window", o->per_window, "include the per-window values");
        c->callback([&, o] {
            auto in = prologue("norm bp");
            const Weight w = in.weight(o->wspec);
            double tail_value = 0.0;
            if (o->tail) {
                const GeneratorSpec g = GeneratorSpec::parse(o->wspec);
                if (g.kind != "power")
                    throw UsageError("--tail: analytic tail is available only for "
                                     "power:lambda= weights");
                tail_value = power_tail(g.number("lambda"), o->p, ctx.cfg.n);
            }
            ctx.cfg.args = {{"weight", o->wspec},
                            {"p", o->p},
                            {"tail", tail_value},
                            {"per_window", o->per_window}};
            ctx.emit(detail::norm_report_json(
                bp_constant(w, Exponent(o->p), tail_value, o->per_window)));
        });
    }
    {
        struct O {
            std::string wspec;
            std::string grid_str;
        };
        auto o = std::make_shared<O>();
        auto* c = norm->add_subcommand("profile", "A_p constant across a grid of exponents");
        c->add_option("--weight", o->wspec, "weight generator spec")->required();
        c->add_option("--p-grid", o->grid_str, "comma-separated increasing exponents")
            ->required();
        c->callback([&, o] {
            auto in = prologue("norm profile");
            const Weight w = in.weight(o->wspec);
            const auto grid = detail::parse_double_list(o->grid_str, "--p-grid");
            ctx.cfg.args = {{"weight", o->wspec}, {"p_grid", detail::seq_json(grid)}};
            Json rows = Json::array();
            for (const NormReport& rep : ap_norm_profile(w, grid))
                rows.push_back(detail::norm_report_json(rep));
            ctx.emit(Json{{"profile", rows}});
        });
    }

    // ---- op ------------------------------------------------------------
    auto* op = app.add_subcommand("op", "discrete maximal-type operators");
    op->require_subcommand(1);
    {
        struct O {
            std::string opname, fspec, wspec;
            double gamma = 0.0;
        };
        auto o = std::make_shared<O>();
        auto* c = op->add_subcommand("apply", "apply an operator to a sequence");
        c->add_option("--op", o->opname,
                      "hardy | maximal | weighted-maximal | dual-maximal | g")
            ->required();
        c->add_option("--seq", o->fspec, "input sequence generator spec")->required();
        c->add_option("--weight", o->wspec, "weight spec (weighted operators only)");
        auto* gamma_opt = c->add_option("--gamma", o->gamma, "exponent in (0, 1] for op g");
        c->callback([&, o, c, gamma_opt] {
            auto in = prologue("op apply");
            const OperatorKind kind = parse_operator(o->opname);
            const Sequence f = in.sequence(o->fspec);
            const bool needs_weight = kind == OperatorKind::WeightedMaximal ||
                                      kind == OperatorKind::DualMaximal ||
                                      kind == OperatorKind::GOperator;
            const bool have_weight = c->count("--weight") > 0;
            const bool have_gamma = gamma_opt->count() > 0;
            if (needs_weight && !have_weight)
                throw UsageError(std::string("op apply: ") + operator_name(kind) +
                                 " requires --weight");
            if (!needs_weight && have_weight)
                throw UsageError(std::string("op apply: ") + operator_name(kind) +
                                 " does not take --weight");
            if (kind != OperatorKind::GOperator && have_gamma)
                throw UsageError("op apply: --gamma applies only to op g");
            if (kind == OperatorKind::GOperator && !have_gamma)
                throw UsageError("op apply: op g requires --gamma in (0, 1]");
            ctx.cfg.args = {{"op", operator_name(kind)}, {"seq", o->fspec}};
            Sequence result;
            if (kind == OperatorKind::Hardy) {
                result = hardy(f);
            } else if (kind == OperatorKind::Maximal) {
                result = maximal(f);
            } else {
                const Weight w = in.weight(o->wspec);
                ctx.cfg.args["weight"] = o->wspec;
                if (kind == OperatorKind::WeightedMaximal) {
                    result = weighted_maximal(f, w);
                } else if (kind == OperatorKind::DualMaximal) {
                    result = dual_maximal(f, w);
                } else {
                    ctx.cfg.args["gamma"] = o->gamma;
                    result = g_operator(f, w, o->gamma);
                }
            }
            ctx.emit(Json{{"op", operator_name(kind)},
                          {"n", result.size()},
                          {"output", detail::seq_json(result)}});
        });
    }
    {
        struct O {
            std::string opname, wspec;
            double p = 2.0;
        };
        auto o = std::make_shared<O>();
        auto* c = op->add_subcommand("norm-est", "lower-bound search for the operator norm");
        c->add_option("--op", o->opname, "hardy | maximal | dual-maximal")->required();
        c->add_option("--weight", o->wspec, "weight generator spec")->required();
        c->add_option("--p", o->p, "exponent p > 1 of the weighted space")->required();
        c->callback([&, o] {
            auto in = prologue("op norm-est");
            const OperatorKind kind = parse_operator(o->opname);
            const Weight w = in.weight(o->wspec);
            ctx.cfg.args = {{"op", operator_name(kind)}, {"weight", o->wspec}, {"p", o->p}};
            const OperatorNormEstimate est = estimate_operator_norm(
                kind, w, Exponent(o->p), ctx.cfg.budget, ctx.cfg.seed);
            ctx.emit(Json{{"op", operator_name(kind)},
                          {"p", o->p},
                          {"value", est.value},
                          {"strategy", est.strategy},
                          {"evaluations", est.evaluations},
                          {"certified", est.is_certified_upper},
                          {"witness", detail::seq_json(est.witness)}});
        });
    }

    // ---- rdf -----------------------------------------------------------
    auto* rdf = app.add_subcommand("rdf", "geometric-series majorant construction");
    rdf->require_subcommand(1);
    auto add_rdf = [&](const char* name, const char* help, bool dual) {
        struct O {
            std::string fspec, wspec;
            double p = 2.0;
            double K = 0.0;
            double tail_tol = 0.0;
            std::uint32_t terms = 16;
            bool emit_iterate = false;
        };
        auto o = std::make_shared<O>();
        auto* c = rdf->add_subcommand(name, help);
        c->add_option("--seq", o->fspec, "input sequence generator spec")->required();
        c->add_option("--weight", o->wspec, "weight generator spec")->required();
        c->add_option("--p", o->p, "exponent p > 1")->required();
        c->add_option("--K", o->K, "claimed operator-norm bound, > 0")->required();
        c->add_option("--terms", o->terms, "highest term index S");
        c->add_option("--tail-tol", o->tail_tol,
                      "stop early once a term norm < tail-tol * input norm");
        c->add_flag("--emit-iterate", o->emit_iterate,
                    "include the full iterate even for n > 64");
        c->callback([&, o, dual] {
            auto in = prologue(dual ? "rdf dual" : "rdf iterate");
            const Sequence h = in.sequence(o->fspec);
            const Weight w = in.weight(o->wspec);
            RdfConfig cfg;
            cfg.K = o->K;
            cfg.max_terms = o->terms;
            cfg.tail_tol = o->tail_tol;
            ctx.cfg.args = {{"seq", o->fspec},     {"weight", o->wspec}, {"p", o->p},
                            {"K", cfg.K},          {"terms", cfg.max_terms},
                            {"tail_tol", cfg.tail_tol}};
            const RdfResult res = dual ? rdf_dual_iterate(h, w, Exponent(o->p), cfg)
                                       : rdf_iterate(h, w, Exponent(o->p), cfg);
            ctx.emit(detail::rdf_json(res, o->emit_iterate));
            const bool ok = res.checks.dominates_input && res.checks.norm_within_double &&
                            res.checks.a1_within_2k.value_or(true);
            if (!ok) ctx.exit_code = 1;
        });
    };
    add_rdf("iterate", "sum_s M^s h / (2K)^s in l^p(w)", false);
    add_rdf("dual", "sum_s (M')^s h / (2K)^s in l^{p'}(w)", true);

    // ---- extrapolate ---------------------------------------------------
    auto* ex = app.add_subcommand("extrapolate", "factorization checks and transfer bounds");
    ex->require_subcommand(1);
    auto add_lemma = [&](const char* name, const char* help, bool l1star) {
        struct O {
            std::string fspec, wspec;
            double p = 0.0;
            double p0 = 0.0;
            double K = 0.0;
            double tail_tol = 0.0;
            std::uint32_t terms = 16;
        };
        auto o = std::make_shared<O>();
        auto* c = ex->add_subcommand(name, help);
        c->add_option("--seq", o->fspec, "strictly positive test sequence spec")->required();
        c->add_option("--weight", o->wspec, "weight generator spec")->required();
        c->add_option("--p", o->p, "exponent the weight is measured at")->required();
        c->add_option("--p0", o->p0, "exponent the composed weight is measured at")
            ->required();
        c->add_option("--K", o->K, "operator-norm bound; omit to estimate one");
        c->add_option("--terms", o->terms, "highest term index S");
        c->add_option("--tail-tol", o->tail_tol,
                      "stop early once a term norm < tail-tol * input norm");
        c->callback([&, o, l1star] {
            auto in =
                prologue(l1star ? "extrapolate lemma-l1star" : "extrapolate lemma-lstar");
            const Sequence h = in.sequence(o->fspec);
            const Weight w = in.weight(o->wspec);
            const Exponent pe(o->p), p0e(o->p0);
            RdfConfig cfg;
            cfg.max_terms = o->terms;
            cfg.tail_tol = o->tail_tol;
            std::string k_source = "flag";
            if (o->K > 0.0) {
                cfg.K = o->K;
            } else {
                k_source = "estimated";
                const OperatorNormEstimate est =
                    l1star ? estimate_operator_norm(OperatorKind::DualMaximal, w,
                                                    Exponent(pe.conjugate_value()),
                                                    ctx.cfg.budget, ctx.cfg.seed)
                           : estimate_operator_norm(OperatorKind::Maximal, w, pe,
                                                    ctx.cfg.budget, ctx.cfg.seed);
                cfg.K = ctx.cfg.safety * est.value;
            }
            ctx.cfg.args = {{"seq", o->fspec},        {"weight", o->wspec},
                            {"p", o->p},              {"p0", o->p0},
                            {"K", cfg.K},             {"K_source", k_source},
                            {"terms", cfg.max_terms}, {"tail_tol", cfg.tail_tol}};
            const double slack = ctx.cfg.tol.at("lemma_slack");
            const LemmaCheckReport rep =
                l1star ? lemma_l1star_check(w, h, pe, p0e, cfg, slack)
                       : lemma_lstar_check(w, h, pe, p0e, cfg, slack);
            ctx.emit(detail::lemma_json(rep));
            if (!rep.holds) ctx.exit_code = 1;
        });
    };
    add_lemma("lemma-lstar",
              "[w g^{-(p0-p)}]_{A_{p0}} <= [g]_{A_1}^{p0-p} [w]_{A_p}, needs p < p0", false);
    add_lemma("lemma-l1star",
              "[w g^t]_{A_{p0}} <= [w g]_{A_1}^t [w]_{A_p}^{(p0-1)/(p-1)}, t = (p-p0)/(p-1)",
              true);
    {
        struct O {
            double p0 = 0.0, p = 0.0, K = 1.0, apw = 0.0;
            std::string phi_str;
        };
        auto o = std::make_shared<O>();
        auto* c = ex->add_subcommand("constant", "closed-form transferred bound");
        c->add_option("--p0", o->p0, "base exponent")->required();
        c->add_option("--p", o->p, "target exponent")->required();
        c->add_option("--phi0", o->phi_str, "base bound: linear:c= | power:c=,a= | const:c=")
            ->required();
        c->add_option("--K", o->K, "operator-norm bound for the target-side regime");
        c->add_option("--apw", o->apw, "weight constant at the target exponent")->required();
        c->callback([&, o] {
            prologue("extrapolate constant");
            const PhiDescriptor phi = parse_phi(o->phi_str);
            ctx.cfg.args = {{"p0", o->p0},
                            {"p", o->p},
                            {"phi0", o->phi_str},
                            {"K", o->K},
                            {"apw", o->apw}};
            const TransferConstant tc =
                transfer_constant(Exponent(o->p0), Exponent(o->p), phi, o->K, o->apw);
            ctx.emit(Json{{"p0", tc.p0},
                          {"p", tc.p},
                          {"regime", tc.regime},
                          {"K", tc.K},
                          {"ap_norm_value", tc.ap_norm_value},
                          {"phi0", phi.to_string()},
                          {"value", tc.value}});
        });
    }
    {
        struct O {
            std::string opname;
            double p0 = 0.0, p = 0.0;
            std::vector<std::string> w0specs, wspecs, corpus_specs;
        };
        auto o = std::make_shared<O>();
        auto* c = ex->add_subcommand("verify", "two-stage empirical transfer check");
        c->add_option("--op", o->opname, "identity | hardy | maximal")->required();
        c->add_option("--p0", o->p0, "base exponent")->required();
        c->add_option("--p", o->p, "target exponent")->required();
        c->add_option("--weights0", o->w0specs,
                      "base-side weight specs (default: power family)");
        c->add_option("--weights", o->wspecs,
                      "target-side weight specs (default: power family)");
        c->add_option("--corpus", o->corpus_specs, "test sequence specs (default: builtin mix)");
        c->callback([&, o] {
            auto in = prologue("extrapolate verify");
            if (ctx.cfg.n == 0) ctx.cfg.n = 512;
            const TransferOperator top = parse_transfer_operator(o->opname);
            const Exponent p0e(o->p0), pe(o->p);
            auto power_family = [](double q) {
                std::vector<std::string> fam = {"power:lambda=-0.5", "power:lambda=0",
                                                "power:lambda=0.5"};
                const double extra = 0.75 * (q - 1.0);
                if (extra != -0.5 && extra != 0.0 && extra != 0.5)
                    fam.push_back("power:lambda=" + format_double(extra));
                return fam;
            };
            const std::vector<std::string> w0 =
                o->w0specs.empty() ? power_family(o->p0) : o->w0specs;
            const std::vector<std::string> w1 =
                o->wspecs.empty() ? power_family(o->p) : o->wspecs;

            std::vector<Weight> weights0, weights1;
            for (const auto& s : w0) weights0.push_back(in.weight(s));
            for (const auto& s : w1) weights1.push_back(in.weight(s));
            std::vector<Sequence> corpus;
            if (o->corpus_specs.empty()) {
                corpus = default_corpus(ctx.cfg.n, ctx.cfg.seed);
            } else {
                for (const auto& s : o->corpus_specs) corpus.push_back(in.sequence(s));
            }

            VerifyOptions opt;
            opt.budget = ctx.cfg.budget;
            opt.seed = ctx.cfg.seed;
            opt.safety = ctx.cfg.safety;
            opt.slack = ctx.cfg.tol.at("verify_slack");

            Json w0j = Json::array(), w1j = Json::array();
            for (const auto& s : w0) w0j.push_back(s);
            for (const auto& s : w1) w1j.push_back(s);
            ctx.cfg.args = {{"op", transfer_operator_name(top)},
                            {"p0", o->p0},
                            {"p", o->p},
                            {"weights0", w0j},
                            {"weights", w1j},
                            {"corpus_size", corpus.size()}};

            const ExtrapolationReport rep =
                extrapolation_verify(top, corpus, weights0, weights1, p0e, pe, opt);

            Json stage1 = Json::array();
            for (const auto& pt : rep.stage1)
                stage1.push_back(Json{{"weight_index", pt.weight_index},
                                      {"ap0", pt.ap0},
                                      {"ratio", pt.ratio}});
            Json preds = Json::array();
            for (const auto& pr : rep.predictions)
                preds.push_back(Json{{"weight_index", pr.weight_index},
                                     {"apw", pr.apw},
                                     {"K", pr.K},
                                     {"predicted", pr.predicted},
                                     {"measured", pr.measured},
                                     {"violated", pr.violated},
                                     {"witness_corpus_index", pr.witness_corpus_index}});
            Json viols = Json::array();
            for (std::size_t v : rep.violations) viols.push_back(v);
            ctx.emit(Json{{"op", transfer_operator_name(top)},
                          {"p0", o->p0},
                          {"p", o->p},
                          {"phi0", rep.phi0.to_string()},
                          {"phi0_c", rep.phi0.c},
                          {"phi0_a", rep.phi0.a},
                          {"stage1", stage1},
                          {"predictions", preds},
                          {"violations", viols},
                          {"skipped", rep.skipped}});
            if (!rep.violations.empty()) ctx.exit_code = 1;
        });
    }

    // ---- counterexample --------------------------------------------------
    auto* ce =
        app.add_subcommand("counterexample", "discrete Hardy-type inequality instances");
    auto run_reference = std::make_shared<bool>(false);
    ce->add_flag("--paper", *run_reference,
                 "evaluate the four bundled instances against their recorded values");
    {
        struct O {
            std::string form_str, vspec, lamspec;
            double alpha = 0.0, beta = 0.0;
        };
        auto o = std::make_shared<O>();
        auto* c = ce->add_subcommand("eval", "evaluate both sides of one instance");
        c->add_option("--form", o->form_str,
                      "kl1 | kl1_unweighted_pos | kl1_unweighted_neg | ka1 | ka1_pos | ka1_neg")
            ->required();
        c->add_option("--alpha", o->alpha, "alpha in (0, 1)")->required();
        c->add_option("--beta", o->beta, "beta < 0 or beta >= 1")->required();
        c->add_option("--v", o->vspec, "sequence generator spec for v")->required();
        c->add_option("--lam", o->lamspec, "weight spec for lambda (general forms only)");
        c->callback([&, o] {
            auto in = prologue("counterexample eval");
            InequalityInstance inst;
            inst.form = parse_form(o->form_str);
            inst.alpha = o->alpha;
            inst.beta = o->beta;
            inst.v = in.sequence(o->vspec);
            if (!o->lamspec.empty()) inst.lam = in.sequence(o->lamspec);
            ctx.cfg.args = {{"form", o->form_str},
                            {"alpha", o->alpha},
                            {"beta", o->beta},
                            {"v", o->vspec}};
            if (!o->lamspec.empty()) ctx.cfg.args["lam"] = o->lamspec;
            const EvalSides ev = eval_sides(inst);
            Json j = detail::instance_json(inst, ev);
            if (inst.lam && inst.lam->size() >= 2) j["zeta"] = zeta_constant(*inst.lam);
            ctx.emit(j);
        });
    }
    {
        struct O {
            std::string form_str;
            double alpha = 0.0, beta = 0.0;
        };
        auto o = std::make_shared<O>();
        auto* c = ce->add_subcommand("search", "randomized hunt for violating instances");
        c->add_option("--form", o->form_str,
                      "kl1 | kl1_unweighted_pos | kl1_unweighted_neg | ka1 | ka1_pos | ka1_neg")
            ->required();
        c->add_option("--alpha", o->alpha, "alpha in (0, 1)")->required();
        c->add_option("--beta", o->beta, "beta < 0 or beta >= 1")->required();
        c->callback([&, o] {
            prologue("counterexample search");
            if (ctx.cfg.n == 0) throw UsageError("counterexample search: --n is required");
            ctx.cfg.args = {{"form", o->form_str}, {"alpha", o->alpha}, {"beta", o->beta}};
            const SearchResult res = violation_search(parse_form(o->form_str), ctx.cfg.n,
                                                      o->alpha, o->beta, ctx.cfg.budget,
                                                      ctx.cfg.seed);
            Json j = detail::instance_json(res.best, res.eval);
            j["evaluations"] = res.evaluations;
            j["restarts"] = res.restarts;
            ctx.emit(j);
        });
    }
    ce->callback([&, ce, run_reference] {
        if (!*run_reference) {
            if (ce->get_subcommands().empty())
                throw UsageError("counterexample: expected --paper, eval, or search");
            return;
        }
        if (!ce->get_subcommands().empty())
            throw UsageError("counterexample: --paper cannot be combined with a subcommand");
        prologue("counterexample --paper");
        Json rows = Json::array();
        bool all_ok = true;
        for (const ReferenceInstance& ref : reference_instances()) {
            const EvalSides ev = eval_sides(ref.instance);
            Json j = detail::instance_json(ref.instance, ev);
            j["title"] = ref.title;
            j["printed_lhs"] = ref.printed_lhs;
            j["printed_rhs"] = ref.printed_rhs;
            j["tol_lhs"] = ref.tol_lhs;
            j["tol_rhs"] = ref.tol_rhs;
            j["printed_violated"] = ref.printed_violated;
            const bool lhs_ok = std::abs(ev.lhs - ref.printed_lhs) <= ref.tol_lhs;
            const bool rhs_ok = std::abs(ev.rhs - ref.printed_rhs) <= ref.tol_rhs;
            const bool flag_ok = ev.violated == ref.printed_violated;
            j["lhs_ok"] = lhs_ok;
            j["rhs_ok"] = rhs_ok;
            j["violated_ok"] = flag_ok;
            j["ok"] = lhs_ok && rhs_ok && flag_ok;
            all_ok = all_ok && lhs_ok && rhs_ok && flag_ok;
            rows.push_back(std::move(j));
        }
        ctx.emit(Json{{"instances", rows}, {"all_ok", all_ok}});
        if (!all_ok) ctx.exit_code = 1;
    });

    // ---- generate --------------------------------------------------------
    {
        auto spec = std::make_shared<std::string>();
        auto* c = app.add_subcommand("generate", "emit a sequence in the weight-file format");
        c->add_option("--spec", *spec, "generator spec")->required();
        c->callback([&, spec] {
            prologue("generate");
            const Sequence v = make_sequence(*spec, ctx.cfg.n);
            ctx.cfg.n = v.size();
            std::ostringstream os;
            write_sequence_file(os, v);
            ctx.write_text(os.str());
        });
    }

    // Global options (--n, --seed, ...) may appear after the subcommand name.
    std::function<void(CLI::App*)> set_fallthrough = [&](CLI::App* a) {
        for (CLI::App* s : a->get_subcommands([](const CLI::App*) { return true; })) {
            s->fallthrough(true);
            set_fallthrough(s);
        }
    };
    set_fallthrough(&app);

    try {
        std::vector<std::string> storage;
        storage.reserve(args.size() + 1);
        storage.emplace_back("mk");
        for (auto& a : args) storage.push_back(std::move(a));
        std::vector<char*> argv;
        argv.reserve(storage.size());
        for (auto& s : storage) argv.push_back(s.data());
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const NonconvergentSeries& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    }
    return ctx.exit_code;
}

} // namespace mk
