#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <resil/harness.hpp>

using namespace resil;

namespace {

SignMatrix load_matrix(const std::string& path) {
    std::ifstream in(path);
    detail::require(static_cast<bool>(in), "cannot open matrix file '" + path + "'");
    return read_matrix(in);
}

json load_json(const std::string& path) {
    std::ifstream in(path);
    detail::require(static_cast<bool>(in), "cannot open config file '" + path + "'");
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw precondition_error("config file '" + path + "' is not valid JSON: " + e.what());
    }
}

std::ofstream open_output(const std::string& path) {
    std::ofstream out(path);
    detail::require(static_cast<bool>(out), "cannot write '" + path + "'");
    return out;
}

std::optional<std::uint64_t> opt_mod(const std::uint64_t& value, const CLI::Option* opt) {
    return opt->count() ? std::optional<std::uint64_t>(value) : std::nullopt;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Exact and Monte Carlo tools for the rank resilience of random sign matrices"};
    app.require_subcommand(1);

    std::size_t n = 0, m = 0, k = 1, threshold = 1, s = 1, budget = 0, workers = 1;
    std::uint64_t seed = 0, mod = 0, t = 1;
    std::string out_path, matrix_path, vector_text, config_path, alpha_text = "1/2", rule = "length";
    double bigm = 1.0, c = 1.0;
    bool exact = false, attacks = false, hyperplane = false;

    auto* gen = app.add_subcommand("gen", "sample a uniform sign matrix");
    gen->add_option("--n", n, "rows")->required();
    gen->add_option("--m", m, "columns")->required();
    gen->add_option("--seed", seed, "master seed")->required();
    gen->add_option("--out", out_path, "output path")->required();

    auto* rank = app.add_subcommand("rank", "exact rank, optionally also over F_p");
    rank->add_option("--matrix", matrix_path)->required();
    auto* rank_mod = rank->add_option("--mod", mod, "prime modulus");

    auto* rho_cmd = app.add_subcommand("rho", "largest atom probability of the signed sum");
    rho_cmd->add_option("--vector", vector_text, "comma-separated integers")->required();
    auto* rho_mod = rho_cmd->add_option("--mod", mod, "prime modulus");

    auto* rk = app.add_subcommand("rk", "count R_k or R_k^alpha");
    rk->add_option("--vector", vector_text)->required();
    rk->add_option("--mod", mod)->required();
    rk->add_option("--k", k)->required();
    auto* rk_alpha = rk->add_option("--alpha", alpha_text);

    auto* halasz = app.add_subcommand("halasz", "evaluate the Halasz-type bound");
    halasz->add_option("--vector", vector_text)->required();
    halasz->add_option("--mod", mod)->required();
    halasz->add_option("--k", k)->required();
    halasz->add_option("--bigm", bigm)->required();
    halasz->add_option("--c", c)->required();

    auto* calibrate = app.add_subcommand("calibrate", "fit the Halasz constant on sampled vectors");
    calibrate->add_option("--config", config_path)->required();
    calibrate->add_option("--out", out_path)->required();

    auto* good = app.add_subcommand("goodness", "goodness level h(a)");
    good->add_option("--vector", vector_text)->required();
    good->add_option("--mod", mod)->required();
    good->add_option("--k", k)->required();
    good->add_option("--alpha", alpha_text)->required();
    good->add_option("--threshold", threshold)->required();
    good->add_flag("--exact", exact, "minimize over every subvector (n <= 20)");

    auto* badset = app.add_subcommand("badset", "enumerate a bad set and compare with its counting bound");
    badset->add_option("--n", n)->required();
    badset->add_option("--mod", mod)->required();
    badset->add_option("--k", k)->required();
    badset->add_option("--s", s)->required();
    badset->add_option("--t", t)->required();
    badset->add_option("--alpha", alpha_text)->required();
    badset->add_option("--rule", rule, "length or support")->capture_default_str();

    auto* res = app.add_subcommand("resilience", "bounds on the number of flips to make a matrix singular");
    res->add_option("--matrix", matrix_path)->required();
    auto* exact_flag = res->add_flag("--exact", exact, "exhaustive search");
    auto* budget_opt = res->add_option("--budget", budget, "largest flip count tried (default floor(m/2))")->needs(exact_flag);
    res->add_flag("--attacks", attacks, "sparse kernel attack");
    res->add_flag("--hyperplane-lb", hyperplane, "certified hyperplane lower bound");

    auto* experiment = app.add_subcommand("experiment", "run a configured experiment and write JSON Lines");
    experiment->add_option("--config", config_path)->required();
    experiment->add_option("--out", out_path)->required();
    auto* workers_opt = experiment->add_option("--workers", workers);

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        if (*gen) {
            auto outf = open_output(out_path);
            outf << render(sample_matrix(n, m, {seed, 0}));
        } else if (*rank) {
            const auto mat = load_matrix(matrix_path);
            json r{{"n", mat.rows()}, {"m", mat.cols()}, {"rank", rank_exact(mat)}};
            if (rank_mod->count()) {
                r["p"] = mod;
                r["rank_mod_p"] = rank_mod_p(mat, mod);
            }
            std::cout << r.dump() << '\n';
        } else if (*rho_cmd) {
            const auto a = parse_vector(vector_text, opt_mod(mod, rho_mod));
            const auto value = rho(a);
            std::cout << json{{"rho", to_string(value)}, {"rho_approx", to_double(value)}}.dump() << '\n';
        } else if (*rk) {
            const auto a = parse_vector(vector_text, mod);
            json r{{"k", k}};
            if (rk_alpha->count()) {
                const auto alpha = parse_rational(alpha_text);
                r["alpha"] = to_string(alpha);
                r["value"] = count_rk_alpha(a, k, alpha).value.str();
            } else {
                r["value"] = count_rk(a, k).value.str();
            }
            std::cout << r.dump() << '\n';
        } else if (*halasz) {
            const auto a = parse_vector(vector_text, mod);
            const double bound = halasz_bound(a, {k, bigm, c});
            const double r = to_double(rho(a));
            std::cout << json{{"rho", r}, {"bound", bound}, {"holds", r <= bound}, {"sparse_support", sparse_relative_to_length(a)}}.dump()
                      << '\n';
        } else if (*calibrate) {
            auto j = load_json(config_path);
            if (!j.contains("experiment")) j["experiment"] = "halasz_calibration";
            const auto cfg = parse_config(j);
            detail::require(cfg.experiment == ExperimentKind::halasz_calibration, "calibrate needs a halasz_calibration config");
            validate(cfg);
            detail::require(cfg.trials > 0, "calibration needs trials > 0");
            std::vector<FieldVector> sample;
            for (std::size_t i = 0; i < cfg.trials; ++i) sample.push_back(detail::halasz_vector(cfg, i));
            const auto result = calibrate_constant(sample, cfg.k, cfg.bigm, cfg.workers);
            auto outf = open_output(out_path);
            outf << to_json(result).dump(2) << '\n';
        } else if (*good) {
            const auto a = parse_vector(vector_text, mod);
            GoodnessParams g;
            g.p = PrimeModulus(mod);
            g.k = k;
            g.alpha = parse_rational(alpha_text);
            g.support_threshold = threshold;
            std::cout << to_json(goodness(a, g, exact ? GoodnessMode::exact : GoodnessMode::heuristic)).dump() << '\n';
        } else if (*badset) {
            const BadSetParams b{n, mod, k, s, t, parse_rational(alpha_text)};
            std::cout << to_json(verify_counting_lemma(b, parse_rule(rule))).dump() << '\n';
        } else if (*res) {
            const auto mat = load_matrix(matrix_path);
            ResilienceOptions opt;
            opt.exact = exact;
            if (budget_opt->count()) opt.budget = budget;
            opt.attacks = attacks;
            opt.hyperplane_lb = hyperplane;
            std::cout << to_json(resilience_report(mat, opt)).dump() << '\n';
        } else if (*experiment) {
            auto cfg = parse_config(load_json(config_path));
            if (workers_opt->count()) cfg.workers = workers;
            const auto result = run_experiment(cfg);
            auto outf = open_output(out_path);
            write_jsonl(outf, result);
        }
    } catch (const budget_exceeded& e) {
        std::cerr << "budget exceeded: " << e.what() << '\n';
        return 2;
    } catch (const precondition_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
