#pragma once

#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "rlab/config.hpp"
#include "rlab/experiments.hpp"
#include "rlab/exponents.hpp"
#include "rlab/report.hpp"

namespace rlab {

namespace detail {

inline nlohmann::ordered_json verdict_json(const RangeVerdict& v) {
    nlohmann::ordered_json j;
    j["in_range"] = v.in_range;
    auto cs = nlohmann::ordered_json::array();
    for (const auto& c : v.constraints)
        cs.push_back({{"name", c.name}, {"slack", c.slack.str()}, {"satisfied", c.satisfied()}});
    j["constraints"] = cs;
    return j;
}

inline nlohmann::ordered_json exponents_json(int d, const Rational& p, const Rational& q) {
    nlohmann::ordered_json j;
    j["d"] = d;
    j["p"] = p.str();
    j["q"] = q.str();
    j["p_conjugate"] = conjugate(p).str();
    j["q_conjugate"] = conjugate(q).str();
    j["maximal_range"] = verdict_json(in_maximal_range(d, p, q));
    j["stein_tomas_range"] = verdict_json(in_stein_tomas_range(d, p, q));

    nlohmann::ordered_json ep;
    ep["adopted"] = endpoint_q(d).str();
    ep["variant"] = endpoint_q_variant(d).str();
    ep["note"] = "adopted q keeps p' = (d+1)/(d-1) q exact at p = 4/3; the variant does not";
    j["endpoint"] = ep;

    nlohmann::ordered_json yc;
    try {
        YoungChain c = young_chain(p);
        yc["closes"] = true;
        yc["p"] = c.p.str();
        yc["s"] = c.s.str();
        yc["s_conjugate"] = c.s_conj.str();
        yc["p_conjugate"] = c.p_conj.str();
        yc["q_bound"] = c.q_bound(d).str();
    } catch (const std::invalid_argument& e) {
        yc["closes"] = false;
        yc["note"] = e.what();
    }
    j["young_chain"] = yc;

    ThresholdTrace t = lebesgue_threshold();
    nlohmann::ordered_json th;
    th["value"] = t.value.str();
    th["steps"] = t.steps;
    j["lebesgue_threshold"] = th;
    return j;
}

} // namespace detail

inline int run_cli(const std::vector<std::string>& args) {
    CLI::App app{"surface restriction and extension laboratory"};
    app.name("restrictlab");
    app.fallthrough();
    app.require_subcommand(1);

    std::string config_path, report_dir_cli;
    app.add_option("--config", config_path, "key = value configuration file");
    app.add_option("--report-dir", report_dir_cli, "directory for JSON/CSV reports");

    auto* sub_expo = app.add_subcommand("exponents", "exponent algebra for a (d, p, q) triple");
    int expo_d = 3;
    std::string expo_p = "4/3", expo_q = "2";
    sub_expo->add_option("--d", expo_d, "dimension");
    sub_expo->add_option("--p", expo_p, "input exponent, as a rational like 4/3");
    sub_expo->add_option("--q", expo_q, "surface exponent, as a rational like 2");

    auto* sub_ext = app.add_subcommand("extension", "closed-form anchors for the operators");
    auto* sub_ident = app.add_subcommand("identities", "operator identity suite on seeded inputs");
    bool zero_inputs = false;
    sub_ident->add_flag("--zero-inputs", zero_inputs, "feed identically zero inputs");
    auto* sub_sweep = app.add_subcommand("sweep", "norm-ratio sweep over a function family");
    auto* sub_max = app.add_subcommand("maximal", "norm-ratio sweep of the maximal operator");
    auto* sub_knapp = app.add_subcommand("knapp", "cap extension scaling against aperture");
    auto* sub_leb =
        app.add_subcommand("lebesgue", "oscillation decay at sampled surface points");
    std::string leb_family = "both";
    sub_leb->add_option("--family", leb_family, "gaussian, modulated, or both")
        ->check(CLI::IsMember({"gaussian", "modulated", "both"}));
    auto* sub_suite = app.add_subcommand("suite", "run every experiment and summarize");

    {
        std::vector<const char*> argv;
        argv.push_back("restrictlab");
        for (const auto& a : args) argv.push_back(a.c_str());
        try {
            app.parse(static_cast<int>(argv.size()), argv.data());
        } catch (const CLI::ParseError& e) {
            int code = app.exit(e);
            return code == 0 ? 0 : 2;
        }
    }

    try {
        Config cfg;
        if (!config_path.empty()) cfg = Config::parse_file(config_path);

        if (sub_expo->parsed()) {
            auto j = detail::exponents_json(expo_d, Rational::parse(expo_p), Rational::parse(expo_q));
            std::cout << j.dump(2) << "\n";
            return 0;
        }

        int rc = 0;
        std::vector<std::pair<std::string, bool>> ran;
        auto emit = [&](Report rep) {
            std::string dir = resolve_report_dir(report_dir_cli, cfg);
            std::string path = write_report(rep, dir);
            bool ok = rep.pass();
            std::cout << (ok ? "[PASS] " : "[FAIL] ") << rep.id << "  " << path << "\n";
            if (!ok) rc = 1;
            ran.push_back({rep.id, ok});
        };

        auto run_lebesgue = [&](const std::string& family) {
            LebesgueConfig lc = LebesgueConfig::from_config(cfg);
            lc.family = family;
            emit(lebesgue_experiment(lc));
        };

        if (sub_ext->parsed()) emit(extension_closed_forms());

        if (sub_ident->parsed()) {
            if (zero_inputs) cfg.set("identities.zero", "1");
            emit(identity_suite(IdentitySuiteConfig::from_config(cfg)));
        }

        if (sub_sweep->parsed()) emit(ratio_sweep(SweepConfig::from_config(cfg)));

        if (sub_max->parsed()) {
            cfg.set("sweep.operator", "maximal");
            emit(ratio_sweep(SweepConfig::from_config(cfg)));
        }

        if (sub_knapp->parsed()) emit(knapp_slope(KnappConfig::from_config(cfg)));

        if (sub_leb->parsed()) {
            if (leb_family == "both") {
                run_lebesgue("gaussian");
                run_lebesgue("modulated");
            } else {
                run_lebesgue(leb_family);
            }
        }

        if (sub_suite->parsed()) {
            emit(extension_closed_forms());
            emit(identity_suite(IdentitySuiteConfig::from_config(cfg)));
            {
                Config sweep_cfg = cfg;
                sweep_cfg.set("sweep.operator", "maximal");
                emit(ratio_sweep(SweepConfig::from_config(sweep_cfg)));
            }
            emit(knapp_slope(KnappConfig::from_config(cfg)));
            run_lebesgue("gaussian");
            run_lebesgue("modulated");

            nlohmann::ordered_json summary;
            summary["pass"] = rc == 0;
            auto reps = nlohmann::ordered_json::array();
            for (const auto& [id, ok] : ran) reps.push_back({{"id", id}, {"pass", ok}});
            summary["reports"] = reps;
            std::string dir = resolve_report_dir(report_dir_cli, cfg);
            detail::write_file_atomic(std::filesystem::path(dir) / "suite.json",
                                      summary.dump(2) + "\n");
            std::cout << (rc == 0 ? "[PASS] " : "[FAIL] ") << "suite  "
                      << (std::filesystem::path(dir) / "suite.json").string() << "\n";
        }

        return rc;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}

} // namespace rlab
