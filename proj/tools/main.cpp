#include "wtlab/errors.hpp"
#include "wtlab/experiments.hpp"
#include "wtlab/parallel.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

namespace {

struct CommonOpts {
    std::string output;
    std::string emit_config;
    std::string weight_out;
    int threads = 0; // 0 = available parallelism
    bool quiet = false;
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
    cmd->add_option("--output", opts.output, "write the report JSON here (plus a .csv summary)");
    cmd->add_option("--emit-config", opts.emit_config,
                    "write the run config JSON here and exit without running");
    cmd->add_option("--threads", opts.threads, "worker threads (default: available parallelism)");
    cmd->add_flag("--quiet", opts.quiet, "suppress the stdout summary");
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw wtlab::ParamError("cannot write file: " + path);
    out << text;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw wtlab::ParamError("cannot read file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string csv_path_for(const std::string& json_path) {
    auto dot = json_path.find_last_of('.');
    if (dot == std::string::npos) return json_path + ".csv";
    return json_path.substr(0, dot) + ".csv";
}

std::string summary_line(const wtlab::ExperimentReport& rep) {
    const auto& p = rep.payload;
    std::ostringstream os;
    os << p.value("experiment", std::string("run"));
    auto add = [&](const char* key, const nlohmann::ordered_json& v) {
        os << " " << key << "=" << (v.is_string() ? v.get<std::string>() : v.dump());
    };
    if (p.contains("params")) {
        const auto& prm = p["params"];
        for (const char* key : {"k", "depth"})
            if (prm.contains(key)) add(key, prm[key]);
    }
    if (p.contains("phi")) add("phi", p["phi"]);
    if (p.contains("r")) add("r", p["r"]);
    if (p.contains("tail_mass")) add("tail_mass", p["tail_mass"]);
    if (p.contains("pieces")) add("pieces", p["pieces"]);
    if (p.contains("mass")) add("mass", p["mass"]);
    if (p.contains("summary")) {
        const auto& s = p["summary"];
        for (const char* key :
             {"max_ratio", "min_ratio", "ratio_sup", "lambda_star", "growth_factor",
              "functional", "functional_over_mass", "max_rel_discrepancy",
              "mass_plus_tail_minus_one", "score", "policy_used"})
            if (s.contains(key)) add(key, s[key]);
    }
    if (p.contains("per_k")) os << " ks=" << p["per_k"].size();
    return os.str();
}

int run_and_emit(const wtlab::ExperimentConfig& cfg, const CommonOpts& opts) {
    int threads = opts.threads > 0 ? opts.threads : wtlab::default_thread_count();
    wtlab::ExperimentReport rep = wtlab::run_experiment(cfg, threads);
    if (!opts.output.empty()) {
        write_file(opts.output, rep.envelope_string());
        if (!rep.csv_rows.empty()) write_file(csv_path_for(opts.output), csv_render(rep.csv_rows));
    }
    if (!opts.weight_out.empty() && rep.payload.contains("weight"))
        write_file(opts.weight_out, rep.payload["weight"].dump(2));
    if (!opts.quiet) {
        if (cfg.experiment == "hilbert-eval" && rep.payload.contains("records"))
            for (const auto& rec : rep.payload["records"])
                std::cout << "x=" << rec["x"].dump() << " hf=" << rec["hf"].dump() << "\n";
        std::cout << summary_line(rep) << "\n";
    }
    return 0;
}

std::vector<double> read_points_stdin() {
    std::vector<double> pts;
    std::string line;
    while (std::getline(std::cin, line)) {
        if (line.empty()) continue;
        try {
            size_t used = 0;
            double x = std::stod(line, &used);
            pts.push_back(x);
        } catch (const std::exception&) {
            throw wtlab::ParamError("cannot parse point from stdin: '" + line + "'");
        }
    }
    return pts;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"triadic weight laboratory: counterexample weights, Hilbert transforms and "
                 "Orlicz maximal operators of step functions"};
    app.require_subcommand(0, 1);

    std::string from_config;
    app.add_option("--from-config", from_config, "run from an emitted config file");
    CommonOpts main_opts;
    app.add_option("--output", main_opts.output, "report output path (with --from-config)");
    app.add_option("--threads", main_opts.threads, "worker threads");
    app.add_flag("--quiet", main_opts.quiet, "suppress the stdout summary");

    struct Cmd {
        CLI::App* sub;
        wtlab::ExperimentConfig cfg;
        CommonOpts opts;
    };
    std::vector<std::unique_ptr<Cmd>> cmds;

    auto make = [&](const std::string& name, const std::string& desc) -> Cmd& {
        auto cmd = std::make_unique<Cmd>();
        cmd->sub = app.add_subcommand(name, desc);
        cmd->cfg.experiment = name;
        add_common(cmd->sub, cmd->opts);
        cmds.push_back(std::move(cmd));
        return *cmds.back();
    };

    auto add_construction = [](Cmd& c) {
        c.sub->add_option("--k", c.cfg.k, "scale parameter (>= 2)");
        c.sub->add_option("--depth", c.cfg.depth, "generations kept (>= 1)");
        c.sub->add_option("--orientation", c.cfg.orientation,
                          "all_left|all_right|alternate_by_level|explicit|greedy_search");
        c.sub->add_option("--sides", c.cfg.sides, "explicit sides, e.g. LRLL (construction order)");
        c.sub->add_option("--piece-budget", c.cfg.piece_budget, "max island count");
        c.sub->add_option("--sample-budget", c.cfg.sample_budget, "greedy search sample budget");
        c.sub->add_option("--weight-scale", c.cfg.weight_scale, "multiply the weight by c");
    };
    auto add_tail = [](Cmd& c) {
        c.sub->add_option("--tail-threshold", c.cfg.tail_threshold,
                          "refuse runs whose truncation tail exceeds this");
        c.sub->add_option("--margin", c.cfg.margin, "sample plan excludes this many deep levels");
    };

    {
        Cmd& c = make("build-weight", "construct the truncated weight and emit stepfn-v1 JSON");
        add_construction(c);
        c.sub->add_option("--weight-out", c.opts.weight_out, "also write the bare stepfn-v1 file");
    }
    {
        Cmd& c = make("verify-lemma21", "mass identity and recursion balance checks");
        add_construction(c);
    }
    {
        Cmd& c = make("verify-lemma22", "pointwise maximal bound M_r w <= 21 w on the middle thirds");
        add_construction(c);
        add_tail(c);
    }
    {
        Cmd& c = make("hilbert-eval", "evaluate the Hilbert transform at points");
        add_construction(c);
        c.sub->add_option("--points", c.cfg.points, "evaluation points (repeat or comma-separate)")
            ->delimiter(',');
        c.sub->add_option("--input", c.cfg.input_path, "stepfn-v1 file instead of (k, depth)");
    }
    {
        Cmd& c = make("weaktype-ratio", "sup over lambda of lambda*w{|Hw|>lambda} / int w*M_phi(w)");
        add_construction(c);
        add_tail(c);
        c.sub->add_option("--phi", c.cfg.phi, "Young function spec (linear, power:R, log:E, "
                                              "loglog:A, psi)");
        c.sub->add_option("--lambda-grid", c.cfg.lambda_grid, "explicit lambda grid")
            ->delimiter(',');
        c.sub->add_option("--lambda-count", c.cfg.lambda_count, "grid size (default 40)");
        c.sub->add_option("--lambda-lo-factor", c.cfg.lambda_lo_factor,
                          "grid start as a multiple of median sampled |Hw|");
        c.sub->add_option("--lambda-hi-factor", c.cfg.lambda_hi_factor,
                          "grid end as a multiple of max sampled |Hw|");
        c.sub->add_option("--resolution", c.cfg.resolution, "superlevel samples per piece");
    }
    {
        Cmd& c = make("extrapolation", "weighted L2 functional of the extrapolation bound");
        add_construction(c);
        add_tail(c);
        c.sub->add_option("--r", c.cfg.r, "exponent, 1 < r < 2");
        c.sub->add_flag("--use-rk", c.cfg.use_rk, "set r = r_k = 1 + 1/(2*3^(k+1)+1)");
        c.sub->add_option("--plan-resolution", c.cfg.plan_resolution,
                          "quadrature cells per piece");
    }
    {
        Cmd& c = make("growth-factor", "sup_{t>=1} Phi(t)^(1/r)/t");
        c.sub->add_option("--phi", c.cfg.phi, "Young function spec");
        c.sub->add_option("--r", c.cfg.r, "exponent r > 1");
        c.sub->add_flag("--use-rk", c.cfg.use_rk, "set r = r_k(k)");
        c.sub->add_option("--k", c.cfg.k, "k for --use-rk");
    }
    {
        Cmd& c = make("k-sweep", "weak-type ratios and growth factors across k");
        add_construction(c);
        add_tail(c);
        c.sub->add_option("--k-range", c.cfg.k_range, "k values, e.g. 2,3,4,5")->delimiter(',');
        c.sub->add_option("--phis", c.cfg.phis, "Young function specs")->delimiter(',');
        c.sub->add_option("--depth-rule", c.cfg.depth_rule,
                          "'auto' or explicit map like 2:7,3:4,4:3,5:3");
        c.sub->add_option("--lambda-count", c.cfg.lambda_count, "grid size");
        c.sub->add_option("--resolution", c.cfg.resolution, "superlevel samples per piece");
    }
    {
        Cmd& c = make("orientation-search", "greedy side placement maximizing min |Hw|/w");
        add_construction(c);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e); // --help
        app.exit(e);
        return 1;
    }

    try {
        if (!from_config.empty()) {
            auto j = nlohmann::json::parse(read_file(from_config));
            wtlab::ExperimentConfig cfg = wtlab::ExperimentConfig::from_json(j);
            return run_and_emit(cfg, main_opts);
        }
        for (auto& cmd : cmds) {
            if (!cmd->sub->parsed()) continue;
            if (cmd->cfg.experiment == "hilbert-eval" && cmd->cfg.points.empty())
                cmd->cfg.points = read_points_stdin();
            if (!cmd->opts.emit_config.empty()) {
                write_file(cmd->opts.emit_config, cmd->cfg.to_json().dump(2));
                if (!cmd->opts.quiet)
                    std::cout << "config written to " << cmd->opts.emit_config << "\n";
                return 0;
            }
            return run_and_emit(cmd->cfg, cmd->opts);
        }
        std::cerr << app.help() << std::flush;
        return 1;
    } catch (const wtlab::ParamError& e) {
        std::cerr << "parameter error: " << e.what() << "\n";
        return 1;
    } catch (const std::domain_error& e) {
        std::cerr << "domain error: " << e.what() << "\n";
        return 1;
    } catch (const wtlab::CapacityError& e) {
        std::cerr << "capacity refusal: " << e.what() << "\n";
        return 2;
    } catch (const wtlab::TailRefusal& e) {
        std::cerr << "tail refusal: " << e.what() << "\n";
        return 2;
    } catch (const wtlab::InvariantError& e) {
        std::cerr << "internal invariant violation: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 3;
    }
}
