#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "guessbound/bounds.hpp"
#include "guessbound/corpus.hpp"
#include "guessbound/curve_io.hpp"
#include "guessbound/lp.hpp"
#include "guessbound/oracle.hpp"
#include "guessbound/schedule.hpp"

namespace gb = guessbound;

namespace {

struct CommonOpts {
    std::string input;
    std::string format = "plain";
    std::string out;
    std::string out_format = "csv";
    std::string config_file;
    std::string methods = "frequency_ub,sampling_lb,prior_lb,lp_lb,lp_ub";
    std::string g_grid_spec;
    std::string guesses_path;
    std::string dump_lp_dir;
    std::uint64_t seed = 1;
    double q = 0.0;          // 0 = schedule default
    std::uint64_t d = 0;     // 0 = schedule default
    double delta1 = -1.0;
    double delta3 = -1.0;
    double solver_tol = 1e-9;
    int threads = 0;
};

gb::CorpusFormat parse_format(const std::string& s) {
    if (s == "plain") return gb::CorpusFormat::plain;
    if (s == "counted") return gb::CorpusFormat::counted;
    if (s == "counts_only") return gb::CorpusFormat::counts_only;
    throw CLI::ValidationError("--format", "unknown format: " + s);
}

std::set<std::string> parse_methods(const std::string& spec) {
    std::set<std::string> methods;
    std::istringstream in(spec);
    std::string item;
    while (std::getline(in, item, ',')) {
        if (item.empty()) continue;
        gb::bound_method_from_string(item);  // validate
        methods.insert(item);
    }
    if (methods.empty()) throw std::runtime_error("empty method set");
    return methods;
}

std::vector<std::uint64_t> parse_g_grid(const std::string& spec, std::uint64_t n) {
    std::vector<std::uint64_t> grid;
    if (spec.empty()) {
        // Powers of two out to the mesh floor's reach, 10^4 * N.
        const double cap = 1e4 * double(n);
        for (double g = 1.0; g <= cap; g *= 2.0) grid.push_back(std::uint64_t(g));
        return grid;
    }
    std::istringstream in(spec);
    std::string item;
    while (std::getline(in, item, ',')) {
        if (item.empty()) continue;
        grid.push_back(std::stoull(item));
    }
    for (std::size_t i = 1; i < grid.size(); ++i)
        if (grid[i] <= grid[i - 1])
            throw std::runtime_error("--g-grid must be strictly increasing");
    if (grid.empty()) throw std::runtime_error("empty --g-grid");
    return grid;
}

gb::Schedule build_schedule(const CommonOpts& opts) {
    gb::Schedule sched;
    if (!opts.config_file.empty()) {
        std::ifstream in(opts.config_file);
        if (!in) throw std::runtime_error("cannot open config " + opts.config_file);
        nlohmann::json j;
        in >> j;
        if (j.contains("delta1")) {
            sched.delta1 = j["delta1"];
            sched.delta3 = 0.01 - sched.delta1;  // keep the pair on budget
        }
        if (j.contains("delta3")) sched.delta3 = j["delta3"];
        if (j.contains("d")) sched.d = j["d"];
        if (j.contains("q")) sched.q = j["q"];
        if (j.contains("i_max")) sched.i_max = j["i_max"];
        if (j.contains("delta4")) sched.delta4 = j["delta4"].get<std::vector<double>>();
        if (j.contains("xhat3_multipliers"))
            sched.xhat3_multipliers = j["xhat3_multipliers"].get<std::vector<double>>();
    }
    // Flags win over config file, which wins over the defaults.
    if (opts.q > 0.0) sched.q = opts.q;
    if (opts.d > 0) sched.d = opts.d;
    if (opts.delta1 > 0.0) sched.delta1 = opts.delta1;
    if (opts.delta3 > 0.0) {
        sched.delta3 = opts.delta3;
    } else if (opts.delta1 > 0.0) {
        sched.delta3 = 0.01 - sched.delta1;
    }
    return sched;
}

void write_output(const CommonOpts& opts, const std::vector<gb::GuessingCurve>& curves) {
    const std::string text = opts.out_format == "json" ? gb::curve_to_json(curves)
                                                       : gb::curve_to_csv(curves);
    if (opts.out.empty() || opts.out == "-") {
        std::cout << text;
    } else {
        std::ofstream out(opts.out, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write " + opts.out);
        out << text;
    }
}

int cmd_analyze(const CommonOpts& opts) {
    const auto methods = parse_methods(opts.methods);
    const gb::CorpusFormat format = parse_format(opts.format);
    if (methods.count("extended_lb")) {
        if (format == gb::CorpusFormat::counts_only)
            throw std::runtime_error(
                "extended_lb needs raw tokens to match model guesses; "
                "counts_only corpora cannot be used");
        if (opts.guesses_path.empty())
            throw std::runtime_error("extended_lb requires --guesses");
    }

    const gb::Corpus corpus = gb::load_corpus(opts.input, format);
    const gb::FrequencyTable table = gb::as_table(corpus);
    const gb::FrequencyEncoding enc = gb::frequency_encoding(table);
    const auto grid = parse_g_grid(opts.g_grid_spec, enc.n);
    const gb::DerivedSchedule sched = gb::default_schedule(enc.n, build_schedule(opts));
    std::cerr << sched.audit_text;

    const bool needs_split = methods.count("sampling_lb") || methods.count("extended_lb");
    std::optional<gb::Partition> part;
    if (needs_split) part = gb::partition(corpus, sched.schedule.d, opts.seed);

    gb::ModelGuessList model;
    if (!opts.guesses_path.empty()) model = gb::load_model_guess_list(opts.guesses_path);

    std::optional<gb::Mesh> mesh;
    gb::SimplexSolver solver(opts.solver_tol);
    gb::LpSweepOptions sweep{opts.threads, opts.dump_lp_dir};
    if (methods.count("lp_lb") || methods.count("lp_ub"))
        mesh = gb::build_mesh(enc.n, sched.schedule.q);

    std::vector<gb::GuessingCurve> curves;
    auto curve_for = [&](const std::string& method) -> gb::GuessingCurve& {
        curves.push_back(gb::GuessingCurve{{}, method});
        return curves.back();
    };

    if (methods.count("frequency_ub")) {
        auto& curve = curve_for("frequency_ub");
        for (auto g : grid)
            curve.points.push_back(gb::frequency_ub(table, g, sched.schedule.delta1));
    }
    if (methods.count("sampling_lb")) {
        auto& curve = curve_for("sampling_lb");
        for (auto g : grid)
            curve.points.push_back(gb::sampling_lb(*part, g, sched.split,
                gb::BoundTarget::distribution_lambda, sched.schedule.delta1));
    }
    if (methods.count("extended_lb")) {
        auto& curve = curve_for("extended_lb");
        for (auto g : grid)
            curve.points.push_back(gb::extended_lb(*part, model, g, sched.split,
                gb::BoundTarget::distribution_lambda, sched.schedule.delta1));
    }
    if (methods.count("prior_lb")) {
        auto& curve = curve_for("prior_lb");
        for (auto g : grid) {
            if (g < enc.n) continue;  // bound only valid for G >= N
            const double L = double(g) / double(enc.n);
            curve.points.push_back(gb::prior_lb_best(
                enc, L, sched.schedule.delta2(2), sched.schedule.delta1,
                gb::BoundTarget::distribution_lambda, sched.schedule.prior_j_min,
                sched.schedule.prior_j_max));
            curve.points.back().g = g;
        }
    }
    if (methods.count("lp_lb")) {
        auto& curve = curve_for("lp_lb");
        for (auto g : grid)
            curve.points.push_back(
                gb::lp_lower_bound(g, *mesh, enc, sched.lp, solver, sweep));
    }
    if (methods.count("lp_ub")) {
        auto& curve = curve_for("lp_ub");
        for (auto g : grid)
            curve.points.push_back(
                gb::lp_upper_bound(g, *mesh, enc, sched.lp, solver, sweep));
    }

    // Best envelope: UB = min over upper methods, LB = max over lower methods.
    gb::GuessingCurve best_ub{{}, "best_upper_envelope"};
    gb::GuessingCurve best_lb{{}, "best_lower_envelope"};
    for (auto g : grid) {
        std::optional<gb::BoundPoint> ub, lb;
        for (const auto& curve : curves) {
            for (const auto& pt : curve.points) {
                if (pt.g != g) continue;
                if (pt.kind == gb::BoundKind::upper) {
                    if (!ub || pt.value < ub->value) ub = pt;
                } else {
                    if (!lb || pt.value > lb->value) lb = pt;
                }
            }
        }
        if (ub) best_ub.points.push_back(*ub);
        if (lb) best_lb.points.push_back(*lb);
    }
    if (!best_ub.points.empty()) curves.push_back(std::move(best_ub));
    if (!best_lb.points.empty()) curves.push_back(std::move(best_lb));

    write_output(opts, curves);
    return 0;
}

gb::KnownDistribution parse_dist(const std::string& spec) {
    std::istringstream in(spec);
    std::string kind;
    std::getline(in, kind, ':');
    if (kind == "uniform") {
        std::string k_str;
        std::getline(in, k_str);
        return gb::make_uniform(std::stoull(k_str));
    }
    if (kind == "zipf") {
        std::string k_str, s_str;
        std::getline(in, k_str, ':');
        std::getline(in, s_str);
        return gb::make_zipf(std::stoull(k_str), std::stod(s_str));
    }
    throw std::runtime_error("unknown distribution spec: " + spec +
                             " (use uniform:K or zipf:K:S)");
}

int cmd_simulate(const CommonOpts& opts, const std::string& dist_spec, std::size_t n,
                 std::uint64_t trials) {
    if (trials == 0) throw std::runtime_error("--trials must be >= 1");
    const auto methods = parse_methods(opts.methods);
    const gb::KnownDistribution dist = parse_dist(dist_spec);
    const gb::DerivedSchedule sched = gb::default_schedule(n, build_schedule(opts));

    gb::CoverageConfig config;
    config.g_grid = parse_g_grid(opts.g_grid_spec, n);
    config.trials = trials;
    config.base_seed = opts.seed;
    config.threads = opts.threads;

    std::optional<gb::Mesh> mesh;
    if (methods.count("lp_lb") || methods.count("lp_ub"))
        mesh = gb::build_mesh(n, sched.schedule.q);
    gb::SimplexSolver solver(opts.solver_tol);
    gb::LpSweepOptions sweep{opts.threads, ""};

    const auto report = gb::coverage_trial(
        dist, n, config,
        [&](const gb::SampleCorpus& corpus, std::uint64_t seed) {
            const gb::FrequencyTable table = gb::FrequencyTable::from_samples(corpus);
            const gb::FrequencyEncoding enc = gb::frequency_encoding(table);
            std::optional<gb::Partition> part;
            if (methods.count("sampling_lb"))
                part = gb::partition(corpus, sched.schedule.d, seed);
            std::vector<gb::BoundPoint> points;
            for (auto g : config.g_grid) {
                if (methods.count("frequency_ub"))
                    points.push_back(gb::frequency_ub(table, g, sched.schedule.delta1));
                if (methods.count("sampling_lb"))
                    points.push_back(gb::sampling_lb(*part, g, sched.split,
                gb::BoundTarget::distribution_lambda, sched.schedule.delta1));
                if (methods.count("prior_lb") && g >= enc.n)
                    points.push_back(gb::prior_lb_best(enc, double(g) / double(enc.n),
                                                       sched.schedule.delta2(2),
                                                       sched.schedule.delta1));
                if (methods.count("lp_lb"))
                    points.push_back(
                        gb::lp_lower_bound(g, *mesh, enc, sched.lp, solver, sweep));
                if (methods.count("lp_ub"))
                    points.push_back(
                        gb::lp_upper_bound(g, *mesh, enc, sched.lp, solver, sweep));
            }
            return points;
        });

    const std::string text = report.to_json();
    if (opts.out.empty() || opts.out == "-") {
        std::cout << text << "\n";
    } else {
        std::ofstream out(opts.out, std::ios::binary);
        out << text << "\n";
    }

    // Pass/fail summary against delta + 3 sigma per method.
    bool all_ok = true;
    for (const auto& [method, stats] : report.per_method) {
        double delta = 0.01;
        if (method == "frequency_ub") delta = sched.schedule.delta1;
        else if (method == "sampling_lb" || method == "extended_lb")
            delta = sched.schedule.delta3;
        else if (method == "prior_lb") delta = sched.schedule.delta1 + sched.schedule.delta2(2);
        else if (method == "lp_lb" || method == "lp_ub") delta = sched.lp.delta;
        const double sigma = std::sqrt(delta * (1.0 - delta) / double(stats.trials));
        const double threshold = delta + 3.0 * sigma;
        const bool ok = stats.rate() <= threshold;
        all_ok = all_ok && ok;
        std::cerr << method << ": rate " << stats.rate() << " vs threshold "
                  << threshold << (ok ? " PASS" : " FAIL") << "\n";
    }
    return all_ok ? 0 : 1;
}

int cmd_check_iid(const CommonOpts& opts) {
    const gb::Corpus corpus = gb::load_corpus(opts.input, parse_format(opts.format));
    const gb::FrequencyEncoding enc = gb::frequency_encoding(gb::as_table(corpus));
    const gb::DerivedSchedule sched = gb::default_schedule(enc.n, build_schedule(opts));
    const gb::Mesh mesh = gb::build_mesh(enc.n, sched.schedule.q);
    gb::SimplexSolver solver(opts.solver_tol);
    const gb::IidReport report = gb::check_iid_consistency(enc, mesh, sched.lp, solver);
    std::cerr << (report.consistent ? "consistent: " : "INCONSISTENT: ")
              << report.detail << "\n";
    return report.consistent ? 0 : 2;
}

int cmd_compare_model(const CommonOpts& opts) {
    const gb::CorpusFormat format = parse_format(opts.format);
    if (format == gb::CorpusFormat::counts_only)
        throw std::runtime_error(
            "compare-model needs raw tokens; counts_only corpora cannot be used");
    const gb::Corpus corpus = gb::load_corpus(opts.input, format);
    const gb::FrequencyTable table = gb::as_table(corpus);
    const gb::FrequencyEncoding enc = gb::frequency_encoding(table);
    const auto grid = parse_g_grid(opts.g_grid_spec, enc.n);
    const gb::DerivedSchedule sched = gb::default_schedule(enc.n, build_schedule(opts));
    const gb::ModelGuessList model = gb::load_model_guess_list(opts.guesses_path);
    const gb::Partition part = gb::partition(corpus, sched.schedule.d, opts.seed);

    // Model curve: fraction of D2 covered by the first G model guesses.
    std::map<std::string, std::uint64_t> rank;
    for (std::size_t i = 0; i < model.guesses.size(); ++i)
        rank.emplace(model.guesses[i], i + 1);

    std::vector<gb::GuessingCurve> curves;
    gb::GuessingCurve model_curve{{}, "model_curve:" + model.source_label};
    gb::GuessingCurve ext_curve{{}, "extended_lb"};
    gb::GuessingCurve samp_curve{{}, "sampling_lb"};
    for (auto g : grid) {
        std::uint64_t hits = 0;
        for (const auto& s : part.d2.samples) {
            auto it = rank.find(s);
            if (it != rank.end() && it->second <= g) ++hits;
        }
        gb::BoundPoint model_pt;
        model_pt.g = g;
        model_pt.value = model_pt.raw_value = double(hits) / double(part.d2.n());
        model_pt.kind = gb::BoundKind::lower;
        model_pt.method = gb::BoundMethod::extended_lb;  // closest tag; see provenance
        model_pt.delta = 0.0;
        model_pt.provenance = "model_curve";
        model_curve.points.push_back(model_pt);

        ext_curve.points.push_back(gb::extended_lb(part, model, g, sched.split,
            gb::BoundTarget::distribution_lambda, sched.schedule.delta1));
        samp_curve.points.push_back(gb::sampling_lb(part, g, sched.split,
            gb::BoundTarget::distribution_lambda, sched.schedule.delta1));
    }
    curves.push_back(std::move(model_curve));
    curves.push_back(std::move(ext_curve));
    curves.push_back(std::move(samp_curve));
    write_output(opts, curves);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"High-confidence bounds on password guessing curves"};
    app.require_subcommand(1);

    CommonOpts opts;
    std::string dist_spec = "zipf:100000:0.8";
    std::size_t sim_n = 100000;
    std::uint64_t trials = 300;

    auto add_common = [&](CLI::App* cmd, bool needs_input) {
        if (needs_input)
            cmd->add_option("--input", opts.input, "corpus file")->required();
        cmd->add_option("--format", opts.format, "plain|counted|counts_only");
        cmd->add_option("--methods", opts.methods, "comma-separated method set");
        cmd->add_option("--g-grid", opts.g_grid_spec, "comma-separated G values");
        cmd->add_option("--q", opts.q, "mesh ratio (>1)");
        cmd->add_option("--d", opts.d, "split size for sampling bounds");
        cmd->add_option("--seed", opts.seed, "PRNG seed");
        cmd->add_option("--delta-1", opts.delta1, "McDiarmid delta");
        cmd->add_option("--delta-3", opts.delta3, "split-bound delta");
        cmd->add_option("--solver-tol", opts.solver_tol, "LP feasibility tolerance");
        cmd->add_option("--dump-lp", opts.dump_lp_dir, "directory for LP text dumps");
        cmd->add_option("--config", opts.config_file, "JSON schedule config");
        cmd->add_option("--out", opts.out, "output path (default stdout)");
        cmd->add_option("--out-format", opts.out_format, "csv|json");
        cmd->add_option("--threads", opts.threads, "parallelism cap");
    };

    auto* analyze = app.add_subcommand("analyze", "bound curves for a corpus");
    add_common(analyze, true);
    analyze->add_option("--guesses", opts.guesses_path, "model guess list (rank order)");

    auto* simulate = app.add_subcommand("simulate", "coverage run on a synthetic truth");
    add_common(simulate, false);
    simulate->add_option("--dist", dist_spec, "uniform:K or zipf:K:S");
    simulate->add_option("--n", sim_n, "sample size per trial");
    simulate->add_option("--trials", trials, "number of trials");

    auto* check = app.add_subcommand("check-iid", "LP feasibility IID check");
    add_common(check, true);

    auto* compare = app.add_subcommand("compare-model", "model curve vs extended bound");
    add_common(compare, true);
    compare->add_option("--guesses", opts.guesses_path, "model guess list")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (app.got_subcommand(analyze)) return cmd_analyze(opts);
        if (app.got_subcommand(simulate)) return cmd_simulate(opts, dist_spec, sim_n, trials);
        if (app.got_subcommand(check)) return cmd_check_iid(opts);
        if (app.got_subcommand(compare)) return cmd_compare_model(opts);
    } catch (const gb::IidInconsistency& inc) {
        std::cerr << "INCONSISTENT: " << inc.detail << "\n";
        return 2;
    } catch (const std::exception& err) {
        std::cerr << "error: " << err.what() << "\n";
        return 1;
    }
    return 1;
}
