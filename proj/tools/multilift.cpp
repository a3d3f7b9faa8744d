/*
 Copyright 2026 The Multilift Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/

// multilift: simulate, train, evaluate and check-gradients.
//
// Exit codes: 0 ok, 1 runtime fault (or failed gradient check), 2 usage/config error.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "multilift/checks.hpp"
#include "multilift/errors.hpp"
#include "multilift/scenarios.hpp"
#include "multilift/trainer.hpp"

namespace fs = std::filesystem;
using multilift::Scenario;
using nlohmann::json;

namespace {

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct CommonFlags {
    std::string scenario;
    std::optional<std::uint64_t> seed;
    std::string out = "run";
    int workers = 0;
    std::vector<std::string> sets;
};

std::map<std::string, Scenario (*)()> builtins() {
    return {
        {"hover-2", [] { return multilift::hover_fixture(2); }},
        {"hover-3", [] { return multilift::hover_fixture(3); }},
        {"circle-3-uniform", [] { return multilift::circle_scenario(3, false); }},
        {"circle-3-biased", [] { return multilift::circle_scenario(3, true); }},
        {"figure8-3", [] { return multilift::figure8_scenario(3); }},
        {"slot-3", [] { return multilift::slot_scenario(3); }},
        {"weights-6", [] { return multilift::weight_learning_scenario(); }},
        {"gradient-fixture-2", [] { return multilift::gradient_fixture_scenario(); }},
    };
}

// "builtin:<name>" or a JSON file; overrides are applied to the JSON form.
Scenario resolve_scenario(const std::string& spec, const std::vector<std::string>& sets,
                          std::optional<std::uint64_t> seed) {
    if (spec.empty()) throw UsageError("--scenario is required");
    json j;
    const std::string prefix = "builtin:";
    if (spec.rfind(prefix, 0) == 0) {
        auto b = builtins();
        auto it = b.find(spec.substr(prefix.size()));
        if (it == b.end()) throw multilift::ConfigError("unknown builtin scenario '" + spec + "'");
        j = multilift::to_json(it->second());
    } else {
        std::ifstream in(spec);
        if (!in) throw multilift::ConfigError("cannot open scenario file '" + spec + "'");
        try {
            j = json::parse(in);
        } catch (const json::exception& e) {
            throw multilift::ConfigError("scenario file '" + spec + "': " + e.what());
        }
    }
    for (const auto& s : sets) multilift::apply_override(j, s);
    if (seed) j["seed"] = *seed;
    Scenario s = multilift::scenario_from_json(j);
    s.validate();
    return s;
}

std::ofstream open_out(const fs::path& p) {
    std::ofstream os(p);
    if (!os) throw multilift::Error("cannot write '" + p.string() + "'");
    os << std::setprecision(17);
    return os;
}

void write_run_metadata(const fs::path& dir, const Scenario& s, const std::string& command, int workers) {
    fs::create_directories(dir);
    multilift::save_scenario(s, (dir / "config.json").string());
    json meta = {{"command", command},
                 {"seed", s.seed},
                 {"workers", workers},
                 {"git_describe", MULTILIFT_GIT_DESCRIBE}};
    auto os = open_out(dir / "run.json");
    os << meta.dump(2) << '\n';
}

int workers_for(const CommonFlags& f, const Scenario& s) { return f.workers > 0 ? f.workers : s.system.num_quads; }

// Episode with CSV sinks under dir/<stem>_{episode,states,tensions,mpc}.csv.
multilift::EpisodeResult run_logged(multilift::Trainer& tr, int episode, bool learn, const fs::path& dir,
                                    const std::string& stem, std::ostream* episode_csv) {
    const int n = tr.scenario().system.num_quads;
    auto states = open_out(dir / (stem + "_states.csv"));
    auto tensions = open_out(dir / (stem + "_tensions.csv"));
    auto mpc = open_out(dir / (stem + "_mpc.csv"));
    multilift::write_state_csv_header(states, n);
    multilift::write_tension_csv_header(tensions, n);
    multilift::write_mpc_csv_header(mpc, n);
    multilift::EpisodeSinks sinks{episode_csv, &states, &tensions, &mpc};
    return tr.run_episode(episode, learn, sinks);
}

void write_json(const fs::path& p, const json& j) {
    auto os = open_out(p);
    os << j.dump(1) << '\n';
}

json load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw multilift::ConfigError("cannot open '" + path + "'");
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw multilift::ConfigError("'" + path + "': " + e.what());
    }
}

json rmse_json(const multilift::TrackingRmse& r) {
    return {{"x", r.position(0)},     {"y", r.position(1)},      {"z", r.position(2)},
            {"roll", r.euler(0)},     {"pitch", r.euler(1)},     {"yaw", r.euler(2)},
            {"samples", r.samples}};
}

int cmd_simulate(const CommonFlags& f, const std::string& checkpoint) {
    Scenario s = resolve_scenario(f.scenario, f.sets, f.seed);
    const int w = workers_for(f, s);
    fs::path dir(f.out);
    write_run_metadata(dir, s, "simulate", w);
    multilift::TrainerOptions opt;
    opt.workers = w;
    opt.fixed_weights = checkpoint.empty();
    multilift::Trainer tr(s, s.seed, opt);
    if (!checkpoint.empty()) tr.restore(load_json(checkpoint));
    auto r = run_logged(tr, 0, false, dir, "simulate", nullptr);
    json summary = {{"ticks", r.ticks},
                    {"aborted", r.aborted},
                    {"fault", r.fault},
                    {"l_mean", r.l_mean},
                    {"tension_gap_max", r.tension_gap_max},
                    {"rmse", rmse_json(r.rmse)}};
    write_json(dir / "simulate_summary.json", summary);
    std::cout << "simulate: " << r.ticks << " ticks, L_mean " << r.l_mean << (r.aborted ? ", aborted: " + r.fault : "")
              << '\n';
    return r.aborted ? 1 : 0;
}

int cmd_train(const CommonFlags& f, std::optional<int> max_episodes, const std::string& experiment,
              const std::string& resume) {
    std::vector<std::string> sets = f.sets;
    if (!experiment.empty()) sets.push_back("experiment=\"" + experiment + "\"");
    Scenario s = resolve_scenario(f.scenario, sets, f.seed);
    const int w = workers_for(f, s);
    fs::path dir(f.out);
    write_run_metadata(dir, s, "train", w);
    multilift::TrainerOptions opt;
    opt.workers = w;
    multilift::Trainer tr(s, s.seed, opt);
    int first = 0;
    if (!resume.empty()) first = tr.restore(load_json(resume)) + 1;
    const int episodes = max_episodes ? *max_episodes : s.training.max_episodes;
    if (resume.empty()) write_json(dir / "checkpoint_init.json", tr.checkpoint(-1));

    const bool append = !resume.empty() && fs::exists(dir / "episodes.csv");
    std::ofstream ep_csv(dir / "episodes.csv", append ? std::ios::app : std::ios::trunc);
    std::ofstream sum_csv(dir / "episode_summary.csv", append ? std::ios::app : std::ios::trunc);
    if (!ep_csv || !sum_csv) throw multilift::Error("cannot write episode CSVs in '" + dir.string() + "'");
    ep_csv << std::setprecision(17);
    sum_csv << std::setprecision(17);
    if (!append) {
        multilift::write_episode_csv_header(ep_csv, s.system.num_quads);
        sum_csv << "episode,L_mean,updates,skipped_updates,aborted,min_clearance,tension_gap_max,rmse_x,rmse_y,rmse_z,"
                   "rmse_roll,rmse_pitch,rmse_yaw\n";
    }
    std::vector<double> history;
    for (int e = first; e < first + episodes; ++e) {
        std::ostringstream stem;
        stem << "ep" << std::setw(3) << std::setfill('0') << e;
        auto r = run_logged(tr, e, true, dir, stem.str(), &ep_csv);
        sum_csv << e << ',' << r.l_mean << ',' << r.updates << ',' << r.skipped_updates << ',' << (r.aborted ? 1 : 0)
                << ',';
        if (r.min_clearance) sum_csv << *r.min_clearance;
        sum_csv << ',' << r.tension_gap_max << ',' << r.rmse.position(0) << ',' << r.rmse.position(1) << ','
                << r.rmse.position(2) << ',' << r.rmse.euler(0) << ',' << r.rmse.euler(1) << ',' << r.rmse.euler(2)
                << '\n';
        ep_csv.flush();
        sum_csv.flush();
        json ck = tr.checkpoint(e);
        write_json(dir / ("checkpoint_" + stem.str() + ".json"), ck);
        write_json(dir / "checkpoint_latest.json", ck);
        std::cout << "episode " << e << ": L_mean " << r.l_mean;
        if (r.min_clearance) std::cout << ", min clearance " << *r.min_clearance;
        std::cout << '\n';
        if (r.aborted) {
            std::cerr << "episode " << e << " aborted: " << r.fault << '\n';
            return 1;
        }
        if (r.skipped_updates > 0) std::cerr << "warning: " << r.skipped_updates << " skipped updates\n";
        history.push_back(r.l_mean);
        if (multilift::stopping_criterion(history)) {
            std::cout << "stopping criterion met after episode " << e << '\n';
            break;
        }
    }
    return 0;
}

int cmd_evaluate(const CommonFlags& f, const std::string& checkpoint) {
    Scenario s = resolve_scenario(f.scenario, f.sets, f.seed);
    const int w = workers_for(f, s);
    fs::path dir(f.out);
    write_run_metadata(dir, s, "evaluate", w);
    auto table = open_out(dir / "rmse.csv");
    table << "policy,x,y,z,roll,pitch,yaw\n";
    json out = json::object();
    bool fault = false;
    auto row = [&](const std::string& name, multilift::Trainer& tr) {
        auto r = run_logged(tr, 0, false, dir, name, nullptr);
        const auto& m = r.rmse;
        table << name << ',' << m.position(0) << ',' << m.position(1) << ',' << m.position(2) << ',' << m.euler(0)
              << ',' << m.euler(1) << ',' << m.euler(2) << '\n';
        out[name] = rmse_json(m);
        out[name]["aborted"] = r.aborted;
        out[name]["fault"] = r.fault;
        fault |= r.aborted;
        std::cout << std::setw(10) << name << "  x " << m.position(0) << "  y " << m.position(1) << "  z "
                  << m.position(2) << "  roll " << m.euler(0) << "  pitch " << m.euler(1) << "  yaw " << m.euler(2)
                  << '\n';
    };
    multilift::TrainerOptions opt;
    opt.workers = w;
    opt.fixed_weights = true;
    multilift::Trainer baseline(s, s.seed, opt);
    row("baseline", baseline);
    if (!checkpoint.empty()) {
        opt.fixed_weights = false;
        multilift::Trainer trained(s, s.seed, opt);
        trained.restore(load_json(checkpoint));
        row("trained", trained);
    }
    write_json(dir / "rmse.json", out);
    return fault ? 1 : 0;
}

int cmd_check_gradients(const CommonFlags& f, int warmup, int window, int directions) {
    Scenario s = resolve_scenario(f.scenario.empty() ? "builtin:gradient-fixture-2" : f.scenario, f.sets, f.seed);
    fs::path dir(f.out);
    write_run_metadata(dir, s, "check-gradients", 1);
    std::vector<multilift::CheckReport> reports;
    reports.push_back(multilift::check_loss_gradients(s.seed));
    reports.push_back(multilift::check_policy_backprop(s.seed));
    auto fixture = multilift::make_gradient_fixture(s, warmup);
    reports.push_back(multilift::check_mpc_gradients(fixture));
    reports.push_back(multilift::check_dsp_theta(fixture, window, multilift::CouplingMode::Pairwise));
    reports.push_back(
        multilift::check_dsp_policy(fixture, window, multilift::CouplingMode::Pairwise, s.seed, directions));
    auto csv = open_out(dir / "gradient_report.csv");
    multilift::write_comparison_csv_header(csv);
    bool ok = true;
    json summary = json::array();
    for (const auto& r : reports) {
        multilift::write_report_csv(csv, r);
        ok &= r.pass();
        summary.push_back({{"check", r.name}, {"pass", r.pass()}, {"worst_ratio", r.worst_ratio()}, {"seconds", r.seconds}});
        std::cout << (r.pass() ? "PASS " : "FAIL ") << r.name << "  worst ratio " << r.worst_ratio() << "  ("
                  << r.seconds << " s)\n";
        for (const auto& c : r.items)
            if (!c.pass()) std::cout << "    " << c.name << ": ratio " << c.worst_ratio << '\n';
    }
    write_json(dir / "gradient_summary.json", summary);
    return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Distributed MPC, sensitivity propagation and policy training for cable-suspended multilift"};
    app.require_subcommand(1);
    CommonFlags flags;
    std::uint64_t seed = 0;
    auto add_common = [&](CLI::App* sub, bool scenario_required) {
        auto* o = sub->add_option("--scenario", flags.scenario, "scenario JSON file or builtin:<name>");
        if (scenario_required) o->required();
        sub->add_option("--seed", seed, "64-bit seed (overrides the scenario)");
        sub->add_option("--out", flags.out, "output directory");
        sub->add_option("--workers", flags.workers, "worker threads (default: number of quadrotors)")
            ->check(CLI::NonNegativeNumber);
        sub->add_option("--set", flags.sets, "override key.path=value (repeatable)");
    };
    std::string checkpoint, experiment, resume;
    int max_episodes = -1;
    int warmup = 50, window = 10, directions = 6;

    auto* sim = app.add_subcommand("simulate", "fixed-policy rollout with state and tension logs");
    add_common(sim, true);
    sim->add_option("--checkpoint", checkpoint, "policy checkpoint (default: scenario weights)");

    auto* train = app.add_subcommand("train", "closed-loop policy training");
    add_common(train, true);
    train->add_option("--max-episodes", max_episodes, "episode cap (default: scenario training.max_episodes)")
        ->check(CLI::NonNegativeNumber);
    train->add_option("--experiment", experiment, "weights | tension-ref")
        ->check(CLI::IsMember({"weights", "tension-ref"}));
    train->add_option("--resume", resume, "checkpoint to resume from");

    auto* eval = app.add_subcommand("evaluate", "RMSE of the load tracking, baseline and trained");
    add_common(eval, true);
    eval->add_option("--checkpoint", checkpoint, "policy checkpoint");

    auto* check = app.add_subcommand("check-gradients", "analytic versus finite-difference gradients");
    add_common(check, false);
    check->add_option("--warmup", warmup, "closed-loop ticks before the fixture tick");
    check->add_option("--window", window, "N_cl of the sensitivity checks");
    check->add_option("--directions", directions, "directions per agent in the policy check");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }
    for (auto* sub : {sim, train, eval, check})
        if (sub->parsed() && sub->count("--seed")) flags.seed = seed;

    try {
        if (sim->parsed()) return cmd_simulate(flags, checkpoint);
        if (train->parsed())
            return cmd_train(flags, train->count("--max-episodes") ? std::optional<int>(max_episodes) : std::nullopt,
                             experiment, resume);
        if (eval->parsed()) return cmd_evaluate(flags, checkpoint);
        if (check->parsed()) return cmd_check_gradients(flags, warmup, window, directions);
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const multilift::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "runtime error: " << e.what() << '\n';
        return 1;
    }
    return 2;
}
