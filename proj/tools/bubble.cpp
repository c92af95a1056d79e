// command-line front end: solve levels, run single simulations, plan guide
// paths, render plots and produce benchmark tables

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "bubble/guide.hpp"
#include "bubble/level.hpp"
#include "bubble/physics.hpp"
#include "bubble/solver.hpp"
#include "bubble/svg.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << content;
}

int cmd_solve(const std::string& level_path, int budget, unsigned long long seed, int jobs,
              bool random_shooting, const std::string& dump_dir, const std::string& out) {
    bubble::Level level = bubble::load_level_file(level_path);
    bubble::SolverOptions opts;
    opts.budget = budget;
    opts.seed = seed;
    opts.jobs = jobs;
    opts.random_shooting = random_shooting;
    opts.dump_dir = dump_dir;
    bubble::SolveReport rep = bubble::solve(level, opts);
    rep.level_file = level_path;

    std::string js = bubble::report_to_json(rep);
    if (!out.empty()) {
        write_file(out, js);
        std::string stem = out;
        if (stem.size() > 5 && stem.substr(stem.size() - 5) == ".json")
            stem = stem.substr(0, stem.size() - 5);
        write_file(stem + ".fitlog.jsonl", bubble::fit_log_to_jsonl(rep.fit_log));
    } else {
        std::cout << js;
    }
    std::cerr << level.name << ": " << bubble::solve_status_name(rep.status) << " (trials "
              << rep.trials_used << ", regions " << rep.regions_used << ", "
              << rep.total_seconds << " s)\n";
    return rep.status == bubble::SolveStatus::Solved ? 0 : 2;
}

int cmd_simulate(const std::string& level_path, const std::string& placement_path,
                 const std::string& out) {
    bubble::Level level = bubble::load_level_file(level_path);
    bubble::Placement p;
    if (!placement_path.empty()) p = bubble::load_placement_file(placement_path);
    bubble::TrialRecord tr = bubble::simulate(level, p);
    std::string csv = bubble::trial_to_csv(tr);
    if (!out.empty()) write_file(out, csv);
    else std::cout << csv;
    std::cerr << level.name << ": "
              << (tr.reached() ? "reached_target at step " + std::to_string(tr.tau)
                               : "timeout")
              << "\n";
    return 0;
}

int cmd_plan(const std::string& level_path, const std::string& out) {
    bubble::Level level = bubble::load_level_file(level_path);
    bubble::GuidePath guide = bubble::plan_guide_path(level);
    bubble::PlotLayers layers;
    layers.guide = &guide;
    std::string svg = bubble::render_svg(level, layers);
    if (!out.empty()) write_file(out, svg);
    else std::cout << svg;
    return 0;
}

int cmd_bench(const std::string& dir, int budget, unsigned long long seed, int jobs,
              const std::string& out) {
    std::vector<std::string> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.path().extension() == ".json") files.push_back(entry.path().string());
    }
    std::sort(files.begin(), files.end());
    if (files.empty()) {
        std::cerr << "no .json levels in " << dir << "\n";
        return 1;
    }

    std::ostringstream table;
    table << "Level        CG (s)    FG (s)   Trials  Regions   Blocks  Status\n";
    table << "-----------------------------------------------------------------\n";
    double total_s = 0.0;
    int solved = 0;
    for (const std::string& f : files) {
        bubble::Level level = bubble::load_level_file(f);
        bubble::SolverOptions opts;
        opts.budget = budget;
        opts.seed = seed;
        opts.jobs = jobs;
        bubble::SolveReport rep = bubble::solve(level, opts);
        total_s += rep.total_seconds;
        if (rep.status == bubble::SolveStatus::Solved) ++solved;
        double cg = 0.0, fg = 0.0;
        for (const bubble::RegionAttempt& a : rep.attempts) {
            cg += a.cg_seconds;
            fg += a.fg_seconds;
        }
        char row[256];
        std::snprintf(row, sizeof(row), "%-10s %8.3f  %8.3f  %7d  %7d  %7zu  %s\n",
                      level.name.c_str(), cg, fg, rep.trials_used, rep.regions_used,
                      level.inventory.size(), bubble::solve_status_name(rep.status).c_str());
        table << row;
    }
    char foot[128];
    std::snprintf(foot, sizeof(foot), "solved %d/%zu, total %.1f s\n", solved, files.size(),
                  total_s);
    table << foot;
    if (!out.empty()) write_file(out, table.str());
    std::cout << table.str();
    return 0;
}

int cmd_plot(const std::string& report_path, const std::string& out) {
    std::ifstream in(report_path);
    if (!in) throw std::runtime_error("cannot open report " + report_path);
    json j = json::parse(in);

    std::string level_file = j.value("level_file", "");
    if (level_file.empty()) throw std::runtime_error("report carries no level_file reference");
    bubble::Level level = bubble::load_level_file(level_file);

    bubble::GuidePath guide;
    for (const json& p : j.value("guide_path", json::array()))
        guide.waypoints.push_back({p.at(0).get<double>(), p.at(1).get<double>()});

    std::vector<bubble::TrajSample> traj;
    for (const json& s : j.value("trajectory", json::array())) {
        bubble::TrajSample ts;
        ts.k = s.at(0).get<int>();
        ts.state.pos = {s.at(1).get<double>(), s.at(2).get<double>()};
        ts.state.vel = {s.at(3).get<double>(), s.at(4).get<double>()};
        traj.push_back(ts);
    }

    std::vector<bubble::AABB> regions;
    for (const json& a : j.value("attempts", json::array())) {
        const json& r = a.at("rect");
        regions.push_back({{r.at(0).get<double>(), r.at(1).get<double>()},
                           {r.at(2).get<double>(), r.at(3).get<double>()}});
    }

    bubble::Placement placement;
    for (const json& e : j.at("final_placement").at("placement")) {
        bubble::PlacedBlock b;
        b.id = e.at("id").get<int>();
        b.pose.pos = {e.at("pos").at(0).get<double>(), e.at("pos").at(1).get<double>()};
        b.pose.angle = e.at("angle").get<double>();
        placement.entries.push_back(b);
    }

    bubble::PlotLayers layers;
    layers.guide = guide.waypoints.empty() ? nullptr : &guide;
    layers.final_trajectory = traj.empty() ? nullptr : &traj;
    layers.regions = regions.empty() ? nullptr : &regions;
    layers.placement = &placement;
    std::string svg = bubble::render_svg(level, layers);
    if (!out.empty()) write_file(out, svg);
    else std::cout << svg;
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Bubble-style 2D physics puzzle solver"};
    app.require_subcommand(1);

    std::string level_path, placement_path, report_path, dir, out, dump_dir;
    int budget = 10;
    unsigned long long seed = 0;
    int jobs = 1;
    bool random_shooting = false;

    CLI::App* solve = app.add_subcommand("solve", "solve a level");
    solve->add_option("level", level_path, "level file")->required();
    solve->add_option("--budget", budget, "trial budget");
    solve->add_option("--seed", seed, "search seed");
    solve->add_option("--jobs", jobs, "candidate evaluation threads");
    solve->add_flag("--random-shots", random_shooting, "random shooting instead of the lattice");
    solve->add_option("--dump-candidates", dump_dir, "write per-candidate CSVs to this directory");
    solve->add_option("--out", out, "write the report JSON here");

    CLI::App* sim = app.add_subcommand("simulate", "run one simulation");
    sim->add_option("level", level_path, "level file")->required();
    sim->add_option("--placement", placement_path, "placement file");
    sim->add_option("--out", out, "write the trajectory CSV here");

    CLI::App* plan = app.add_subcommand("plan", "plan and plot the guide path");
    plan->add_option("level", level_path, "level file")->required();
    plan->add_option("--out", out, "write the SVG here");

    CLI::App* bench = app.add_subcommand("bench", "solve every level in a directory");
    bench->add_option("dir", dir, "levels directory")->required();
    bench->add_option("--budget", budget, "trial budget");
    bench->add_option("--seed", seed, "search seed");
    bench->add_option("--jobs", jobs, "candidate evaluation threads");
    bench->add_option("--out", out, "write the table here");

    CLI::App* plot = app.add_subcommand("plot", "render a solve report as SVG");
    plot->add_option("report", report_path, "report JSON from solve --out")->required();
    plot->add_option("--out", out, "write the SVG here");

    CLI11_PARSE(app, argc, argv);

    try {
        if (solve->parsed())
            return cmd_solve(level_path, budget, seed, jobs, random_shooting, dump_dir, out);
        if (sim->parsed()) return cmd_simulate(level_path, placement_path, out);
        if (plan->parsed()) return cmd_plan(level_path, out);
        if (bench->parsed()) return cmd_bench(dir, budget, seed, jobs, out);
        if (plot->parsed()) return cmd_plot(report_path, out);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
