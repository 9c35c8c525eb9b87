// Acceptance runner: criteria 1..10 through the shared battery with their
// runtime limits, and criterion 11 by running `perturb validate` twice with
// different worker counts.  Prints one line per criterion; failing rows go to
// stderr.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "perturb/checks.hpp"

namespace fs = std::filesystem;
using perturb::CheckOptions;

namespace {

constexpr double kLimitSeconds[12] = {0, 1, 1, 30, 30, 5, 60, 5, 30, 120, 300, 0};

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::ostringstream s;
    s << f.rdbuf();
    return s.str();
}

void report(int k, bool pass, double secs, const std::string& extra) {
    char buf[256];
    std::snprintf(buf, sizeof buf, "criterion %2d %-30s %s  %8.2fs", k, perturb::criterion_title(k).c_str(),
                  pass ? "PASS" : "FAIL", secs);
    std::cout << buf;
    if (kLimitSeconds[k] > 0) std::cout << " (limit " << kLimitSeconds[k] << "s)";
    if (!extra.empty()) std::cout << "  " << extra;
    std::cout << std::endl;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"acceptance criteria"};
    CheckOptions opt;
    int only = 0;
    double determinism_scale = 1.0;
    std::string cli = PERTURB_CLI_PATH;
    app.add_option("--seed", opt.seed);
    app.add_option("--workers", opt.workers);
    app.add_option("--scale", opt.scale, "Monte Carlo size multiplier (1 = criterion sizes)");
    app.add_option("--only", only, "run a single criterion");
    app.add_option("--determinism-scale", determinism_scale, "sample multiplier for the two validate runs");
    app.add_option("--cli", cli);
    CLI11_PARSE(app, argc, argv);

    bool all = true;
    for (int k = 1; k <= 10; ++k) {
        if (only != 0 && only != k) continue;
        const auto t0 = std::chrono::steady_clock::now();
        bool pass = true;
        std::string extra;
        try {
            const auto rows = perturb::run_criterion(k, opt);
            for (const auto& r : rows) {
                if (!r.pass) {
                    pass = false;
                    std::cerr << "  row " << r.id << " failed: " << r.name << " value=" << r.value
                              << " reference=" << r.reference << " tolerance=" << r.tolerance << " " << r.detail
                              << "\n";
                }
            }
        } catch (const std::exception& e) {
            pass = false;
            extra = std::string("exception: ") + e.what();
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (secs >= kLimitSeconds[k]) {
            pass = false;
            extra += " runtime over limit";
        }
        report(k, pass, secs, extra);
        all = all && pass;
    }

    if (only == 0 || only == 11) {
        const auto t0 = std::chrono::steady_clock::now();
        const fs::path base = fs::temp_directory_path() / ("perturb_determinism_" + std::to_string(opt.seed));
        bool pass = true;
        std::string extra;
        std::map<std::string, std::string> csv[2];
        const unsigned workers[2] = {1, 3};
        for (int i = 0; i < 2; ++i) {
            const fs::path dir = base / ("w" + std::to_string(workers[i]));
            fs::remove_all(dir);
            std::ostringstream cmd;
            cmd << '"' << cli << "\" validate --seed " << opt.seed << " --workers " << workers[i] << " --scale "
                << determinism_scale << " --out \"" << dir.string() << "\" > \"" << (base / "log.txt").string()
                << "\" 2>&1";
            fs::create_directories(base);
            const int rc = std::system(cmd.str().c_str());
            if (rc == -1) {
                pass = false;
                extra = "could not launch the CLI";
            }
            if (fs::is_directory(dir)) {
                for (const auto& e : fs::directory_iterator(dir)) {
                    if (e.path().extension() == ".csv") csv[i][e.path().filename().string()] = slurp(e.path());
                }
            }
        }
        if (csv[0].empty() || !csv[0].count("checks.csv")) {
            pass = false;
            extra += " validate wrote no checks.csv";
        }
        if (csv[0].size() != csv[1].size()) {
            pass = false;
            extra += " different CSV sets between worker counts";
        }
        for (const auto& [name, text] : csv[0]) {
            const auto it = csv[1].find(name);
            if (it == csv[1].end() || it->second != text) {
                pass = false;
                extra += " " + name + " differs between worker counts";
            }
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        report(11, pass, secs, extra);
        all = all && pass;
    }
    return all ? 0 : 4;
}
