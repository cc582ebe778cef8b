// Batch front end: specflow <task> --job <file> [--out <dir>]
//
// Exit codes: 0 success, 2 certification failure, 3 invalid job.

#include <chrono>
#include <cstdio>
#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "specflow/cli.hpp"
#include "specflow/version.hpp"

namespace {

int run_task(const std::string& task, const std::string& job_path,
             const std::string& out_dir) {
    using namespace specflow;
    try {
        const auto started = std::chrono::steady_clock::now();
        cli::JobFile job = cli::parse_job_file(job_path);
        if (job.task != cli::task_from_string(task)) {
            throw InvalidJob("job task '" + cli::to_string(job.task) +
                             "' does not match the '" + task + "' command");
        }
        const auto report = cli::run_job(job, out_dir);
        std::cout << cli::render_report(report);
        const auto elapsed = std::chrono::duration<double, std::milli>(
            std::chrono::steady_clock::now() - started);
        // Timing goes to stderr only; report files stay byte-stable per job.
        std::fprintf(stderr, "specflow: %s done in %.1f ms\n", task.c_str(), elapsed.count());
        return 0;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "specflow: error: %s\n", e.what());
        return specflow::cli::exit_code_for(e);
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Metrics, Cayley transforms, and spectral flow for self-adjoint operator paths"};
    app.set_version_flag("--version", std::string(specflow::version));
    app.require_subcommand(1);

    std::string job_path;
    std::string out_dir;
    for (const char* task : {"sf", "metrics", "trajectory", "connect"}) {
        auto* sub = app.add_subcommand(task);
        sub->add_option("--job", job_path, "job file (JSON, schema v1)")->required();
        sub->add_option("--out", out_dir, "output directory for report and tables");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 3;
    }
    return run_task(app.get_subcommands().front()->get_name(), job_path, out_dir);
}
