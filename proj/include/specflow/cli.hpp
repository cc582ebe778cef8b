#pragma once

#include <cstdint>
#include <exception>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "specflow/families.hpp"

namespace specflow::cli {

enum class Task { sf, metrics, trajectory, connect };

Task task_from_string(const std::string& name);
std::string to_string(Task task);

enum class Method { phillips, cayley, oracle };

Method method_from_string(const std::string& name);
std::string to_string(Method method);

struct JobOptions {
    std::vector<Method> methods;  // sf task; nonempty required
    double guard = 1e-6;
    std::int64_t refine = 20;
    std::optional<double> window;  // trajectory task
    std::int64_t steps = 100;      // connect task
    std::string report_name = "report.json";
    std::string trajectory_name = "trajectory.csv";
    std::string connect_name = "connect.csv";
};

// Source of the unitary for the connect task: either a real diagonal run
// through the Cayley transform, or eigenphases given directly.
struct ConnectSource {
    std::vector<double> diag;
    std::vector<double> phases;
};

struct JobFile {
    int version = 0;
    Task task = Task::sf;
    std::optional<FamilySpec<double>> family;
    JobOptions options;
    ConnectSource connect;
    std::uint64_t job_hash = 0;  // FNV-1a of the job document bytes
};

// Parse and validate a job document; any defect throws InvalidJob.
JobFile parse_job_text(const std::string& text);
JobFile parse_job_file(const std::string& path);

// Run the job. The report is returned as a JSON document with stable
// (lexicographic) key order; when out_dir is nonempty the report and any
// trajectory/connect tables are written there atomically.
nlohmann::json run_job(const JobFile& job, const std::string& out_dir = "");

// Serialize a report the way the tool does: 2-space indent, trailing newline.
std::string render_report(const nlohmann::json& report);

// Trajectory table for a path inside a certified window [−a, a]: one row per
// sample, in-window eigenvalues ascending, short rows padded with empty cells,
// 17-significant-digit decimals.
std::string trajectory_csv(const PathVariant<double>& path, double window, double guard);

// Eigenphase table of a connect_to_i_identity run plus its verification
// summary (max unitarity defect, min phase distance to 0, endpoint defect).
struct ConnectDump {
    std::string csv;
    double max_unitarity_defect = 0;
    double min_phase_distance = 0;
    double endpoint_defect = 0;
};
ConnectDump connect_dump(const UnitaryOperator<double>& u, std::int64_t steps);

// Exit code contract: 0 success, 2 certification failure, 3 invalid job.
int exit_code_for(const std::exception& error);

std::uint64_t fnv1a(const std::string& bytes);
void write_atomic(const std::string& path, const std::string& content);
std::string format_significant(double value);

}  // namespace specflow::cli
