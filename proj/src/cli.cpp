#include "specflow/cli.hpp"

#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "specflow/cayley.hpp"
#include "specflow/metrics.hpp"
#include "specflow/version.hpp"

namespace specflow::cli {

using nlohmann::json;

// --------------------------------- small utils --------------------------------

Task task_from_string(const std::string& name) {
    if (name == "sf") return Task::sf;
    if (name == "metrics") return Task::metrics;
    if (name == "trajectory") return Task::trajectory;
    if (name == "connect") return Task::connect;
    throw InvalidJob("unknown task '" + name + "'");
}

std::string to_string(Task task) {
    switch (task) {
        case Task::sf: return "sf";
        case Task::metrics: return "metrics";
        case Task::trajectory: return "trajectory";
        case Task::connect: return "connect";
    }
    return "?";
}

Method method_from_string(const std::string& name) {
    if (name == "phillips") return Method::phillips;
    if (name == "cayley") return Method::cayley;
    if (name == "oracle") return Method::oracle;
    throw InvalidJob("unknown method '" + name + "'");
}

std::string to_string(Method method) {
    switch (method) {
        case Method::phillips: return "phillips";
        case Method::cayley: return "cayley";
        case Method::oracle: return "oracle";
    }
    return "?";
}

std::uint64_t fnv1a(const std::string& bytes) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::string format_significant(double value) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", value);
    return buf;
}

void write_atomic(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("write_atomic: cannot open " + tmp);
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) throw Error("write_atomic: short write to " + tmp);
    }
    std::filesystem::rename(tmp, path);
}

int exit_code_for(const std::exception& error) {
    if (dynamic_cast<const CannotCertify*>(&error) ||
        dynamic_cast<const UncertifiedPartition*>(&error)) {
        return 2;
    }
    return 3;
}

// ---------------------------------- parsing -----------------------------------

namespace {

const json& need(const json& doc, const char* key, const char* where) {
    auto it = doc.find(key);
    if (it == doc.end()) {
        throw InvalidJob(std::string(where) + ": missing field '" + key + "'");
    }
    return *it;
}

std::int64_t int_field(const json& doc, const char* key, std::int64_t fallback) {
    auto it = doc.find(key);
    if (it == doc.end()) return fallback;
    if (!it->is_number_integer()) throw InvalidJob(std::string("field '") + key + "' not integral");
    return it->get<std::int64_t>();
}

double num_field(const json& doc, const char* key, double fallback) {
    auto it = doc.find(key);
    if (it == doc.end()) return fallback;
    if (!it->is_number()) throw InvalidJob(std::string("field '") + key + "' not numeric");
    return it->get<double>();
}

FamilySpec<double> parse_family(const json& doc) {
    FamilySpec<double> spec;
    const std::string kind = need(doc, "kind", "family").get<std::string>();
    using Kind = FamilySpec<double>::Kind;
    if (kind == "fuglede") {
        spec.kind = Kind::fuglede;
        spec.horizon = int_field(doc, "horizon", 20);
        spec.n = int_field(doc, "n", 1);
    } else if (kind == "dirac1d" || kind == "flow_loop") {
        spec.kind = kind == "dirac1d" ? Kind::dirac1d : Kind::flow_loop;
        spec.k_range = int_field(doc, "k_range", 8);
        spec.m = int_field(doc, "m", 1);
    } else if (kind == "random") {
        spec.kind = Kind::random;
        spec.dim = static_cast<Eigen::Index>(int_field(doc, "dim", 6));
        spec.seed = static_cast<std::uint64_t>(int_field(doc, "seed", 0));
        spec.closed = doc.value("closed", false);
    } else if (kind == "linear") {
        spec.kind = Kind::linear;
        spec.diag_a = need(doc, "a", "family").get<std::vector<double>>();
        spec.diag_b = need(doc, "b", "family").get<std::vector<double>>();
    } else {
        throw InvalidJob("unknown family kind '" + kind + "'");
    }
    spec.samples = int_field(doc, "samples", 201);
    try {
        spec.validate();
    } catch (const std::exception& e) {
        throw InvalidJob(std::string("family: ") + e.what());
    }
    return spec;
}

json family_echo(const FamilySpec<double>& spec) {
    using Kind = FamilySpec<double>::Kind;
    json out;
    out["samples"] = spec.samples;
    switch (spec.kind) {
        case Kind::fuglede:
            out["kind"] = "fuglede";
            out["horizon"] = spec.horizon;
            out["n"] = spec.n;
            break;
        case Kind::dirac1d:
        case Kind::flow_loop:
            out["kind"] = spec.kind == Kind::dirac1d ? "dirac1d" : "flow_loop";
            out["k_range"] = spec.k_range;
            out["m"] = spec.m;
            break;
        case Kind::random:
            out["kind"] = "random";
            out["dim"] = static_cast<std::int64_t>(spec.dim);
            out["seed"] = spec.seed;
            out["closed"] = spec.closed;
            break;
        case Kind::linear:
            out["kind"] = "linear";
            out["a"] = spec.diag_a;
            out["b"] = spec.diag_b;
            break;
    }
    return out;
}

}  // namespace

JobFile parse_job_text(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw InvalidJob(std::string("job is not valid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw InvalidJob("job document must be an object");
    JobFile job;
    job.job_hash = fnv1a(text);
    const auto& version = need(doc, "version", "job");
    if (!version.is_number_integer() || version.get<int>() != 1) {
        throw InvalidJob("unsupported job version (need 1)");
    }
    job.version = 1;
    job.task = task_from_string(need(doc, "task", "job").get<std::string>());

    if (doc.contains("family")) {
        job.family = parse_family(doc.at("family"));
    }
    if (job.task != Task::connect && !job.family) {
        throw InvalidJob("task '" + to_string(job.task) + "' needs a family block");
    }

    if (doc.contains("options")) {
        const json& opt = doc.at("options");
        if (!opt.is_object()) throw InvalidJob("options must be an object");
        if (opt.contains("methods")) {
            for (const auto& m : opt.at("methods")) {
                job.options.methods.push_back(method_from_string(m.get<std::string>()));
            }
        }
        job.options.guard = num_field(opt, "guard", 1e-6);
        if (!(job.options.guard > 0)) throw InvalidJob("guard must be positive");
        job.options.refine = int_field(opt, "refine", 20);
        if (job.options.refine < 1) throw InvalidJob("refine must be >= 1");
        if (opt.contains("window")) job.options.window = num_field(opt, "window", 0.0);
        job.options.steps = int_field(opt, "steps", 100);
        if (job.options.steps < 2) throw InvalidJob("steps must be >= 2");
        job.options.report_name = opt.value("report", job.options.report_name);
        job.options.trajectory_name = opt.value("trajectory", job.options.trajectory_name);
        job.options.connect_name = opt.value("connect", job.options.connect_name);
    }
    if (job.task == Task::sf && job.options.methods.empty()) {
        throw InvalidJob("sf task needs a nonempty method list");
    }

    if (job.task == Task::connect) {
        if (!doc.contains("connect")) throw InvalidJob("connect task needs a connect block");
        const json& c = doc.at("connect");
        if (c.contains("diag")) job.connect.diag = c.at("diag").get<std::vector<double>>();
        if (c.contains("phases")) job.connect.phases = c.at("phases").get<std::vector<double>>();
        if (job.connect.diag.empty() == job.connect.phases.empty()) {
            throw InvalidJob("connect block needs exactly one of 'diag' or 'phases'");
        }
    }
    return job;
}

JobFile parse_job_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InvalidJob("cannot read job file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_job_text(buf.str());
}

// --------------------------------- trajectory ---------------------------------

namespace {

std::vector<double> window_values(const HermitianOperator<double>& op, double a) {
    Eigen::SelfAdjointEigenSolver<MatrixC<double>> es(op.matrix(), Eigen::EigenvaluesOnly);
    std::vector<double> out;
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
        const double v = es.eigenvalues()(i);
        if (v >= -a && v <= a) out.push_back(v);
    }
    return out;
}

std::vector<double> window_values(const DiagonalOperator<double>& op, double a) {
    auto vals = op.values_in_closed(-a, a);
    if (!vals) throw CannotCertify("trajectory: window holds too many eigenvalues");
    return *vals;
}

template <typename Op>
double derive_window(const OperatorPath<Op>& path, double guard) {
    const auto spectra = detail::sample_spectra(path);
    const auto candidates =
        detail::barrier_candidates(spectra.front().magnitudes(64), guard);
    for (double a : candidates) {
        bool ok = true;
        for (const auto& s : spectra) {
            if (!s.count_in_closed(-a, a) || !(s.min_distance_to_barriers(a) > guard)) {
                ok = false;
                break;
            }
        }
        if (ok) return a;
    }
    throw CannotCertify("trajectory: no window certifies the whole path");
}

template <typename Op>
std::string trajectory_csv_impl(const OperatorPath<Op>& path, double window, double guard) {
    const auto spectra = detail::sample_spectra(path);
    for (const auto& s : spectra) {
        if (!s.count_in_closed(-window, window) ||
            !(s.min_distance_to_barriers(window) > guard)) {
            throw CannotCertify("trajectory: window boundary grazes the spectrum");
        }
    }
    std::vector<std::vector<double>> rows;
    std::size_t width = 0;
    for (const auto& op : path.samples()) {
        rows.push_back(window_values(op, window));
        width = std::max(width, rows.back().size());
    }
    std::ostringstream out;
    out << "t";
    for (std::size_t c = 1; c <= width; ++c) out << ",lambda_" << c;
    out << "\n";
    for (std::size_t i = 0; i < rows.size(); ++i) {
        out << format_significant(path.params()[i]);
        for (std::size_t c = 0; c < width; ++c) {
            out << ",";
            if (c < rows[i].size()) out << format_significant(rows[i][c]);
        }
        out << "\n";
    }
    return out.str();
}

}  // namespace

std::string trajectory_csv(const PathVariant<double>& path, double window, double guard) {
    return std::visit([&](const auto& p) { return trajectory_csv_impl(p, window, guard); },
                      path);
}

// ---------------------------------- connect -----------------------------------

ConnectDump connect_dump(const UnitaryOperator<double>& u, std::int64_t steps) {
    const auto path = connect_to_i_identity(u, static_cast<int>(steps));
    ConnectDump dump;
    dump.min_phase_distance = std::numeric_limits<double>::infinity();
    std::ostringstream out;
    out << "t";
    for (Eigen::Index c = 1; c <= u.dim(); ++c) out << ",phase_" << c;
    out << "\n";
    for (std::size_t j = 0; j < path.size(); ++j) {
        const double t = double(j) / double(path.size() - 1);
        const auto ph = eigenphases(path[j]);
        out << format_significant(t);
        for (Eigen::Index i = 0; i < ph.phases.size(); ++i) {
            out << "," << format_significant(ph.phases(i));
            const double theta = ph.phases(i);
            dump.min_phase_distance =
                std::min(dump.min_phase_distance, std::min(theta, 2 * pi_v<double> - theta));
        }
        out << "\n";
        dump.max_unitarity_defect =
            std::max(dump.max_unitarity_defect, unitarity_defect(path[j].matrix()));
    }
    MatrixC<double> target = Complex<double>(0, 1) *
                             MatrixC<double>::Identity(u.dim(), u.dim());
    dump.endpoint_defect = operator_norm(path.back().matrix() - target);
    dump.csv = out.str();
    return dump;
}

// ---------------------------------- run_job -----------------------------------

namespace {

char hex_digit(std::uint64_t v) { return "0123456789abcdef"[v & 0xf]; }

std::string hash_hex(std::uint64_t h) {
    std::string s(16, '0');
    for (int i = 15; i >= 0; --i) {
        s[static_cast<std::size_t>(i)] = hex_digit(h);
        h >>= 4;
    }
    return s;
}

json partition_echo(const PathPartition<double>& part) {
    json out;
    out["breakpoints"] = part.breakpoints;
    out["window_radii"] = part.window_radii;
    out["guard"] = part.guard;
    double min_clear = std::numeric_limits<double>::infinity();
    for (const auto& c : part.certificates) min_clear = std::min(min_clear, c.min_clearance);
    out["min_clearance"] = min_clear;
    out["segments"] = part.segments();
    return out;
}

json metrics_echo(const MetricReport<double>& r) {
    json out;
    out["delta"] = r.delta;
    out["delta1"] = r.delta1;
    out["gamma"] = r.gamma;
    out["delta_tilde"] = r.delta_tilde;
    out["riesz"] = r.riesz;
    json ratios;
    auto put = [&](const char* key, const std::optional<double>& v) {
        if (v) ratios[key] = *v;
    };
    put("delta_tilde_over_gamma", r.ratios.delta_tilde_over_gamma);
    put("delta1_over_gamma", r.ratios.delta1_over_gamma);
    put("delta1_over_delta", r.ratios.delta1_over_delta);
    put("riesz_over_delta", r.ratios.riesz_over_delta);
    out["ratios"] = ratios;
    return out;
}

UnitaryOperator<double> connect_source(const ConnectSource& src) {
    if (!src.diag.empty()) {
        VectorR<double> v(static_cast<Eigen::Index>(src.diag.size()));
        for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = src.diag[static_cast<std::size_t>(i)];
        MatrixC<double> m = v.cast<Complex<double>>().asDiagonal();
        return cayley(HermitianOperator<double>(m));
    }
    VectorC<double> d(static_cast<Eigen::Index>(src.phases.size()));
    for (Eigen::Index i = 0; i < d.size(); ++i) {
        d(i) = std::polar(1.0, src.phases[static_cast<std::size_t>(i)]);
    }
    MatrixC<double> m = d.asDiagonal();
    return UnitaryOperator<double>(m);
}

}  // namespace

std::string render_report(const json& report) { return report.dump(2) + "\n"; }

json run_job(const JobFile& job, const std::string& out_dir) {
    json report;
    report["task"] = to_string(job.task);
    report["tool_version"] = version;
    report["job_hash"] = hash_hex(job.job_hash);
    if (job.family) report["family"] = family_echo(*job.family);

    std::optional<std::pair<std::string, std::string>> side_file;  // name, content

    switch (job.task) {
        case Task::sf: {
            const auto path = build_path(*job.family);
            PartitionOptions<double> opts;
            opts.guard = job.options.guard;
            json sf;
            std::visit(
                [&](const auto& p) {
                    for (Method m : job.options.methods) {
                        switch (m) {
                            case Method::phillips: {
                                const auto part = choose_partition(p, opts);
                                sf["phillips"] = sf_phillips(p, part);
                                report["partition"] = partition_echo(part);
                                break;
                            }
                            case Method::cayley:
                                sf["cayley"] = sf_cayley(p, opts);
                                break;
                            case Method::oracle:
                                sf["oracle"] =
                                    sf_oracle(p, static_cast<int>(job.options.refine));
                                break;
                        }
                    }
                },
                path);
            report["sf"] = sf;
            break;
        }
        case Task::metrics: {
            const auto path = build_path(*job.family);
            std::visit(
                [&](const auto& p) {
                    report["metrics"] =
                        metrics_echo(metric_report(p.samples().front(), p.samples().back()));
                },
                path);
            break;
        }
        case Task::trajectory: {
            const auto path = build_path(*job.family);
            const double guard = job.options.guard;
            const double window =
                job.options.window
                    ? *job.options.window
                    : std::visit([&](const auto& p) { return derive_window(p, guard); }, path);
            const std::string csv = trajectory_csv(path, window, guard);
            report["trajectory"] = {{"window", window},
                                    {"guard", guard},
                                    {"file", job.options.trajectory_name},
                                    {"rows", std::count(csv.begin(), csv.end(), '\n') - 1}};
            side_file = {job.options.trajectory_name, csv};
            break;
        }
        case Task::connect: {
            const auto dump = connect_dump(connect_source(job.connect), job.options.steps);
            report["connect"] = {{"max_unitarity_defect", dump.max_unitarity_defect},
                                 {"min_phase_distance", dump.min_phase_distance},
                                 {"endpoint_defect", dump.endpoint_defect},
                                 {"steps", job.options.steps},
                                 {"file", job.options.connect_name}};
            side_file = {job.options.connect_name, dump.csv};
            break;
        }
    }

    if (!out_dir.empty()) {
        std::filesystem::create_directories(out_dir);
        const auto dir = std::filesystem::path(out_dir);
        write_atomic((dir / job.options.report_name).string(), render_report(report));
        if (side_file) write_atomic((dir / side_file->first).string(), side_file->second);
    }
    return report;
}

}  // namespace specflow::cli
