#include "almgp/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "almgp/checkpoint.hpp"
#include "almgp/error.hpp"
#include "almgp/seeding.hpp"

namespace almgp {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr const char* kConfigFormat = "almgp-experiment";

std::string read_text(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(ErrorKind::io, "cannot read " + path.string());
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw Error(ErrorKind::io, "cannot write " + path.string());
    }
    out << text;
    if (!out) {
        throw Error(ErrorKind::io, "write failed for " + path.string());
    }
}

json parse_json(std::string_view text, const char* what) {
    try {
        return json::parse(text);
    } catch (const json::exception& e) {
        throw Error(ErrorKind::invalid_spec, std::string("malformed ") + what + ": " + e.what());
    }
}

void reject_unknown(const json& obj, std::initializer_list<const char*> allowed, const std::string& where) {
    if (!obj.is_object()) {
        throw Error(ErrorKind::invalid_spec, where + " must be an object");
    }
    for (const auto& item : obj.items()) {
        const bool known = std::any_of(allowed.begin(), allowed.end(), [&](const char* k) { return item.key() == k; });
        if (!known) {
            throw Error(ErrorKind::invalid_spec, "unknown key '" + item.key() + "' in " + where);
        }
    }
}

template <class T>
void read_if(const json& obj, const char* key, T& out) {
    if (!obj.contains(key)) {
        return;
    }
    try {
        out = obj.at(key).get<T>();
    } catch (const json::exception& e) {
        throw Error(ErrorKind::invalid_spec, std::string("bad value for '") + key + "': " + e.what());
    }
}

std::string read_string(const json& obj, const char* key) {
    std::string value;
    read_if(obj, key, value);
    return value;
}

std::string_view loss_name(OptimizerLoss loss) {
    return loss == OptimizerLoss::nlml ? "nlml" : "test_rmse";
}

OptimizerLoss parse_optimizer_loss(std::string_view text) {
    if (text == "nlml") return OptimizerLoss::nlml;
    if (text == "test_rmse") return OptimizerLoss::test_rmse;
    throw Error(ErrorKind::invalid_spec, "unknown optimizer loss '" + std::string(text) + "'");
}

} // namespace

// ---- config --------------------------------------------------------------------

ExperimentConfig ExperimentConfig::defaults(ProblemName problem) {
    const Problem p = make_problem(problem);
    ExperimentConfig cfg;
    cfg.problem = problem;
    cfg.output_dir = fs::path("results") / std::string(to_string(problem));
    cfg.arch = p.arch;
    cfg.al = p.al;
    cfg.opt = p.opt;
    cfg.optimizer_loss = p.optimizer_loss;
    return cfg;
}

ExperimentConfig ExperimentConfig::from_json(std::string_view text) {
    const json doc = parse_json(text, "experiment config");
    reject_unknown(doc,
                   {"format", "version", "problem", "repetitions", "base_seed", "strategies", "output_dir",
                    "record_timing", "threads", "active_learning", "optimizer", "model"},
                   "experiment config");
    if (doc.contains("format") && read_string(doc, "format") != kConfigFormat) {
        throw Error(ErrorKind::invalid_spec, "config format must be '" + std::string(kConfigFormat) + "'");
    }
    int version = kExperimentConfigVersion;
    read_if(doc, "version", version);
    if (version != kExperimentConfigVersion) {
        throw Error(ErrorKind::invalid_spec, "unsupported config version " + std::to_string(version));
    }
    if (!doc.contains("problem")) {
        throw Error(ErrorKind::invalid_spec, "config needs a 'problem'");
    }
    ExperimentConfig cfg = defaults(parse_problem(read_string(doc, "problem")));

    read_if(doc, "repetitions", cfg.repetitions);
    read_if(doc, "base_seed", cfg.base_seed);
    read_if(doc, "record_timing", cfg.record_timing);
    read_if(doc, "threads", cfg.threads);
    if (doc.contains("output_dir")) {
        cfg.output_dir = read_string(doc, "output_dir");
    }
    if (doc.contains("strategies")) {
        std::vector<std::string> names;
        read_if(doc, "strategies", names);
        cfg.strategies.clear();
        for (const auto& name : names) {
            cfg.strategies.push_back(parse_strategy(name));
        }
    }

    if (doc.contains("active_learning")) {
        const json& al = doc.at("active_learning");
        reject_unknown(al,
                       {"screen_size", "batch_size", "max_added", "tol", "stop_metric", "refit",
                        "refit_max_iters"},
                       "active_learning");
        read_if(al, "screen_size", cfg.al.screen_size);
        read_if(al, "batch_size", cfg.al.batch_size);
        read_if(al, "max_added", cfg.al.max_added);
        read_if(al, "tol", cfg.al.tol);
        read_if(al, "refit_max_iters", cfg.al.refit_max_iters);
        if (al.contains("stop_metric")) {
            cfg.al.stop_metric = parse_stop_metric(read_string(al, "stop_metric"));
        }
        if (al.contains("refit")) {
            cfg.al.refit = parse_refit_mode(read_string(al, "refit"));
        }
    }
    if (doc.contains("optimizer")) {
        const json& opt = doc.at("optimizer");
        reject_unknown(opt,
                       {"history_size", "learning_rate", "max_iters_per_step", "max_total_iters",
                        "early_stop_tol", "wolfe_c1", "wolfe_c2", "grad_tol", "loss"},
                       "optimizer");
        read_if(opt, "history_size", cfg.opt.history_size);
        read_if(opt, "learning_rate", cfg.opt.learning_rate);
        read_if(opt, "max_iters_per_step", cfg.opt.max_iters_per_step);
        read_if(opt, "max_total_iters", cfg.opt.max_total_iters);
        read_if(opt, "early_stop_tol", cfg.opt.early_stop_tol);
        read_if(opt, "wolfe_c1", cfg.opt.wolfe_c1);
        read_if(opt, "wolfe_c2", cfg.opt.wolfe_c2);
        read_if(opt, "grad_tol", cfg.opt.grad_tol);
        if (opt.contains("loss")) {
            cfg.optimizer_loss = parse_optimizer_loss(read_string(opt, "loss"));
        }
    }
    if (doc.contains("model")) {
        const json& model = doc.at("model");
        reject_unknown(model, {"layers", "rho_raw_init"}, "model");
        read_if(model, "layers", cfg.arch.layer_sizes);
        read_if(model, "rho_raw_init", cfg.rho_raw_init);
    }
    cfg.validate();
    return cfg;
}

std::string ExperimentConfig::to_json() const {
    json doc;
    doc["format"] = kConfigFormat;
    doc["version"] = kExperimentConfigVersion;
    doc["problem"] = std::string(almgp::to_string(problem));
    doc["repetitions"] = repetitions;
    doc["base_seed"] = base_seed;
    json names = json::array();
    for (auto s : strategies) {
        names.push_back(std::string(almgp::to_string(s)));
    }
    doc["strategies"] = names;
    doc["output_dir"] = output_dir.string();
    doc["record_timing"] = record_timing;
    doc["threads"] = threads;
    doc["active_learning"] = {{"screen_size", al.screen_size},
                              {"batch_size", al.batch_size},
                              {"max_added", al.max_added},
                              {"tol", al.tol},
                              {"stop_metric", std::string(almgp::to_string(al.stop_metric))},
                              {"refit", std::string(almgp::to_string(al.refit))},
                              {"refit_max_iters", al.refit_max_iters}};
    doc["optimizer"] = {{"history_size", opt.history_size},
                        {"learning_rate", opt.learning_rate},
                        {"max_iters_per_step", opt.max_iters_per_step},
                        {"max_total_iters", opt.max_total_iters},
                        {"early_stop_tol", opt.early_stop_tol},
                        {"wolfe_c1", opt.wolfe_c1},
                        {"wolfe_c2", opt.wolfe_c2},
                        {"grad_tol", opt.grad_tol},
                        {"loss", std::string(loss_name(optimizer_loss))}};
    doc["model"] = {{"layers", arch.layer_sizes}, {"rho_raw_init", rho_raw_init}};
    return doc.dump(2) + "\n";
}

Problem ExperimentConfig::problem_definition() const {
    Problem p = make_problem(problem);
    p.arch = arch;
    p.al = al;
    p.opt = opt;
    p.optimizer_loss = optimizer_loss;
    return p;
}

void ExperimentConfig::validate() const {
    if (repetitions < 1) {
        throw Error(ErrorKind::invalid_spec, "repetitions must be at least 1");
    }
    if (strategies.empty()) {
        throw Error(ErrorKind::invalid_spec, "at least one strategy is required");
    }
    std::set<Strategy> seen(strategies.begin(), strategies.end());
    if (seen.size() != strategies.size()) {
        throw Error(ErrorKind::invalid_spec, "strategies must not repeat");
    }
    arch.validate();
    const Problem p = make_problem(problem);
    if (arch.input_dim() != p.input_dim) {
        throw Error(ErrorKind::invalid_spec, "network input width " + std::to_string(arch.input_dim()) +
                                                 " does not match the problem's " +
                                                 std::to_string(p.input_dim) + " inputs");
    }
    al.validate();
    opt.validate();
    if (!std::isfinite(rho_raw_init)) {
        throw Error(ErrorKind::invalid_spec, "rho_raw_init must be finite");
    }
}

ExperimentConfig load_experiment_config(const fs::path& path) {
    return ExperimentConfig::from_json(read_text(path));
}

std::string apply_override(std::string_view config_json, std::string_view assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string_view::npos || eq == 0) {
        throw Error(ErrorKind::invalid_spec, "override must look like key=value or section.key=value");
    }
    const std::string key(assignment.substr(0, eq));
    const std::string raw(assignment.substr(eq + 1));
    json value;
    try {
        value = json::parse(raw);
    } catch (const json::exception&) {
        value = raw;
    }
    json doc = parse_json(config_json, "experiment config");
    json* node = &doc;
    std::size_t start = 0;
    while (true) {
        const auto dot = key.find('.', start);
        const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
        if (part.empty()) {
            throw Error(ErrorKind::invalid_spec, "empty component in override key '" + key + "'");
        }
        if (dot == std::string::npos) {
            (*node)[part] = value;
            break;
        }
        node = &(*node)[part];
        start = dot + 1;
    }
    return doc.dump(2) + "\n";
}

fs::path resolve_output_dir(const ExperimentConfig& cfg) {
    const char* root = std::getenv(kOutputRootEnv);
    if (root != nullptr && *root != '\0' && cfg.output_dir.is_relative()) {
        return fs::path(root) / cfg.output_dir;
    }
    return cfg.output_dir;
}

void ensure_writable_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) {
        throw Error(ErrorKind::io, "cannot create output directory " + dir.string() +
                                       (ec ? ": " + ec.message() : std::string()));
    }
    const fs::path probe = dir / ".almgp-write-probe";
    {
        std::ofstream out(probe, std::ios::trunc);
        if (!out || !(out << "ok")) {
            throw Error(ErrorKind::io, "output directory is not writable: " + dir.string());
        }
    }
    fs::remove(probe, ec);
}

std::size_t make_run_id(std::size_t repetition, std::size_t strategy_index, std::size_t strategy_count) {
    return repetition * strategy_count + strategy_index;
}

// ---- aggregation ---------------------------------------------------------------

std::vector<AggregateRow> aggregate(const std::vector<RunRecord>& records) {
    // strategy -> run_id -> iteration -> rmse
    std::map<Strategy, std::map<std::size_t, std::map<std::size_t, double>>> grouped;
    for (const auto& r : records) {
        grouped[r.strategy][r.run_id][r.iteration] = r.test_rmse;
    }
    std::vector<AggregateRow> rows;
    for (const auto& [strategy, runs] : grouped) {
        std::size_t last = 0;
        std::size_t first = std::numeric_limits<std::size_t>::max();
        for (const auto& [id, curve] : runs) {
            last = std::max(last, curve.rbegin()->first);
            first = std::min(first, curve.begin()->first);
        }
        for (std::size_t it = first; it <= last; ++it) {
            AggregateRow row;
            row.strategy = strategy;
            row.iteration = it;
            double sum = 0.0;
            for (const auto& [id, curve] : runs) {
                // latest value at or before this iteration
                auto pos = curve.upper_bound(it);
                if (pos == curve.begin()) {
                    continue;
                }
                const double v = std::prev(pos)->second;
                if (row.runs == 0) {
                    row.min = v;
                    row.max = v;
                } else {
                    row.min = std::min(row.min, v);
                    row.max = std::max(row.max, v);
                }
                sum += v;
                ++row.runs;
            }
            if (row.runs == 0) {
                continue;
            }
            row.mean = sum / static_cast<double>(row.runs);
            rows.push_back(row);
        }
    }
    return rows;
}

std::optional<double> ExperimentResult::mean_final_rmse(Strategy strategy) const {
    double sum = 0.0;
    std::size_t count = 0;
    for (const auto& run : runs) {
        if (run.strategy == strategy && run.final_test_rmse) {
            sum += *run.final_test_rmse;
            ++count;
        }
    }
    if (count == 0) {
        return std::nullopt;
    }
    return sum / static_cast<double>(count);
}

// ---- CSV -----------------------------------------------------------------------

std::string format_number(double value) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", value);
    return buf;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        out.push_back(line.substr(start, comma == std::string::npos ? std::string::npos : comma - start));
        if (comma == std::string::npos) {
            break;
        }
        start = comma + 1;
    }
    return out;
}

double parse_double(const std::string& text, const fs::path& path) {
    try {
        std::size_t used = 0;
        const double v = std::stod(text, &used);
        if (used != text.size()) {
            throw std::invalid_argument(text);
        }
        return v;
    } catch (const std::exception&) {
        throw Error(ErrorKind::io, "bad number '" + text + "' in " + path.string());
    }
}

std::size_t parse_count(const std::string& text, const fs::path& path) {
    try {
        std::size_t used = 0;
        const auto v = std::stoull(text, &used);
        if (used != text.size()) {
            throw std::invalid_argument(text);
        }
        return static_cast<std::size_t>(v);
    } catch (const std::exception&) {
        throw Error(ErrorKind::io, "bad count '" + text + "' in " + path.string());
    }
}

std::vector<std::string> read_lines(const fs::path& path) {
    std::istringstream in(read_text(path));
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (!line.empty()) {
            lines.push_back(line);
        }
    }
    return lines;
}

} // namespace

void write_records_csv(const fs::path& path, const std::vector<RunRecord>& records, bool record_timing) {
    std::string out(kRecordsHeader);
    out += '\n';
    for (const auto& r : records) {
        out += std::to_string(r.run_id) + ',' + std::string(to_string(r.strategy)) + ',' +
               std::to_string(r.iteration) + ',' + std::to_string(r.n_train) + ',' + format_number(r.test_rmse) +
               ',' + format_number(record_timing ? r.wall_ms : 0.0) + '\n';
    }
    write_text(path, out);
}

std::vector<RunRecord> read_records_csv(const fs::path& path) {
    const auto lines = read_lines(path);
    if (lines.empty() || lines.front() != kRecordsHeader) {
        throw Error(ErrorKind::io, "unexpected header in " + path.string());
    }
    std::vector<RunRecord> records;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const auto fields = split_csv_line(lines[i]);
        if (fields.size() != 6) {
            throw Error(ErrorKind::io, "expected 6 fields on line " + std::to_string(i + 1) + " of " + path.string());
        }
        RunRecord r;
        r.run_id = parse_count(fields[0], path);
        r.strategy = parse_strategy(fields[1]);
        r.iteration = parse_count(fields[2], path);
        r.n_train = parse_count(fields[3], path);
        r.test_rmse = parse_double(fields[4], path);
        r.wall_ms = parse_double(fields[5], path);
        records.push_back(std::move(r));
    }
    return records;
}

void write_selected_points_csv(const fs::path& path, const std::vector<RunRecord>& records) {
    Eigen::Index dims = 0;
    for (const auto& r : records) {
        dims = std::max(dims, r.selected_points.cols());
    }
    std::string out = "run_id,strategy,iteration,candidate_index";
    for (Eigen::Index j = 0; j < dims; ++j) {
        out += ",x" + std::to_string(j);
    }
    out += '\n';
    for (const auto& r : records) {
        for (std::size_t k = 0; k < r.selected.size(); ++k) {
            out += std::to_string(r.run_id) + ',' + std::string(to_string(r.strategy)) + ',' +
                   std::to_string(r.iteration) + ',' + std::to_string(r.selected[k]);
            for (Eigen::Index j = 0; j < r.selected_points.cols(); ++j) {
                out += ',' + format_number(r.selected_points(static_cast<Eigen::Index>(k), j));
            }
            out += '\n';
        }
    }
    write_text(path, out);
}

void write_aggregate_csv(const fs::path& path, const std::vector<AggregateRow>& rows) {
    std::string out = "strategy,iteration,mean,min,max,runs\n";
    for (const auto& r : rows) {
        out += std::string(to_string(r.strategy)) + ',' + std::to_string(r.iteration) + ',' + format_number(r.mean) +
               ',' + format_number(r.min) + ',' + format_number(r.max) + ',' + std::to_string(r.runs) + '\n';
    }
    write_text(path, out);
}

std::vector<AggregateRow> read_aggregate_csv(const fs::path& path) {
    const auto lines = read_lines(path);
    if (lines.empty() || lines.front() != "strategy,iteration,mean,min,max,runs") {
        throw Error(ErrorKind::io, "unexpected header in " + path.string());
    }
    std::vector<AggregateRow> rows;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const auto f = split_csv_line(lines[i]);
        if (f.size() != 6) {
            throw Error(ErrorKind::io, "expected 6 fields on line " + std::to_string(i + 1) + " of " + path.string());
        }
        rows.push_back({parse_strategy(f[0]), parse_count(f[1], path), parse_double(f[2], path),
                        parse_double(f[3], path), parse_double(f[4], path), parse_count(f[5], path)});
    }
    return rows;
}

std::vector<AggregateRow> aggregate_directory(const fs::path& dir) {
    const auto records = read_records_csv(dir / "records.csv");
    if (records.empty()) {
        throw Error(ErrorKind::invalid_spec, "no records to aggregate in " + dir.string());
    }
    auto rows = aggregate(records);
    write_aggregate_csv(dir / "aggregate.csv", rows);
    write_text(dir / "rmse.svg", render_rmse_svg(rows, dir.filename().string()));
    return rows;
}

void plot_directory(const fs::path& dir) {
    const auto rows = read_aggregate_csv(dir / "aggregate.csv");
    write_text(dir / "rmse.svg", render_rmse_svg(rows, dir.filename().string()));
}

// ---- orchestration -------------------------------------------------------------

namespace {

struct RepetitionOutcome {
    std::vector<LoopResult> loops;  // one per strategy, in config order
    std::optional<std::string> failure;
};

RepetitionOutcome run_repetition(const ExperimentConfig& cfg, const Problem& problem, std::size_t rep) {
    const std::uint64_t seed = cfg.base_seed + rep;
    const ProblemData data = make_problem_data(problem, seed);
    const Dataset initial{data.train_X, data.train_y};
    const Dataset test{data.test_X, data.test_y};
    const MgpParams init = MgpParams::initial(cfg.arch, stage_seed(seed, SeedStage::model_init), cfg.rho_raw_init);

    LoopConfig loop;
    loop.al = cfg.al;
    loop.opt = cfg.opt;
    loop.optimizer_tracks_test_rmse = cfg.optimizer_loss == OptimizerLoss::test_rmse;
    loop.seed = stage_seed(seed, SeedStage::random_acquisition);

    RepetitionOutcome outcome;
    // Step 0 is shared, so the strategies differ only in what they acquire.
    const FitResult step0 = fit_initial(initial, cfg.arch, init, loop, test);
    for (std::size_t s = 0; s < cfg.strategies.size(); ++s) {
        loop.al.strategy = cfg.strategies[s];
        loop.run_id = make_run_id(rep, s, cfg.strategies.size());
        NoisyLabeler labeler(problem, seed);
        outcome.loops.push_back(run_loop(initial, PoolState(data.cand_X, data.ref_X), test, cfg.arch, init,
                                         step0.model, loop, [&labeler](const Eigen::VectorXd& x) {
                                             return labeler(x);
                                         }));
    }
    return outcome;
}

} // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
    cfg.validate();
    ExperimentResult result;
    result.output_dir = resolve_output_dir(cfg);
    ensure_writable_dir(result.output_dir);
    ensure_writable_dir(result.output_dir / "checkpoints");

    const Problem problem = cfg.problem_definition();
    const auto start = std::chrono::steady_clock::now();

    std::vector<RepetitionOutcome> outcomes(cfg.repetitions);
    std::atomic<std::size_t> next{0};
    const auto worker = [&] {
        while (true) {
            const std::size_t rep = next.fetch_add(1);
            if (rep >= cfg.repetitions) {
                return;
            }
            try {
                outcomes[rep] = run_repetition(cfg, problem, rep);
            } catch (const std::exception& e) {
                outcomes[rep].failure = e.what();
            }
        }
    };
    std::size_t threads = cfg.threads > 0 ? cfg.threads : std::max(1u, std::thread::hardware_concurrency());
    threads = std::min(threads, cfg.repetitions);
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t t = 0; t < threads; ++t) {
            pool.emplace_back(worker);
        }
        for (auto& t : pool) {
            t.join();
        }
    }
    result.wall_seconds =
        cfg.record_timing ? std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count() : 0.0;

    // single writer from here on, in (repetition, strategy) = run_id order
    for (std::size_t rep = 0; rep < cfg.repetitions; ++rep) {
        const auto& outcome = outcomes[rep];
        for (std::size_t s = 0; s < cfg.strategies.size(); ++s) {
            RunSummary summary;
            summary.run_id = make_run_id(rep, s, cfg.strategies.size());
            summary.repetition = rep;
            summary.strategy = cfg.strategies[s];
            summary.seed = cfg.base_seed + rep;
            if (s >= outcome.loops.size()) {
                summary.failure = outcome.failure.value_or("repetition did not run");
                result.runs.push_back(std::move(summary));
                continue;
            }
            const LoopResult& loop = outcome.loops[s];
            summary.initial_test_rmse = loop.initial_test_rmse;
            summary.rounds = loop.records.size();
            summary.stopped_early = loop.stopped_early;
            summary.failure = loop.failure;
            if (!loop.records.empty()) {
                summary.final_test_rmse = loop.records.back().test_rmse;
            }
            for (const auto& r : loop.records) {
                result.records.push_back(r);
            }
            save_checkpoint(Checkpoint::from_model(loop.model),
                            result.output_dir / "checkpoints" /
                                ("run_" + std::to_string(summary.run_id) + ".json"));
            result.runs.push_back(std::move(summary));
        }
    }
    result.aggregate = aggregate(result.records);

    write_records_csv(result.output_dir / "records.csv", result.records, cfg.record_timing);
    write_selected_points_csv(result.output_dir / "selected_points.csv", result.records);
    write_aggregate_csv(result.output_dir / "aggregate.csv", result.aggregate);
    write_text(result.output_dir / "rmse.svg",
               render_rmse_svg(result.aggregate, std::string(to_string(cfg.problem))));

    json summary;
    summary["config"] = json::parse(cfg.to_json());
    summary["wall_seconds"] = result.wall_seconds;
    json runs = json::array();
    for (const auto& run : result.runs) {
        json entry = {{"run_id", run.run_id},
                      {"repetition", run.repetition},
                      {"strategy", std::string(to_string(run.strategy))},
                      {"seed", run.seed},
                      {"initial_test_rmse", run.initial_test_rmse},
                      {"rounds", run.rounds},
                      {"stopped_early", run.stopped_early}};
        entry["final_test_rmse"] = run.final_test_rmse ? json(*run.final_test_rmse) : json(nullptr);
        entry["failure"] = run.failure ? json(*run.failure) : json(nullptr);
        runs.push_back(std::move(entry));
    }
    summary["runs"] = runs;
    json means = json::object();
    for (auto s : cfg.strategies) {
        const auto m = result.mean_final_rmse(s);
        means[std::string(to_string(s))] = m ? json(*m) : json(nullptr);
    }
    summary["mean_final_test_rmse"] = means;
    write_text(result.output_dir / "summary.json", summary.dump(2) + "\n");
    return result;
}

} // namespace almgp
