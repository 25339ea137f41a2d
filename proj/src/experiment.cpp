#include "drspcrl/experiment.hpp"
#include "drspcrl/seeding.hpp"
#include "drspcrl/svg_chart.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <initializer_list>
#include <map>
#include <sstream>
#include <unistd.h>

namespace drspcrl {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr const char* kToolVersion = "1.0.0";
constexpr const char* kCheckpointFormat = "drspcrl-checkpoint";

void check_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& section) {
    if (!j.is_object()) {
        throw ConfigError(section + ": expected an object");
    }
    for (const auto& [key, _] : j.items()) {
        bool known = false;
        for (const char* a : allowed) {
            known = known || key == a;
        }
        if (!known) {
            throw ConfigError(section + ": unknown key '" + key + "'");
        }
    }
}

template <typename T>
void read(const json& j, const char* key, T& out, const std::string& section) {
    const auto it = j.find(key);
    if (it == j.end()) {
        return;
    }
    try {
        out = it->template get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(section + "." + key + ": " + e.what());
    }
}

json scheduler_to_json(const SchedulerConfig& s) {
    json j = {{"kind", scheduler_name(s)}};
    if (const auto* f = std::get_if<FixedSchedule>(&s)) {
        j["epsilon"] = f->epsilon;
    } else if (const auto* l = std::get_if<LinearSchedule>(&s)) {
        j["eps_step"] = l->eps_step;
        j["start_iteration"] = l->start_iteration;
    } else if (const auto* p = std::get_if<PlateauSchedule>(&s)) {
        j["interval"] = p->interval;
        j["start_iteration"] = p->start_iteration;
        j["threshold"] = p->threshold;
        j["window"] = p->window;
        j["eps_step"] = p->eps_step;
    } else if (const auto* r = std::get_if<RegretBufferSchedule>(&s)) {
        j["buffer_size"] = r->buffer_size;
        j["replay_prob"] = r->replay_prob;
        j["edit_noise_std"] = r->edit_noise_std;
        j["generator_range"] = r->generator_range;
        j["interval"] = r->interval;
    }
    return j;
}

SchedulerConfig scheduler_from_json(const json& j) {
    const std::string section = "scheduler";
    std::string kind = "drspcrl";
    if (!j.is_object()) {
        throw ConfigError("scheduler: expected an object");
    }
    read(j, "kind", kind, section);
    if (kind == "drspcrl") {
        check_keys(j, {"kind"}, section);
        return DrSpcrlSchedule{};
    }
    if (kind == "fixed") {
        check_keys(j, {"kind", "epsilon"}, section);
        FixedSchedule f;
        read(j, "epsilon", f.epsilon, section);
        return f;
    }
    if (kind == "linear") {
        check_keys(j, {"kind", "eps_step", "start_iteration"}, section);
        LinearSchedule l;
        read(j, "eps_step", l.eps_step, section);
        read(j, "start_iteration", l.start_iteration, section);
        return l;
    }
    if (kind == "plateau") {
        check_keys(j, {"kind", "interval", "start_iteration", "threshold", "window", "eps_step"}, section);
        PlateauSchedule p;
        read(j, "interval", p.interval, section);
        read(j, "start_iteration", p.start_iteration, section);
        read(j, "threshold", p.threshold, section);
        read(j, "window", p.window, section);
        read(j, "eps_step", p.eps_step, section);
        return p;
    }
    if (kind == "regret_buffer") {
        check_keys(j, {"kind", "buffer_size", "replay_prob", "edit_noise_std", "generator_range", "interval"},
                   section);
        RegretBufferSchedule r;
        read(j, "buffer_size", r.buffer_size, section);
        read(j, "replay_prob", r.replay_prob, section);
        read(j, "edit_noise_std", r.edit_noise_std, section);
        read(j, "generator_range", r.generator_range, section);
        read(j, "interval", r.interval, section);
        return r;
    }
    throw ConfigError("scheduler.kind: unknown scheduler '" + kind +
                      "' (expected drspcrl, fixed, linear, plateau or regret_buffer)");
}

json environment_to_json(const EnvironmentConfig& e) {
    if (e.name == "chain") {
        const ChainConfig& c = e.chain;
        return {{"name", "chain"},   {"slip_prob", c.slip_prob}, {"trap_reward", c.trap_reward},
                {"start", c.start},  {"gamma", c.gamma},         {"max_steps", c.max_steps}};
    }
    const PendulumConfig& p = e.pendulum;
    return {{"name", "pendulum"},    {"mass", p.mass}, {"length", p.length},         {"damping", p.damping},
            {"gravity", p.gravity},  {"dt", p.dt},     {"max_torque", p.max_torque}, {"max_steps", p.max_steps}};
}

EnvironmentConfig environment_from_json(const json& j) {
    const std::string section = "environment";
    EnvironmentConfig e;
    if (!j.is_object()) {
        throw ConfigError("environment: expected an object");
    }
    read(j, "name", e.name, section);
    if (e.name == "chain") {
        check_keys(j, {"name", "slip_prob", "trap_reward", "start", "gamma", "max_steps"}, section);
        read(j, "slip_prob", e.chain.slip_prob, section);
        read(j, "trap_reward", e.chain.trap_reward, section);
        read(j, "start", e.chain.start, section);
        read(j, "gamma", e.chain.gamma, section);
        read(j, "max_steps", e.chain.max_steps, section);
    } else if (e.name == "pendulum") {
        check_keys(j, {"name", "mass", "length", "damping", "gravity", "dt", "max_torque", "max_steps"}, section);
        read(j, "mass", e.pendulum.mass, section);
        read(j, "length", e.pendulum.length, section);
        read(j, "damping", e.pendulum.damping, section);
        read(j, "gravity", e.pendulum.gravity, section);
        read(j, "dt", e.pendulum.dt, section);
        read(j, "max_torque", e.pendulum.max_torque, section);
        read(j, "max_steps", e.pendulum.max_steps, section);
    } else {
        throw ConfigError("environment.name: unknown environment '" + e.name + "' (expected chain or pendulum)");
    }
    return e;
}

json agent_to_json(const TrainConfig& a) {
    return {
        {"kind", a.kind},
        {"total_iterations", a.total_iterations},
        {"rollout_steps", a.rollout_steps},
        {"dual_updates", a.dual_updates},
        {"dual_lr", a.dual_lr},
        {"policy_lr", a.policy_lr},
        {"clip", a.clip},
        {"gamma", a.gamma},
        {"gae_lambda", a.gae_lambda},
        {"epochs", a.epochs},
        {"minibatches", a.minibatches},
        {"value_coef", a.value_coef},
        {"max_grad_norm", a.max_grad_norm},
        {"entropy_coef", a.entropy_coef},
        {"hidden_dims", a.hidden_dims},
        {"dual_hidden_dims", a.dual_hidden_dims},
        {"beta_floor", a.beta_floor},
        {"branch_samples", a.branch_samples},
        {"tabular_policy_lr", a.tabular_policy_lr},
        {"tabular_critic_lr", a.tabular_critic_lr},
    };
}

TrainConfig agent_from_json(const json& j) {
    const std::string s = "agent";
    check_keys(j,
               {"kind", "total_iterations", "rollout_steps", "dual_updates", "dual_lr", "policy_lr", "clip", "gamma",
                "gae_lambda", "epochs", "minibatches", "value_coef", "max_grad_norm", "entropy_coef", "hidden_dims",
                "dual_hidden_dims", "beta_floor", "branch_samples", "tabular_policy_lr", "tabular_critic_lr"},
               s);
    TrainConfig a;
    read(j, "kind", a.kind, s);
    read(j, "total_iterations", a.total_iterations, s);
    read(j, "rollout_steps", a.rollout_steps, s);
    read(j, "dual_updates", a.dual_updates, s);
    read(j, "dual_lr", a.dual_lr, s);
    read(j, "policy_lr", a.policy_lr, s);
    read(j, "clip", a.clip, s);
    read(j, "gamma", a.gamma, s);
    read(j, "gae_lambda", a.gae_lambda, s);
    read(j, "epochs", a.epochs, s);
    read(j, "minibatches", a.minibatches, s);
    read(j, "value_coef", a.value_coef, s);
    read(j, "max_grad_norm", a.max_grad_norm, s);
    read(j, "entropy_coef", a.entropy_coef, s);
    read(j, "hidden_dims", a.hidden_dims, s);
    read(j, "dual_hidden_dims", a.dual_hidden_dims, s);
    read(j, "beta_floor", a.beta_floor, s);
    read(j, "branch_samples", a.branch_samples, s);
    read(j, "tabular_policy_lr", a.tabular_policy_lr, s);
    read(j, "tabular_critic_lr", a.tabular_critic_lr, s);
    return a;
}

std::string timestamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string number(double v) {
    if (std::isnan(v)) {
        return "nan";
    }
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot write " + path.string());
    }
    out << text;
    if (!out) {
        throw std::runtime_error("failed while writing " + path.string());
    }
}

std::string read_text(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ConfigError("cannot read " + path.string());
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

/// Run manifest, rewritten whenever the run's status changes.
struct Manifest {
    fs::path dir;
    json body;

    Manifest(fs::path d, const std::string& command, const ExperimentConfig& config) : dir(std::move(d)) {
        body = {{"tool", "drspcrl"},
                {"version", kToolVersion},
                {"command", command},
                {"config_hash", config_hash(config)},
                {"seed", config.seed},
                {"started", timestamp()},
                {"finished", nullptr},
                {"status", "running"},
                {"files", json::array()}};
        write();
    }
    void finish(const std::vector<std::string>& files, const std::string& status, const std::string& error = {}) {
        body["finished"] = timestamp();
        body["status"] = status;
        body["files"] = files;
        if (!error.empty()) {
            body["error"] = error;
        }
        write();
    }
    void write() const { write_text(dir / "manifest.json", body.dump(2) + "\n"); }
};

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
        out.push_back(cell);
    }
    return out;
}

} // namespace

// ---------------------------------------------------------------------------
// Config

void ExperimentConfig::validate() const {
    try {
        agent.validate();
        drspcrl::validate(scheduler);
        CurriculumState::start(curriculum.epsilon_start, curriculum.epsilon_budget, curriculum.alpha,
                               curriculum.lambda_curr);
        make_environment(environment);
        if (agent.kind == "tabular" && environment.name != "chain") {
            throw ConfigError("agent.kind \"tabular\" requires environment.name \"chain\"");
        }
        if (evaluation.episodes < 2) {
            throw ConfigError("evaluation.episodes must be at least 2");
        }
        if (evaluation.levels.empty() || evaluation.kinds.empty()) {
            throw ConfigError("evaluation.levels and evaluation.kinds must be non-empty");
        }
        for (const auto& k : evaluation.kinds) {
            const PerturbationKind kind = perturbation_kind_from_string(k);
            for (double level : evaluation.levels) {
                PerturbationSpec{kind, level}.validate();
            }
        }
        if (checkpoint_interval < 0) {
            throw ConfigError("checkpoint_interval must be nonnegative");
        }
        if (output_dir.empty()) {
            throw ConfigError("output_dir must be non-empty");
        }
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError(e.what());
    }
}

bool ExperimentConfig::operator==(const ExperimentConfig& o) const {
    return environment == o.environment && agent == o.agent && curriculum == o.curriculum &&
           scheduler == o.scheduler && evaluation == o.evaluation && output_dir == o.output_dir && seed == o.seed &&
           checkpoint_interval == o.checkpoint_interval;
}

json config_to_json(const ExperimentConfig& c) {
    return {
        {"environment", environment_to_json(c.environment)},
        {"agent", agent_to_json(c.agent)},
        {"curriculum",
         {{"epsilon_start", c.curriculum.epsilon_start},
          {"epsilon_budget", c.curriculum.epsilon_budget},
          {"alpha", c.curriculum.alpha},
          {"lambda_curr", c.curriculum.lambda_curr}}},
        {"scheduler", scheduler_to_json(c.scheduler)},
        {"evaluation",
         {{"episodes", c.evaluation.episodes},
          {"kinds", c.evaluation.kinds},
          {"levels", c.evaluation.levels},
          {"chart", c.evaluation.chart}}},
        {"output_dir", c.output_dir},
        {"seed", c.seed},
        {"checkpoint_interval", c.checkpoint_interval},
    };
}

ExperimentConfig config_from_json(const json& j) {
    check_keys(j, {"environment", "agent", "curriculum", "scheduler", "evaluation", "output_dir", "seed",
                   "checkpoint_interval"},
               "config");
    ExperimentConfig c;
    if (j.contains("environment")) {
        c.environment = environment_from_json(j.at("environment"));
    }
    if (j.contains("agent")) {
        c.agent = agent_from_json(j.at("agent"));
    }
    if (j.contains("curriculum")) {
        const auto& cj = j.at("curriculum");
        check_keys(cj, {"epsilon_start", "epsilon_budget", "alpha", "lambda_curr"}, "curriculum");
        read(cj, "epsilon_start", c.curriculum.epsilon_start, "curriculum");
        read(cj, "epsilon_budget", c.curriculum.epsilon_budget, "curriculum");
        read(cj, "alpha", c.curriculum.alpha, "curriculum");
        read(cj, "lambda_curr", c.curriculum.lambda_curr, "curriculum");
    }
    if (j.contains("scheduler")) {
        c.scheduler = scheduler_from_json(j.at("scheduler"));
    }
    if (j.contains("evaluation")) {
        const auto& ej = j.at("evaluation");
        check_keys(ej, {"episodes", "kinds", "levels", "chart"}, "evaluation");
        read(ej, "episodes", c.evaluation.episodes, "evaluation");
        read(ej, "kinds", c.evaluation.kinds, "evaluation");
        read(ej, "levels", c.evaluation.levels, "evaluation");
        read(ej, "chart", c.evaluation.chart, "evaluation");
    }
    read(j, "output_dir", c.output_dir, "config");
    read(j, "seed", c.seed, "config");
    read(j, "checkpoint_interval", c.checkpoint_interval, "config");
    c.validate();
    return c;
}

ExperimentConfig parse_config(const std::string& text) {
    json j;
    try {
        j = json::parse(text, nullptr, true, true);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    return config_from_json(j);
}

ExperimentConfig load_config(const fs::path& path) {
    return parse_config(read_text(path));
}

std::uint64_t fnv1a64(const std::string& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

std::string config_hash(const ExperimentConfig& config) {
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx",
                  static_cast<unsigned long long>(fnv1a64(config_to_json(config).dump())));
    return buf;
}

// ---------------------------------------------------------------------------
// Construction

std::unique_ptr<Environment> make_environment(const EnvironmentConfig& config) {
    if (config.name == "chain") {
        return std::make_unique<ChainEnv>(config.chain);
    }
    if (config.name == "pendulum") {
        return std::make_unique<PendulumEnv>(config.pendulum);
    }
    throw ConfigError("unknown environment '" + config.name + "'");
}

Scheduler make_scheduler(const ExperimentConfig& config) {
    const CurriculumConfig& c = config.curriculum;
    return Scheduler(config.scheduler,
                     CurriculumState::start(c.epsilon_start, c.epsilon_budget, c.alpha, c.lambda_curr),
                     derive_seed(config.seed, 0, kSchedulerStream));
}

std::unique_ptr<Trainer> build_trainer(const ExperimentConfig& config) {
    config.validate();
    return make_trainer(config.agent, make_environment(config.environment), make_scheduler(config), config.seed);
}

// ---------------------------------------------------------------------------
// CSV

std::string metrics_csv_header() {
    return "iteration,env_steps,mean_episode_return,robust_value_estimate,epsilon,beta_estimate,policy_loss,dual_loss";
}

std::string format_metrics_row(const MetricsRow& r) {
    return std::to_string(r.iteration) + ',' + std::to_string(r.env_steps) + ',' + number(r.mean_episode_return) +
           ',' + number(r.robust_value_estimate) + ',' + number(r.epsilon) + ',' + number(r.beta_estimate) + ',' +
           number(r.policy_loss) + ',' + number(r.dual_loss);
}

std::string sweep_csv_header() {
    return "perturbation_kind,level,mean_return,std_error,ci95_low,ci95_high,episodes,seed";
}

std::string format_sweep_row(const EvalReport& r) {
    return to_string(r.spec.kind) + ',' + number(r.spec.level) + ',' + number(r.mean_return) + ',' +
           number(r.std_error) + ',' + number(r.ci95_low) + ',' + number(r.ci95_high) + ',' +
           std::to_string(r.episodes) + ',' + std::to_string(r.seed);
}

// ---------------------------------------------------------------------------
// Runs

DirectoryLock::DirectoryLock(const fs::path& dir) : path_(dir / ".lock") {
    fs::create_directories(dir);
    std::FILE* f = std::fopen(path_.c_str(), "wx");
    if (f == nullptr) {
        throw RunLockedError("output directory " + dir.string() + " is locked by another run (" + path_.string() +
                             " exists)");
    }
    std::fprintf(f, "%ld\n", static_cast<long>(::getpid()));
    std::fclose(f);
}

DirectoryLock::~DirectoryLock() {
    std::error_code ec;
    fs::remove(path_, ec);
}

json make_checkpoint(const ExperimentConfig& config, const Trainer& trainer) {
    return {{"format", kCheckpointFormat}, {"version", 1}, {"config", config_to_json(config)},
            {"trainer", trainer.save()}};
}

std::unique_ptr<Trainer> load_checkpoint(const fs::path& path, ExperimentConfig* config_out) {
    if (!fs::exists(path)) {
        throw ConfigError("checkpoint " + path.string() + " does not exist");
    }
    json j;
    try {
        j = json::parse(read_text(path));
    } catch (const json::parse_error& e) {
        throw ConfigError("checkpoint " + path.string() + " is not valid JSON: " + e.what());
    }
    if (!j.is_object() || j.value("format", "") != kCheckpointFormat) {
        throw ConfigError(path.string() + " is not a checkpoint file");
    }
    ExperimentConfig config = config_from_json(j.at("config"));
    auto trainer = build_trainer(config);
    trainer->load(j.at("trainer"));
    if (config_out != nullptr) {
        *config_out = config;
    }
    return trainer;
}

RunResult run_train(const ExperimentConfig& config, const std::optional<fs::path>& resume) {
    config.validate();
    std::unique_ptr<Trainer> trainer;
    if (resume) {
        ExperimentConfig saved;
        trainer = load_checkpoint(*resume, &saved);
        if (!(saved.environment == config.environment) || !(saved.agent.kind == config.agent.kind)) {
            throw ConfigError("checkpoint " + resume->string() + " was trained with a different environment or agent");
        }
        // Hyperparameters and iteration budget come from the new config.
        auto fresh = build_trainer(config);
        fresh->load(trainer->save());
        trainer = std::move(fresh);
    } else {
        trainer = build_trainer(config);
    }

    RunResult result;
    result.out_dir = config.output_dir;
    DirectoryLock lock(result.out_dir);
    write_text(result.out_dir / "config.json", config_to_json(config).dump(2) + "\n");
    Manifest manifest(result.out_dir, "train", config);
    result.files = {"config.json", "train.csv"};
    try {
        std::ofstream csv(result.out_dir / "train.csv", std::ios::binary);
        if (!csv) {
            throw std::runtime_error("cannot write train.csv");
        }
        csv << metrics_csv_header() << '\n';
        while (trainer->iteration() < config.agent.total_iterations) {
            const MetricsRow row = trainer->train_iteration();
            csv << format_metrics_row(row) << '\n';
            csv.flush();
            result.rows.push_back(row);
            if (config.checkpoint_interval > 0 && row.iteration % config.checkpoint_interval == 0) {
                const std::string name = "checkpoint_" + std::to_string(row.iteration) + ".json";
                write_text(result.out_dir / name, make_checkpoint(config, *trainer).dump() + "\n");
                result.files.push_back(name);
            }
        }
        write_text(result.out_dir / "checkpoint.json", make_checkpoint(config, *trainer).dump() + "\n");
        result.files.push_back("checkpoint.json");
        manifest.finish(result.files, "ok");
    } catch (const std::exception& e) {
        manifest.finish(result.files, "failed", e.what());
        throw;
    }
    return result;
}

RunResult run_sweep(const fs::path& checkpoint, const std::optional<ExperimentConfig>& override_config,
                    const fs::path& out_dir) {
    ExperimentConfig saved;
    const auto trainer = load_checkpoint(checkpoint, &saved);
    ExperimentConfig config = override_config ? *override_config : saved;
    config.validate();
    if (!(config.environment.name == saved.environment.name)) {
        throw ConfigError("sweep config environment differs from the checkpoint's");
    }
    const auto env = make_environment(config.environment);
    const auto policy = trainer->policy();

    RunResult result;
    result.out_dir = out_dir;
    DirectoryLock lock(out_dir);
    Manifest manifest(out_dir, "sweep", config);
    result.files = {"sweep.csv"};
    try {
        std::ostringstream csv;
        csv << sweep_csv_header() << '\n';
        std::vector<ChartSeries> series;
        for (const auto& kind_name : config.evaluation.kinds) {
            const PerturbationKind kind = perturbation_kind_from_string(kind_name);
            ChartSeries s;
            s.name = kind_name;
            for (double level : config.evaluation.levels) {
                EvalReport r = evaluate_policy(*policy, *env, {kind, level}, config.evaluation.episodes, config.seed);
                csv << format_sweep_row(r) << '\n';
                s.x.push_back(level);
                s.y.push_back(r.mean_return);
                s.lo.push_back(r.ci95_low);
                s.hi.push_back(r.ci95_high);
                result.reports.push_back(std::move(r));
            }
            series.push_back(std::move(s));
        }
        write_text(out_dir / "sweep.csv", csv.str());
        if (config.evaluation.chart) {
            write_text(out_dir / "sweep.svg",
                       render_line_chart(series, "Return vs perturbation level", "level", "mean return"));
            result.files.push_back("sweep.svg");
        }
        manifest.finish(result.files, "ok");
    } catch (const std::exception& e) {
        manifest.finish(result.files, "failed", e.what());
        throw;
    }
    return result;
}

void run_plot(const fs::path& csv_path, const fs::path& svg_path) {
    std::istringstream in(read_text(csv_path));
    std::string header;
    std::getline(in, header);
    std::vector<ChartSeries> series;
    std::string title;
    std::string x_label;
    std::string y_label;
    std::string line;
    if (header == sweep_csv_header()) {
        std::map<std::string, std::size_t> index;
        while (std::getline(in, line)) {
            const auto cells = split_csv_line(line);
            if (cells.size() != 8) {
                throw ConfigError("malformed sweep row: " + line);
            }
            auto [it, fresh] = index.try_emplace(cells[0], series.size());
            if (fresh) {
                series.push_back({cells[0], {}, {}, {}, {}});
            }
            ChartSeries& s = series[it->second];
            s.x.push_back(std::stod(cells[1]));
            s.y.push_back(std::stod(cells[2]));
            s.lo.push_back(std::stod(cells[4]));
            s.hi.push_back(std::stod(cells[5]));
        }
        title = "Return vs perturbation level";
        x_label = "level";
        y_label = "mean return";
    } else if (header == metrics_csv_header()) {
        ChartSeries eps{"epsilon", {}, {}, {}, {}};
        ChartSeries beta{"beta_estimate", {}, {}, {}, {}};
        while (std::getline(in, line)) {
            const auto cells = split_csv_line(line);
            if (cells.size() != 8) {
                throw ConfigError("malformed training row: " + line);
            }
            const double it = std::stod(cells[0]);
            eps.x.push_back(it);
            eps.y.push_back(std::stod(cells[4]));
            beta.x.push_back(it);
            beta.y.push_back(std::stod(cells[5]));
        }
        series = {eps, beta};
        title = "Curriculum progress";
        x_label = "iteration";
        y_label = "value";
    } else {
        throw ConfigError(csv_path.string() + " is neither a training nor a sweep CSV");
    }
    write_text(svg_path, render_line_chart(series, title, x_label, y_label));
}

} // namespace drspcrl
