#include "sh2/config.hpp"

#include <fstream>
#include <sstream>

#include "sh2/oracle.hpp"

namespace sh2 {

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

}  // namespace

Config Config::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path);
    std::stringstream buffer;
    buffer << in.rdbuf();
    return from_string(buffer.str(), path);
}

Config Config::from_string(const std::string& text, const std::string& origin) {
    Config cfg;
    cfg.origin_ = origin;
    cfg.raw_ = text;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(origin + ":" + std::to_string(line_no) + ": expected key=value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) throw ConfigError(origin + ":" + std::to_string(line_no) + ": empty key");
        if (!cfg.values_.emplace(key, value).second)
            throw ConfigError(origin + ": duplicate key '" + key + "'");
    }
    return cfg;
}

std::string Config::get_string(const std::string& key) const {
    const auto it = values_.find(key);
    if (it == values_.end()) throw ConfigError(origin_ + ": missing required key '" + key + "'");
    consumed_.insert(key);
    return it->second;
}

std::string Config::get_string(const std::string& key, const std::string& fallback) const {
    consumed_.insert(key);
    const auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
}

double Config::get_double(const std::string& key) const {
    const std::string s = get_string(key);
    std::size_t pos = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &pos);
    } catch (const std::exception&) {
        throw ConfigError(origin_ + ": key '" + key + "' is not a number: '" + s + "'");
    }
    if (pos != s.size())
        throw ConfigError(origin_ + ": key '" + key + "' has trailing characters: '" + s + "'");
    return v;
}

double Config::get_double(const std::string& key, double fallback) const {
    consumed_.insert(key);
    return values_.count(key) ? get_double(key) : fallback;
}

int Config::get_int(const std::string& key) const {
    const double v = get_double(key);
    const int i = static_cast<int>(v);
    if (static_cast<double>(i) != v)
        throw ConfigError(origin_ + ": key '" + key + "' must be an integer");
    return i;
}

int Config::get_int(const std::string& key, int fallback) const {
    consumed_.insert(key);
    return values_.count(key) ? get_int(key) : fallback;
}

std::uint64_t Config::get_u64(const std::string& key, std::uint64_t fallback) const {
    consumed_.insert(key);
    if (!values_.count(key)) return fallback;
    const std::string s = get_string(key);
    try {
        return std::stoull(s);
    } catch (const std::exception&) {
        throw ConfigError(origin_ + ": key '" + key + "' is not an unsigned integer: '" + s + "'");
    }
}

Eigen::VectorXd Config::get_vector(const std::string& key) const {
    const std::string s = get_string(key);
    std::vector<double> entries;
    std::istringstream in(s);
    std::string token;
    while (std::getline(in, token, ',')) {
        token = trim(token);
        if (token.empty()) throw ConfigError(origin_ + ": key '" + key + "' has an empty entry");
        try {
            entries.push_back(std::stod(token));
        } catch (const std::exception&) {
            throw ConfigError(origin_ + ": key '" + key + "' entry is not a number: '" + token +
                              "'");
        }
    }
    if (entries.empty()) throw ConfigError(origin_ + ": key '" + key + "' is empty");
    return Eigen::Map<Eigen::VectorXd>(entries.data(), static_cast<Eigen::Index>(entries.size()));
}

void Config::require_all_consumed() const {
    std::string unknown;
    for (const auto& [key, value] : values_) {
        if (!consumed_.count(key)) unknown += (unknown.empty() ? "" : ", ") + key;
    }
    if (!unknown.empty()) throw ConfigError(origin_ + ": unknown key(s): " + unknown);
}

std::string Config::digest() const {
    // FNV-1a over the raw file contents
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const unsigned char c : raw_) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    std::ostringstream out;
    out << std::hex << h;
    return out.str();
}

namespace {

std::pair<std::vector<double>, std::vector<double>> read_table_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open distribution table " + path);
    std::vector<double> omegas, weights;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        for (auto& c : line)
            if (c == ',') c = ' ';
        std::istringstream row(line);
        double omega = 0.0, weight = 0.0;
        if (!(row >> omega)) continue;  // blank or header line
        if (!(row >> weight))
            throw ConfigError(path + ":" + std::to_string(line_no) +
                              ": expected two columns (omega, weight)");
        omegas.push_back(omega);
        weights.push_back(weight);
    }
    return {std::move(omegas), std::move(weights)};
}

DistributionPtr build_distribution(const Config& cfg) {
    const std::string kind = cfg.get_string("dist.kind", "log-uniform");
    if (kind == "table") {
        auto [omegas, weights] = read_table_csv(cfg.get_string("dist.table"));
        return proportional_to_magnitude(std::move(omegas), std::move(weights));
    }
    const double lo = cfg.get_double("dist.lo", 1e-2);
    const double hi = cfg.get_double("dist.hi", 1e4);
    if (kind == "log-uniform") return log_uniform(lo, hi);
    if (kind == "uniform") return uniform_band(lo, hi);
    throw ConfigError(cfg.origin() + ": dist.kind must be log-uniform, uniform, or table");
}

StepSizePolicy build_policy(const Config& cfg) {
    const std::string kind = cfg.get_string("policy.kind", "constant");
    if (kind == "constant") return StepSizePolicy::constant(cfg.get_double("policy.alpha0"));
    if (kind == "power")
        return StepSizePolicy::power_law(cfg.get_double("policy.alpha0"),
                                         cfg.get_double("policy.p", 1.0));
    if (kind == "halving")
        return StepSizePolicy::halving(cfg.get_double("policy.alpha0"),
                                       cfg.get_int("policy.period"));
    if (kind == "observer") return observer_step_schedule();
    throw ConfigError(cfg.origin() + ": policy.kind must be constant, power, halving, or observer");
}

}  // namespace

RunSetup build_run_setup(const Config& cfg, std::optional<std::uint64_t> seed_override,
                         std::optional<int> trials_override,
                         std::optional<std::string> out_override) {
    RunSetup setup;
    setup.problem_name = cfg.get_string("problem");
    setup.config_digest = cfg.digest();

    if (setup.problem_name == "wave") {
        WaveEquationProblem wave;
        wave.damping = cfg.get_double("wave.damping", 0.25);
        wave.t_filter = cfg.get_double("wave.t_filter", 1e-2);
        const int fd_states = cfg.get_int("wave.fd_states", 400);
        setup.ps = wave.parametrized();
        setup.mu0 = Eigen::VectorXd::Zero(2);
        const auto fd = std::make_shared<DenseRealization>(wave_fd_discretize(fd_states, wave.damping));
        const double t_filter = wave.t_filter;
        setup.cost = [fd, t_filter](const Eigen::VectorXd& mu) {
            return h2_cost(wave_closed_loop(*fd, mu, t_filter));
        };
    } else if (setup.problem_name == "observer") {
        const int order = cfg.get_int("observer.order", 2);
        ObserverProblem problem =
            cfg.has("observer.e_file")
                ? build_observer_problem_from_files(
                      cfg.get_string("observer.e_file"), cfg.get_string("observer.a_file"),
                      cfg.get_string("observer.b_file"), cfg.get_string("observer.cz_file"),
                      cfg.get_string("observer.cy_file"), order)
                : build_observer_problem_synthetic(cfg.get_int("observer.n", 2000), order);
        setup.ps = problem.parametrized();
        std::optional<Eigen::VectorXd> explicit_mu0;
        if (cfg.has("observer.mu0")) explicit_mu0 = cfg.get_vector("observer.mu0");
        setup.mu0 = initialize_observer(problem, explicit_mu0);
        const auto shared = std::make_shared<ObserverProblem>(std::move(problem));
        setup.cost = [shared](const Eigen::VectorXd& mu) { return shared->cost_quadrature(mu); };
    } else if (setup.problem_name == "scalar") {
        setup.ps = scalar_gain_benchmark();
        setup.mu0 = Eigen::VectorXd::Constant(1, 2.0);
        const auto oracle = std::make_shared<RealizableParametrizedSystem>(scalar_gain_realizable());
        setup.cost = [oracle](const Eigen::VectorXd& mu) { return h2_cost(oracle->realize(mu)); };
        setup.exact_gradient_fn = [oracle](const Eigen::VectorXd& mu) {
            return exact_gradient(*oracle, mu);
        };
    } else if (setup.problem_name == "random") {
        auto bench = std::make_shared<RandomAffineBenchmark>(
            random_affine_benchmark(cfg.get_int("random.states", 8), cfg.get_int("random.params", 3),
                                    cfg.get_u64("random.seed", 1)));
        setup.ps = bench->ps;
        setup.mu0 = Eigen::VectorXd::Zero(setup.ps.n_params);
        setup.cost = [bench](const Eigen::VectorXd& mu) {
            return h2_cost(bench->oracle.realize(mu));
        };
        setup.exact_gradient_fn = [bench](const Eigen::VectorXd& mu) {
            return exact_gradient(bench->oracle, mu);
        };
    } else {
        throw ConfigError(cfg.origin() + ": problem must be wave, observer, scalar, or random");
    }

    if (cfg.has("mu0")) {
        setup.mu0 = cfg.get_vector("mu0");
        if (setup.mu0.size() != setup.ps.n_params)
            throw ConfigError(cfg.origin() + ": mu0 must have " +
                              std::to_string(setup.ps.n_params) + " entries");
    } else {
        cfg.get_string("mu0", "");  // mark the optional key as known
    }

    setup.dist = build_distribution(cfg);
    setup.policy = build_policy(cfg);
    setup.sample_count = cfg.get_int("samples", 10);
    setup.iterations = cfg.get_int("iterations");
    setup.trials = trials_override.value_or(cfg.get_int("trials", 1));
    setup.seed = seed_override.value_or(cfg.get_u64("seed", 0));
    setup.checkpoint_every = cfg.get_int("checkpoint.every", 0);
    setup.divergence_bound =
        cfg.get_double("checkpoint.divergence", std::numeric_limits<double>::infinity());
    setup.out_dir = out_override.value_or(cfg.get_string("out", "runs"));

    if (setup.sample_count < 1) throw ConfigError(cfg.origin() + ": samples must be >= 1");
    if (setup.iterations < 0) throw ConfigError(cfg.origin() + ": iterations must be >= 0");
    if (setup.trials < 1) throw ConfigError(cfg.origin() + ": trials must be >= 1");

    cfg.require_all_consumed();
    return setup;
}

}  // namespace sh2
