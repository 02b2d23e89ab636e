#include "fairshare/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "fairshare/rng.hpp"

namespace fairshare {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(trim(item));
    return out;
}

bool parse_double(const std::string& s, double& out) {
    try {
        std::size_t pos = 0;
        out = std::stod(s, &pos);
        return pos == s.size();
    } catch (...) {
        return false;
    }
}

bool parse_int(const std::string& s, std::int64_t& out) {
    try {
        std::size_t pos = 0;
        out = std::stoll(s, &pos);
        return pos == s.size();
    } catch (...) {
        return false;
    }
}

} // namespace

ParsedConfig parse_config_text(const std::string& text) {
    ParsedConfig parsed;
    ExperimentConfig& cfg = parsed.config;
    auto& errors = parsed.errors;

    std::stringstream stream(text);
    std::string line;
    int line_no = 0;
    while (std::getline(stream, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            errors.push_back("line " + std::to_string(line_no) + ": expected key = value");
            continue;
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        const auto bad = [&](const std::string& why) {
            errors.push_back(key + ": " + why + " (got '" + value + "')");
        };

        auto read_double = [&](double& slot, double lo, double hi) {
            double v;
            if (!parse_double(value, v) || v < lo || v > hi)
                bad("expected a number in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
            else
                slot = v;
        };
        auto read_list = [&](std::vector<double>& slot) {
            std::vector<double> vals;
            for (const auto& item : split_list(value)) {
                double v;
                if (!parse_double(item, v)) { bad("expected a comma-separated number list"); return; }
                vals.push_back(v);
            }
            slot = std::move(vals);
        };

        if (key == "name") cfg.name = value;
        else if (key == "agents") {
            std::int64_t v;
            if (!parse_int(value, v) || v < 1 || v > 10000) bad("expected an integer >= 1");
            else cfg.n_agents = static_cast<int>(v);
        } else if (key == "entitlements") {
            if (value == "equal") cfg.entitlements.clear();
            else read_list(cfg.entitlements);
        } else if (key == "horizon") {
            std::int64_t v;
            if (!parse_int(value, v) || v < 1) bad("expected an integer >= 1");
            else cfg.horizon = v;
        } else if (key == "methods") {
            if (value == "all") cfg.methods.clear();
            else {
                std::vector<MechanismKind> kinds;
                for (const auto& item : split_list(value)) {
                    if (auto k = mechanism_from_string(item)) kinds.push_back(*k);
                    else bad("unknown method '" + item + "'");
                }
                cfg.methods = std::move(kinds);
            }
        } else if (key == "feedback") {
            if (value == "deterministic") cfg.feedback = FeedbackMode::Deterministic;
            else if (value == "bernoulli") cfg.feedback = FeedbackMode::BernoulliAggregate;
            else if (value == "gaussian") cfg.feedback = FeedbackMode::Gaussian;
            else bad("expected deterministic|bernoulli|gaussian");
        } else if (key == "payoff") {
            if (value == "tanh") cfg.payoff = PayoffKind::Tanh;
            else if (value == "algebraic") cfg.payoff = PayoffKind::Algebraic;
            else if (value == "logistic") cfg.payoff = PayoffKind::Logistic;
            else bad("expected tanh|algebraic|logistic");
        } else if (key == "unit_demands") {
            if (value == "log_spaced") cfg.unit_demands.clear();
            else read_list(cfg.unit_demands);
        } else if (key == "unit_demand_lo") read_double(cfg.unit_demand_lo, 1e-300, 1e6);
        else if (key == "unit_demand_hi") read_double(cfg.unit_demand_hi, 1e-300, 1e6);
        else if (key == "threshold") {
            double v;
            if (parse_double(value, v)) cfg.thresholds.assign(1, v);
            else read_list(cfg.thresholds);
        } else if (key == "unit_demand_cap") {
            if (value == "auto") cfg.unit_demand_cap = 0.0;
            else read_double(cfg.unit_demand_cap, 0.0, 1e9);
        } else if (key == "load_lo") read_double(cfg.load_lo, 1e-12, 1e12);
        else if (key == "load_hi") read_double(cfg.load_hi, 1e-12, 1e12);
        else if (key == "noise_sigma") read_double(cfg.noise_sigma, 1e-12, 1.0);
        else if (key == "lipschitz") {
            if (value == "auto") cfg.lipschitz = 0.0;
            else read_double(cfg.lipschitz, 0.0, 1e12);
        } else if (key == "theta_min") {
            if (value == "auto") cfg.glm_theta_min = 0.0;
            else read_double(cfg.glm_theta_min, 0.0, 1e18);
        } else if (key == "kappa") {
            if (value == "auto") cfg.glm_kappa = 0.0;
            else read_double(cfg.glm_kappa, 0.0, 1.0);
        } else if (key == "kappa_margin") read_double(cfg.glm_kappa_margin, 1.0, 100.0);
        else if (key == "delta") read_double(cfg.delta, 1e-12, 0.5);
        else if (key == "glm_beta_scale") read_double(cfg.glm_beta_scale, 0.0, 100.0);
        else if (key == "tree_beta_scale") read_double(cfg.tree_beta_scale, 0.0, 100.0);
        else if (key == "glm_literal_lower_clip") {
            if (value == "true") cfg.glm_literal_lower_clip = true;
            else if (value == "false") cfg.glm_literal_lower_clip = false;
            else bad("expected true|false");
        } else if (key == "runs") {
            std::int64_t v;
            if (!parse_int(value, v) || v < 1 || v > 100000) bad("expected an integer >= 1");
            else cfg.runs = static_cast<int>(v);
        } else if (key == "seed") {
            std::int64_t v;
            if (!parse_int(value, v) || v < 0) bad("expected an integer >= 0");
            else cfg.seed = static_cast<std::uint64_t>(v);
        } else {
            errors.push_back("unknown key '" + key + "'");
        }
    }

    // Cross-field checks.
    if (!cfg.entitlements.empty()) {
        if (static_cast<int>(cfg.entitlements.size()) != cfg.n_agents)
            errors.push_back("entitlements: expected " + std::to_string(cfg.n_agents) + " values");
        double sum = 0.0;
        for (double e : cfg.entitlements) {
            if (!(e > 0.0)) errors.push_back("entitlements: every share must be > 0");
            sum += e;
        }
        if (std::abs(sum - 1.0) > 1e-9)
            errors.push_back("entitlements: shares sum to " + std::to_string(sum) + ", expected 1");
    }
    if (!cfg.unit_demands.empty() &&
        static_cast<int>(cfg.unit_demands.size()) != cfg.n_agents)
        errors.push_back("unit_demands: expected " + std::to_string(cfg.n_agents) + " values");
    if (!cfg.thresholds.empty() && cfg.thresholds.size() != 1 &&
        static_cast<int>(cfg.thresholds.size()) != cfg.n_agents)
        errors.push_back("threshold: expected 1 or " + std::to_string(cfg.n_agents) + " values");
    for (double a : cfg.thresholds)
        if (!(a > 0.0 && a < 1.0)) errors.push_back("threshold: values must lie in (0, 1)");
    if (cfg.load_lo > cfg.load_hi) errors.push_back("load range: lo must be <= hi");
    if (cfg.unit_demand_lo > cfg.unit_demand_hi)
        errors.push_back("unit demand range: lo must be <= hi");
    if (cfg.feedback != FeedbackMode::Deterministic) {
        for (MechanismKind kind : cfg.methods) {
            if (is_deterministic_only(kind))
                errors.push_back(std::string("methods: ") + to_string(kind) +
                                 " requires feedback = deterministic");
        }
    }
    return parsed;
}

ParsedConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        ParsedConfig parsed;
        parsed.errors.push_back("cannot open config file: " + path);
        return parsed;
    }
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_config_text(buffer.str());
}

std::string render_config(const ExperimentConfig& c) {
    std::ostringstream out;
    out.precision(17);
    out << "name=" << c.name << "\nagents=" << c.n_agents << "\nentitlements=";
    if (c.entitlements.empty()) out << "equal";
    else for (std::size_t i = 0; i < c.entitlements.size(); ++i)
        out << (i ? "," : "") << c.entitlements[i];
    out << "\nhorizon=" << c.horizon << "\nmethods=";
    if (c.methods.empty()) out << "all";
    else for (std::size_t i = 0; i < c.methods.size(); ++i)
        out << (i ? "," : "") << to_string(c.methods[i]);
    out << "\nfeedback=" << static_cast<int>(c.feedback)
        << "\npayoff=" << static_cast<int>(c.payoff) << "\nunit_demands=";
    if (c.unit_demands.empty()) out << "log_spaced";
    else for (std::size_t i = 0; i < c.unit_demands.size(); ++i)
        out << (i ? "," : "") << c.unit_demands[i];
    out << "\nunit_demand_lo=" << c.unit_demand_lo << "\nunit_demand_hi=" << c.unit_demand_hi
        << "\nthreshold=";
    for (std::size_t i = 0; i < c.thresholds.size(); ++i) out << (i ? "," : "") << c.thresholds[i];
    out << "\nunit_demand_cap=" << c.unit_demand_cap << "\nload_lo=" << c.load_lo
        << "\nload_hi=" << c.load_hi << "\nnoise_sigma=" << c.noise_sigma
        << "\nlipschitz=" << c.lipschitz << "\ntheta_min=" << c.glm_theta_min
        << "\nkappa=" << c.glm_kappa << "\nkappa_margin=" << c.glm_kappa_margin
        << "\ndelta=" << c.delta << "\nglm_beta_scale=" << c.glm_beta_scale
        << "\ntree_beta_scale=" << c.tree_beta_scale
        << "\nglm_literal_lower_clip=" << c.glm_literal_lower_clip << "\nruns=" << c.runs
        << "\nseed=" << c.seed << "\n";
    return out.str();
}

std::string config_digest(const ExperimentConfig& config) {
    const std::uint64_t h = detail::fnv1a(render_config(config));
    std::ostringstream out;
    out << std::hex << h;
    return out.str();
}

std::vector<AgentProfile> make_profiles(const ExperimentConfig& config) {
    const int n = config.n_agents;
    std::vector<double> demands = config.unit_demands;
    if (demands.empty()) {
        demands.resize(n);
        if (n == 1) {
            demands[0] = std::sqrt(config.unit_demand_lo * config.unit_demand_hi);
        } else {
            const double ratio = config.unit_demand_hi / config.unit_demand_lo;
            for (int i = 0; i < n; ++i)
                demands[i] = config.unit_demand_lo *
                             std::pow(ratio, static_cast<double>(i) / (n - 1));
        }
    }
    const double cap = config.unit_demand_cap > 0.0
                           ? config.unit_demand_cap
                           : 2.0 * *std::max_element(demands.begin(), demands.end());

    std::vector<AgentProfile> profiles(n);
    for (int i = 0; i < n; ++i) {
        AgentProfile& agent = profiles[i];
        agent.entitlement = config.entitlements.empty() ? 1.0 / n : config.entitlements[i];
        double alpha = 0.9;
        if (config.thresholds.size() == 1) alpha = config.thresholds[0];
        else if (!config.thresholds.empty()) alpha = config.thresholds[i];

        PayoffSpec& spec = agent.payoff;
        spec.kind = config.payoff;
        spec.unit_demand_cap = cap;
        const double w = demands[i];
        switch (config.payoff) {
            case PayoffKind::Tanh:
                spec.theta = std::atanh(alpha) / w;
                spec.threshold = alpha;
                break;
            case PayoffKind::Algebraic:
                spec.theta = alpha / (1.0 - alpha) / w;
                spec.threshold = alpha;
                break;
            case PayoffKind::Logistic:
                // Midpoint at 0.6x the unit demand; the threshold is wherever
                // the curve sits at the unit demand (the configured value is
                // unreachable for this family).
                spec.offset = 0.6 * w;
                spec.threshold = payoff_eval(spec, w);
                break;
        }
        spec.lipschitz = payoff_lipschitz_scale(spec);
        agent.utility_lipschitz = spec.lipschitz / cap;
    }
    return profiles;
}

SimulationConfig to_simulation_config(const ExperimentConfig& config) {
    SimulationConfig sim;
    sim.agents = make_profiles(config);
    sim.horizon = config.horizon;
    sim.feedback = config.feedback;
    sim.load_lo = config.load_lo;
    sim.load_hi = config.load_hi;
    sim.noise_sigma = config.noise_sigma;
    sim.unit_demand_cap = sim.agents.front().payoff.unit_demand_cap;
    sim.delta = config.delta;
    sim.glm_link = config.payoff == PayoffKind::Algebraic ? LinkKind::Algebraic : LinkKind::Tanh;
    sim.glm_beta_scale = config.glm_beta_scale;
    sim.glm_literal_lower_clip = config.glm_literal_lower_clip;
    sim.tree_beta_scale = config.tree_beta_scale;
    sim.base_seed = config.seed;
    sim.config_digest = config_digest(config);

    double theta_min = config.glm_theta_min;
    if (theta_min <= 0.0) {
        theta_min = std::numeric_limits<double>::infinity();
        for (const auto& agent : sim.agents)
            theta_min = std::min(theta_min, link_inverse(sim.glm_link, agent.payoff.threshold) /
                                                sim.unit_demand_cap);
    }
    sim.glm_theta_min = theta_min;

    if (config.glm_kappa > 0.0) {
        sim.glm_kappa = config.glm_kappa;
    } else {
        sim.glm_kappa_per_agent.clear();
        for (const auto& agent : sim.agents) {
            const double z = config.glm_kappa_margin *
                             link_inverse(sim.glm_link, agent.payoff.threshold);
            sim.glm_kappa_per_agent.push_back(link_deriv(sim.glm_link, z));
        }
    }

    double lipschitz = config.lipschitz;
    if (lipschitz <= 0.0) {
        lipschitz = 0.0;
        for (const auto& agent : sim.agents)
            lipschitz = std::max(lipschitz, agent.payoff.lipschitz);
    }
    sim.tree_lipschitz = lipschitz;
    return sim;
}

std::vector<MechanismKind> methods_to_run(const ExperimentConfig& config) {
    if (!config.methods.empty()) return config.methods;
    return {MechanismKind::Entitlement, MechanismKind::DetSpGrid,  MechanismKind::DetSpBisect,
            MechanismKind::DetNspBisect, MechanismKind::GlmSp,     MechanismKind::GlmNsp,
            MechanismKind::TreeSp,       MechanismKind::TreeNsp};
}

FeedbackMode feedback_for(const ExperimentConfig& config, MechanismKind kind) {
    if (is_deterministic_only(kind) || kind == MechanismKind::Entitlement)
        return FeedbackMode::Deterministic;
    return config.feedback;
}

} // namespace fairshare
