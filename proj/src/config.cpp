#include "aggecon/config.hpp"

#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "aggecon/io.hpp"

namespace aggecon {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& what) {
    throw std::invalid_argument("config: " + path + ": " + what);
}

class Object {
public:
    Object(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) fail(path_, "expected an object");
    }

    const json* find(const std::string& key) {
        seen_.insert(key);
        const auto it = j_.find(key);
        return it == j_.end() ? nullptr : &*it;
    }

    const json& require(const std::string& key) {
        const json* v = find(key);
        if (!v) fail(path_ + "." + key, "missing required key");
        return *v;
    }

    double number(const std::string& key) { return as_number(require(key), key); }
    double number_or(const std::string& key, double fallback) {
        const json* v = find(key);
        return v ? as_number(*v, key) : fallback;
    }
    std::int64_t integer(const std::string& key) { return as_integer(require(key), key); }
    std::int64_t integer_or(const std::string& key, std::int64_t fallback) {
        const json* v = find(key);
        return v ? as_integer(*v, key) : fallback;
    }
    bool boolean_or(const std::string& key, bool fallback) {
        const json* v = find(key);
        if (!v) return fallback;
        if (!v->is_boolean()) fail(path_ + "." + key, "expected a boolean");
        return v->get<bool>();
    }
    std::string text(const std::string& key) {
        const json& v = require(key);
        if (!v.is_string()) fail(path_ + "." + key, "expected a string");
        return v.get<std::string>();
    }
    std::string text_or(const std::string& key, const std::string& fallback) {
        const json* v = find(key);
        if (!v) return fallback;
        if (!v->is_string()) fail(path_ + "." + key, "expected a string");
        return v->get<std::string>();
    }

    Object object(const std::string& key) { return {require(key), path_ + "." + key}; }

    // Call after all expected keys were touched.
    void reject_unknown() const {
        for (const auto& [key, value] : j_.items())
            if (!seen_.count(key)) fail(path_ + "." + key, "unknown key");
    }

    const std::string& path() const { return path_; }

private:
    double as_number(const json& v, const std::string& key) {
        if (!v.is_number()) fail(path_ + "." + key, "expected a number");
        return v.get<double>();
    }
    std::int64_t as_integer(const json& v, const std::string& key) {
        if (!v.is_number_integer()) fail(path_ + "." + key, "expected an integer");
        return v.get<std::int64_t>();
    }

    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

}  // namespace

RunConfig parse_run_config(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument(std::string("config: invalid JSON: ") + e.what());
    }

    Object root(j, "config");
    RunConfig cfg;

    {
        Object inv = root.object("invariants");
        cfg.invariants.n_aggregates = inv.integer("n_aggregates");
        cfg.invariants.n_agents = inv.integer("n_agents");
        cfg.invariants.total_money = inv.number("total_money");
        inv.reject_unknown();
    }
    {
        Object size = root.object("size_spec");
        const std::string kind = size.text("kind");
        if (kind == "fixed")
            cfg.size_spec.kind = SizeInitSpec::Kind::fixed;
        else if (kind == "normal")
            cfg.size_spec.kind = SizeInitSpec::Kind::normal;
        else
            fail(size.path() + ".kind", "expected \"fixed\" or \"normal\"");
        cfg.size_spec.mean = size.number("mean");
        cfg.size_spec.sigma_d = size.number_or("sigma_d", 0.0);
        size.reject_unknown();
    }
    cfg.wealth_per_agent = root.number("wealth_per_agent");
    {
        Object money = root.object("money_kernel");
        cfg.money_kernel.p_in = money.number("p_in");
        const std::string rule = money.text_or("rule", "split");
        if (rule == "split")
            cfg.money_kernel.rule = MoneyKernelSpec::Rule::split;
        else if (rule == "payer_share")
            cfg.money_kernel.rule = MoneyKernelSpec::Rule::payer_share;
        else
            fail(money.path() + ".rule", "expected \"split\" or \"payer_share\"");
        money.reject_unknown();
    }
    {
        Object mig = root.object("migration_kernel");
        const std::string mech = mig.text("mechanism");
        if (mech == "split")
            cfg.migration_kernel.mechanism = MigrationKernelSpec::Mechanism::split;
        else if (mech == "base")
            cfg.migration_kernel.mechanism = MigrationKernelSpec::Mechanism::base;
        else if (mech == "linear")
            cfg.migration_kernel.mechanism = MigrationKernelSpec::Mechanism::linear;
        else if (mech == "sublinear")
            cfg.migration_kernel.mechanism = MigrationKernelSpec::Mechanism::sublinear;
        else
            fail(mig.path() + ".mechanism",
                 "expected \"split\", \"base\", \"linear\" or \"sublinear\"");
        cfg.migration_kernel.n_hat0 = mig.integer_or("n_hat0", 0);
        cfg.migration_kernel.gamma = mig.number_or("gamma", 0.0);
        mig.reject_unknown();
    }
    cfg.steps = root.integer("steps");
    cfg.transactions_per_step = root.integer_or("transactions_per_step", 1);
    cfg.migrations_per_step = root.integer_or("migrations_per_step", 1);
    cfg.sample_every = root.integer_or("sample_every", 10);
    cfg.entropy_bin_width = root.number_or(
        "entropy_bin_width",
        cfg.invariants.total_money / (20.0 * static_cast<double>(std::max<std::int64_t>(
                                                 1, cfg.invariants.n_aggregates))));
    cfg.remove_empty = root.boolean_or("remove_empty", false);
    cfg.seed = static_cast<std::uint64_t>(root.integer("seed"));
    root.reject_unknown();

    cfg.validate();
    return cfg;
}

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open config file " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_run_config(buf.str());
}

std::string run_config_to_json(const RunConfig& config) {
    json j;
    j["invariants"] = {{"n_aggregates", config.invariants.n_aggregates},
                       {"n_agents", config.invariants.n_agents},
                       {"total_money", config.invariants.total_money}};
    j["size_spec"] = {
        {"kind", config.size_spec.kind == SizeInitSpec::Kind::fixed ? "fixed" : "normal"},
        {"mean", config.size_spec.mean},
        {"sigma_d", config.size_spec.sigma_d}};
    j["wealth_per_agent"] = config.wealth_per_agent;
    j["money_kernel"] = {
        {"p_in", config.money_kernel.p_in},
        {"rule", config.money_kernel.rule == MoneyKernelSpec::Rule::split ? "split"
                                                                          : "payer_share"}};
    const char* mech = nullptr;
    switch (config.migration_kernel.mechanism) {
        case MigrationKernelSpec::Mechanism::split: mech = "split"; break;
        case MigrationKernelSpec::Mechanism::base: mech = "base"; break;
        case MigrationKernelSpec::Mechanism::linear: mech = "linear"; break;
        case MigrationKernelSpec::Mechanism::sublinear: mech = "sublinear"; break;
    }
    j["migration_kernel"] = {{"mechanism", mech},
                             {"n_hat0", config.migration_kernel.n_hat0},
                             {"gamma", config.migration_kernel.gamma}};
    j["steps"] = config.steps;
    j["transactions_per_step"] = config.transactions_per_step;
    j["migrations_per_step"] = config.migrations_per_step;
    j["sample_every"] = config.sample_every;
    j["entropy_bin_width"] = config.entropy_bin_width;
    j["remove_empty"] = config.remove_empty;
    j["seed"] = static_cast<std::int64_t>(config.seed);
    return j.dump(2) + "\n";
}

std::string config_hash(const RunConfig& config) {
    return io::hex64(io::fnv1a(run_config_to_json(config)));
}

}  // namespace aggecon
