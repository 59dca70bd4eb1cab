#include "relbc/config.hpp"

#include <fstream>
#include <stdexcept>
#include <vector>

namespace relbc::config {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& field, const std::string& what) {
    throw std::invalid_argument("scenario config: field '" + field + "' " + what);
}

const json& require(const json& j, const std::string& path, const char* key) {
    if (!j.is_object()) fail(path.empty() ? "(root)" : path, "must be an object");
    auto it = j.find(key);
    if (it == j.end()) fail(path.empty() ? key : path + "." + key, "is required");
    return *it;
}

std::string join(const std::string& path, const char* key) {
    return path.empty() ? key : path + "." + key;
}

template <typename T>
T as(const json& j, const std::string& field);

template <>
bool as<bool>(const json& j, const std::string& field) {
    if (!j.is_boolean()) fail(field, "must be a boolean");
    return j.get<bool>();
}

template <>
double as<double>(const json& j, const std::string& field) {
    if (!j.is_number()) fail(field, "must be a number");
    return j.get<double>();
}

template <>
unsigned as<unsigned>(const json& j, const std::string& field) {
    if (!j.is_number_unsigned()) fail(field, "must be a non-negative integer");
    return j.get<unsigned>();
}

template <>
std::uint64_t as<std::uint64_t>(const json& j, const std::string& field) {
    if (!j.is_number_unsigned()) fail(field, "must be a non-negative integer");
    return j.get<std::uint64_t>();
}

template <>
int as<int>(const json& j, const std::string& field) {
    if (!j.is_number_integer()) fail(field, "must be an integer");
    return j.get<int>();
}

template <>
std::string as<std::string>(const json& j, const std::string& field) {
    if (!j.is_string()) fail(field, "must be a string");
    return j.get<std::string>();
}

template <typename T>
void read_opt(const json& j, const std::string& path, const char* key, T& out) {
    if (!j.is_object()) return;
    auto it = j.find(key);
    if (it != j.end()) out = as<T>(*it, join(path, key));
}

bitmath::BitString parse_bits(const json& j, const std::string& field) {
    const std::string text = as<std::string>(j, field);
    try {
        return bitmath::BitString::parse(text);
    } catch (const std::exception& e) {
        fail(field, std::string("is not a bit string: ") + e.what());
    }
}

json point_to_json(const geometry::SpacetimePoint& p) {
    return json::array({p.t, p.x, p.y, p.z});
}

geometry::SpacetimePoint point_from_json(const json& j, const std::string& field) {
    if (!j.is_array() || j.size() != 4) fail(field, "must be an array [t, x, y, z]");
    geometry::SpacetimePoint p;
    p.t = as<double>(j[0], field + "[0]");
    p.x = as<double>(j[1], field + "[1]");
    p.y = as<double>(j[2], field + "[2]");
    p.z = as<double>(j[3], field + "[3]");
    return p;
}

const char* flow_name(harness::Flow f) {
    switch (f) {
        case harness::Flow::Single: return "single";
        case harness::Flow::Dual: return "dual";
        case harness::Flow::MemoryReuse: return "memory-reuse";
    }
    return "single";
}

harness::Flow flow_from_name(const std::string& name, const std::string& field) {
    if (name == "single") return harness::Flow::Single;
    if (name == "dual") return harness::Flow::Dual;
    if (name == "memory-reuse") return harness::Flow::MemoryReuse;
    fail(field, "must be one of single|dual|memory-reuse");
}

const char* placement_name(protocols::VerifierPlacement p) {
    switch (p) {
        case protocols::VerifierPlacement::EarliestJoint: return "earliest-joint";
        case protocols::VerifierPlacement::CommitSite: return "commit-site";
        case protocols::VerifierPlacement::UnveilSite: return "unveil-site";
    }
    return "earliest-joint";
}

protocols::VerifierPlacement placement_from_name(const std::string& name,
                                                 const std::string& field) {
    if (name == "earliest-joint") return protocols::VerifierPlacement::EarliestJoint;
    if (name == "commit-site") return protocols::VerifierPlacement::CommitSite;
    if (name == "unveil-site") return protocols::VerifierPlacement::UnveilSite;
    fail(field, "must be one of earliest-joint|commit-site|unveil-site");
}

const char* output_name(quantum::OutputExpr e) {
    switch (e) {
        case quantum::OutputExpr::Honest: return "honest";
        case quantum::OutputExpr::Zero: return "zero";
        case quantum::OutputExpr::One: return "one";
        case quantum::OutputExpr::Setting: return "setting";
        case quantum::OutputExpr::Memory: return "memory";
        case quantum::OutputExpr::SharedBit: return "shared-bit";
        case quantum::OutputExpr::InferredX: return "inferred-x";
    }
    return "honest";
}

quantum::OutputExpr output_from_name(const std::string& name, const std::string& field) {
    if (name == "honest") return quantum::OutputExpr::Honest;
    if (name == "zero") return quantum::OutputExpr::Zero;
    if (name == "one") return quantum::OutputExpr::One;
    if (name == "setting") return quantum::OutputExpr::Setting;
    if (name == "memory") return quantum::OutputExpr::Memory;
    if (name == "shared-bit") return quantum::OutputExpr::SharedBit;
    if (name == "inferred-x") return quantum::OutputExpr::InferredX;
    fail(field, "must be one of honest|zero|one|setting|memory|shared-bit|inferred-x");
}

const char* memory_name(quantum::MemoryExpr e) {
    switch (e) {
        case quantum::MemoryExpr::Keep: return "keep";
        case quantum::MemoryExpr::Clear: return "clear";
        case quantum::MemoryExpr::StoreSetting: return "store-setting";
        case quantum::MemoryExpr::StoreInferredX: return "store-inferred-x";
    }
    return "keep";
}

quantum::MemoryExpr memory_from_name(const std::string& name, const std::string& field) {
    if (name == "keep") return quantum::MemoryExpr::Keep;
    if (name == "clear") return quantum::MemoryExpr::Clear;
    if (name == "store-setting") return quantum::MemoryExpr::StoreSetting;
    if (name == "store-inferred-x") return quantum::MemoryExpr::StoreInferredX;
    fail(field, "must be one of keep|clear|store-setting|store-inferred-x");
}

json device_to_json(const quantum::DeviceSpec& spec) {
    json j;
    j["kind"] = spec.kind == quantum::DeviceKind::Malicious ? "malicious" : "honest";
    j["delta"] = spec.delta;
    j["loss_fraction"] = spec.loss_fraction;
    json rules = json::array();
    for (const auto& rule : spec.program.rules) {
        json r;
        if (rule.when.near_point) {
            r["near"] = point_to_json(*rule.when.near_point);
            r["radius"] = rule.when.near_radius;
        }
        if (rule.when.setting_is) r["setting_is"] = *rule.when.setting_is;
        if (rule.when.memory_is) r["memory_is"] = *rule.when.memory_is;
        r["output"] = output_name(rule.output);
        r["memory"] = memory_name(rule.memory);
        rules.push_back(std::move(r));
    }
    j["rules"] = std::move(rules);
    return j;
}

quantum::DeviceSpec device_from_json(const json& j, const std::string& path) {
    if (!j.is_object()) fail(path, "must be an object");
    quantum::DeviceSpec spec;
    std::string kind = "honest";
    read_opt(j, path, "kind", kind);
    if (kind == "honest") {
        spec.kind = quantum::DeviceKind::HonestSinglet;
    } else if (kind == "malicious") {
        spec.kind = quantum::DeviceKind::Malicious;
    } else {
        fail(join(path, "kind"), "must be honest|malicious");
    }
    read_opt(j, path, "delta", spec.delta);
    read_opt(j, path, "loss_fraction", spec.loss_fraction);
    if (auto it = j.find("rules"); it != j.end()) {
        const std::string rules_path = join(path, "rules");
        if (!it->is_array()) fail(rules_path, "must be an array");
        for (std::size_t k = 0; k < it->size(); ++k) {
            const json& rj = (*it)[k];
            const std::string rpath = rules_path + "[" + std::to_string(k) + "]";
            if (!rj.is_object()) fail(rpath, "must be an object");
            quantum::DeviceRule rule;
            if (auto nit = rj.find("near"); nit != rj.end()) {
                rule.when.near_point = point_from_json(*nit, rpath + ".near");
                rule.when.near_radius = 0.0;
                read_opt(rj, rpath, "radius", rule.when.near_radius);
            }
            if (auto sit = rj.find("setting_is"); sit != rj.end()) {
                rule.when.setting_is = as<int>(*sit, rpath + ".setting_is");
            }
            if (auto mit = rj.find("memory_is"); mit != rj.end()) {
                if (!mit->is_number_integer()) fail(rpath + ".memory_is", "must be an integer");
                rule.when.memory_is = mit->get<std::int64_t>();
            }
            std::string out = "honest";
            std::string mem = "keep";
            read_opt(rj, rpath, "output", out);
            read_opt(rj, rpath, "memory", mem);
            rule.output = output_from_name(out, rpath + ".output");
            rule.memory = memory_from_name(mem, rpath + ".memory");
            spec.program.rules.push_back(std::move(rule));
        }
    }
    return spec;
}

json protocol_to_json(const protocols::ProtocolConfig& cfg) {
    json j;
    j["variant"] = protocols::variant_name(cfg.variant);
    j["dual"] = cfg.dual;
    j["n"] = cfg.n;
    j["xi"] = cfg.xi;
    j["c_param"] = cfg.c_param;
    j["delta"] = cfg.delta;
    j["loss_fraction"] = cfg.loss_fraction;
    j["seed"] = cfg.seed;
    j["travel_speed"] = cfg.travel_speed;
    j["placement"] = placement_name(cfg.placement);
    if (cfg.l0) j["l0"] = cfg.l0->str();
    j["layout"] = {{"commit", point_to_json(cfg.layout.commit_point)},
                   {"unveil0", point_to_json(cfg.layout.unveil_points[0])},
                   {"unveil1", point_to_json(cfg.layout.unveil_points[1])}};
    return j;
}

protocols::ProtocolConfig protocol_from_json(const json& j, const std::string& path) {
    if (!j.is_object()) fail(path, "must be an object");
    protocols::ProtocolConfig cfg;
    if (auto it = j.find("variant"); it != j.end()) {
        const std::string name = as<std::string>(*it, join(path, "variant"));
        try {
            cfg.variant = protocols::variant_from_name(name);
        } catch (const std::exception&) {
            fail(join(path, "variant"), "must be one of chsh1|chsh2|chsh3|rccbc");
        }
    }
    read_opt(j, path, "dual", cfg.dual);
    read_opt(j, path, "n", cfg.n);
    read_opt(j, path, "xi", cfg.xi);
    read_opt(j, path, "c_param", cfg.c_param);
    read_opt(j, path, "delta", cfg.delta);
    read_opt(j, path, "loss_fraction", cfg.loss_fraction);
    read_opt(j, path, "seed", cfg.seed);
    read_opt(j, path, "travel_speed", cfg.travel_speed);
    if (auto it = j.find("placement"); it != j.end()) {
        cfg.placement = placement_from_name(as<std::string>(*it, join(path, "placement")),
                                            join(path, "placement"));
    }
    if (auto it = j.find("l0"); it != j.end()) {
        cfg.l0 = parse_bits(*it, join(path, "l0"));
    }
    if (auto it = j.find("layout"); it != j.end()) {
        const std::string lpath = join(path, "layout");
        cfg.layout.commit_point = point_from_json(require(*it, lpath, "commit"), lpath + ".commit");
        cfg.layout.unveil_points[0] =
            point_from_json(require(*it, lpath, "unveil0"), lpath + ".unveil0");
        cfg.layout.unveil_points[1] =
            point_from_json(require(*it, lpath, "unveil1"), lpath + ".unveil1");
    }
    return cfg;
}

json alice_to_json(const harness::AliceBehavior& alice) {
    json j;
    if (alice.commit_bit) {
        j["commit_bit"] = *alice.commit_bit;
    } else {
        j["commit_bit"] = nullptr;
    }
    j["unveil0"] = alice.unveil0;
    j["unveil1"] = alice.unveil1;
    j["invoke_without_unveil"] = alice.invoke_without_unveil;
    if (alice.chsh_strategy) {
        json responses = json::array();
        for (const auto& r : alice.chsh_strategy->response) responses.push_back(r.str());
        j["chsh_strategy"] = {{"d", alice.chsh_strategy->d_offset.str()},
                              {"response", std::move(responses)}};
    }
    if (alice.rccbc_strategy) {
        j["rccbc_strategy"] = {{"s0", alice.rccbc_strategy->s0_full.str()},
                               {"s1", alice.rccbc_strategy->s1_full.str()}};
    }
    return j;
}

harness::AliceBehavior alice_from_json(const json& j, const std::string& path) {
    if (!j.is_object()) fail(path, "must be an object");
    harness::AliceBehavior alice;
    if (auto it = j.find("commit_bit"); it != j.end()) {
        if (it->is_null()) {
            alice.commit_bit.reset();
        } else {
            const int bit = as<int>(*it, join(path, "commit_bit"));
            if (bit != 0 && bit != 1) fail(join(path, "commit_bit"), "must be 0, 1, or null");
            alice.commit_bit = bit;
        }
    }
    read_opt(j, path, "unveil0", alice.unveil0);
    read_opt(j, path, "unveil1", alice.unveil1);
    read_opt(j, path, "invoke_without_unveil", alice.invoke_without_unveil);
    if (auto it = j.find("chsh_strategy"); it != j.end()) {
        const std::string spath = join(path, "chsh_strategy");
        adversary::ReducedStrategy strat;
        strat.d_offset = parse_bits(require(*it, spath, "d"), spath + ".d");
        const json& resp = require(*it, spath, "response");
        if (!resp.is_array()) fail(spath + ".response", "must be an array of bit strings");
        for (std::size_t k = 0; k < resp.size(); ++k) {
            strat.response.push_back(
                parse_bits(resp[k], spath + ".response[" + std::to_string(k) + "]"));
        }
        alice.chsh_strategy = std::move(strat);
    }
    if (auto it = j.find("rccbc_strategy"); it != j.end()) {
        const std::string spath = join(path, "rccbc_strategy");
        adversary::RccbcStrategy strat;
        strat.s0_full = parse_bits(require(*it, spath, "s0"), spath + ".s0");
        strat.s1_full = parse_bits(require(*it, spath, "s1"), spath + ".s1");
        alice.rccbc_strategy = std::move(strat);
    }
    return alice;
}

}  // namespace

json scenario_to_json(const harness::Scenario& scenario) {
    json j;
    j["name"] = scenario.name;
    j["flow"] = flow_name(scenario.flow);
    j["coordinated"] = scenario.coordinated;
    j["repeat"] = scenario.repeat;
    j["randomize_commit_bit"] = scenario.randomize_commit_bit;
    j["randomize_decline"] = scenario.randomize_decline;
    j["config"] = protocol_to_json(scenario.config);
    j["alice"] = alice_to_json(scenario.alice);
    if (scenario.a_side_override || scenario.b_side_override) {
        json devices;
        if (scenario.a_side_override) devices["a_side"] = device_to_json(*scenario.a_side_override);
        if (scenario.b_side_override) devices["b_side"] = device_to_json(*scenario.b_side_override);
        j["devices"] = std::move(devices);
    }
    return j;
}

harness::Scenario scenario_from_json(const json& j) {
    if (!j.is_object()) fail("(root)", "must be an object");
    harness::Scenario sc;
    read_opt(j, "", "name", sc.name);
    if (auto it = j.find("flow"); it != j.end()) {
        sc.flow = flow_from_name(as<std::string>(*it, "flow"), "flow");
    }
    read_opt(j, "", "coordinated", sc.coordinated);
    read_opt(j, "", "repeat", sc.repeat);
    read_opt(j, "", "randomize_commit_bit", sc.randomize_commit_bit);
    read_opt(j, "", "randomize_decline", sc.randomize_decline);
    if (auto it = j.find("config"); it != j.end()) {
        sc.config = protocol_from_json(*it, "config");
    }
    if (auto it = j.find("alice"); it != j.end()) {
        sc.alice = alice_from_json(*it, "alice");
    }
    if (auto it = j.find("devices"); it != j.end()) {
        if (!it->is_object()) fail("devices", "must be an object");
        if (auto a = it->find("a_side"); a != it->end()) {
            sc.a_side_override = device_from_json(*a, "devices.a_side");
        }
        if (auto b = it->find("b_side"); b != it->end()) {
            sc.b_side_override = device_from_json(*b, "devices.b_side");
        }
    }
    return sc;
}

harness::Scenario load_scenario_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open scenario file: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw std::invalid_argument("scenario file " + path + ": " + e.what());
    }
    return scenario_from_json(j);
}

void save_scenario_file(const harness::Scenario& scenario, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write scenario file: " + path);
    out << scenario_to_json(scenario).dump(2) << '\n';
    if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace relbc::config
