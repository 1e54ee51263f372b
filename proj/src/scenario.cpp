#include "ctm/scenario.hpp"

#include <fstream>
#include <map>
#include <sstream>

namespace ctm {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& message) {
    throw ScenarioError(path + ": " + message);
}

const json* find(const json& obj, const char* key) {
    const auto it = obj.find(key);
    return it == obj.end() ? nullptr : &*it;
}

template <class T>
T get(const json& obj, const std::string& path, const char* key, T fallback) {
    const json* v = find(obj, key);
    if (!v) return fallback;
    try {
        return v->get<T>();
    } catch (const json::exception&) {
        fail(path + "." + key, "has the wrong type");
    }
}

template <class T>
T require(const json& obj, const std::string& path, const char* key) {
    if (!find(obj, key)) fail(path + "." + key, "is required");
    return get<T>(obj, path, key, T{});
}

Tick tick_field(const json& obj, const std::string& path, const char* key, std::optional<Tick> fallback = {}) {
    const json* v = find(obj, key);
    if (!v) {
        if (fallback) return *fallback;
        fail(path + "." + key, "is required");
    }
    if (!v->is_number_integer() || v->get<std::int64_t>() < 0) fail(path + "." + key, "must be a nonnegative integer");
    return v->get<Tick>();
}

void require_object(const json& v, const std::string& path) {
    if (!v.is_object()) fail(path, "must be an object");
}

void require_array(const json& v, const std::string& path) {
    if (!v.is_array()) fail(path, "must be an array");
}

void reject_unknown(const json& obj, const std::string& path, std::initializer_list<const char*> known) {
    for (const auto& [k, _] : obj.items()) {
        bool ok = false;
        for (const char* name : known) ok = ok || k == name;
        if (!ok) fail(path + "." + k, "unknown field");
    }
}

/// A gist is either a bare payload string or {payload, modality, label}.
Gist parse_gist(const json& v, const std::string& path, const json* label_override = nullptr,
                const json* modality_override = nullptr) {
    std::string payload;
    std::string label;
    std::string modality = "speech";
    if (v.is_string()) {
        payload = v.get<std::string>();
    } else if (v.is_object()) {
        reject_unknown(v, path, {"payload", "modality", "label"});
        payload = require<std::string>(v, path, "payload");
        modality = get<std::string>(v, path, "modality", modality);
        label = get<std::string>(v, path, "label", label);
    } else {
        fail(path, "must be a string or an object");
    }
    if (label_override) label = label_override->get<std::string>();
    if (modality_override) modality = modality_override->get<std::string>();
    if (payload.empty()) fail(path, "payload must be non-empty");
    try {
        return Gist::make(payload, modality_from_string(modality), label);
    } catch (const Error& e) {
        fail(path, e.what());
    }
}

class AddressBook {
public:
    void add(const std::string& name, Address a, const std::string& path) {
        if (!names_.emplace(name, a).second) fail(path, "duplicate processor name '" + name + "'");
    }

    Address resolve(const json& v, const std::string& path, std::size_t n) const {
        if (v.is_string()) {
            const auto it = names_.find(v.get<std::string>());
            if (it == names_.end()) fail(path, "unknown processor '" + v.get<std::string>() + "'");
            return it->second;
        }
        if (!v.is_number_integer() || v.get<std::int64_t>() < 0 || v.get<std::uint64_t>() >= n) {
            fail(path, "must be a processor name or an address in [0, " + std::to_string(n) + ")");
        }
        return Address{v.get<std::uint32_t>()};
    }

private:
    std::map<std::string, Address> names_;
};

/// Expands {"every": k, "repeat": n} into n copies shifted by i*k.
template <class Fn>
void for_each_repeat(const json& entry, const std::string& path, Fn&& fn) {
    const Tick every = tick_field(entry, path, "every", Tick{0});
    const Tick repeat = tick_field(entry, path, "repeat", Tick{1});
    if (repeat > 1 && every == 0) fail(path + ".every", "must be positive when repeat > 1");
    for (Tick i = 0; i < repeat; ++i) fn(i * every);
}

void parse_machine(const json& m, MachineConfig& cfg) {
    const std::string path = "machine";
    require_object(m, path);
    reject_unknown(m, path,
                   {"lifetime", "mode", "f", "c", "iota", "delta", "link_threshold", "seed", "gist_size_limit_bits",
                    "leaf_order"});
    cfg.lifetime = tick_field(m, path, "lifetime");
    try {
        cfg.mode = competition_mode_from_string(get<std::string>(m, path, "mode", "det"));
    } catch (const Error& e) {
        fail(path + ".mode", e.what());
    }
    try {
        const auto kind = function_kind_from_string(get<std::string>(m, path, "f", "intensity"));
        switch (kind) {
        case CompetitionFunction::Kind::intensity: cfg.f = CompetitionFunction::intensity(); break;
        case CompetitionFunction::Kind::intensity_plus_c_mood:
            cfg.f = CompetitionFunction::intensity_plus_c_mood(require<double>(m, path, "c"));
            break;
        case CompetitionFunction::Kind::abs_mood: cfg.f = CompetitionFunction::abs_mood(); break;
        }
    } catch (const ScenarioError&) {
        throw;
    } catch (const Error& e) {
        fail(path + ".f", e.what());
    }
    cfg.iota = get<double>(m, path, "iota", cfg.iota);
    cfg.delta = get<double>(m, path, "delta", cfg.delta);
    cfg.link_threshold = get<std::uint32_t>(m, path, "link_threshold", cfg.link_threshold);
    cfg.seed = get<std::uint64_t>(m, path, "seed", cfg.seed);
    cfg.gist_size_limit_bits = get<std::size_t>(m, path, "gist_size_limit_bits", cfg.gist_size_limit_bits);
}

void parse_processors(const json& ps, MachineConfig& cfg, AddressBook& book) {
    require_array(ps, "processors");
    std::map<std::uint32_t, std::string> seen;
    for (std::size_t i = 0; i < ps.size(); ++i) {
        const std::string path = "processors[" + std::to_string(i) + "]";
        const json& p = ps[i];
        require_object(p, path);
        reject_unknown(p, path,
                       {"address", "name", "kind", "params", "intensity_power", "competes", "leaf",
                        "lighter_demotion_when_outvoted", "lighter_demote_factor"});
        ProcessorDecl d;
        d.address = Address{get<std::uint32_t>(p, path, "address", static_cast<std::uint32_t>(i))};
        if (d.address.id >= ps.size()) {
            fail(path + ".address", "must lie in [0, " + std::to_string(ps.size()) + ")");
        }
        if (const auto [it, fresh] = seen.emplace(d.address.id, path); !fresh) {
            fail(path + ".address", "duplicate address " + std::to_string(d.address.id) + " (also " + it->second + ")");
        }
        d.kind = require<std::string>(p, path, "kind");
        if (const json* params = find(p, "params")) {
            require_object(*params, path + ".params");
            d.params = *params;
        }
        d.intensity_power = get<double>(p, path, "intensity_power", 1.0);
        d.competes = get<bool>(p, path, "competes", true);
        d.policy.lighter_demotion_when_outvoted = get<bool>(p, path, "lighter_demotion_when_outvoted", false);
        d.policy.lighter_demote_factor = get<double>(p, path, "lighter_demote_factor", 1.0);
        if (const json* name = find(p, "name")) {
            if (!name->is_string()) fail(path + ".name", "must be a string");
            book.add(name->get<std::string>(), d.address, path + ".name");
        }
        if (find(p, "leaf")) {
            if (cfg.leaf_order.empty()) cfg.leaf_order.assign(ps.size(), UINT32_MAX);
            cfg.leaf_order[d.address.id] = get<std::uint32_t>(p, path, "leaf", 0);
        }
        cfg.processors.push_back(std::move(d));
    }
    if (!cfg.leaf_order.empty()) {
        for (std::size_t i = 0; i < ps.size(); ++i) {
            if (!find(ps[i], "leaf")) fail("processors[" + std::to_string(i) + "].leaf", "needed when any processor sets a leaf");
        }
    }
}

void parse_environment(const json& e, const MachineConfig& cfg, const AddressBook& book, EnvironmentScript& env) {
    require_object(e, "environment");
    reject_unknown(e, "environment", {"sensor_events", "judgments", "actuator_expectations"});
    const std::size_t n = cfg.processor_count();

    if (const json* events = find(e, "sensor_events")) {
        require_array(*events, "environment.sensor_events");
        for (std::size_t i = 0; i < events->size(); ++i) {
            const std::string path = "environment.sensor_events[" + std::to_string(i) + "]";
            const json& ev = (*events)[i];
            require_object(ev, path);
            reject_unknown(ev, path, {"t", "target", "gist", "label", "modality", "weight", "every", "repeat"});
            const Tick t0 = tick_field(ev, path, "t");
            if (!find(ev, "target")) fail(path + ".target", "is required");
            const Address target = book.resolve(ev.at("target"), path + ".target", n);
            if (!find(ev, "gist")) fail(path + ".gist", "is required");
            const Gist gist = parse_gist(ev.at("gist"), path + ".gist", find(ev, "label"), find(ev, "modality"));
            const double weight = get<double>(ev, path, "weight", 1.0);
            for_each_repeat(ev, path, [&](Tick shift) { env.sensor_events.push_back({t0 + shift, target, gist, weight}); });
        }
    }

    if (const json* judgments = find(e, "judgments")) {
        require_array(*judgments, "environment.judgments");
        for (std::size_t i = 0; i < judgments->size(); ++i) {
            const std::string path = "environment.judgments[" + std::to_string(i) + "]";
            const json& jv = (*judgments)[i];
            require_object(jv, path);
            reject_unknown(jv, path,
                           {"at", "delay", "target", "about", "truth", "stm_was_right", "p_was_right", "correction",
                            "every", "repeat"});
            Judgment j;
            if (!find(jv, "target")) fail(path + ".target", "is required");
            j.target = book.resolve(jv.at("target"), path + ".target", n);
            j.about = tick_field(jv, path, "about");
            if (find(jv, "at") && find(jv, "delay")) fail(path, "give either 'at' or 'delay', not both");
            j.at = find(jv, "delay") ? j.about + tick_field(jv, path, "delay") : tick_field(jv, path, "at");
            if (const json* truth = find(jv, "truth")) j.truth = parse_gist(*truth, path + ".truth");
            if (find(jv, "stm_was_right")) j.stm_was_right = require<bool>(jv, path, "stm_was_right");
            if (find(jv, "p_was_right")) j.p_was_right = require<bool>(jv, path, "p_was_right");
            if (const json* correction = find(jv, "correction")) j.correction = parse_gist(*correction, path + ".correction");
            for_each_repeat(jv, path, [&](Tick shift) {
                Judgment copy = j;
                copy.at += shift;
                copy.about += shift;
                env.judgments.push_back(std::move(copy));
            });
        }
    }

    if (const json* expectations = find(e, "actuator_expectations")) {
        require_array(*expectations, "environment.actuator_expectations");
        for (std::size_t i = 0; i < expectations->size(); ++i) {
            const std::string path = "environment.actuator_expectations[" + std::to_string(i) + "]";
            const json& xv = (*expectations)[i];
            require_object(xv, path);
            reject_unknown(xv, path, {"t", "command"});
            env.actuator_expectations.push_back({tick_field(xv, path, "t"), require<std::string>(xv, path, "command")});
        }
    }
}

std::size_t line_of(const std::string& text, std::size_t byte) {
    std::size_t line = 1;
    for (std::size_t i = 0; i < std::min(byte, text.size()); ++i) line += text[i] == '\n';
    return line;
}

} // namespace

Scenario parse_scenario_text(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text, nullptr, true, /*ignore_comments=*/true);
    } catch (const json::parse_error& e) {
        throw ScenarioError("line " + std::to_string(line_of(text, e.byte)) + ": " + e.what());
    }
    if (!doc.is_object()) throw ScenarioError("scenario must be a JSON object");
    reject_unknown(doc, "scenario", {"machine", "processors", "environment", "description"});
    if (!find(doc, "machine")) fail("machine", "section is required");
    if (!find(doc, "processors")) fail("processors", "section is required");

    Scenario s;
    AddressBook book;
    parse_machine(doc.at("machine"), s.config);
    parse_processors(doc.at("processors"), s.config, book);
    try {
        s.config.validate();
    } catch (const EmptyMachine&) {
        throw;
    } catch (const ConfigError& e) {
        throw ScenarioError(std::string("machine: ") + e.what());
    }
    if (const json* env = find(doc, "environment")) parse_environment(*env, s.config, book, s.env);
    try {
        TreeShape::balanced(s.config.processor_count(), s.config.leaf_order);
        s.env.validate(s.config);
        for (const auto& d : s.config.processors) BehaviorRegistry::with_builtins().create(d.kind, d.params);
    } catch (const ScenarioError&) {
        throw;
    } catch (const Error& e) {
        throw ScenarioError(e.what());
    }
    return s;
}

Scenario parse_scenario(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ScenarioError("cannot open scenario file " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    try {
        return parse_scenario_text(buf.str());
    } catch (const EmptyMachine&) {
        throw;
    } catch (const ScenarioError& e) {
        throw ScenarioError(path.string() + ": " + e.what());
    }
}

} // namespace ctm
