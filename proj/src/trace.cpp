#include "ctm/trace.hpp"

#include <istream>
#include <ostream>

namespace ctm {

namespace {

std::string_view to_string(InterruptTransition tr) {
    switch (tr) {
    case InterruptTransition::interrupted: return "interrupted";
    case InterruptTransition::resumed: return "resumed";
    case InterruptTransition::none: break;
    }
    return "none";
}

nlohmann::ordered_json addresses(const std::vector<Address>& as) {
    auto arr = nlohmann::ordered_json::array();
    for (Address a : as) arr.push_back(a.id);
    return arr;
}

void count(RunCounters& c, const std::string& kind) {
    ++c.records;
    ++c.records_by_kind[kind];
}

void count_stm(RunCounters& c, bool nil, std::uint32_t address, double mood, double intensity) {
    ++c.ticks;
    c.mood.push_back(mood);
    c.intensity.push_back(intensity);
    if (nil) {
        ++c.nil_stm;
    } else {
        ++c.stm_wins[address];
    }
}

} // namespace

nlohmann::ordered_json to_json(const TraceRecord& r) {
    nlohmann::ordered_json j;
    j["tick"] = r.tick;
    j["kind"] = r.kind;
    if (r.chunk) {
        j["address"] = r.chunk->address.id;
        j["t"] = r.chunk->t;
        j["gist_label"] = r.chunk->gist.label();
        j["modality"] = std::string(to_string(r.chunk->gist.modality()));
        j["weight"] = r.chunk->weight;
        j["intensity"] = r.chunk->intensity;
        j["mood"] = r.chunk->mood;
    }
    for (const auto& [k, v] : r.aux.items()) j[k] = v;
    return j;
}

std::string to_line(const TraceRecord& r) { return to_json(r).dump(); }

std::vector<TraceRecord> records_for(const TickReport& rep) {
    using oj = nlohmann::ordered_json;
    std::vector<TraceRecord> out;
    const Tick t = rep.t;
    if (rep.delivered_broadcast) out.push_back({t, "broadcast", rep.delivered_broadcast, oj::object()});
    for (const auto& e : rep.interrupts) {
        out.push_back({t, "interrupt", std::nullopt,
                       oj{{"processor", e.processor.id},
                          {"transition", std::string(to_string(e.transition))},
                          {"stack_depth", e.stack_depth}}});
    }
    for (const auto& e : rep.acks) {
        out.push_back({t, "link_ack", std::nullopt,
                       oj{{"from", e.from.id},
                          {"originator", e.originator.id},
                          {"count", e.result.count},
                          {"active", e.result.active}}});
    }
    for (const auto& e : rep.feedback) {
        oj aux{{"processor", e.processor.id},
               {"about", e.feedback.t},
               {"stm_was_right", e.feedback.stm_was_right},
               {"p_was_right", e.feedback.p_was_right},
               {"outcome", std::string(to_string(e.outcome))},
               {"power_before", e.power_before},
               {"power_after", e.power_after}};
        out.push_back({t, "feedback", std::nullopt, std::move(aux)});
    }
    for (const auto& c : rep.submissions) out.push_back({t, "submission", c, oj::object()});
    for (const auto& s : rep.link_sends) {
        out.push_back({t, "link_send", s.chunk, oj{{"recipients", addresses(s.recipients)}}});
    }
    for (const auto& w : rep.warnings) out.push_back({t, "warning", std::nullopt, oj{{"message", w}}});
    out.push_back({t, "stm", rep.stm, oj::object()});
    if (rep.actuator) {
        out.push_back({t, "actuator", std::nullopt,
                       oj{{"originator", rep.actuator->originator.id}, {"command", rep.actuator->command}}});
    }
    return out;
}

void TraceSink::emit(const TraceRecord& r) {
    if (last_tick_ && r.tick < *last_tick_) {
        throw ContractViolation("trace record for tick " + std::to_string(r.tick) + " after tick " +
                                std::to_string(*last_tick_));
    }
    if (out_) {
        *out_ << to_line(r) << '\n';
        if (!*out_) {
            const long long last_done = r.tick == 0 ? -1 : static_cast<long long>(r.tick) - 1;
            throw RunError("trace write failed at tick " + std::to_string(r.tick), last_done);
        }
    }
    last_tick_ = r.tick;
    ++lines_;
}

void TraceSink::flush() {
    if (!out_) return;
    out_->flush();
    if (!*out_) {
        throw RunError("trace flush failed", last_tick_ ? static_cast<long long>(*last_tick_) : -1);
    }
}

RunResult run(const MachineConfig& config, const EnvironmentScript& env, Tick until, std::ostream* out,
              bool keep_records) {
    if (until > config.lifetime) {
        throw ConfigError("run length " + std::to_string(until) + " exceeds lifetime " + std::to_string(config.lifetime));
    }
    Ctm machine(config, env);
    TraceSink sink(out);
    RunResult result;
    for (Tick i = 0; i < until; ++i) {
        const TickReport rep = machine.tick();
        for (auto& r : records_for(rep)) {
            sink.emit(r);
            count(result.counters, r.kind);
            if (keep_records) result.records.push_back(std::move(r));
        }
        count_stm(result.counters, rep.stm.is_nil(), rep.stm.address.id, rep.stm.mood, rep.stm.intensity);
    }
    sink.flush();
    result.unmet_expectations = machine.unmet_actuator_expectations();
    return result;
}

RunCounters counters_from_trace(std::istream& in) {
    RunCounters c;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        try {
            const auto j = nlohmann::json::parse(line);
            const std::string kind = j.at("kind").get<std::string>();
            count(c, kind);
            if (kind == "stm") {
                count_stm(c, j.at("modality").get<std::string>() == "nil", j.at("address").get<std::uint32_t>(),
                          j.at("mood").get<double>(), j.at("intensity").get<double>());
            }
        } catch (const nlohmann::json::exception& e) {
            throw ScenarioError("trace line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    return c;
}

void write_series_csv(std::ostream& out, const RunCounters& c) {
    out << "tick,mood,intensity\n";
    for (std::size_t t = 0; t < c.mood.size(); ++t) {
        out << t << ',' << nlohmann::json(c.mood[t]).dump() << ',' << nlohmann::json(c.intensity[t]).dump() << '\n';
    }
}

void write_shares_csv(std::ostream& out, const RunCounters& c) {
    out << "address,wins,share\n";
    const double total = static_cast<double>(c.ticks);
    for (const auto& [a, wins] : c.stm_wins) {
        out << a << ',' << wins << ',' << nlohmann::json(total > 0 ? wins / total : 0.0).dump() << '\n';
    }
    if (c.nil_stm > 0) {
        out << "NIL," << c.nil_stm << ',' << nlohmann::json(c.nil_stm / total).dump() << '\n';
    }
}

} // namespace ctm
