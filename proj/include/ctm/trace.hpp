#pragma once

// JSONL traces: one flat record per event, strictly tick-ordered.

#include "ctm/machine.hpp"

#include <json.hpp>

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace ctm {

struct TraceRecord {
    Tick tick = 0;
    std::string kind;
    std::optional<Chunk> chunk;
    /// Kind-specific fields, appended after the chunk fields.
    nlohmann::ordered_json aux = nlohmann::ordered_json::object();
};

/// tick, kind, address, t, gist_label, modality, weight, intensity, mood, aux...
nlohmann::ordered_json to_json(const TraceRecord& r);
std::string to_line(const TraceRecord& r);

/// Records for one tick, in phase order: broadcast, interrupt, link_ack,
/// feedback, submission, link_send, warning, stm, actuator.
std::vector<TraceRecord> records_for(const TickReport& report);

class TraceSink {
public:
    /// A null stream discards records but still checks ordering.
    explicit TraceSink(std::ostream* out) : out_(out) {}

    /// Throws ContractViolation when ticks go backwards, RunError on I/O failure.
    void emit(const TraceRecord& r);
    void flush();

    std::size_t lines() const noexcept { return lines_; }

private:
    std::ostream* out_;
    std::optional<Tick> last_tick_;
    std::size_t lines_ = 0;
};

inline void emit_trace(TraceSink& sink, const TraceRecord& r) { sink.emit(r); }

/// Per-run tallies; recomputable from a trace alone.
struct RunCounters {
    Tick ticks = 0;
    std::size_t records = 0;
    std::map<std::string, std::size_t> records_by_kind;
    /// STM mood and intensity per tick.
    std::vector<double> mood;
    std::vector<double> intensity;
    /// Ticks on which each address held STM with a non-NIL chunk.
    std::map<std::uint32_t, std::uint64_t> stm_wins;
    std::uint64_t nil_stm = 0;

    friend bool operator==(const RunCounters&, const RunCounters&) = default;
};

struct RunResult {
    RunCounters counters;
    std::vector<TraceRecord> records;
    std::vector<ActuatorExpectation> unmet_expectations;
};

/// Runs `until` ticks (at most the lifetime), streaming records to `out` if given.
RunResult run(const MachineConfig& config, const EnvironmentScript& env, Tick until, std::ostream* out = nullptr,
              bool keep_records = false);

/// Rebuilds counters from JSONL. Throws ScenarioError naming the bad line.
RunCounters counters_from_trace(std::istream& in);

/// CSV: tick,mood,intensity
void write_series_csv(std::ostream& out, const RunCounters& c);
/// CSV: address,wins,share (share over all ticks; NIL ticks reported as address NIL)
void write_shares_csv(std::ostream& out, const RunCounters& c);

} // namespace ctm
