#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "flas/decider.hpp"
#include "flas/errors.hpp"
#include "flas/sim.hpp"
#include "flas/textio.hpp"

namespace flas {

struct TraceRow {
    std::int64_t t = 0;
    double notif_rate = 0.0;
    double sub_rate = 0.0;
    double stored_subs = 0.0;
    int matchers = 1;
    double queue = 0.0;
    double rt = 0.0;     // seconds
    double rt_est = 0.0; // seconds
    double throughput = 0.0;
    std::int64_t cooldown = 0;
    Verdict decision = Verdict::none;
    Trigger trigger = Trigger::none;
    std::int64_t event_id = -1; // index into RunTrace::events, -1 when none started here
};

struct RunTrace {
    std::vector<TraceRow> rows;
    std::vector<ScalingEvent> events;
};

inline constexpr const char* kTraceHeader =
    "t,notif_rate,sub_rate,stored_subs,matchers,queue,rt_ms,rt_est_ms,throughput,cooldown,"
    "decision,trigger,event_id";

// Trace CSV: response times as integer-rounded milliseconds for readability;
// with full_precision two extra columns carry the exact seconds.
inline std::string trace_to_csv(const RunTrace& trace, bool full_precision = false) {
    std::string out = kTraceHeader;
    if (full_precision) out += ",rt_s,rt_est_s";
    out += "\n";
    for (const TraceRow& r : trace.rows) {
        out += std::to_string(r.t) + ',';
        out += detail::csv_num(r.notif_rate) + ',';
        out += detail::csv_num(r.sub_rate) + ',';
        out += detail::csv_num(r.stored_subs) + ',';
        out += std::to_string(r.matchers) + ',';
        out += detail::csv_num(r.queue) + ',';
        out += std::to_string(static_cast<std::int64_t>(std::llround(r.rt * 1000.0))) + ',';
        out += std::to_string(static_cast<std::int64_t>(std::llround(r.rt_est * 1000.0))) + ',';
        out += detail::csv_num(r.throughput) + ',';
        out += std::to_string(r.cooldown) + ',';
        out += to_string(r.decision);
        out += ',';
        out += to_string(r.trigger);
        out += ',';
        if (r.event_id >= 0) out += std::to_string(r.event_id);
        if (full_precision) {
            out += ',';
            out += detail::format_g17(r.rt) + ',';
            out += detail::format_g17(r.rt_est);
        }
        out += '\n';
    }
    return out;
}

inline constexpr const char* kEventsHeader = "id,kind,tp,rp,t_actual,t_predicted";

inline std::string events_to_csv(const RunTrace& trace) {
    std::string out = std::string(kEventsHeader) + "\n";
    for (std::size_t i = 0; i < trace.events.size(); ++i) {
        const ScalingEvent& e = trace.events[i];
        out += std::to_string(i) + ',';
        out += to_string(e.kind);
        out += ',';
        out += std::to_string(e.tp) + ',';
        out += std::to_string(e.rp) + ',';
        out += detail::format_g17(e.t_actual) + ',';
        out += detail::format_g17(e.t_predicted) + '\n';
    }
    return out;
}

inline Verdict verdict_from_string(const std::string& s) {
    if (s == "scale_out") return Verdict::scale_out;
    if (s == "scale_in") return Verdict::scale_in;
    return Verdict::none;
}

inline Trigger trigger_from_string(const std::string& s) {
    if (s == "proactive") return Trigger::proactive;
    if (s == "reactive") return Trigger::reactive;
    if (s == "cooldown") return Trigger::cooldown;
    return Trigger::none;
}

// Parse a trace CSV back into rows. Millisecond columns are used unless the
// full-precision columns are present.
inline RunTrace trace_from_csv(const std::string& csv) {
    RunTrace trace;
    std::istringstream in(csv);
    std::string line;
    if (!std::getline(in, line)) throw EmptyTrace();
    const bool full = line.find(",rt_s,") != std::string::npos || line.ends_with(",rt_est_s");
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto f = detail::split_csv_line(line);
        if (f.size() < 13) throw ConfigError("malformed trace row: " + line);
        TraceRow r;
        r.t = std::stoll(f[0]);
        r.notif_rate = std::strtod(f[1].c_str(), nullptr);
        r.sub_rate = std::strtod(f[2].c_str(), nullptr);
        r.stored_subs = std::strtod(f[3].c_str(), nullptr);
        r.matchers = std::stoi(f[4]);
        r.queue = std::strtod(f[5].c_str(), nullptr);
        r.rt = std::strtod(f[6].c_str(), nullptr) / 1000.0;
        r.rt_est = std::strtod(f[7].c_str(), nullptr) / 1000.0;
        r.throughput = std::strtod(f[8].c_str(), nullptr);
        r.cooldown = std::stoll(f[9]);
        r.decision = verdict_from_string(f[10]);
        r.trigger = trigger_from_string(f[11]);
        r.event_id = f[12].empty() ? -1 : std::stoll(f[12]);
        if (full && f.size() >= 15) {
            r.rt = std::strtod(f[13].c_str(), nullptr);
            r.rt_est = std::strtod(f[14].c_str(), nullptr);
        }
        trace.rows.push_back(r);
    }
    return trace;
}

inline std::vector<ScalingEvent> events_from_csv(const std::string& csv) {
    std::vector<ScalingEvent> events;
    std::istringstream in(csv);
    std::string line;
    std::getline(in, line); // header
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto f = detail::split_csv_line(line);
        if (f.size() < 6) throw ConfigError("malformed event row: " + line);
        ScalingEvent e;
        e.kind = f[1] == "scale_in" ? ScaleKind::scale_in : ScaleKind::scale_out;
        e.tp = std::stoll(f[2]);
        e.rp = std::stoll(f[3]);
        e.t_actual = std::strtod(f[4].c_str(), nullptr);
        e.t_predicted = std::strtod(f[5].c_str(), nullptr);
        events.push_back(e);
    }
    return events;
}

} // namespace flas
