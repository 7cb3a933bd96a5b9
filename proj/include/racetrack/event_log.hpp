#pragma once

// Per-cycle event records of a simulated episode and the checker for the
// at-most-twice switch configuration rule.

#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "racetrack/errors.hpp"

namespace racetrack {

enum class SwitchAction { Insert, Bypass, Output };

inline const char* to_string(SwitchAction action) {
    switch (action) {
        case SwitchAction::Insert: return "insert";
        case SwitchAction::Bypass: return "bypass";
        case SwitchAction::Output: return "output";
    }
    return "?";
}

struct SwitchEvent {
    SwitchAction action = SwitchAction::Insert;
    std::uint32_t source = 0;  ///< unused for Output
    std::uint64_t slot = 0;    ///< index into the source's switch bank

    bool operator==(const SwitchEvent&) const = default;
};

struct CycleRecord {
    std::uint64_t cycle = 0;  ///< 0..N-1; N is the readout step
    std::vector<std::uint32_t> heralds;
    std::optional<std::uint32_t> selected;
    std::vector<SwitchEvent> actions;
    bool photon_stored = false;     ///< live photon in the inner loop after this cycle
    std::uint64_t stored_age = 0;   ///< cycles since the stored photon was inserted
    std::optional<bool> survived;   ///< per-traversal loss draw, if one was made
    std::uint64_t discarded = 0;
    std::optional<bool> output;     ///< readout step only

    bool operator==(const CycleRecord&) const = default;
};

struct CycleEventLog {
    std::uint64_t trial = 0;
    std::uint32_t sources = 0;
    std::uint64_t switches_per_source = 0;
    std::uint64_t cycles = 0;
    std::vector<CycleRecord> records;

    bool operator==(const CycleEventLog&) const = default;
};

enum class ViolationKind {
    OutOfOrder,            ///< records not chronological
    BudgetExceeded,        ///< a switch configured beyond its pad budget
    InsertAfterExhaustion, ///< a source inserted with no Ready switch left
    WrongSlot,             ///< insertion skipped the first unused switch
    LateBypass,            ///< insertion not bypassed exactly one cycle later
    BypassWithoutInsert,
};

inline const char* to_string(ViolationKind kind) {
    switch (kind) {
        case ViolationKind::OutOfOrder: return "out-of-order";
        case ViolationKind::BudgetExceeded: return "budget-exceeded";
        case ViolationKind::InsertAfterExhaustion: return "insert-after-exhaustion";
        case ViolationKind::WrongSlot: return "wrong-slot";
        case ViolationKind::LateBypass: return "late-bypass";
        case ViolationKind::BypassWithoutInsert: return "bypass-without-insert";
    }
    return "?";
}

struct ScheduleViolation {
    ViolationKind kind;
    std::uint64_t cycle = 0;
    std::uint32_t source = 0;
    std::uint64_t slot = 0;
    std::string message;
};

inline std::vector<ScheduleViolation> validate_schedule(const CycleEventLog& log) {
    std::vector<ScheduleViolation> violations;
    auto flag = [&](ViolationKind kind, std::uint64_t cycle, std::uint32_t source, std::uint64_t slot,
                    std::string message) {
        violations.push_back({kind, cycle, source, slot, std::move(message)});
    };

    using Key = std::pair<std::uint32_t, std::uint64_t>;
    std::map<Key, int> configs;
    std::map<Key, std::uint64_t> pending;  // insert cycle awaiting bypass
    std::map<std::uint32_t, std::uint64_t> inserts;
    int output_configs = 0;
    std::optional<std::uint64_t> previous_cycle;

    for (const CycleRecord& rec : log.records) {
        if (previous_cycle && rec.cycle <= *previous_cycle) {
            flag(ViolationKind::OutOfOrder, rec.cycle, 0, 0, "cycle records not strictly increasing");
        }
        previous_cycle = rec.cycle;

        for (const SwitchEvent& ev : rec.actions) {
            const Key key{ev.source, ev.slot};
            switch (ev.action) {
                case SwitchAction::Insert: {
                    const std::uint64_t used = inserts[ev.source];
                    if (ev.slot >= log.switches_per_source || used >= log.switches_per_source) {
                        flag(ViolationKind::InsertAfterExhaustion, rec.cycle, ev.source, ev.slot,
                             "source has no Ready switch left");
                    } else if (configs[key] >= 2) {
                        flag(ViolationKind::BudgetExceeded, rec.cycle, ev.source, ev.slot,
                             "double-padded switch configured a third time");
                    } else if (ev.slot != used) {
                        flag(ViolationKind::WrongSlot, rec.cycle, ev.source, ev.slot,
                             "insertion did not use the first unused switch");
                    }
                    ++configs[key];
                    ++inserts[ev.source];
                    pending[key] = rec.cycle;
                    break;
                }
                case SwitchAction::Bypass: {
                    const auto it = pending.find(key);
                    if (configs[key] >= 2) {
                        flag(ViolationKind::BudgetExceeded, rec.cycle, ev.source, ev.slot,
                             "double-padded switch configured a third time");
                    } else if (it == pending.end()) {
                        flag(ViolationKind::BypassWithoutInsert, rec.cycle, ev.source, ev.slot,
                             "bypass without a preceding insertion");
                    } else if (rec.cycle != it->second + 1) {
                        flag(ViolationKind::LateBypass, rec.cycle, ev.source, ev.slot,
                             "bypass not exactly one cycle after insertion");
                    }
                    if (it != pending.end()) pending.erase(it);
                    ++configs[key];
                    break;
                }
                case SwitchAction::Output:
                    if (++output_configs > 1) {
                        flag(ViolationKind::BudgetExceeded, rec.cycle, 0, 0,
                             "single-padded output switch configured more than once");
                    }
                    break;
            }
        }
    }
    for (const auto& [key, cycle] : pending) {
        flag(ViolationKind::LateBypass, cycle, key.first, key.second, "insertion never followed by a bypass");
    }
    return violations;
}

// Line-delimited JSON: one "episode" header line, then one "cycle" line per record.

inline nlohmann::json to_json(const CycleRecord& rec) {
    nlohmann::json actions = nlohmann::json::array();
    for (const auto& ev : rec.actions) {
        actions.push_back({{"action", to_string(ev.action)}, {"source", ev.source}, {"slot", ev.slot}});
    }
    nlohmann::json j = {{"type", "cycle"},
                        {"cycle", rec.cycle},
                        {"heralds", rec.heralds},
                        {"selected", rec.selected ? nlohmann::json(*rec.selected) : nlohmann::json(nullptr)},
                        {"actions", actions},
                        {"photon_stored", rec.photon_stored},
                        {"stored_age", rec.stored_age},
                        {"survived", rec.survived ? nlohmann::json(*rec.survived) : nlohmann::json(nullptr)},
                        {"discarded", rec.discarded}};
    if (rec.output) j["output"] = *rec.output;
    return j;
}

inline void write_jsonl(const CycleEventLog& log, std::ostream& out) {
    const nlohmann::json header = {{"type", "episode"},
                                   {"trial", log.trial},
                                   {"sources", log.sources},
                                   {"switches_per_source", log.switches_per_source},
                                   {"cycles", log.cycles}};
    out << header.dump() << '\n';
    for (const auto& rec : log.records) out << to_json(rec).dump() << '\n';
}

namespace detail {

inline SwitchAction parse_action(const std::string& name) {
    if (name == "insert") return SwitchAction::Insert;
    if (name == "bypass") return SwitchAction::Bypass;
    if (name == "output") return SwitchAction::Output;
    throw ConfigError("event log: unknown switch action '" + name + "'");
}

}  // namespace detail

inline std::vector<CycleEventLog> read_jsonl(std::istream& in) {
    std::vector<CycleEventLog> logs;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        try {
            const auto j = nlohmann::json::parse(line);
            const std::string type = j.at("type").get<std::string>();
            if (type == "episode") {
                CycleEventLog log;
                log.trial = j.at("trial").get<std::uint64_t>();
                log.sources = j.at("sources").get<std::uint32_t>();
                log.switches_per_source = j.at("switches_per_source").get<std::uint64_t>();
                log.cycles = j.at("cycles").get<std::uint64_t>();
                logs.push_back(std::move(log));
                continue;
            }
            if (type != "cycle" || logs.empty()) throw ConfigError("unexpected record");
            CycleRecord rec;
            rec.cycle = j.at("cycle").get<std::uint64_t>();
            rec.heralds = j.at("heralds").get<std::vector<std::uint32_t>>();
            if (!j.at("selected").is_null()) rec.selected = j["selected"].get<std::uint32_t>();
            for (const auto& a : j.at("actions")) {
                rec.actions.push_back({detail::parse_action(a.at("action").get<std::string>()),
                                       a.at("source").get<std::uint32_t>(), a.at("slot").get<std::uint64_t>()});
            }
            rec.photon_stored = j.at("photon_stored").get<bool>();
            rec.stored_age = j.at("stored_age").get<std::uint64_t>();
            if (!j.at("survived").is_null()) rec.survived = j["survived"].get<bool>();
            rec.discarded = j.at("discarded").get<std::uint64_t>();
            if (j.contains("output")) rec.output = j["output"].get<bool>();
            logs.back().records.push_back(std::move(rec));
        } catch (const nlohmann::json::exception& e) {
            throw ConfigError("event log line " + std::to_string(line_no) + ": " + e.what());
        } catch (const ConfigError& e) {
            throw ConfigError("event log line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return logs;
}

}  // namespace racetrack
