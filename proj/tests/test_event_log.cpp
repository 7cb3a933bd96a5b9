#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "racetrack/event_log.hpp"
#include "racetrack/simulator.hpp"

using namespace racetrack;

namespace {

CycleEventLog empty_log(std::uint64_t switches = 2, std::uint64_t cycles = 5) {
    return CycleEventLog{0, 1, switches, cycles, {}};
}

CycleRecord at(std::uint64_t cycle, std::vector<SwitchEvent> actions) {
    CycleRecord rec;
    rec.cycle = cycle;
    rec.actions = std::move(actions);
    return rec;
}

constexpr SwitchEvent insert(std::uint64_t slot) { return {SwitchAction::Insert, 0, slot}; }
constexpr SwitchEvent bypass(std::uint64_t slot) { return {SwitchAction::Bypass, 0, slot}; }
constexpr SwitchEvent output() { return {SwitchAction::Output, 0, 0}; }

bool has(const std::vector<ScheduleViolation>& v, ViolationKind kind) {
    for (const auto& x : v)
        if (x.kind == kind) return true;
    return false;
}

}  // namespace

TEST(ValidateSchedule, ConformingScheduleIsClean) {
    auto log = empty_log();
    log.records = {at(0, {insert(0)}), at(1, {bypass(0), insert(1)}), at(2, {bypass(1)}), at(5, {output()})};
    EXPECT_TRUE(validate_schedule(log).empty());
}

TEST(ValidateSchedule, ThirdConfigurationFlagged) {
    auto log = empty_log();
    log.records = {at(0, {insert(0)}), at(1, {bypass(0)}), at(2, {bypass(0)})};
    EXPECT_TRUE(has(validate_schedule(log), ViolationKind::BudgetExceeded));
}

TEST(ValidateSchedule, InsertPastBankFlagged) {
    auto log = empty_log(1);
    log.records = {at(0, {insert(0)}), at(1, {bypass(0), insert(1)}), at(2, {bypass(1)})};
    EXPECT_TRUE(has(validate_schedule(log), ViolationKind::InsertAfterExhaustion));
}

TEST(ValidateSchedule, SkippedSlotFlagged) {
    auto log = empty_log(4);
    log.records = {at(0, {insert(2)}), at(1, {bypass(2)})};
    EXPECT_TRUE(has(validate_schedule(log), ViolationKind::WrongSlot));
}

TEST(ValidateSchedule, LateOrMissingBypassFlagged) {
    auto late = empty_log();
    late.records = {at(0, {insert(0)}), at(2, {bypass(0)})};
    EXPECT_TRUE(has(validate_schedule(late), ViolationKind::LateBypass));
    auto missing = empty_log();
    missing.records = {at(0, {insert(0)}), at(5, {output()})};
    EXPECT_TRUE(has(validate_schedule(missing), ViolationKind::LateBypass));
}

TEST(ValidateSchedule, BypassWithoutInsertFlagged) {
    auto log = empty_log();
    log.records = {at(1, {bypass(0)})};
    EXPECT_TRUE(has(validate_schedule(log), ViolationKind::BypassWithoutInsert));
}

TEST(ValidateSchedule, OutOfOrderFlagged) {
    auto log = empty_log();
    log.records = {at(2, {}), at(1, {})};
    EXPECT_TRUE(has(validate_schedule(log), ViolationKind::OutOfOrder));
}

TEST(ValidateSchedule, OutputSwitchOnlyOnce) {
    auto log = empty_log();
    log.records = {at(5, {output(), output()})};
    EXPECT_TRUE(has(validate_schedule(log), ViolationKind::BudgetExceeded));
}

TEST(ValidateSchedule, SimulatedEpisodesNeverViolate) {
    std::mt19937_64 rng(31);
    std::uniform_int_distribution<int> small(1, 12);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    int episodes = 0;
    for (int k = 0; k < 40; ++k) {
        RacetrackConfig c;
        c.plan.sources = static_cast<std::uint32_t>(small(rng));
        c.plan.cycles = static_cast<std::uint64_t>(small(rng) * 10);
        c.plan.gen_prob = 0.4 * u(rng);
        c.plan.policy = k % 2 ? StoragePolicy::KeepFirst : StoragePolicy::ReplaceWithLatest;
        c.switches_per_source = static_cast<std::uint64_t>(small(rng) / 3 + 1);
        c.dead_time_cycles = static_cast<std::uint64_t>(k % 3);
        c.loss.waveguide_loss_db_per_ns = 0.02 * u(rng);
        c.timing.inner_loop_delay_override = 50.0 * u(rng);
        c.rng_seed = rng();
        for (std::uint64_t t = 0; t < 50; ++t) {
            CycleEventLog log;
            simulate_episode(c, t, &log);
            const auto v = validate_schedule(log);
            ASSERT_TRUE(v.empty()) << to_string(v.front().kind) << " at cycle " << v.front().cycle;
            ++episodes;
        }
    }
    EXPECT_EQ(episodes, 2000);
}

TEST(EventLogJson, RoundTrip) {
    RacetrackConfig c;
    c.plan.sources = 5;
    c.plan.cycles = 40;
    c.plan.gen_prob = 0.1;
    c.switches_per_source = 3;
    c.loss.waveguide_loss_db_per_ns = 0.05;
    c.timing.inner_loop_delay_override = 20.0;
    SimulationOptions o;
    o.workers = 2;
    o.log_trials = 4;
    const auto result = simulate(c, 10, o);
    ASSERT_EQ(result.logs.size(), 4u);
    std::stringstream buffer;
    for (const auto& log : result.logs) write_jsonl(log, buffer);
    const auto parsed = read_jsonl(buffer);
    ASSERT_EQ(parsed.size(), result.logs.size());
    for (std::size_t i = 0; i < parsed.size(); ++i) EXPECT_TRUE(parsed[i] == result.logs[i]) << i;
}

TEST(EventLogJson, MalformedInputRejected) {
    std::stringstream orphan("{\"type\":\"cycle\",\"cycle\":0}\n");
    EXPECT_THROW(read_jsonl(orphan), ConfigError);
    std::stringstream garbage("not json\n");
    EXPECT_THROW(read_jsonl(garbage), ConfigError);
    std::stringstream action(
        "{\"type\":\"episode\",\"trial\":0,\"sources\":1,\"switches_per_source\":1,\"cycles\":1}\n"
        "{\"type\":\"cycle\",\"cycle\":0,\"heralds\":[],\"selected\":null,"
        "\"actions\":[{\"action\":\"explode\",\"source\":0,\"slot\":0}],"
        "\"photon_stored\":false,\"stored_age\":0,\"survived\":null,\"discarded\":0}\n");
    EXPECT_THROW(read_jsonl(action), ConfigError);
}
