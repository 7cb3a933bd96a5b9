#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "racetrack/loss_timing.hpp"

using namespace racetrack;

TEST(Survival, ZeroLossOrZeroTimeIsLossless) {
    EXPECT_EQ(survival_probability(0.0, 3.0), 1.0);
    EXPECT_EQ(survival_probability(120.0, 0.0), 1.0);
}

TEST(Survival, ReferenceValues) {
    EXPECT_NEAR(survival_probability(100.0, 0.024), 0.5754399373371569, 1e-15);
    EXPECT_NEAR(survival_probability(90.0, 0.024), 0.6081350012787179, 1e-15);
    EXPECT_NEAR(survival_probability(1.0, 10.0), 0.1, 1e-15);
}

TEST(Survival, RejectsNegativeInputs) {
    EXPECT_THROW(survival_probability(-1.0, 0.1), DomainError);
    EXPECT_THROW(survival_probability(1.0, -0.1), DomainError);
    EXPECT_THROW(survival_probability(NAN, 0.1), DomainError);
}

TEST(Survival, DecibelAndNaturalUnitsAgree) {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> loss(0.0, 1.0);
    std::uniform_real_distribution<double> duration(0.0, 500.0);
    for (int i = 0; i < 2000; ++i) {
        const double l = loss(rng);
        const double t = duration(rng);
        ASSERT_NEAR(survival_probability(t, l), std::exp(-db_to_natural(l) * t), 1e-12);
    }
}

TEST(Survival, DurationsCompose) {
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> u(0.0, 50.0);
    for (int i = 0; i < 1000; ++i) {
        const double a = u(rng), b = u(rng), l = u(rng) / 100.0;
        ASSERT_NEAR(survival_probability(a + b, l), survival_probability(a, l) * survival_probability(b, l), 1e-12);
    }
}

TEST(Survival, MonotoneNonIncreasing) {
    double previous = 1.0;
    for (int i = 0; i <= 200; ++i) {
        const double s = survival_probability(i * 0.5, 0.05);
        EXPECT_LE(s, previous);
        EXPECT_GE(s, 0.0);
        previous = s;
    }
    previous = 1.0;
    for (int i = 0; i <= 200; ++i) {
        const double s = survival_probability(10.0, i * 0.01);
        EXPECT_LE(s, previous);
        previous = s;
    }
}

TEST(LoopSurvival, TraversalsMultiply) {
    LossParams loss;
    loss.waveguide_loss_db_per_ns = 0.024;
    loss.switch_pass_loss_db = 0.1;
    const double one = loop_survival(9.0, 1, loss);
    EXPECT_NEAR(one, std::pow(10.0, -(0.024 * 9.0 + 0.1) / 10.0), 1e-15);
    EXPECT_NEAR(loop_survival(9.0, 7, loss), std::pow(one, 7), 1e-14);
    EXPECT_EQ(loop_survival(9.0, 0, loss), 1.0);
    EXPECT_NEAR(loop_survival(9.0, 1, loss, 3), std::pow(10.0, -(0.024 * 9.0 + 0.3) / 10.0), 1e-15);
}

TEST(LossParams, Validation) {
    LossParams loss;
    EXPECT_NO_THROW(loss.validate());
    loss.output_coupling = 0.0;
    EXPECT_THROW(loss.validate(), DomainError);
    loss.output_coupling = 1.0;
    loss.switch_pass_loss_db = -0.1;
    EXPECT_THROW(loss.validate(), DomainError);
}

TEST(Timing, CycleTimeSumsDelays) {
    TimingParams t;
    t.detector_delay = 5.0;
    t.classical_delay = 5.0;
    t.switch_on = 50.0;
    EXPECT_DOUBLE_EQ(cycle_time(t), 60.0);
    EXPECT_DOUBLE_EQ(t.pump_period_ns(), 60.0);
    t.pump_period = 80.0;
    EXPECT_DOUBLE_EQ(t.pump_period_ns(), 80.0);
}

TEST(Timing, InnerLoopDelay) {
    TimingParams t;
    t.detector_delay = 5.0;
    t.classical_delay = 5.0;
    t.loop_traversal = 2.0;
    EXPECT_DOUBLE_EQ(t.inner_loop_delay(), 58.0);
    t.inner_loop_delay_override = 9.0;
    EXPECT_DOUBLE_EQ(t.inner_loop_delay(), 9.0);
}

TEST(Timing, LoopLongerThanCycleIsConfigError) {
    TimingParams t;
    t.loop_traversal = 60.0;
    EXPECT_THROW(cycle_time(t), ConfigError);
    t.inner_loop_delay_override = 1.0;
    EXPECT_NO_THROW(t.validate());
}

TEST(Timing, NegativeDelaysRejected) {
    TimingParams t;
    t.detector_delay = -1.0;
    EXPECT_THROW(t.validate(), DomainError);
}

TEST(RepetitionTime, ReferenceValue) {
    EXPECT_DOUBLE_EQ(repetition_time(134, 60.0, 950.0), 8990.0);
    EXPECT_DOUBLE_EQ(repetition_rate(134, 60.0, 950.0), 1.0 / 8990.0);
}

TEST(RepetitionTime, ZeroCyclesIsResetOnly) {
    EXPECT_DOUBLE_EQ(repetition_time(0, 60.0, 950.0), 950.0);
}
