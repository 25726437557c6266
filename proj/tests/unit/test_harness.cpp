#include "helpers.hpp"

#include <gtest/gtest.h>

using namespace qam;

TEST(Rmse, Cases)
{
    const std::vector<double> v{2.0, 2.0, 2.0};
    const bool open[3] = {false, false, false};
    const bool all[3] = {true, true, true};
    EXPECT_EQ(*rmse(v, 2.0, std::span<const bool>(open, 3)), 0.0);
    EXPECT_FALSE(rmse(v, 2.0, std::span<const bool>(all, 3)).has_value());
    const std::vector<double> w{3.0, 1.0, 100.0};
    const bool mask[3] = {false, false, true};
    EXPECT_DOUBLE_EQ(*rmse(w, 2.0, std::span<const bool>(mask, 3)), 1.0);
    EXPECT_THROW(rmse(w, 2.0, std::span<const bool>(mask, 2)), ConfigError);
}

TEST(Grid, InclusiveValues)
{
    EXPECT_EQ((Grid{20, 5, 100}.values().size()), 17u);
    const auto b = Grid{-4, -2, -20}.values();
    ASSERT_EQ(b.size(), 9u);
    EXPECT_EQ(b.back(), -20.0);
    EXPECT_EQ((Grid{1.51, 0.01, 1.63}.values().back()), 1.63);
    EXPECT_THROW((Grid{1, 0, 2}.values()), ConfigError);
    EXPECT_THROW((Grid{1, -1, 2}.values()), ConfigError);
}

TEST(SweepCsv, EmptyResultIsHeaderOnly)
{
    const std::string text = sweep_csv(SweepResult{});
    EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 1);
    EXPECT_EQ(sweep_csv_columns().size(), 13u);
    EXPECT_TRUE(parse_sweep_csv(text).empty());
}

TEST(SweepCsv, RoundTrip)
{
    const auto m = test::small_manifest();
    const SweepResult r = run_sweep(m);
    const auto rows = parse_sweep_csv(sweep_csv(r));
    ASSERT_EQ(rows.size(), r.points.size() * m.methods.size());
    std::size_t i = 0;
    for (const auto& pt : r.points)
        for (const auto& ms : pt.methods) {
            const auto& row = rows[i++];
            EXPECT_EQ(row.sweep_value, pt.value);
            EXPECT_EQ(row.method, to_string(ms.method));
            EXPECT_EQ(row.rmse_c, ms.rmse_c);
            EXPECT_EQ(row.rmse_z, ms.rmse_z);
            EXPECT_EQ(row.rmse_alpha, ms.rmse_alpha);
            EXPECT_EQ(row.rmse_d, ms.rmse_d);
            EXPECT_EQ(row.outlier_pct, ms.outlier_pct);
            ASSERT_TRUE(pt.sqrt_crb);
            EXPECT_EQ(row.sqrt_crb_c, pt.sqrt_crb->c);
            EXPECT_EQ(row.sqrt_crb_d, pt.sqrt_crb->d);
            EXPECT_EQ(row.n_valid, ms.n_valid);
            EXPECT_EQ(row.n_total, m.n_realizations);
        }
}

TEST(Sweep, DeterministicAcrossThreadCounts)
{
    const auto m = test::small_manifest();
    EXPECT_EQ(sweep_csv(run_sweep(m, 1)), sweep_csv(run_sweep(m, 1)));
    EXPECT_EQ(sweep_csv(run_sweep(m, 1)), sweep_csv(run_sweep(m, 3)));
}

TEST(Sweep, PoolingSplitRunsMatchesSingleRun)
{
    auto m = test::small_manifest();
    m.crb_signals = 0;
    const SweepResult whole = run_sweep(m);
    auto first = m, second = m;
    first.n_realizations = 2;
    second.n_realizations = 4;
    second.realization_offset = 2;
    const SweepResult pooled = pool(run_sweep(first), run_sweep(second));
    for (std::size_t i = 0; i < whole.points.size(); ++i)
        for (std::size_t k = 0; k < m.methods.size(); ++k) {
            const auto& a = whole.points[i].methods[k];
            const auto& b = pooled.points[i].methods[k];
            EXPECT_EQ(a.n_total, b.n_total);
            EXPECT_EQ(a.n_valid, b.n_valid);
            EXPECT_EQ(a.outlier_pct, b.outlier_pct);
            ASSERT_EQ(a.rmse_c.has_value(), b.rmse_c.has_value());
            if (a.rmse_c) {
                EXPECT_NEAR(*a.rmse_c, *b.rmse_c, 1e-12 * std::max(1.0, *a.rmse_c));
                EXPECT_NEAR(*a.rmse_alpha, *b.rmse_alpha, 1e-12 * std::max(1.0, *a.rmse_alpha));
            }
        }
}

TEST(Sweep, NoiselessSingleRealizationIsExact)
{
    ExperimentManifest m;
    m.parameter = SweepParameter::alpha;
    m.grid = {10, 1, 10};
    m.snr_db = std::numeric_limits<double>::infinity();
    m.n_realizations = 1;
    m.crb_signals = 0;
    const auto r = run_sweep(m);
    for (const auto& ms : r.points[0].methods) {
        ASSERT_TRUE(ms.rmse_c) << to_string(ms.method);
        EXPECT_LT(*ms.rmse_c / m.defaults.c, 1e-4);
        EXPECT_LT(*ms.rmse_z / m.defaults.z, 1e-4);
        EXPECT_LT(*ms.rmse_alpha / m.defaults.alpha, 1e-4);
        EXPECT_LT(*ms.rmse_d / m.defaults.d, 1e-4);
    }
}

TEST(Sweep, BandwidthSweepKeepsCrbFixed)
{
    ExperimentManifest m;
    m.parameter = SweepParameter::bandwidth;
    m.grid = {-4, -4, -12};
    m.n_realizations = 2;
    m.crb_signals = 30;
    const auto r = run_sweep(m);
    for (const auto& pt : r.points) {
        ASSERT_TRUE(pt.sqrt_crb);
        EXPECT_EQ(pt.sqrt_crb->c, r.points[0].sqrt_crb->c);
        EXPECT_EQ(pt.sigma2, r.points[0].sigma2);
    }
}

TEST(Manifest, JsonRoundTrip)
{
    ExperimentManifest m;
    m.parameter = SweepParameter::d;
    m.grid = {1, 0.5, 8};
    m.methods = {Method::ar, Method::hk};
    m.seed = 77;
    m.medium.z_w = 1.48;
    m.reweight.tukey_c = 3.0;
    const auto back = manifest_from_json(to_json(m));
    EXPECT_EQ(to_json(back), to_json(m));
}

TEST(Manifest, RejectsBadInput)
{
    EXPECT_THROW(manifest_from_json({{"sweep_parameter", "depth"}}), ConfigError);
    EXPECT_THROW(manifest_from_json({{"methods", {"music"}}}), ConfigError);
    EXPECT_THROW(manifest_from_json({{"n_realizations", 0}}), ConfigError);
}
