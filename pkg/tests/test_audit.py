import math

import numpy as np
import pytest

from pufferkit import (
    kantorovich_plan,
    output_log_density,
    relaxation_profile,
    theta_relaxed,
    verify_pufferfish,
    verify_relaxed_condition,
)

from conftest import grid_log_ratio, make_instance, make_scenario, random_scenario

TABLE1_ROOT_EPS1 = 1.0 / math.log(math.e + 24 * (math.e - 1.0))


class TestOutputLogDensity:
    def test_point_mass_at_its_mode(self):
        s = make_scenario([1.0], [1.0])
        for theta in (0.3, 1.0, 4.0):
            assert output_log_density(s, "i", theta, 0.0) == pytest.approx(
                math.log(1.0 / (2.0 * theta)), abs=1e-12
            )

    def test_point_mass_one_scale_away(self):
        s = make_scenario([1.0], [1.0])
        theta = 0.7
        expected = math.log(1.0 / (2.0 * theta)) - 1.0
        assert output_log_density(s, "i", theta, theta) == pytest.approx(expected, abs=1e-12)

    def test_two_term_mixture(self, table1_scenario):
        expected = math.log(0.52 + 0.48 * math.exp(-1.0)) - math.log(2.0)
        got = output_log_density(table1_scenario, "i", 1.0, 0.0)
        assert got == pytest.approx(expected, abs=1e-12)

    def test_secret_selector(self, table1_scenario):
        expected = math.log(0.5 + 0.5 * math.exp(-1.0)) - math.log(2.0)
        assert output_log_density(table1_scenario, "j", 1.0, 0.0) == pytest.approx(
            expected, abs=1e-12
        )
        with pytest.raises(ValueError):
            output_log_density(table1_scenario, "k", 1.0, 0.0)

    def test_matches_direct_convolution_far_from_support(self, table1_scenario):
        theta, y = 0.8, 7.3
        direct = math.log(
            0.52 * math.exp(-abs(y - 0) / theta) + 0.48 * math.exp(-abs(y - 1) / theta)
        ) - math.log(2 * theta)
        assert output_log_density(table1_scenario, "i", theta, y) == pytest.approx(
            direct, abs=1e-12
        )


class TestVerifyPufferfish:
    def test_calibrated_scale_passes(self, table1_instance):
        theta = theta_relaxed(table1_instance, 1.0).theta_relaxed
        report = verify_pufferfish(table1_instance, theta, 1.0)
        assert report.overall_pass
        assert report.per_scenario[0].max_log_ratio <= 1.0 + 1e-9

    def test_identical_priors_ratio_is_zero(self):
        inst = make_instance([0.1, 0.2, 0.7], [0.1, 0.2, 0.7])
        report = verify_pufferfish(inst, 0.5, 0.4)
        assert report.per_scenario[0].max_log_ratio == pytest.approx(0.0, abs=1e-12)
        assert report.overall_pass

    def test_tiny_scale_fails_tight_budget(self, table1_instance):
        # the grid oracle certifies this failure: the ratio tops out near
        # log(0.5/0.48) = 0.0408, above a budget of 0.02
        report = verify_pufferfish(table1_instance, 0.05, 0.02)
        assert not report.overall_pass
        y, ratio = grid_log_ratio(table1_instance.scenarios[0], 0.05, total_points=20_000)
        assert np.abs(ratio).max() > 0.02

    def test_full_support_priors_pass_any_scale_at_unit_budget(self, table1_instance):
        # both priors cover the alphabet, so the ratio stays near the prior
        # odds even as theta shrinks; the grid oracle agrees
        report = verify_pufferfish(table1_instance, 0.05, 1.0)
        assert report.overall_pass
        y, ratio = grid_log_ratio(table1_instance.scenarios[0], 0.05, total_points=20_000)
        assert np.abs(ratio).max() <= 1.0

    def test_breakpoint_supremum_matches_grid(self):
        rng = np.random.default_rng(19)
        for _ in range(25):
            s = random_scenario(rng)
            theta = float(rng.uniform(0.3, 3.0))
            inst = make_instance(s.prior_i.pmf, s.prior_j.pmf)
            report = verify_pufferfish(inst, theta, 1.0)
            _, ratio = grid_log_ratio(s, theta, total_points=30_000)
            assert report.per_scenario[0].max_log_ratio == pytest.approx(
                float(np.abs(ratio).max()), abs=1e-6
            )

    def test_ratio_monotone_between_breakpoints(self):
        rng = np.random.default_rng(29)
        for _ in range(10):
            s = random_scenario(rng, n_max=6)
            theta = float(rng.uniform(0.4, 2.0))
            y, ratio = grid_log_ratio(s, theta, total_points=30_000)
            for a in range(s.alphabet_size - 1):
                seg = ratio[(y >= a) & (y <= a + 1)]
                diffs = np.diff(seg)
                assert np.all(diffs >= -1e-12) or np.all(diffs <= 1e-12)

    def test_tail_marker_serialization(self):
        # disjoint point masses: the ratio explodes in a tail
        inst = make_instance([1.0, 0.0], [0.0, 1.0])
        report = verify_pufferfish(inst, 0.1, 1.0)
        assert not report.overall_pass
        doc = report.to_dict()
        assert doc["per_scenario"][0]["argmax_y"] in ("tail+", "tail-", 0.0, 1.0)


class TestVerifyRelaxedCondition:
    def test_holds_at_the_root(self, table1_scenario):
        plan = kantorovich_plan(table1_scenario)
        assert verify_relaxed_condition(plan, TABLE1_ROOT_EPS1, 1.0)

    def test_fails_below_the_root(self, table1_scenario):
        plan = kantorovich_plan(table1_scenario)
        assert not verify_relaxed_condition(plan, 0.20, 1.0)

    def test_diagonal_plan_always_holds(self):
        plan = kantorovich_plan(make_scenario([0.3, 0.7], [0.3, 0.7]))
        for theta in (0.01, 0.5, 10.0):
            assert verify_relaxed_condition(plan, theta, 0.2)


class TestRelaxationProfile:
    def test_strict_regime_all_terms_non_positive(self, table1_scenario):
        plan = kantorovich_plan(table1_scenario)
        profile = relaxation_profile(plan, 1.0, 1.0)  # theta = max distance / eps
        assert np.all(profile.i_values <= 1e-12)

    def test_relaxed_regime_has_positive_terms_but_safe_columns(self, table1_scenario):
        plan = kantorovich_plan(table1_scenario)
        profile = relaxation_profile(plan, TABLE1_ROOT_EPS1, 1.0)
        assert np.any(profile.i_values > 0)
        assert np.all(profile.column_sums <= 1e-10)

    def test_diagonal_plan_terms(self):
        plan = kantorovich_plan(make_scenario([0.4, 0.6], [0.4, 0.6]))
        profile = relaxation_profile(plan, 0.7, 0.3)
        expected = (1.0 - math.exp(0.3)) * np.diag([0.4, 0.6])
        np.testing.assert_allclose(profile.i_values, expected, atol=1e-12)

    def test_column_sums_consistent(self, table2_scenario):
        plan = kantorovich_plan(table2_scenario)
        profile = relaxation_profile(plan, 2.0, 0.5)
        np.testing.assert_allclose(
            profile.column_sums, profile.i_values.sum(axis=0), atol=1e-12
        )

    def test_export_order_and_csv(self, tmp_path, table1_scenario):
        plan = kantorovich_plan(table1_scenario)
        profile = relaxation_profile(plan, 0.5, 1.0)
        rows = profile.rows()
        # ordered by x' first, then x; index starts at 1 for (0, 0)
        assert [(r[0], r[1], r[2]) for r in rows] == [
            (1, 0, 0), (2, 1, 0), (3, 0, 1), (4, 1, 1)
        ]
        path = tmp_path / "profile.csv"
        profile.dump_csv(path)
        lines = path.read_text().strip().splitlines()
        assert lines[0] == "index,x,x_prime,i_value,column_sum"
        assert len(lines) == 5


class TestSoundnessChain:
    def test_calibrated_scales_always_audit_clean(self, table1_instance, table2_instance):
        rng = np.random.default_rng(31)
        instances = [table1_instance, table2_instance]
        instances += [make_instance(s.prior_i.pmf, s.prior_j.pmf)
                      for s in (random_scenario(rng) for _ in range(30))]
        for inst in instances:
            eps = float(rng.uniform(0.05, 2.0))
            result = theta_relaxed(inst, eps)
            if result.theta_relaxed == 0.0:
                continue
            assert verify_pufferfish(inst, result.theta_relaxed, eps).overall_pass
            for s in inst.scenarios:
                for direction in (s, s.swapped()):
                    assert verify_relaxed_condition(
                        kantorovich_plan(direction), result.theta_relaxed, eps
                    )
