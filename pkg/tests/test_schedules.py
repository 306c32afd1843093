import numpy as np
import pytest

from perceptron_qaoa.instance import build_energy_table, generate_instance
from perceptron_qaoa.schedules import (DqaConfig, ScheduleParams,
                                       dqa_schedule, effective_s, interpolate,
                                       load_landscape, load_schedule, scan_dt,
                                       save_landscape, save_schedule, smooth)
from perceptron_qaoa.statevec import MixerConfig, evolve, expectation


class TestDqaSchedule:
    def test_two_steps(self):
        params = dqa_schedule(DqaConfig(2, 0.8))
        assert np.array_equal(params.betas, [0.4, 0.0])
        assert np.array_equal(params.gammas, [0.4, 0.8])

    def test_single_step(self):
        params = dqa_schedule(DqaConfig(1, 1.0))
        assert np.array_equal(params.betas, [0.0])
        assert np.array_equal(params.gammas, [1.0])

    def test_angle_sum_identity(self):
        params = dqa_schedule(DqaConfig(16, 0.8))
        assert np.allclose(params.betas + params.gammas, 0.8, atol=1e-15)

    def test_total_time(self):
        assert DqaConfig(64, 0.25).total_time == 16.0

    def test_validation(self):
        with pytest.raises(ValueError):
            DqaConfig(0, 0.1)
        with pytest.raises(ValueError):
            DqaConfig(4, 0.0)


class TestScheduleParams:
    def test_vector_roundtrip(self):
        params = ScheduleParams(np.array([1.0, 2.0]), np.array([3.0, 4.0]))
        back = ScheduleParams.from_vector(params.to_vector())
        assert np.array_equal(back.betas, params.betas)
        assert np.array_equal(back.gammas, params.gammas)

    def test_validation(self):
        with pytest.raises(ValueError):
            ScheduleParams(np.array([1.0]), np.array([1.0, 2.0]))
        with pytest.raises(ValueError):
            ScheduleParams(np.array([np.inf]), np.array([1.0]))
        with pytest.raises(ValueError):
            ScheduleParams(np.array([]), np.array([]))


class TestScanDt:
    def test_tiny_dt_approaches_uniform_state(self, toy8_tables):
        # zero-evolution limit: energy density of |+>^N is M/(2N)... here
        # checked against the direct plus-state evaluation at N=8
        table = toy8_tables[0]
        scape = scan_dt(table, 4, dt_min=1e-6, dt_max=1e-5, n_points=3,
                        refine=False)
        plus_eps = expectation(evolve(
            ScheduleParams(np.zeros(1), np.zeros(1)), table, MixerConfig()),
            table).energy_density
        assert scape.energies[0] == pytest.approx(plus_eps, abs=1e-6)

    def test_tiny_dt_half_load_at_odd_n(self):
        table = build_energy_table(generate_instance(9, 7, 3), 0)
        scape = scan_dt(table, 4, dt_min=1e-7, dt_max=1e-6, n_points=2,
                        refine=False)
        # zero-evolution limit of the count cost at odd N: M/(2N)
        assert scape.energies[0] == pytest.approx(7 / 18, abs=1e-5)

    def test_two_points_argmin_is_endpoint(self, toy8_tables):
        scape = scan_dt(toy8_tables[0], 4, dt_min=0.2, dt_max=1.0, n_points=2)
        assert scape.argmin_dt in (0.2, 1.0)

    def test_refined_argmin_matches_dense_grid(self, toy8_tables):
        table = toy8_tables[0]
        scape = scan_dt(table, 8, dt_min=0.1, dt_max=2.5, n_points=25)
        mix = MixerConfig()
        dense = np.linspace(0.1, 2.5, 250)
        energies = [expectation(evolve(dqa_schedule(DqaConfig(8, dt)), table,
                                       mix), table).energy_density
                    for dt in dense]
        dense_argmin = dense[int(np.argmin(energies))]
        assert abs(scape.argmin_dt - dense_argmin) < 1e-3 + (dense[1] - dense[0])
        assert scape.argmin_energy <= min(energies) + 1e-9

    def test_grid_reevaluation_identical(self, toy8_tables):
        a = scan_dt(toy8_tables[1], 4, dt_min=0.3, dt_max=1.2, n_points=7,
                    refine=False)
        b = scan_dt(toy8_tables[1], 4, dt_min=0.3, dt_max=1.2, n_points=7,
                    refine=False)
        assert np.array_equal(a.energies, b.energies)

    def test_validation(self, toy8_tables):
        with pytest.raises(ValueError):
            scan_dt(toy8_tables[0], 4, dt_min=1.0, dt_max=0.5)
        with pytest.raises(ValueError):
            scan_dt(toy8_tables[0], 4, n_points=1)


class TestSmooth:
    def test_window_one_is_identity(self):
        params = ScheduleParams(np.array([3.0, 1.0, 2.0]),
                                np.array([0.0, 5.0, 1.0]))
        out = smooth(params, 1)
        assert np.array_equal(out.betas, params.betas)
        assert np.array_equal(out.gammas, params.gammas)

    def test_constant_fixed_point(self):
        params = ScheduleParams(np.full(7, 2.5), np.full(7, -1.0))
        out = smooth(params, 3)
        assert np.allclose(out.betas, 2.5, atol=1e-15)
        assert np.allclose(out.gammas, -1.0, atol=1e-15)

    def test_alternating_example(self):
        seq = np.array([0.0, 1.0, 0.0, 1.0, 0.0])
        out = smooth(ScheduleParams(seq, seq), 3)
        expected = [1 / 2, 1 / 3, 2 / 3, 1 / 3, 1 / 2]
        assert np.allclose(out.betas, expected, atol=1e-15)

    def test_mean_preserved_with_edge_replication(self):
        # exact identity for the default window 3: each edge value is
        # counted 1+2 = 3 times across the interior windows
        rng = np.random.default_rng(4)
        for _ in range(5):
            x = rng.normal(size=int(rng.integers(4, 20)))
            padded = np.concatenate([x[:1], x, x[-1:]])
            out = smooth(ScheduleParams(padded, padded), 3)
            interior = out.betas[1:1 + x.size]
            assert np.mean(interior) == pytest.approx(np.mean(x), abs=1e-12)

    def test_validation(self):
        params = ScheduleParams(np.zeros(4), np.zeros(4))
        with pytest.raises(ValueError):
            smooth(params, 2)
        with pytest.raises(ValueError):
            smooth(params, 5)


class TestInterpolate:
    def test_same_p_identity(self):
        rng = np.random.default_rng(2)
        params = ScheduleParams(rng.normal(size=9), rng.normal(size=9))
        out = interpolate(params, 9)
        assert np.allclose(out.betas, params.betas, atol=1e-15)
        assert np.allclose(out.gammas, params.gammas, atol=1e-15)

    def test_linear_ramp_fixed_point(self):
        p = 16
        ramp = np.arange(p) / (p - 1)
        out = interpolate(ScheduleParams(ramp, 1 - ramp), 64)
        expected = np.arange(64) / 63
        assert np.max(np.abs(out.betas - expected)) < 1e-12
        assert np.max(np.abs(out.gammas - (1 - expected))) < 1e-12

    def test_endpoints_preserved_exactly(self):
        rng = np.random.default_rng(3)
        params = ScheduleParams(rng.normal(size=5), rng.normal(size=5))
        out = interpolate(params, 23)
        assert out.betas[0] == params.betas[0]
        assert out.betas[-1] == params.betas[-1]
        assert out.gammas[0] == params.gammas[0]
        assert out.gammas[-1] == params.gammas[-1]

    def test_monotone_preserved(self):
        rng = np.random.default_rng(5)
        seq = np.sort(rng.normal(size=8))
        out = interpolate(ScheduleParams(seq, seq[::-1].copy()), 31)
        assert np.all(np.diff(out.betas) >= 0)
        assert np.all(np.diff(out.gammas) <= 0)

    def test_validation(self):
        params = ScheduleParams(np.array([1.0]), np.array([1.0]))
        with pytest.raises(ValueError):
            interpolate(params, 4)


class TestEffectiveS:
    def test_equal_angles_give_half(self):
        params = ScheduleParams(np.full(4, 0.3), np.full(4, 0.3))
        assert np.array_equal(effective_s(params), np.full(4, 0.5))

    def test_dqa_gives_linear_ramp(self):
        params = dqa_schedule(DqaConfig(2, 0.8))
        assert np.array_equal(effective_s(params), [0.5, 1.0])

    def test_dqa_ramp_random_dt(self):
        rng = np.random.default_rng(6)
        for _ in range(20):
            p = int(rng.integers(2, 70))
            dt = float(rng.uniform(0.05, 3.0))
            s = effective_s(dqa_schedule(DqaConfig(p, dt)))
            ramp = np.arange(1, p + 1) / p
            assert np.max(np.abs(s - ramp)) < 5e-16

    def test_endpoint(self):
        params = ScheduleParams(np.array([0.0]), np.array([1.0]))
        assert effective_s(params)[0] == 1.0

    def test_zero_denominator(self):
        params = ScheduleParams(np.array([0.5, -0.5]), np.array([0.5, 0.5]))
        with pytest.raises(ZeroDivisionError):
            effective_s(params)


class TestPersistence:
    def test_schedule_roundtrip_bytes(self, tmp_path):
        rng = np.random.default_rng(8)
        params = ScheduleParams(rng.normal(size=6), rng.normal(size=6))
        p1 = tmp_path / "sched.csv"
        p2 = tmp_path / "sched2.csv"
        save_schedule(params, p1)
        save_schedule(load_schedule(p1), p2)
        assert p1.read_bytes() == p2.read_bytes()

    def test_landscape_roundtrip_bytes(self, tmp_path, toy8_tables):
        scape = scan_dt(toy8_tables[0], 2, dt_min=0.2, dt_max=1.0, n_points=5,
                        refine=False)
        p1 = tmp_path / "scape.csv"
        p2 = tmp_path / "scape2.csv"
        save_landscape(scape, p1)
        save_landscape(load_landscape(p1), p2)
        assert p1.read_bytes() == p2.read_bytes()

    def test_schedule_header_rejected(self, tmp_path):
        bad = tmp_path / "bad.csv"
        bad.write_text("a,b,c\n1,2,3\n")
        with pytest.raises(ValueError):
            load_schedule(bad)
