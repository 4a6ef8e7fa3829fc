import math

import numpy as np
import pytest
import torch

from skeldiff import ConfigError, NoiseSchedule, build_schedule, sample_x0, sample_xt
from skeldiff.diffusion import embed_sequence
from skeldiff.utils import torch_generator


class TestSchedule:
    def test_values_follow_the_square_root_law(self):
        sched = build_schedule(10)
        # Independent recomputation, scalar by scalar.
        for t in range(1, 11):
            expected = max(0.0, 1.0 - math.sqrt(t / 10))
            assert sched.retention(t) == pytest.approx(expected, abs=1e-12)

    def test_endpoints_at_t100(self):
        sched = build_schedule(100)
        assert sched.alpha_bar[0] == pytest.approx(0.9, abs=1e-12)
        assert sched.alpha_bar[-1] == 0.0
        assert sched.beta_0 == pytest.approx(0.1, abs=1e-12)

    def test_strictly_decreasing(self):
        for T in (2, 5, 100, 1000):
            sched = build_schedule(T)
            assert np.all(np.diff(sched.alpha_bar) < 0)
            assert sched.alpha_bar[-1] == 0.0

    def test_minimum_steps(self):
        build_schedule(2)
        with pytest.raises(ConfigError):
            build_schedule(1)

    def test_step_range_checked(self):
        sched = build_schedule(10)
        with pytest.raises(ConfigError):
            sched.retention(0)
        with pytest.raises(ConfigError):
            sched.retention(11)

    def test_handcrafted_schedule_validated(self):
        with pytest.raises(ConfigError, match="decreasing"):
            NoiseSchedule(T=3, alpha_bar=np.array([0.5, 0.5, 0.1]), beta_0=0.5)
        with pytest.raises(ConfigError, match="beta_0"):
            NoiseSchedule(T=2, alpha_bar=np.array([0.5, 0.1]), beta_0=0.0)


class TestEmbedSequence:
    def test_rows_match_table(self):
        table = torch.arange(12, dtype=torch.float32).reshape(4, 3)
        out = embed_sequence([2, 0, 2], table)
        assert torch.equal(out, table[[2, 0, 2]])

    def test_out_of_vocabulary_rejected(self):
        table = torch.zeros(4, 3)
        with pytest.raises(ConfigError):
            embed_sequence([4], table)


class TestForwardSampling:
    def test_x0_moments(self):
        # x0 = e + sqrt(beta0) z: mean e, variance beta0.
        e = torch.tensor([[1.5, -2.0, 0.5]])
        beta0 = 0.25
        gen = torch_generator(0)
        draws = torch.stack([sample_x0(e, beta0, gen) for _ in range(20000)])
        assert torch.allclose(draws.mean(0), e, atol=0.02)
        assert torch.allclose(draws.var(0), torch.full_like(e, beta0), rtol=0.05)

    def test_xt_interpolates_signal_and_noise(self):
        sched = build_schedule(10)
        x0 = torch.tensor([[2.0, -1.0]])
        gen = torch_generator(1)
        t = 5
        ab = sched.retention(t)
        draws = torch.stack([sample_xt(x0, t, sched, gen) for _ in range(20000)])
        assert torch.allclose(draws.mean(0), math.sqrt(ab) * x0, atol=0.03)
        assert torch.allclose(
            draws.var(0), torch.full_like(x0, 1.0 - ab), rtol=0.05
        )

    def test_final_step_is_pure_noise(self):
        sched = build_schedule(10)
        x0 = torch.full((1, 4), 100.0)
        gen = torch_generator(2)
        draws = torch.stack([sample_xt(x0, 10, sched, gen) for _ in range(5000)])
        # Retention is zero at the last step: the input cannot leak through.
        assert draws.mean().abs() < 0.1
        assert draws.var() == pytest.approx(1.0, rel=0.1)

    def test_per_sample_steps_match_scalar_steps(self):
        sched = build_schedule(10)
        x0 = torch.randn(3, 2, generator=torch_generator(3))
        t = torch.tensor([4, 4, 4])
        a = sample_xt(x0, t, sched, torch_generator(7))
        b = sample_xt(x0, 4, sched, torch_generator(7))
        assert torch.equal(a, b)

    def test_step_out_of_range(self):
        sched = build_schedule(10)
        x0 = torch.zeros(2, 2)
        with pytest.raises(ConfigError):
            sample_xt(x0, 0, sched)
        with pytest.raises(ConfigError):
            sample_xt(x0, torch.tensor([1, 11]), sched)

    def test_beta0_validated(self):
        with pytest.raises(ConfigError):
            sample_x0(torch.zeros(1, 2), 0.0)

    def test_deterministic_under_fixed_generator(self):
        sched = build_schedule(10)
        x0 = torch.randn(2, 3, generator=torch_generator(4))
        a = sample_xt(x0, 3, sched, torch_generator(5))
        b = sample_xt(x0, 3, sched, torch_generator(5))
        assert torch.equal(a, b)
