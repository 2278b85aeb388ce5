import numpy as np
import pytest

from wncs.lti import DiscreteTf
from wncs.plant import EncoderConfig, encoder_read, make_motor, motor_step


class TestMotor:
    def test_full_duty_startup_sequence(self):
        # strictly proper model: zero on the first sample, then
        # 0.0831 * 200 = 16.62 rev/s, then 0.0831 * 1.92 * 200
        motor = make_motor()
        assert motor_step(motor, 255) == 0.0
        assert motor_step(motor, 255) == pytest.approx(16.62)
        assert motor_step(motor, 255) == pytest.approx(31.9104)

    def test_steady_state_speed(self):
        # dc gain 0.0831/0.08 over the 0..255 -> 0..200 scaling
        motor = make_motor()
        speed = 0.0
        for _ in range(600):
            speed = motor_step(motor, 255)
        assert speed == pytest.approx(0.0831 / 0.08 * 200.0, rel=1e-6)

    def test_zero_duty_stays_at_rest(self):
        motor = make_motor()
        assert all(motor_step(motor, 0) == 0.0 for _ in range(10))

    @pytest.mark.parametrize("duty", [-1, 256, 1000])
    def test_duty_range_enforced(self, duty):
        with pytest.raises(ValueError):
            motor_step(make_motor(), duty)

    def test_custom_dynamics(self):
        # unity passthrough makes the scaling chain visible: 51/255*200 = 40
        motor = make_motor(DiscreteTf((1.0,), (1.0,), 0.02))
        assert motor_step(motor, 51) == pytest.approx(40.0)


class TestEncoderConfig:
    def test_stock_resolution(self):
        assert EncoderConfig().resolution == pytest.approx(2.5)

    def test_resolution_scales_with_geometry(self):
        assert EncoderConfig(slots=10, window=0.05).resolution == pytest.approx(2.0)

    def test_bad_slots(self):
        with pytest.raises(ValueError):
            EncoderConfig(slots=0)

    def test_bad_window(self):
        with pytest.raises(ValueError):
            EncoderConfig(window=0.0)


class TestEncoderRead:
    def test_exact_multiple_passes_through(self):
        assert encoder_read(EncoderConfig(), 100.0) == 100

    def test_fraction_floors_to_transition_count(self):
        # 102.6/2.5 = 41.04 -> 41 transitions -> round(102.5) = 103
        assert encoder_read(EncoderConfig(), 102.6) == 103

    def test_sub_resolution_residual_drops(self):
        assert encoder_read(EncoderConfig(), 101.0) == 100

    def test_below_one_transition_reads_zero(self):
        assert encoder_read(EncoderConfig(), 2.4) == 0

    def test_clips_to_byte_range(self):
        assert encoder_read(EncoderConfig(), 1000.0) == 255

    def test_negative_speed_rejected(self):
        with pytest.raises(ValueError):
            encoder_read(EncoderConfig(), -1.0)

    def test_jitter_requires_rng(self):
        with pytest.raises(ValueError):
            encoder_read(EncoderConfig(jitter=True), 100.0)

    def test_jitter_moves_one_transition_at_most(self):
        config = EncoderConfig(jitter=True)
        seen = {
            encoder_read(config, 100.0, rng=np.random.default_rng(seed))
            for seed in range(40)
        }
        # 39, 40, or 41 transitions: round(97.5), 100, round(102.5)
        assert seen <= {98, 100, 103}
        assert len(seen) > 1

    def test_jitter_clamps_at_standstill(self):
        config = EncoderConfig(jitter=True)
        for seed in range(40):
            byte = encoder_read(config, 0.0, rng=np.random.default_rng(seed))
            assert byte in (0, 3)

    def test_jitter_is_seed_deterministic(self):
        config = EncoderConfig(jitter=True)
        rng_a = np.random.default_rng(7)
        rng_b = np.random.default_rng(7)
        a = [encoder_read(config, 50.0, rng=rng_a) for _ in range(5)]
        b = [encoder_read(config, 50.0, rng=rng_b) for _ in range(5)]
        assert a == b
