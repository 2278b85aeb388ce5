"""Release acceptance suite: one test per headline requirement.

Every expected number here is an oracle fixed before the code ran:
a closed-form hand evaluation, an independently tabulated reference
score, or (for the delay estimator) a clean-room reimplementation of
the published update rules driven with identical inputs. Tolerances
are the ones the package commits to in README.md. Each test stands
alone; the per-module suites cover the finer-grained contracts.
"""

import math
import time

import numpy as np

from wncs import cli
from wncs.delay_approx import ApproxKind, discretize_series, ise_table
from wncs.delay_est import EstimatorState, replay_capture
from wncs.lti import DiscreteTf, filter_sequence, zoh_discretize_first_order
from wncs.models import (
    DEFAULT_KI,
    DEFAULT_KP,
    MOTOR_GAIN,
    MOTOR_POLE,
    SAMPLE_TIME,
    motor_ct_tf,
    pulse_tf_exact,
    pulse_tf_nominal,
)
from wncs.pid import PiGains, root_locus_design_report
from wncs.scenario import (
    PRESET_NAMES,
    apply_smith_variant,
    compute_metrics,
    preset_config,
    run_closed_loop,
    with_total_fixed_delay,
)
from wncs.smith import predictor_identity_check
from wncs.stability import encirclements, nyquist_locus, phase_margin
from wncs.sysid import SampleSeries, fit_arx, percent_fit


def test_c01_zoh_discretization_of_identified_motor():
    """Step-invariant map of the identified motor lands on the device
    coefficients and on the closed form, fast enough for per-tick use."""
    t0 = time.perf_counter()
    for _ in range(1000):
        tf = zoh_discretize_first_order(MOTOR_GAIN, MOTOR_POLE, SAMPLE_TIME)
    per_call = (time.perf_counter() - t0) / 1000
    pole = -tf.den[1]
    gain = tf.num[1]
    # firmware carries the rounded pair 0.92 / 0.0831
    assert abs(pole - 0.92) <= 0.006
    assert abs(gain - 0.0831) <= 0.004
    # hand evaluation of p = exp(-a T), b = (K/a)(1 - p)
    assert abs(pole - 0.9251864446470165) < 1e-9
    assert abs(gain - 0.0800281833109718) < 1e-9
    assert per_call < 1e-3


def test_c02_root_locus_pi_design():
    """The design path reproduces the documented pole placement on the
    device-coefficient plant: dominant pole, PI zero, loop gain, and a
    magnitude criterion satisfied to numerical precision."""
    report = root_locus_design_report(pulse_tf_nominal(), zeta=0.94, wd_over_ws=0.1)
    assert abs(report.target_pole.real - 0.143) <= 0.002
    assert abs(report.target_pole.imag - 0.104) <= 0.002
    assert abs(report.zero - 0.54) <= 0.01
    assert abs(report.loop_gain - 19.83) <= 0.2
    assert report.magnitude_residual < 1e-9


# Estimate trajectory of the bundled loopback capture, worked by hand
# from the four update rules (vacant growth, then a late first reply).
REPLAY_TM = [0, 20, 40, 60, 74, 60, 63, 50, 60]


def _oracle_events(seed, n_sends, period):
    """Channel realization for one seed: 85% of frames draw a fast
    round trip in [0, 90) ms, 15% a slow one in [90, 300) ms; delivery
    order is FIFO so a slow frame drags the ones queued behind it."""
    rng = np.random.default_rng(seed)
    slow_mask = rng.random(n_sends) < 0.15
    slow = rng.integers(90, 300, n_sends)
    fast = rng.integers(0, 90, n_sends)
    raw = np.where(slow_mask, slow, fast)
    deliver = np.empty(n_sends, dtype=np.int64)
    last = 0
    for k in range(n_sends):
        last = max(last, k * period + int(raw[k]))
        deliver[k] = last
    # the controller polls before it sends, so a frame sent on tick k is
    # visible no earlier than tick k+1
    ticks = np.maximum(np.arange(n_sends) + 1, -(-deliver // period))
    return deliver, ticks


def _assert_estimator_matches_oracle(seed, n_sends=50, period=20):
    deliver, ticks = _oracle_events(seed, n_sends, period)
    n_ticks = max(n_sends, int(ticks.max()) + 1)
    arrivals_at = [[] for _ in range(n_ticks)]
    for k in range(n_sends):
        arrivals_at[ticks[k]].append(k)

    # unit under test: one estimator driven tick by tick
    est = EstimatorState()
    got = []
    for j in range(n_ticks):
        for k in arrivals_at[j]:
            est.on_receive(k, int(deliver[k]))
        tm, event = est.estimate_at_sample(j * period, period)
        got.append((tm, event.value))
        if j < n_sends:
            est.on_send(j, j * period)

    # clean-room restatement of the update rules, sharing no code with
    # the estimator: literal transcription of the four regimes
    want = []
    tm = 0
    started = False
    for j in range(n_ticks):
        arr = arrivals_at[j]
        if not arr:
            if started:
                tm += period
            want.append((tm, "vacant"))
        else:
            newest = arr[-1]
            rtt = int(deliver[newest]) - newest * period
            tm = rtt
            if len(arr) >= 2:
                kind = "rejection"
            elif rtt < period:
                kind = "normal"
            else:
                kind = "delayed"
            want.append((tm, kind))
        if j < n_sends:
            started = True

    assert got == want, f"estimator diverged from rule oracle on seed {seed}"


def test_c03_delay_estimator_replay_and_rule_oracle():
    """The loopback capture replays to the hand-worked estimate column,
    and on 1000 random channel realizations the estimator agrees with a
    brute-force application of its published rules, sample for sample."""
    state = replay_capture()
    assert [row[3] for row in state.log] == REPLAY_TM
    for seed in range(1000):
        _assert_estimator_matches_oracle(seed)


TABLE_TAUS = (0.04, 0.12, 0.24, 0.3, 1.0)

# Approximation-error scores for the same experiment from an independent
# reference implementation (different integrator and step), which is why
# agreement is expected at the 25% level rather than digit-for-digit.
REFERENCE_ISE = {
    "pade2": (0.0057, 0.0172, 0.0345, 0.0431, 0.1437),
    "product": (0.0054, 0.0161, 0.0321, 0.0402, 0.1339),
    "laguerre": (0.0068, 0.0203, 0.0406, 0.0507, 0.169),
    "paynter": (0.0058, 0.0174, 0.0347, 0.0434, 0.1447),
    "dfr": (0.0053, 0.016, 0.0319, 0.0399, 0.1331),
}


def test_c04_delay_approximation_ise_table():
    """Step-response ISE of every series vs the true delay: matches the
    reference scores within 25%, Marshall is two orders worse across the
    board, and the average ranking dfr <= product <= pade2 holds."""
    t0 = time.perf_counter()
    rows = ise_table(TABLE_TAUS)
    wall = time.perf_counter() - t0
    scores = {kind.value: s for kind, s, _ in rows}
    avgs = {kind.value: avg for kind, _, avg in rows}

    for name, refs in REFERENCE_ISE.items():
        for tau, got, ref in zip(TABLE_TAUS, scores[name], refs):
            assert abs(got - ref) <= 0.25 * ref, (
                f"{name} at tau={tau}: {got:.5f} vs reference {ref:.5f}"
            )
    for i, tau in enumerate(TABLE_TAUS):
        worst_other = max(scores[name][i] for name in REFERENCE_ISE)
        assert scores["marshall"][i] > 100.0 * worst_other, (
            f"marshall at tau={tau} is not >100x the rest"
        )
    assert wall < 30.0
    assert avgs["product"] <= avgs["pade2"]
    assert avgs["dfr"] <= avgs["product"], (
        "average-ISE ranking dfr <= product does not hold under the "
        f"shipped oracle: dfr {avgs['dfr']:.5f} > product {avgs['product']:.5f}"
    )


def test_c05_dfr_discretization_closed_form():
    """Bilinear discretization of the dfr series at T=0.02 equals the
    hand-expanded closed form (2/T = 100) to 1e-12."""
    for tau in (0.06, 0.24, 0.4):
        got = discretize_series(ApproxKind.DFR, tau, 0.02)
        c = 1.0 + 100.0 * tau * (9.54 * tau - 0.49)
        d = 2.0 - 1908.0 * tau * tau
        e = 1.0 + 100.0 * tau * (9.54 * tau + 0.49)
        want_num = (c / e, d / e, 1.0)
        want_den = (1.0, d / e, c / e)
        assert len(got.num) == 3 and len(got.den) == 3
        for a, b in zip(got.num, want_num):
            assert abs(a - b) < 1e-12, f"tau={tau} numerator off: {a} vs {b}"
        for a, b in zip(got.den, want_den):
            assert abs(a - b) < 1e-12, f"tau={tau} denominator off: {a} vs {b}"


def test_c06_predictor_identity():
    """With a perfect internal model the compensated loop equals the
    delay-shifted delay-free loop for every delay up to 30 samples; a
    deliberately wrong model pole breaks the cancellation."""
    controller = PiGains(DEFAULT_KP, DEFAULT_KI, SAMPLE_TIME)
    plant = pulse_tf_nominal()
    worst = max(
        predictor_identity_check(controller, plant, d) for d in range(1, 31)
    )
    assert worst < 1e-9
    mismatched = DiscreteTf(num=(0.0, 0.0831), den=(1.0, -0.90), sample_time=SAMPLE_TIME)
    assert predictor_identity_check(controller, plant, 10, model=mismatched) > 1e-3


# Phase margins of the identified loop under transport delay, read off
# reference plots of the same system (graphical source, hence the
# 2.5 degree allowance).
MARGIN_ROWS = (
    (0.0, 159.19),
    (0.04, 156.68),
    (0.12, 148.73),
    (0.18, 144.83),
    (0.24, 139.30),
    (0.30, 134.02),
    (0.40, 126.31),
    (0.60, 106.0),
    (1.0, 74.53),
    (2.0, -10.11),
)


def test_c07_phase_margin_vs_transport_delay():
    """Tabulated margins reproduce within 2.5 degrees, the margin is
    affine in the delay, and the loop flips unstable between 1 s and 2 s
    with the encirclement count following."""
    plant = motor_ct_tf()
    reports = {tau: phase_margin(plant, tau) for tau, _ in MARGIN_ROWS}
    for tau, ref in MARGIN_ROWS:
        got = reports[tau].phase_margin_deg
        assert abs(got - ref) <= 2.5, f"tau={tau}: {got:.2f} vs {ref}"
    # delay subtracts w_g * tau (in degrees) from the zero-delay margin
    wg = reports[0.0].gain_crossover_omega
    pm0 = reports[0.0].phase_margin_deg
    for tau, _ in MARGIN_ROWS:
        want = pm0 - math.degrees(wg * tau)
        assert abs(reports[tau].phase_margin_deg - want) < 1e-9
    assert reports[1.0].stable
    assert not reports[2.0].stable
    assert encirclements(nyquist_locus(plant, 1.0)) == 0
    assert encirclements(nyquist_locus(plant, 2.0)) >= 1


def _metrics_for(variant, total_delay_ms):
    cfg = with_total_fixed_delay(preset_config("p2p-80ms"), total_delay_ms)
    cfg = apply_smith_variant(cfg, variant)
    t0 = time.perf_counter()
    record = run_closed_loop(cfg)
    wall = time.perf_counter() - t0
    assert wall < 1.0, f"{variant} at {total_delay_ms} ms took {wall:.2f} s"
    return compute_metrics(record)


def test_c08_closed_loop_degradation_and_compensation():
    """25 s closed-loop runs: uncompensated tracking degrades monotonically
    with fixed round-trip delay, the adaptive compensator restores it at
    every delay that hurts, and the dfr variant averages no worse than the
    pade variant."""
    delays = (0, 80, 240, 300, 400)
    pi_only = {d: _metrics_for("off", d) for d in delays}
    trail = [pi_only[d].trailing_half_ise for d in delays]
    assert all(a <= b for a, b in zip(trail, trail[1:])), trail
    assert pi_only[400].trailing_half_ise > 5 * pi_only[80].trailing_half_ise

    hurt = (240, 300, 400)
    dfr = {d: _metrics_for("adaptive-dfr", d) for d in hurt}
    pade = {d: _metrics_for("adaptive-pade", d) for d in hurt}
    for d in hurt:
        assert dfr[d].trailing_half_ise < pi_only[d].trailing_half_ise

    dfr_avg = sum(dfr[d].ise for d in hurt) / len(hurt)
    pade_avg = sum(pade[d].ise for d in hurt) / len(hurt)
    assert dfr_avg <= pade_avg, (
        "adaptive-dfr average ISE should not exceed adaptive-pade: "
        f"dfr {dfr_avg:.1f} > pade {pade_avg:.1f}"
    )


def test_c09_preset_simulations_are_deterministic(tmp_path):
    """Two identical invocations of every simulate preset produce
    byte-identical output files."""
    for preset in PRESET_NAMES:
        outs = []
        for label in ("a", "b"):
            out = tmp_path / f"{preset}-{label}"
            assert cli.main([
                "simulate", "--preset", preset, "--seed", "3", "--out", str(out),
            ]) == 0
            outs.append(out)
        for name in ("run.csv", "metrics.csv", "estimator.csv"):
            first = (outs[0] / name).read_bytes()
            second = (outs[1] / name).read_bytes()
            assert first == second, f"{preset}/{name} differs between runs"


def test_c10_arx_roundtrip_and_fit_metric():
    """A first-order fit on noise-free self-generated data recovers the
    generating coefficients, and the fit metric is exactly 100 on a
    perfect prediction."""
    tf = pulse_tf_exact()
    rng = np.random.default_rng(2)
    u = rng.uniform(0.0, 1.0, 300)
    y = filter_sequence(tf, u)
    model = fit_arx(SampleSeries(tf.sample_time, u, y), 1, 1, 1)
    assert abs(model.a_coeffs[0] - tf.den[1]) < 1e-8
    assert abs(model.b_coeffs[0] - tf.num[1]) < 1e-8
    assert percent_fit(y, y) == 100.0
