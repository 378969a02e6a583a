import math

import numpy as np
import pytest

from kljn.config import SystemConfig
from kljn.decision import CombinedOutcome, Interpretation
from kljn.estimator import Measurement
from kljn.protocol import (
    ACTUAL_STATES,
    PeriodRecord,
    extract_key,
    key_to_hex,
    run_session,
    simulate_period,
    wilson_interval,
)


def small_config(**kw):
    defaults = dict(alpha=10.0, gamma=50.0, n_periods=200, master_seed=3)
    defaults.update(kw)
    return SystemConfig(**defaults)


class TestSimulatePeriod:
    def test_deterministic(self):
        cfg = small_config()
        a = simulate_period(cfg, 7, master_seed=123)
        b = simulate_period(cfg, 7, master_seed=123)
        assert a == b

    def test_seed_changes_result(self):
        cfg = small_config()
        a = simulate_period(cfg, 7, master_seed=123)
        b = simulate_period(cfg, 7, master_seed=124)
        assert a.measurement != b.measurement

    def test_forced_exact_levels_secure(self):
        cfg = small_config()
        levels = cfg.levels()
        rec = simulate_period(
            cfg,
            0,
            master_seed=1,
            forced_bits=(0, 1),
            forced_measurement=Measurement(msv=levels.v_0110, msi=levels.i_0110),
        )
        assert rec.outcome is CombinedOutcome.KEEP_SECURE
        assert rec.actual == "0110"

    def test_forced_exact_levels_00(self):
        cfg = small_config()
        levels = cfg.levels()
        rec = simulate_period(
            cfg,
            0,
            master_seed=1,
            forced_bits=(0, 0),
            forced_measurement=Measurement(msv=levels.v_00, msi=levels.i_00),
        )
        assert rec.outcome is CombinedOutcome.DISCARD_INSECURE_00

    def test_force_state_pins_bits(self):
        cfg = small_config()
        rec = simulate_period(cfg, 4, master_seed=5, force_state="11")
        assert (rec.bit_alice, rec.bit_bob) == (1, 1)
        rec = simulate_period(cfg, 4, master_seed=5, force_state="0110")
        assert rec.bit_alice != rec.bit_bob

    def test_outcome_consistent_with_interps(self):
        from kljn.decision import combine

        cfg = small_config()
        for idx in range(20):
            rec = simulate_period(cfg, idx, master_seed=9)
            assert rec.outcome is combine(rec.v_interp, rec.i_interp)


class TestRunSession:
    def test_single_period_report(self):
        cfg = small_config()
        report = run_session(cfg, 1, master_seed=2)
        assert report.n_periods == 1
        total = sum(
            sum(report.combined_counts[s].values()) for s in ACTUAL_STATES
        )
        assert total == 1

    def test_accounting_closure(self):
        cfg = small_config()
        n = 1000
        report = run_session(cfg, n, master_seed=11)
        assert sum(sum(report.combined_counts[s].values()) for s in ACTUAL_STATES) == n
        for mat in (report.confusion_v, report.confusion_i):
            for a_code, a_name in enumerate(ACTUAL_STATES):
                assert sum(mat[a_code]) == report.moment_sums[a_name][0]

    def test_secure_fraction_near_half(self):
        cfg = small_config()
        n = 4000
        report = run_session(cfg, n, master_seed=13)
        n_secure = report.moment_sums["0110"][0]
        # 4-sigma binomial window around 1/2
        assert abs(n_secure - n / 2) < 4 * math.sqrt(n * 0.25)

    def test_matches_per_period_simulation(self):
        cfg = small_config()
        report, records = run_session(cfg, 25, master_seed=17, keep_records=True)
        for rec in records:
            assert rec == simulate_period(cfg, rec.index, master_seed=17)

    def test_parallel_identical_to_serial(self):
        cfg = small_config()
        serial = run_session(cfg, 300, master_seed=19)
        parallel = run_session(cfg, 300, master_seed=19, workers=3)
        assert serial.to_dict() == parallel.to_dict()

    def test_forced_state_conditioning(self):
        cfg = small_config()
        report = run_session(cfg, 500, master_seed=23, force_state="11")
        assert report.moment_sums["11"][0] == 500
        assert report.moment_sums["00"][0] == 0
        assert report.eps_hat_i_00.p is None  # undefined, not zero
        assert report.eps_hat_i_11.p is not None

    def test_undefined_rates_at_tiny_n(self):
        cfg = small_config()
        report = run_session(cfg, 1, master_seed=2, force_state="0110")
        assert report.eps_hat_i_11.p is None
        assert report.fidelity is not None

    def test_rejects_empty_session(self):
        with pytest.raises(ValueError):
            run_session(small_config(), 0, master_seed=1)

    def test_msq_correlation_diagnostic(self):
        cfg = small_config()
        report = run_session(cfg, 2000, master_seed=29, force_state="11")
        corr = report.msq_correlation("11")
        assert abs(corr) < 4 / math.sqrt(2000)


class TestKeyExtraction:
    @staticmethod
    def record(bits, outcome, index=0):
        return PeriodRecord(
            index=index,
            bit_alice=bits[0],
            bit_bob=bits[1],
            measurement=Measurement(msv=1.0, msi=1.0),
            v_interp=Interpretation.SECURE_0110,
            i_interp=Interpretation.SECURE_0110,
            outcome=outcome,
        )

    def test_kept_secure_periods_agree(self):
        recs = [
            self.record((0, 1), CombinedOutcome.KEEP_SECURE),
            self.record((1, 0), CombinedOutcome.KEEP_SECURE, 1),
            self.record((0, 0), CombinedOutcome.DISCARD_INSECURE_00, 2),
        ]
        alice, bob = extract_key(recs)
        assert alice == [0, 1]
        assert bob == [0, 1]

    def test_wrongly_kept_insecure_period_mismatches(self):
        recs = [self.record((0, 0), CombinedOutcome.KEEP_SECURE)]
        alice, bob = extract_key(recs)
        assert alice == [0] and bob == [1]

    def test_session_keys_agree_when_no_dangerous_errors(self):
        cfg = small_config(gamma=100.0)
        report, records = run_session(cfg, 400, master_seed=31, keep_records=True)
        alice, bob = extract_key(records)
        mismatches = sum(a != b for a, b in zip(alice, bob))
        dangerous = (
            report.combined_counts["00"][CombinedOutcome.KEEP_SECURE.value]
            + report.combined_counts["11"][CombinedOutcome.KEEP_SECURE.value]
        )
        assert len(alice) == len(bob)
        assert mismatches == dangerous

    def test_key_to_hex(self):
        assert key_to_hex([]) == ""
        assert key_to_hex([1, 0, 1, 0, 1, 0, 1, 0]) == "aa"
        assert key_to_hex([1]) == "80"  # MSB-first with zero padding


class TestWilsonInterval:
    def test_endpoints_clamped(self):
        lo, hi = wilson_interval(0, 100)
        assert lo == 0.0 and hi < 0.05
        lo, hi = wilson_interval(100, 100)
        assert hi == 1.0 and lo > 0.95

    def test_contains_point_estimate(self):
        lo, hi = wilson_interval(7, 50)
        assert lo < 7 / 50 < hi

    def test_invalid_counts(self):
        with pytest.raises(ValueError):
            wilson_interval(5, 0)
        with pytest.raises(ValueError):
            wilson_interval(6, 5)
