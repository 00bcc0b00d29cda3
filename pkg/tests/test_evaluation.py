import hashlib
import json
import math

import numpy as np
import pytest

from dynlab.benchmarks import EnvironmentSequence
from dynlab.core import ProblemSpec
from dynlab.evaluation import (
    BlackBox,
    BudgetExhausted,
    EducationRecorder,
    EvaluationLedger,
    peek_fitness,
    record_frame,
    visible_peaks,
)

from conftest import make_sequence, single_peak_state


def ledger_digest(ledger):
    h = hashlib.sha256()
    for name in ("fe_counter", "current_env", "best_so_far", "change_flag", "budget_exhausted"):
        h.update(repr(getattr(ledger, name)).encode())
    for name in ("per_fe_error", "fitness_log", "env_of_fe", "last_error_per_env"):
        h.update(getattr(ledger, name).tobytes())
    return h.hexdigest()


def test_first_evaluation_at_optimum_has_zero_error():
    seq = make_sequence(environment_count=2, change_frequency=10)
    led = EvaluationLedger(seq)
    led.evaluate(seq[1].optimum_position)
    assert led.per_fe_error[0] == 0.0


def test_change_after_cf_evaluations():
    seq = make_sequence(environment_count=3, change_frequency=3, dimension=2)
    led = EvaluationLedger(seq)
    for _ in range(2):
        led.evaluate(np.zeros(2))
    assert led.current_env == 1 and not led.change_flag
    led.evaluate(np.zeros(2))
    assert led.current_env == 2 and led.change_flag
    assert led.env_of_fe[2] == 1  # boundary evaluation charged to the ending environment


def test_best_so_far_semantics():
    # optimum 70; evaluations yield 60 then 50 -> errors 10, 10
    st = single_peak_state("MPB", center=(0.0,), height=70, width=1)
    seq = EnvironmentSequence(ProblemSpec(dimension=1, peak_count=1, change_frequency=5,
                                          environment_count=1, benchmark_id="MPB"), (st,))
    led = EvaluationLedger(seq)
    assert led.evaluate([10.0]) == 60
    assert led.evaluate([20.0]) == 50
    assert led.per_fe_error[:2].tolist() == [10.0, 10.0]


def test_consume_flag_is_read_once():
    seq = make_sequence(environment_count=2, change_frequency=1, dimension=2)
    led = EvaluationLedger(seq)
    assert led.consume_change_flag() is False
    led.evaluate(np.zeros(2))
    assert led.consume_change_flag() is True
    assert led.consume_change_flag() is False


def test_budget_exhaustion():
    seq = make_sequence(environment_count=2, change_frequency=2, dimension=2)
    led = EvaluationLedger(seq)
    led.evaluate(np.zeros((4, 2)))
    assert led.fe_counter == 4 and led.budget_exhausted
    assert not led.change_flag or led.current_env == 2
    with pytest.raises(BudgetExhausted):
        led.evaluate(np.zeros(2))
    assert led.fe_counter == 4


def test_batch_over_budget_counts_what_fits():
    seq = make_sequence(environment_count=1, change_frequency=3, dimension=2)
    led = EvaluationLedger(seq)
    with pytest.raises(BudgetExhausted):
        led.evaluate(np.zeros((5, 2)))
    assert led.fe_counter == 3


def test_batch_straddling_a_change_uses_both_environments(rng):
    seq = make_sequence(environment_count=2, change_frequency=4, dimension=2)
    X = rng.uniform(-50, 50, (6, 2))
    led = EvaluationLedger(seq)
    vals = led.evaluate(X)
    expected = np.concatenate([peek_fitness(X[:4], seq[1]), peek_fitness(X[4:], seq[2])])
    assert np.array_equal(vals, expected)
    assert led.env_of_fe[:6].tolist() == [1, 1, 1, 1, 2, 2]


def test_batch_equals_one_by_one(rng):
    seq = make_sequence(environment_count=3, change_frequency=5, dimension=2)
    X = rng.uniform(-50, 50, (15, 2))
    a, b = EvaluationLedger(seq), EvaluationLedger(seq)
    a.evaluate(X[:7]); a.evaluate(X[7:])
    for x in X:
        b.evaluate(x)
    assert ledger_digest(a) == ledger_digest(b)


def test_peek_does_not_touch_ledger(rng):
    seq = make_sequence(environment_count=2, change_frequency=5, dimension=2)
    led = EvaluationLedger(seq)
    led.evaluate(np.ones(2))
    before = ledger_digest(led)
    peek_fitness(rng.uniform(-50, 50, (10_000, 2)), led.state)
    assert ledger_digest(led) == before
    x = np.array([3.0, -4.0])
    assert peek_fitness(x, led.state) == led.evaluate(x)
    assert led.fe_counter == 2


def test_peek_optimum():
    seq = make_sequence(environment_count=3)
    for st in seq.states:
        assert peek_fitness(st.optimum_position, st) == pytest.approx(st.optimum_value, abs=1e-9)


def test_errors_non_increasing_within_environment(rng):
    seq = make_sequence(environment_count=4, change_frequency=50, dimension=2)
    led = EvaluationLedger(seq)
    led.evaluate(rng.uniform(-50, 50, (200, 2)))
    err = led.per_fe_error.reshape(4, 50)
    assert np.all(np.diff(err, axis=1) <= 0) and np.all(err >= 0)


def test_blackbox_hides_ledger():
    seq = make_sequence(environment_count=1, change_frequency=5, dimension=2)
    box = BlackBox(EvaluationLedger(seq))
    assert box.dimension == 2 and box.bounds == (-50.0, 50.0)
    assert not hasattr(box, "sequence") and not hasattr(box, "__dict__")


def test_visible_peaks_excludes_covered_peak():
    import dataclasses
    # tall wide peak at 0 covers a short one at 1
    base = single_peak_state("MPB", center=(0.0, 0.0), height=70, width=1)
    st = dataclasses.replace(base, centers=np.array([[0.0, 0.0], [1.0, 0.0], [40.0, 40.0]]),
                             heights=np.array([70.0, 40.0, 35.0]),
                             widths=np.array([1.0, 5.0, 2.0]))
    assert visible_peaks(st).tolist() == [0, 2]


def test_recorder_one_grid_per_environment(rng):
    seq = make_sequence(environment_count=10, change_frequency=20, dimension=2)
    led = EvaluationLedger(seq)
    rec = EducationRecorder(True, grid_resolution=12)
    it = 0
    while led.fe_counter < led.fe_max:
        led.evaluate(rng.uniform(-50, 50, (5, 2)))
        it += 1
        record_frame(rec, led, [np.zeros((3, 2))], it)
    assert sorted(rec.grids) == list(range(1, 11))
    assert all(g.shape == (12, 12) for g in rec.grids.values())
    firsts = [f for f in rec.frames if f.visible_centers is not None]
    assert len(firsts) == 10
    json.loads(json.dumps(rec.frames[0].to_dict()))


def test_recorder_requires_two_dimensions():
    seq = make_sequence(environment_count=1, change_frequency=5, dimension=3)
    with pytest.raises(ValueError):
        EducationRecorder().record_frame(EvaluationLedger(seq), [], 0)
