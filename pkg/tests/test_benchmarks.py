import json
import math

import numpy as np
import pytest

from dynlab.benchmarks import (
    apply_dynamics,
    export_sequence,
    generate_sequence,
    gmpb_fitness,
    gmpb_transform,
    mpb_fitness,
    optimum_of,
    rotation_from_angle,
    sequence_digest,
)
from dynlab.core import ProblemSpec, RandomStreams

from conftest import make_sequence, single_peak_state


def test_single_environment_has_no_dynamics():
    seq = make_sequence(environment_count=1)
    assert len(seq) == 1 and seq[1].env_index == 1


@pytest.mark.parametrize("bench", ["MPB", "GMPB"])
def test_same_seed_same_sequence(bench):
    a = make_sequence(benchmark_id=bench, environment_count=6, seed=3)
    b = make_sequence(benchmark_id=bench, environment_count=6, seed=3)
    assert sequence_digest(a) == sequence_digest(b)
    for sa, sb in zip(a.states, b.states):
        assert np.array_equal(sa.centers, sb.centers)
        assert np.array_equal(sa.heights, sb.heights)
    assert sequence_digest(make_sequence(benchmark_id=bench, environment_count=6, seed=4)) \
        != sequence_digest(a)


@pytest.mark.parametrize("bench", ["MPB", "GMPB"])
def test_attributes_stay_in_ranges(bench):
    spec = ProblemSpec(benchmark_id=bench, environment_count=60, dimension=3,
                       shift_severity=5.0)
    seq = generate_sequence(spec, RandomStreams.benchmark(11))
    for st in seq.states:
        assert np.all((st.heights >= 30) & (st.heights <= 70))
        assert np.all((st.widths >= 1) & (st.widths <= 12))
        assert np.all((st.centers >= -50) & (st.centers <= 50))
        if bench == "GMPB":
            assert np.all((st.taus >= 0) & (st.taus <= 0.4))
            assert np.all((st.etas >= 10) & (st.etas <= 25))
            assert np.all((st.angles >= -math.pi) & (st.angles <= math.pi))
            for R in st.rotations:
                assert np.allclose(R.T @ R, np.eye(3), atol=1e-9)


def test_zero_severities_leave_state_unchanged():
    spec = ProblemSpec(shift_severity=0, height_severity=0, width_severity=0, tau_severity=0,
                       eta_severity=0, angle_severity=0, environment_count=2, dimension=4)
    seq = generate_sequence(spec, RandomStreams.benchmark(5))
    a, b = seq[1], seq[2]
    assert b.env_index == 2
    for name in ("centers", "heights", "widths", "taus", "etas", "angles"):
        assert np.array_equal(getattr(a, name), getattr(b, name))


def test_shift_length_equals_severity():
    spec = ProblemSpec(benchmark_id="MPB", shift_severity=1.0, environment_count=2)
    seq = generate_sequence(spec, RandomStreams.benchmark(8))
    moved = np.linalg.norm(seq[2].centers - seq[1].centers, axis=1)
    interior = np.all(np.abs(seq[2].centers) < 49, axis=1)
    assert interior.any()
    assert np.allclose(moved[interior], 1.0, atol=1e-12)


def test_mpb_cone_values():
    st = single_peak_state("MPB", center=(0.0, 0.0), height=50, width=1)
    assert mpb_fitness([0.0, 0.0], st) == 50
    assert mpb_fitness([6.0, 8.0], st) == pytest.approx(40)
    st12 = single_peak_state("MPB", center=(0.0, 0.0), height=50, width=12)
    assert mpb_fitness([6.0, 8.0], st12) == pytest.approx(-70)


def test_transform_identities(rng):
    assert gmpb_transform(0.0, 0.3, [11, 12, 13, 14]) == 0
    assert gmpb_transform(3.7, 0.0, [11, 12, 13, 14]) == pytest.approx(3.7, abs=1e-12)
    for tau in (0.0, 0.1, 0.4):
        assert gmpb_transform(1.0, tau, rng.uniform(10, 25, 4)) == pytest.approx(1.0, abs=1e-15)
        assert gmpb_transform(-1.0, tau, rng.uniform(10, 25, 4)) == pytest.approx(-1.0, abs=1e-15)


def test_transform_negative_branch_uses_second_pair():
    y = -2.0
    expected = -math.exp(math.log(2) + 0.2 * (math.sin(13 * math.log(2)) + math.sin(14 * math.log(2))))
    assert gmpb_transform(y, 0.2, [11, 12, 13, 14]) == pytest.approx(expected, rel=1e-14)


def test_gmpb_one_dimensional_hand_example():
    # independent scalar evaluation of the transform chain at x = e, c = 0
    t = math.exp(1.0 + 0.2 * (math.sin(10.0) + math.sin(10.0)))
    expected = 50.0 - math.sqrt((2.0 * t) ** 2)
    st = single_peak_state("GMPB", center=(0.0,), height=50, width=2, tau=0.2)
    assert gmpb_fitness([math.e], st) == pytest.approx(expected, abs=1e-12)
    assert expected == pytest.approx(45.62661, abs=1e-5)


def test_gmpb_apex_equals_height():
    seq = make_sequence(environment_count=3)
    for st in seq.states:
        for k in range(st.peak_count):
            assert gmpb_fitness(st.centers[k], st) >= st.heights[k] - 1e-9


def test_gmpb_reduces_to_cone(rng):
    d = 3
    st_g = single_peak_state("GMPB", center=(1.0, -2.0, 3.0), height=60, width=4, tau=0.0)
    st_m = single_peak_state("MPB", center=(1.0, -2.0, 3.0), height=60, width=4)
    X = rng.uniform(-50, 50, (1000, d))
    assert np.allclose(gmpb_fitness(X, st_g), mpb_fitness(X, st_m), atol=1e-9, rtol=0)


def test_rotation_angle_zero_is_identity(rng):
    assert np.array_equal(rotation_from_angle(0.0, 5, rng), np.eye(5))
    assert np.array_equal(rotation_from_angle(1.0, 1, rng), np.eye(1))


def test_rotation_orthonormal(rng):
    for d in (2, 3, 5, 10):
        R = rotation_from_angle(rng.uniform(-3, 3), d, rng)
        assert np.allclose(R.T @ R, np.eye(d), atol=1e-9)


def test_rotation_quarter_turn_2d(rng):
    R = rotation_from_angle(math.pi / 2, 2, rng)
    quarter = np.array([[0.0, -1.0], [1.0, 0.0]])
    assert np.allclose(R, quarter, atol=1e-12) or np.allclose(R, quarter.T, atol=1e-12)


def test_optimum_of_argmax():
    seq = make_sequence(peak_count=3, environment_count=1)
    st = seq[1]
    val, pos = optimum_of(st)
    k = int(np.argmax(st.heights))
    assert val == st.heights[k] and np.array_equal(pos, st.centers[k])


@pytest.mark.parametrize("bench", ["MPB", "GMPB"])
def test_optimum_cross_check(bench, rng):
    seq = make_sequence(benchmark_id=bench, environment_count=5, dimension=2)
    f = mpb_fitness if bench == "MPB" else gmpb_fitness
    for st in seq.states:
        assert f(st.optimum_position, st) == pytest.approx(st.optimum_value, abs=1e-9)
        assert np.max(f(rng.uniform(-50, 50, (10_000, 2)), st)) <= st.optimum_value + 1e-9


def test_export_roundtrip(tmp_path):
    seq = make_sequence(environment_count=2, dimension=2)
    doc = json.loads(export_sequence(seq, tmp_path / "seq.json").read_text())
    assert doc["spec"]["dimension"] == 2 and len(doc["environments"]) == 2
    assert doc["environments"][1]["heights"] == seq[2].heights.tolist()


def test_states_are_read_only():
    st = make_sequence(environment_count=1)[1]
    with pytest.raises(ValueError):
        st.heights[0] = 0.0


def test_apply_dynamics_increments_index():
    spec = ProblemSpec(environment_count=1)
    stream = RandomStreams.benchmark(1)
    st = generate_sequence(spec, stream)[1]
    assert apply_dynamics(st, spec, stream).env_index == 2
