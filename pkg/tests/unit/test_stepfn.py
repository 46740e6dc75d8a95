# External imports
import numpy as np
import pytest

# Own imports
from spectral.stepfn import (
    StepFunction,
    from_counts,
    from_samples,
    mix,
    sup_distance,
    sup_distance_to,
)


def test_from_samples_cumulates_masses():
    f = from_samples([1.0, 0.0], [0.5, 0.5])
    assert f(-1.0) == 0.0
    assert f(0.0) == 0.5
    assert f(0.5) == 0.5
    assert f(1.0) == 1.0
    assert f.total == 1.0
    assert f.is_nondecreasing


def test_from_samples_merges_nearby_values():
    f = from_samples([1.0, 1.0 + 1e-12, 2.0], [0.25, 0.25, 0.5])
    assert list(f.breakpoints) == [1.0, 2.0]
    assert f(1.0) == 0.5


def test_from_samples_rejects_bad_masses():
    with pytest.raises(ValueError):
        from_samples([0.0, 1.0], [0.8, 0.8])
    with pytest.raises(ValueError):
        from_samples([0.0], [-0.1])
    with pytest.raises(ValueError):
        from_samples([0.0, 1.0], [1.0])


def test_step_function_validates_breakpoints():
    with pytest.raises(ValueError):
        StepFunction(np.array([1.0, 0.0]), np.array([0.5, 1.0]))
    with pytest.raises(ValueError):
        StepFunction(np.array([0.0]), np.array([1.5]))


def test_vectorized_call_and_left_limit():
    f = from_samples([0.0, 2.0], [0.5, 0.5])
    assert list(f(np.array([-1.0, 0.0, 1.0, 2.0]))) == [0.0, 0.5, 0.5, 1.0]
    assert f.left_limit(2.0) == 0.5
    assert f.left_limit(0.0) == 0.0


def test_complement_starts_at_one():
    f = from_samples([0.0, 1.0], [0.25, 0.75])
    g = f.complement()
    assert g.initial == 1.0
    assert g(-5.0) == 1.0
    assert g(0.5) == 0.75
    assert g(1.0) == 0.0


def test_translate_and_jumps():
    f = from_samples([0.0, 1.0], [0.25, 0.75])
    moved = f.translate(2.0)
    assert moved(2.0) == f(0.0)
    assert moved(1.9) == 0.0
    jumps = f.jumps()
    assert [b for b, _ in jumps] == [0.0, 1.0]
    assert sum(size for _, size in jumps) == pytest.approx(1.0)


def test_sup_distance_between_point_masses():
    f = from_samples([0.0], [1.0])
    g = from_samples([1.0], [1.0])
    assert sup_distance(f, g) == 1.0
    assert sup_distance(f, f) == 0.0


def test_sup_distance_ignores_round_off_in_breakpoints():
    f = from_samples([1.0], [1.0])
    g = from_samples([1.0 + 1e-11], [1.0])
    assert sup_distance(f, g) == 0.0


def test_sup_distance_counts_the_initial_value():
    f = from_samples([0.0], [1.0])
    assert sup_distance(f, f.complement()) == 1.0


def test_mix_is_a_convex_combination():
    f = mix([(0.5, from_samples([0.0], [1.0])), (0.5, from_samples([1.0], [1.0]))])
    assert f(-0.5) == 0.0
    assert f(0.5) == 0.5
    assert f(1.0) == 1.0


def test_mix_rejects_weights_not_summing_to_one():
    with pytest.raises(ValueError):
        mix([(0.3, from_samples([0.0], [1.0]))])


def test_sup_distance_to_continuous_reference():
    f = from_samples([0.5], [1.0])
    distance = sup_distance_to(f, lambda lam: lam, 0.0, 1.0)
    assert distance == pytest.approx(0.5)


def test_sup_distance_to_checks_both_sides_of_a_jump():
    f = from_samples([0.25, 0.75], [0.5, 0.5])
    distance = sup_distance_to(f, lambda lam: lam, 0.0, 1.0)
    assert distance == pytest.approx(0.25)


def test_csv_rows_start_with_the_initial_value():
    f = from_samples([0.0, 2.0], [0.5, 0.5])
    rows = f.to_csv_rows()
    assert rows[0] == ("-inf", "0")
    restored = StepFunction.from_csv_rows(rows)
    assert sup_distance(f, restored) == 0.0
    with pytest.raises(ValueError):
        StepFunction.from_csv_rows([("0.0", "1.0")])


def test_csv_rows_of_a_complement_start_at_one():
    rows = from_samples([0.0], [1.0]).complement().to_csv_rows()
    assert rows[0] == ("-inf", "1")
    assert rows[1] == ("0.0", "0.0")


def test_from_counts_divides_each_count_once():
    f = from_counts([3.0, 1.0, 2.0, 1.0, 3.0, 2.0], 6)
    assert list(f.breakpoints) == [1.0, 2.0, 3.0]
    assert list(f.values) == [2 / 6, 4 / 6, 1.0]
    repeated = from_counts(np.tile([0.0, 1.0, 2.0, 3.0], 3), 12)
    assert list(repeated.values) == [0.25, 0.5, 0.75, 1.0]
    assert sup_distance(repeated, from_samples([0.0, 1.0, 2.0, 3.0], [0.25] * 4)) == 0.0


def test_from_counts_rejects_bad_totals():
    with pytest.raises(ValueError):
        from_counts([], 1)
    with pytest.raises(ValueError):
        from_counts([0.0, 1.0], 1)
    assert from_counts([0.0], 2).total == 0.5


def _random_step_function(rng, size=6):
    masses = rng.random(size)
    return from_samples(rng.normal(size=size), masses / masses.sum())


def test_sup_distance_triangle_inequality():
    rng = np.random.default_rng(11)
    for _ in range(50):
        f, g, h = (_random_step_function(rng) for _ in range(3))
        assert sup_distance(f, h) <= sup_distance(f, g) + sup_distance(g, h) + 1e-12
        assert sup_distance(f, g) == sup_distance(g, f)


def test_mix_is_linear_under_sup_distance():
    rng = np.random.default_rng(12)
    for _ in range(50):
        f, g, h = (_random_step_function(rng) for _ in range(3))
        w = float(rng.random())
        mixed_f = mix([(w, f), (1 - w, h)])
        mixed_g = mix([(w, g), (1 - w, h)])
        assert sup_distance(mixed_f, mixed_g) == pytest.approx(
            w * sup_distance(f, g), abs=1e-12
        )
