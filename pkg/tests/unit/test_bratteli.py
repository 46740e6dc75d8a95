# External imports
import numpy as np
import pytest
import scipy.linalg

# Own imports
from common.exceptions import CapExceededError
from spectral.bratteli import (
    cauchy_report,
    check_compatibility,
    check_dimension_compatibility,
    check_embedding_invariance,
    embed_level,
    empirical_run,
    ids_approx,
    ids_chain,
    ids_monte_carlo,
    level_algebra,
    restriction_maps,
    transition_weights,
)
from spectral.models import DisorderModel
from spectral.stepfn import sup_distance

SITE_MODEL = DisorderModel.site_potential([2.0, 3.0])
MIXED_BLOCK = np.array([[2.0, -1.0], [-1.0, 3.0]])


def test_level_algebra_site_model():
    algebra = level_algebra(SITE_MODEL, 1, 1)
    assert len(algebra.delta.blocks) == 4
    assert algebra.delta.sizes == (2, 2, 2, 2)
    assert algebra.delta.weights.tolist() == [0.25] * 4
    assert np.array_equal(algebra.delta.blocks[1].matrix, MIXED_BLOCK)
    assert algebra.block_size == 2
    assert len(algebra.configs) == 4


def test_level_algebra_bond_percolation():
    algebra = level_algebra(DisorderModel.bond_percolation(0.3), 1, 1)
    assert algebra.delta.weights.tolist() == [0.3, 0.7]
    assert algebra.delta.blocks[0].matrix.tolist() == [[1.0, -1.0], [-1.0, 1.0]]
    assert not algebra.delta.blocks[1].matrix.any()


def test_level_algebra_deterministic_model_is_one_block():
    algebra = level_algebra(DisorderModel.site_potential([1.0]), 1, 1)
    assert len(algebra.delta.blocks) == 1
    assert algebra.delta.blocks[0].weight == 1.0
    assert algebra.delta.blocks[0].matrix.tolist() == [[1.0, -1.0], [-1.0, 1.0]]


def test_restriction_maps_for_edges():
    maps = restriction_maps(DisorderModel.bond_percolation(0.5), 1, 2, 1)
    assert [m.tolist() for m in maps] == [[0], [2]]
    sites = restriction_maps(SITE_MODEL, 1, 2, 1)
    assert [m.tolist() for m in sites] == [[0, 1], [2, 3]]


def test_transition_weights_examples():
    weights = transition_weights(SITE_MODEL, 1, 1)
    # beta = (2,3,2,3) has index 5; alpha = (2,3) has index 1
    assert weights.w[:, 5].tolist() == [0, 2, 0, 0]
    assert weights.M[5, 1] == 1.0
    # beta = (2,2,3,3) restricts to (2,2) and (3,3)
    assert weights.w[:, 3].tolist() == [1, 0, 0, 1]
    assert weights.M[3, 0] == 0.5
    assert weights.M[3, 3] == 0.5
    assert np.allclose(weights.M.sum(axis=1), 1.0)
    assert (weights.w.sum(axis=0) == 2).all()


@pytest.mark.parametrize(
    "model, i, d",
    [
        (SITE_MODEL, 1, 1),
        (SITE_MODEL, 2, 1),
        (DisorderModel.site_potential([2.0, 3.0], [0.3, 0.7]), 0, 2),
        (DisorderModel.site_potential([2.0, 3.0]), 1, 2),
        (DisorderModel.bond_percolation(0.3), 1, 1),
        (DisorderModel.site_percolation(0.3), 1, 1),
    ],
)
def test_compatibility_identity(model, i, d):
    assert check_compatibility(model, i, d) <= 1e-12
    assert check_dimension_compatibility(model, i, d) == 0


def test_compatibility_is_exact_for_deterministic_model():
    assert check_compatibility(DisorderModel.site_potential([2.0]), 1, 1) == 0.0


def test_embed_level():
    source = level_algebra(SITE_MODEL, 1, 1)
    assert embed_level(source, 1) is source.delta
    embedded = embed_level(source, 2)
    assert len(embedded.blocks) == 16
    expected = scipy.linalg.block_diag(MIXED_BLOCK, MIXED_BLOCK)
    assert np.array_equal(embedded.blocks[5].matrix, expected)
    with pytest.raises(ValueError):
        embed_level(source, 0)


def test_cauchy_report_first_step():
    report = cauchy_report(SITE_MODEL, 1, 2, 1)
    assert report.bound == 0.5
    assert report.rank_distance == pytest.approx(0.5)
    assert report.within_bound
    assert report.sigma_distance <= report.rank_distance + 1e-8
    assert report.lipschitz_holds


def test_cauchy_report_second_step():
    report = cauchy_report(SITE_MODEL, 2, 3, 1)
    assert report.bound == 0.25
    assert report.within_bound
    assert report.lipschitz_holds


def test_cauchy_report_same_level_is_zero():
    report = cauchy_report(SITE_MODEL, 2, 2, 1)
    assert (report.rank_distance, report.bound, report.sigma_distance) == (0.0, 0.0, 0.0)


def test_embedding_invariance():
    report = check_embedding_invariance(SITE_MODEL, 1, 2, 1)
    assert report.rank_drift == 0.0
    assert report.identity_rank_drift == 0.0
    assert report.sigma_drift <= 1e-9


def test_ids_approx_site_model_has_six_jumps():
    f = ids_approx(SITE_MODEL, 1, 1)
    assert len(f.breakpoints) == 6
    low, high = (5 - np.sqrt(5)) / 2, (5 + np.sqrt(5)) / 2
    assert f.breakpoints == pytest.approx(sorted([1.0, 2.0, 3.0, 4.0, low, high]))
    assert f(1.2) == pytest.approx(0.125)
    assert f(1.5) == pytest.approx(0.375)
    assert f(2.5) == pytest.approx(0.5)
    assert f(3.3) == pytest.approx(0.625)
    assert f(3.8) == pytest.approx(0.875)
    assert f(4.5) == 1.0


@pytest.mark.parametrize("p", [0.1, 0.5, 0.9])
def test_percolation_plateaus(p):
    bond = ids_approx(DisorderModel.bond_percolation(p), 1, 1)
    assert abs(bond(1.0) - (1 - p / 2)) <= 1e-10
    site = ids_approx(DisorderModel.site_percolation(p), 1, 1)
    assert abs(site(1.0) - (1 - p * p / 2)) <= 1e-10
    assert bond(2.5) == 1.0


def test_ids_approx_cap():
    with pytest.raises(CapExceededError):
        ids_approx(SITE_MODEL, 3, 1, max_configs=16)


def test_ids_chain_certified_error():
    chain = ids_chain(SITE_MODEL, 1, [3, 1, 2])
    assert chain.levels == [1, 2, 3]
    assert chain.certified_error == {1: 0.75, 2: 0.25, 3: 0.0}
    assert all(step.within_bound and step.lipschitz_holds for step in chain.steps)
    assert sup_distance(chain.functions[1], ids_approx(SITE_MODEL, 1, 1)) == 0.0


def test_monte_carlo_is_deterministic():
    a = ids_monte_carlo(SITE_MODEL, 1, 1, samples=50, seed=4)
    b = ids_monte_carlo(SITE_MODEL, 1, 1, samples=50, seed=4)
    assert np.array_equal(a.breakpoints, b.breakpoints)
    assert np.array_equal(a.values, b.values)
    with pytest.raises(ValueError):
        ids_monte_carlo(SITE_MODEL, 1, 1, samples=0, seed=4)


def test_monte_carlo_of_deterministic_model_is_exact():
    model = DisorderModel.site_potential([2.0])
    estimate = ids_monte_carlo(model, 2, 1, samples=5, seed=1)
    assert sup_distance(estimate, ids_approx(model, 2, 1)) == 0.0


def test_monte_carlo_counts_singular_values_for_indefinite_model():
    model = DisorderModel.site_potential([0.5])
    estimate = ids_monte_carlo(model, 2, 1, samples=3, seed=1)
    assert sup_distance(estimate, ids_approx(model, 2, 1)) == 0.0
    assert estimate.breakpoints[0] >= 0.0


def test_monte_carlo_matches_enumeration():
    estimate = ids_monte_carlo(SITE_MODEL, 2, 1, samples=10_000, seed=17)
    assert sup_distance(estimate, ids_approx(SITE_MODEL, 2, 1)) <= 0.05


def test_empirical_run_small_box():
    report = empirical_run(SITE_MODEL, 1, 64, 2, seed=3)
    assert report.tile_count == 16
    assert sum(report.frequencies.values()) == pytest.approx(1.0)
    assert report.perturbation_bound_holds
    assert report.defect_within_boundary
    assert report.rank_defect <= report.row_defect
    assert len(report.expected) == 16


def test_empirical_run_drops_partial_tiles():
    report = empirical_run(SITE_MODEL, 1, 66, 2, seed=3)
    assert report.tile_count == 16
    assert report.defect_within_boundary
    assert report.perturbation_bound_holds


def test_empirical_run_bond_percolation():
    report = empirical_run(DisorderModel.bond_percolation(0.5), 2, 8, 1, seed=5)
    assert report.tile_count == 16
    assert report.perturbation_bound_holds
    assert report.defect_within_boundary


def test_empirical_run_dense_limit():
    with pytest.raises(CapExceededError):
        empirical_run(SITE_MODEL, 1, 128, 2, seed=1, dense_limit=64)
    with pytest.raises(ValueError):
        empirical_run(SITE_MODEL, 1, 2, 2, seed=1)


def test_empirical_run_deterministic_model():
    model = DisorderModel.site_potential([1.0])
    report = empirical_run(model, 1, 1024, 2, seed=0)
    assert report.ids_distance <= report.tile_boundary_fraction + 2 / 1024
    assert report.frequencies == {(0, 0, 0, 0): 1.0}


def test_empirical_run_compares_eigenvalues_of_indefinite_model():
    model = DisorderModel.site_potential([0.5])
    report = empirical_run(model, 1, 64, 2, seed=0)
    assert report.ids_level.breakpoints[0] < 0.0
    assert report.n_full.breakpoints[0] < 0.0
    assert sup_distance(report.n_tiles, report.ids_level) <= 1e-12
    assert report.ids_distance <= report.rank_defect + 1e-8


@pytest.mark.slow
def test_empirical_run_law_of_large_numbers():
    report = empirical_run(SITE_MODEL, 1, 4096, 2, seed=2024)
    assert report.tile_count == 1024
    for key, p in report.expected.items():
        observed = report.frequencies.get(key, 0.0)
        assert abs(observed - p) <= 3 * np.sqrt(p * (1 - p) / 1024)
    assert report.tiles_distance <= report.rank_defect + 1e-8
    assert report.ids_distance <= report.rank_defect + 0.05
