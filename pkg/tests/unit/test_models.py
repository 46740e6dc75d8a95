# Built-in imports
from collections import Counter

# External imports
import numpy as np
import pytest
import scipy.stats

# Own imports
from common.exceptions import CapExceededError, SpecParseError
from spectral.lattice import Region
from spectral.models import (
    Carrier,
    Configuration,
    DisorderModel,
    ModelKind,
    carrier_size,
    config_table,
    configuration_index,
    counter_rng,
    enumerate_configs,
    model_operator,
    sample_config,
    sample_symbols,
    shift_to_positive,
    values_of,
)

PATH_2 = Region.dyadic_cube(1, 1)


def configuration(model, region, symbols):
    symbols = np.array(symbols)
    return Configuration(region, model.carrier, symbols, values_of(model, symbols))


def test_model_validation():
    with pytest.raises(SpecParseError):
        DisorderModel.site_potential([2.0, 3.0], [0.5, 0.6])
    with pytest.raises(SpecParseError):
        DisorderModel.site_potential([2.0, 2.0])
    with pytest.raises(SpecParseError):
        DisorderModel.bond_percolation(1.0)
    with pytest.raises(SpecParseError):
        DisorderModel.from_dict({"kind": "anderson"})


def test_model_dict_round_trip():
    model = DisorderModel.site_potential([2.0, 3.0], [0.25, 0.75])
    assert DisorderModel.from_dict(model.to_dict()) == model
    bond = DisorderModel.from_dict({"kind": "bond-percolation", "p": 0.3})
    assert bond.values == (0.0, 1.0)
    assert bond.probabilities == (0.3, 0.7)
    assert bond.carrier is Carrier.EDGES


def test_config_table_enumerates_lexicographically():
    model = DisorderModel.site_potential([2.0, 3.0])
    table = config_table(model, PATH_2)
    assert len(table) == 4
    assert table.symbols.tolist() == [[0, 0], [0, 1], [1, 0], [1, 1]]
    assert table.probabilities.tolist() == [0.25] * 4
    assert configuration_index(model, table.symbols).tolist() == [0, 1, 2, 3]
    assert table.configuration(1).values.tolist() == [2.0, 3.0]


def test_enumerate_configs_probabilities_sum_to_one():
    model = DisorderModel.site_potential([0.0, 1.0, 5.0], [0.2, 0.3, 0.5])
    configs = enumerate_configs(model, Region.cube(2, 2))
    assert len(configs) == 3**4
    assert sum(p for _, p in configs) == pytest.approx(1.0, abs=1e-12)


def test_bond_percolation_lives_on_edges():
    model = DisorderModel.bond_percolation(0.4)
    assert carrier_size(model, PATH_2) == 1
    assert carrier_size(model, Region.cube(2, 2)) == 4
    assert config_table(model, PATH_2).probabilities.tolist() == [0.4, 0.6]


def test_config_table_cap_has_monte_carlo_hint():
    model = DisorderModel.site_potential([2.0, 3.0])
    with pytest.raises(CapExceededError) as exc:
        config_table(model, Region.dyadic_cube(2, 1), max_configs=8)
    assert "ids-mc" in exc.value.hint


def test_model_operator_examples():
    bond = DisorderModel.bond_percolation(0.5)
    present = model_operator(bond, configuration(bond, PATH_2, [0])).entries
    assert present.tolist() == [[1.0, -1.0], [-1.0, 1.0]]
    absent = model_operator(bond, configuration(bond, PATH_2, [1])).entries
    assert absent.tolist() == [[0.0, 0.0], [0.0, 0.0]]

    site = DisorderModel.site_percolation(0.5)
    closed = model_operator(site, configuration(site, PATH_2, [0, 1])).entries
    assert not closed.any()

    potential = DisorderModel.site_potential([2.0, 3.0])
    matrix = model_operator(potential, configuration(potential, PATH_2, [0, 1])).entries
    assert matrix.tolist() == [[2.0, -1.0], [-1.0, 3.0]]


def test_model_operator_rejects_wrong_carrier():
    bond = DisorderModel.bond_percolation(0.5)
    site = DisorderModel.site_percolation(0.5)
    with pytest.raises(ValueError):
        model_operator(bond, configuration(site, PATH_2, [0, 0]))


def test_percolation_operators_are_positive_semidefinite():
    model = DisorderModel.site_percolation(0.6)
    region = Region.cube(2, 4)
    for stream in range(5):
        matrix = model_operator(model, sample_config(model, region, 11, stream)).entries
        assert np.linalg.eigvalsh(matrix).min() >= -1e-8


def test_counter_rng_is_keyed_by_seed_and_stream():
    first = counter_rng(5, 3).random(4)
    assert np.array_equal(first, counter_rng(5, 3).random(4))
    assert not np.array_equal(first, counter_rng(5, 4).random(4))
    assert not np.array_equal(first, counter_rng(6, 3).random(4))


def test_sample_config_is_deterministic():
    model = DisorderModel.site_potential([2.0, 3.0])
    a = sample_config(model, Region.cube(1, 16), seed=9, stream=2)
    b = sample_config(model, Region.cube(1, 16), seed=9, stream=2)
    assert a.key == b.key
    assert set(a.values.tolist()) <= {2.0, 3.0}


def test_sampled_frequencies_follow_probabilities():
    model = DisorderModel.site_potential([1.0, 2.0, 3.0], [0.2, 0.3, 0.5])
    n = 100_000
    symbols = sample_symbols(model, n, seed=2024)
    for index, p in enumerate(model.probabilities):
        frequency = np.count_nonzero(symbols == index) / n
        assert abs(frequency - p) <= 3 * np.sqrt(p * (1 - p) / n)


def test_sampled_configurations_follow_enumerated_probabilities():
    model = DisorderModel.site_potential([1.0, 2.0, 3.0], [0.2, 0.3, 0.5])
    region = Region.cube(1, 2)
    n = 5000
    counts = Counter(
        sample_config(model, region, seed=2024, stream=m).key for m in range(n)
    )
    expected = {config.key: p for config, p in enumerate_configs(model, region)}
    assert len(expected) == 9
    assert set(counts) <= set(expected)
    observed = np.array([counts.get(key, 0) for key in expected])
    probabilities = np.array(list(expected.values()))
    statistic = float(np.sum((observed - n * probabilities) ** 2 / (n * probabilities)))
    assert statistic <= scipy.stats.chi2.ppf(1 - 1e-4, df=len(expected) - 1)


def test_shift_to_positive():
    shifted, shift = shift_to_positive(DisorderModel.site_potential([2.0, 3.0]), 1)
    assert shift == 2.0
    assert shifted.values == (4.0, 5.0)
    shifted, shift = shift_to_positive(DisorderModel.site_potential([0.0]), 1)
    assert shifted.values == (2.0,)
    assert shifted.kind is ModelKind.SITE_POTENTIAL
    with pytest.raises(ValueError):
        shift_to_positive(DisorderModel.bond_percolation(0.5), 1)


def test_shifted_operators_are_positive():
    model = DisorderModel.site_potential([-3.0, 0.5], [0.5, 0.5])
    shifted, _ = shift_to_positive(model, 1)
    for stream in range(5):
        config = sample_config(shifted, Region.cube(1, 8), 1, stream)
        assert np.linalg.eigvalsh(model_operator(shifted, config).entries).min() >= -1e-8
