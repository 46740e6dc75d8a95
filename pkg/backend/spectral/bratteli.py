"""
Dyadic Bratteli system of a disorder model.

Level i has one block per configuration on C_i = {0..2^i-1}^d, weighted by the
configuration probability; the block is the model operator of that
configuration with in-cube degrees. Going from level i to level j > i splits
C_j into dyadic copies of C_i, which gives the weights w_{alpha,beta}, the
Markov transitions, the diagonal embedding and the boundary-fraction bound on
r(Delta_j - phi(Delta_i)).
"""

# Built-in imports
import math
from collections import Counter
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Dict, List, Optional

# External imports
import numpy as np

# Own imports
from common.exceptions import CapExceededError
from common.logger import custom_logger
from spectral.lattice import (
    Region,
    boundary_fraction,
    dyadic_partition,
    region_graph,
)
from spectral.linalg import (
    RANK_TOL,
    numerical_rank,
    singular_values,
    spectral_distribution,
    sym_spectrum,
)
from spectral.models import (
    MAX_CONFIGS,
    Carrier,
    ConfigTable,
    Configuration,
    DisorderModel,
    config_table,
    configuration_index,
    model_operator,
    sample_config,
    values_of,
)
from spectral.rankring import (
    BlockOperator,
    Mapper,
    eigenvalue_distribution,
    rank,
    sigma,
)
from spectral.stepfn import StepFunction, from_counts, sup_distance

logger = custom_logger()

CERTIFICATE_SLACK = 1e-9
PERTURBATION_SLACK = 1e-8
DENSE_LIMIT = 4096


@dataclass(frozen=True, eq=False)
class LevelAlgebra:
    """Delta~_i in R_i together with the configuration table it was built from."""

    model: DisorderModel
    level: int
    d: int
    table: ConfigTable
    delta: BlockOperator

    @property
    def region(self) -> Region:
        return self.table.region

    @property
    def block_size(self) -> int:
        return self.region.volume

    @property
    def configs(self) -> list:
        return [
            (self.table.configuration(alpha), float(self.table.probabilities[alpha]))
            for alpha in range(len(self.table))
        ]


def level_algebra(
    model: DisorderModel,
    i: int,
    d: int,
    max_configs: int = MAX_CONFIGS,
    mapper: Mapper = map,
) -> LevelAlgebra:
    """One block per configuration on C_i: (probability, model operator)."""
    region = Region.dyadic_cube(i, d)
    table = config_table(model, region, max_configs)
    matrices = list(
        mapper(
            lambda alpha: model_operator(model, table.configuration(alpha)).entries,
            range(len(table)),
        )
    )
    delta = BlockOperator.from_matrices(table.probabilities, matrices, level=i)
    logger.debug(f"level {i} algebra: {len(table)} blocks of size {region.volume}")
    return LevelAlgebra(model, i, d, table, delta)


@lru_cache(maxsize=32)
def _restriction_maps(carrier: Carrier, i: int, j: int, d: int) -> tuple:
    partition = dyadic_partition(j, i, d)
    if carrier is Carrier.SITES:
        return partition.cells
    small = region_graph(Region.dyadic_cube(i, d))
    large = region_graph(Region.dyadic_cube(j, d))
    lookup = {(int(u), int(v)): e for e, (u, v) in enumerate(large.edges)}
    maps = []
    for members in partition.cells:
        maps.append(
            np.array(
                [lookup[(int(members[u]), int(members[v]))] for u, v in small.edges],
                dtype=np.int64,
            )
        )
    return tuple(maps)


def restriction_maps(model: DisorderModel, i: int, j: int, d: int) -> tuple:
    """
    For every dyadic subcube of C_j (in subcube order), the carrier indices of
    C_j whose symbols form the restricted configuration on that copy of C_i.
    Edges between different subcubes belong to no restriction.
    """
    if not 0 <= i <= j:
        raise ValueError(f"restriction needs 0 <= i <= j, got i={i}, j={j}")
    return _restriction_maps(model.carrier, i, j, d)


def _restricted_indices(
    model: DisorderModel, table_j: ConfigTable, i: int, j: int, d: int
) -> np.ndarray:
    """(cells, k_j) array: level-i configuration index of every restriction."""
    maps = restriction_maps(model, i, j, d)
    return np.stack(
        [configuration_index(model, table_j.symbols[:, idx]) for idx in maps]
    )


@dataclass(frozen=True, eq=False)
class TransitionWeights:
    """w[alpha, beta] occurrence counts and M[beta, alpha] Markov transitions."""

    w: np.ndarray
    M: np.ndarray
    n_i: int
    n_next: int
    p_i: np.ndarray
    p_next: np.ndarray


def transition_weights(
    model: DisorderModel, i: int, d: int, max_configs: int = MAX_CONFIGS
) -> TransitionWeights:
    """Weights between levels i and i+1 of the Bratteli diagram."""
    table_i = config_table(model, Region.dyadic_cube(i, d), max_configs)
    table_next = config_table(model, Region.dyadic_cube(i + 1, d), max_configs)
    restricted = _restricted_indices(model, table_next, i, i + 1, d)
    w = np.zeros((len(table_i), len(table_next)), dtype=np.int64)
    columns = np.arange(len(table_next))
    for row in restricted:
        np.add.at(w, (row, columns), 1)
    n_i = 2 ** (i * d)
    n_next = 2 ** ((i + 1) * d)
    M = (w * n_i / n_next).T
    return TransitionWeights(
        w, M, n_i, n_next, table_i.probabilities, table_next.probabilities
    )


def check_compatibility(
    model: DisorderModel, i: int, d: int, max_configs: int = MAX_CONFIGS
) -> float:
    """max_alpha |p_{i,alpha} - sum_beta M(beta, alpha) p_{i+1,beta}|."""
    weights = transition_weights(model, i, d, max_configs)
    pushed = weights.M.T @ weights.p_next
    residual = float(np.max(np.abs(weights.p_i - pushed)))
    logger.info(
        f"compatibility residual at level {i}: {residual:.3e}",
        model=model.kind.value,
    )
    return residual


def check_dimension_compatibility(
    model: DisorderModel, i: int, d: int, max_configs: int = MAX_CONFIGS
) -> int:
    """Largest |n_{i+1,beta} - sum_alpha w_{alpha,beta} n_{i,alpha}| (0 expected)."""
    weights = transition_weights(model, i, d, max_configs)
    sums = weights.w.sum(axis=0) * weights.n_i
    return int(np.max(np.abs(sums - weights.n_next)))


def embed_level(
    source: LevelAlgebra,
    j: int,
    max_configs: int = MAX_CONFIGS,
    mapper: Mapper = map,
) -> BlockOperator:
    """
    phi-image of Delta~_i in R_j: for each level-j configuration, the level-i
    blocks of its restrictions placed on their subcubes. Blocks are indexed in
    the lexicographic vertex order of C_j, the same basis as Delta~_j.
    """
    if j < source.level:
        raise ValueError(f"cannot embed level {source.level} into level {j}")
    if j == source.level:
        return source.delta
    model, i, d = source.model, source.level, source.d
    table_j = config_table(model, Region.dyadic_cube(j, d), max_configs)
    restricted = _restricted_indices(model, table_j, i, j, d)
    cells = dyadic_partition(j, i, d).cells
    n_j = 2 ** (j * d)

    def assemble(beta: int) -> np.ndarray:
        matrix = np.zeros((n_j, n_j))
        for members, alpha in zip(cells, restricted[:, beta]):
            matrix[np.ix_(members, members)] = source.delta.blocks[alpha].matrix
        return matrix

    matrices = list(mapper(assemble, range(len(table_j))))
    return BlockOperator.from_matrices(table_j.probabilities, matrices, level=j)


def ids_approx(
    model: DisorderModel,
    i: int,
    d: int,
    max_configs: int = MAX_CONFIGS,
    mapper: Mapper = map,
) -> StepFunction:
    """s_{Delta~_i} = sum_alpha p_{i,alpha} N_{w_alpha}."""
    return sigma(level_algebra(model, i, d, max_configs, mapper).delta, mapper)


def ids_monte_carlo(
    model: DisorderModel,
    i: int,
    d: int,
    samples: int,
    seed: int,
    mapper: Mapper = map,
) -> StepFunction:
    """
    Average of the singular-value counting function over `samples` draws on
    C_i, the sampled counterpart of ids_approx(i). Draw m uses stream (seed, m).
    """
    if samples < 1:
        raise ValueError("samples must be at least 1")
    region = Region.dyadic_cube(i, d)
    spectra = list(
        mapper(
            lambda m: singular_values(
                model_operator(model, sample_config(model, region, seed, stream=m))
            ),
            range(samples),
        )
    )
    values = np.concatenate(spectra)
    return from_counts(values, values.size)


@dataclass(frozen=True)
class CauchyReport:
    i: int
    j: int
    rank_distance: float
    bound: float
    sigma_distance: float

    @property
    def within_bound(self) -> bool:
        return self.rank_distance <= self.bound + CERTIFICATE_SLACK

    @property
    def lipschitz_holds(self) -> bool:
        return self.sigma_distance <= self.rank_distance + PERTURBATION_SLACK

    def to_dict(self) -> dict:
        return {
            "i": self.i,
            "j": self.j,
            "rank_distance": self.rank_distance,
            "bound": self.bound,
            "sigma_distance": self.sigma_distance,
            "within_bound": self.within_bound,
            "lipschitz_holds": self.lipschitz_holds,
        }


def _cauchy(
    source: LevelAlgebra,
    target: LevelAlgebra,
    tol: float,
    max_configs: int,
    mapper: Mapper,
    source_sigma: Optional[StepFunction] = None,
    target_sigma: Optional[StepFunction] = None,
) -> CauchyReport:
    i, j, d = source.level, target.level, source.d
    embedded = embed_level(source, j, max_configs, mapper)
    rank_distance = rank(target.delta - embedded, tol, mapper)
    source_sigma = source_sigma or sigma(source.delta, mapper)
    target_sigma = target_sigma or sigma(target.delta, mapper)
    report = CauchyReport(
        i=i,
        j=j,
        rank_distance=rank_distance,
        bound=boundary_fraction(j, i, d),
        sigma_distance=sup_distance(source_sigma, target_sigma),
    )
    logger.info(
        f"cauchy {i}->{j}: rank distance {report.rank_distance:.6f} "
        f"<= bound {report.bound:.6f}, sup distance {report.sigma_distance:.6f}"
    )
    return report


def cauchy_report(
    model: DisorderModel,
    i: int,
    j: int,
    d: int,
    tol: float = RANK_TOL,
    max_configs: int = MAX_CONFIGS,
    mapper: Mapper = map,
) -> CauchyReport:
    """r(Delta~_j - phi(Delta~_i)) against beta_{i,j}, plus the sigma distance."""
    if j < i:
        raise ValueError(f"cauchy report needs i <= j, got i={i}, j={j}")
    source = level_algebra(model, i, d, max_configs, mapper)
    target = source if j == i else level_algebra(model, j, d, max_configs, mapper)
    return _cauchy(source, target, tol, max_configs, mapper)


@dataclass(frozen=True)
class EmbeddingReport:
    i: int
    j: int
    rank_drift: float
    identity_rank_drift: float
    sigma_drift: float


def check_embedding_invariance(
    model: DisorderModel,
    i: int,
    j: int,
    d: int,
    tol: float = RANK_TOL,
    max_configs: int = MAX_CONFIGS,
    mapper: Mapper = map,
) -> EmbeddingReport:
    """r and sigma are unchanged by the diagonal embedding phi (all zero expected)."""
    source = level_algebra(model, i, d, max_configs, mapper)
    embedded = embed_level(source, j, max_configs, mapper)
    identity = source.delta.identity_like()
    identity_embedded = embedded.identity_like()
    return EmbeddingReport(
        i=i,
        j=j,
        rank_drift=abs(rank(source.delta, tol, mapper) - rank(embedded, tol, mapper)),
        identity_rank_drift=abs(rank(identity, tol) - rank(identity_embedded, tol)),
        sigma_drift=sup_distance(sigma(source.delta, mapper), sigma(embedded, mapper)),
    )


@dataclass
class IdsChain:
    """ids_approx per level, consecutive Cauchy reports and certified errors."""

    levels: List[int]
    functions: Dict[int, StepFunction] = field(default_factory=dict)
    steps: List[CauchyReport] = field(default_factory=list)
    certified_error: Dict[int, float] = field(default_factory=dict)

    @property
    def deepest(self) -> int:
        return self.levels[-1]


def ids_chain(
    model: DisorderModel,
    d: int,
    levels: List[int],
    tol: float = RANK_TOL,
    max_configs: int = MAX_CONFIGS,
    mapper: Mapper = map,
) -> IdsChain:
    """
    Levelwise approximants with the certificate sum_{m >= i} beta(m, m+1),
    truncated at the deepest computed level (the tail beyond it is not
    included and is reported as such by the caller).
    """
    levels = sorted(set(int(level) for level in levels))
    if not levels:
        raise ValueError("at least one level is required")
    chain = IdsChain(levels=levels)
    algebras = {}
    for level in levels:
        algebras[level] = level_algebra(model, level, d, max_configs, mapper)
        chain.functions[level] = sigma(algebras[level].delta, mapper)
    for lower, upper in zip(levels, levels[1:]):
        chain.steps.append(
            _cauchy(
                algebras[lower],
                algebras[upper],
                tol,
                max_configs,
                mapper,
                chain.functions[lower],
                chain.functions[upper],
            )
        )
    for position, level in enumerate(levels):
        chain.certified_error[level] = math.fsum(
            step.bound for step in chain.steps[position:]
        )
    return chain


@dataclass
class EmpiricalReport:
    """One sampled configuration on a box compared with the level-j approximant."""

    side: int
    j: int
    d: int
    configuration: Configuration
    n_full: StepFunction
    n_tiles: StepFunction
    tile_count: int
    frequencies: Dict[tuple, float]
    expected: Dict[tuple, float]
    z_scores: Dict[tuple, float]
    rank_defect: float
    row_defect: float
    tile_boundary_fraction: float
    tiles_distance: float
    ids_distance: Optional[float]
    ids_level: Optional[StepFunction]

    @property
    def perturbation_bound_holds(self) -> bool:
        return self.tiles_distance <= self.rank_defect + PERTURBATION_SLACK

    @property
    def defect_within_boundary(self) -> bool:
        return self.rank_defect <= self.tile_boundary_fraction + CERTIFICATE_SLACK


def _tile_members(side: int, d: int, tile_side: int) -> List[np.ndarray]:
    local = Region.cube(d, tile_side).coordinates()
    per_axis = side // tile_side
    members = []
    for tile in np.indices((per_axis,) * d).reshape(d, -1).T:
        coords = local + tile * tile_side
        members.append(np.ravel_multi_index(coords.T, (side,) * d))
    return members


def empirical_run(
    model: DisorderModel,
    d: int,
    side: int,
    j: int,
    seed: int,
    tol: float = RANK_TOL,
    dense_limit: int = DENSE_LIMIT,
    max_configs: int = MAX_CONFIGS,
    mapper: Mapper = map,
) -> EmpiricalReport:
    """
    Sample omega on the box [0, side)^d, compare the truncated operator with
    the direct sum of the C_j tiles fully inside the box, count tile
    configurations, and measure the distance to the eigenvalue distribution
    of Delta~_j (ids_approx(j) for positive models). Vertices of partial tiles
    stay uncovered (zero rows in the tiled operator).
    """
    box = Region.cube(d, side)
    if box.volume > dense_limit:
        raise CapExceededError(
            f"box volume {box.volume} exceeds the dense eigensolver limit {dense_limit}",
            hint="reduce --side (e.g. 2048 in d=1) or raise dense_limit",
        )
    tile_side = 2**j
    if side < tile_side:
        raise ValueError(f"box side {side} is smaller than the tile side {tile_side}")
    if side % tile_side:
        logger.warning(
            f"side {side} is not a multiple of {tile_side}; partial tiles are dropped"
        )

    config = sample_config(model, box, seed)
    full = model_operator(model, config).entries
    n_full = spectral_distribution(full)

    box_graph = region_graph(box)
    tile_graph = region_graph(Region.dyadic_cube(j, d))
    edge_lookup = {(int(u), int(v)): e for e, (u, v) in enumerate(box_graph.edges)}
    members = _tile_members(side, d, tile_side)

    def tile_symbols(vertices: np.ndarray) -> np.ndarray:
        if model.carrier is Carrier.SITES:
            return config.symbols[vertices]
        edges = [edge_lookup[(int(vertices[u]), int(vertices[v]))] for u, v in tile_graph.edges]
        return config.symbols[np.array(edges, dtype=np.int64)]

    tile_keys = [tuple(int(s) for s in tile_symbols(v)) for v in members]
    tile_region = Region.dyadic_cube(j, d)
    distinct = sorted(set(tile_keys))

    def tile_operator(key: tuple) -> np.ndarray:
        symbols = np.array(key, dtype=np.int64)
        tile_config = Configuration(
            tile_region, model.carrier, symbols, values_of(model, symbols)
        )
        return model_operator(model, tile_config).entries

    operators = dict(zip(distinct, mapper(tile_operator, distinct)))
    spectra = dict(zip(distinct, mapper(lambda key: sym_spectrum(operators[key]), distinct)))

    tiled = np.zeros_like(full)
    tile_of = np.full(box.volume, -1, dtype=np.int64)
    for t, (vertices, key) in enumerate(zip(members, tile_keys)):
        tiled[np.ix_(vertices, vertices)] = operators[key]
        tile_of[vertices] = t

    uncovered = int(np.count_nonzero(tile_of < 0))
    eigenvalues = [spectra[key] for key in tile_keys] + [np.zeros(uncovered)]
    eigenvalues = np.concatenate(eigenvalues)
    n_tiles = from_counts(eigenvalues, box.volume)

    difference = full - tiled
    support = np.flatnonzero(np.any(difference != 0, axis=1))
    rank_count = (
        numerical_rank(difference[np.ix_(support, support)], tol) if support.size else 0
    )
    on_tile_boundary = tile_of < 0
    crossing = tile_of[box_graph.edges[:, 0]] != tile_of[box_graph.edges[:, 1]]
    on_tile_boundary[box_graph.edges[crossing, 0]] = True
    on_tile_boundary[box_graph.edges[crossing, 1]] = True

    counts = Counter(tile_keys)
    tile_count = len(tile_keys)
    frequencies = {key: count / tile_count for key, count in sorted(counts.items())}
    probabilities = np.asarray(model.probabilities)
    try:
        table = config_table(model, tile_region, max_configs)
        keys = [tuple(int(s) for s in row) for row in table.symbols]
    except CapExceededError:
        keys = distinct
    expected = {key: float(np.prod(probabilities[list(key)])) for key in keys}
    z_scores = {}
    for key, p_alpha in expected.items():
        spread = math.sqrt(p_alpha * (1 - p_alpha) / tile_count) if p_alpha < 1 else 0.0
        observed = frequencies.get(key, 0.0)
        z_scores[key] = (observed - p_alpha) / spread if spread else 0.0

    try:
        ids_level = eigenvalue_distribution(
            level_algebra(model, j, d, max_configs, mapper).delta, mapper
        )
        ids_distance = sup_distance(n_full, ids_level)
    except CapExceededError as exc:
        logger.warning(f"level {j} not enumerable, skipping exact comparison: {exc}")
        ids_level, ids_distance = None, None

    report = EmpiricalReport(
        side=side,
        j=j,
        d=d,
        configuration=config,
        n_full=n_full,
        n_tiles=n_tiles,
        tile_count=tile_count,
        frequencies=frequencies,
        expected=expected,
        z_scores=z_scores,
        rank_defect=rank_count / box.volume,
        row_defect=support.size / box.volume,
        tile_boundary_fraction=float(np.count_nonzero(on_tile_boundary)) / box.volume,
        tiles_distance=sup_distance(n_full, n_tiles),
        ids_distance=ids_distance,
        ids_level=ids_level,
    )
    logger.info(
        f"empirical run side={side} j={j}: rank defect {report.rank_defect:.4f}, "
        f"tile distance {report.tiles_distance:.4f}, ids distance {ids_distance}"
    )
    return report
