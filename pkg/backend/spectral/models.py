"""
Disorder models: finitely valued random site potentials, bond percolation and
site percolation. Configurations are stored as symbol indices into the
model's alphabet; for percolation the alphabet is (0, 1) with 0 = open.
"""

# Built-in imports
import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Sequence, Tuple

# External imports
import numpy as np

# Own imports
from common.exceptions import CapExceededError, SpecParseError
from spectral.lattice import Region, laplacian, laplacian_from_edges, region_graph
from spectral.linalg import SymMatrix


MAX_CONFIGS = 2**16
PROBABILITY_TOL = 1e-12


class ModelKind(str, Enum):
    SITE_POTENTIAL = "site-potential"
    BOND_PERCOLATION = "bond-percolation"
    SITE_PERCOLATION = "site-percolation"


class Carrier(str, Enum):
    SITES = "sites"
    EDGES = "edges"


@dataclass(frozen=True)
class DisorderModel:
    """
    i.i.d. randomness on a lattice region. For the percolation kinds
    P(X = 0) = p, and 0 means the edge (or site) is present.
    """

    kind: ModelKind
    values: Tuple[float, ...] = ()
    probabilities: Tuple[float, ...] = ()
    p: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, "kind", ModelKind(self.kind))
        if self.kind is ModelKind.SITE_POTENTIAL:
            values = tuple(float(v) for v in self.values)
            probabilities = tuple(float(q) for q in self.probabilities)
            if not values:
                raise SpecParseError("a site-potential model needs at least one value")
            if len(values) != len(probabilities):
                raise SpecParseError("values and probabilities differ in length")
            if len(set(values)) != len(values):
                raise SpecParseError("site-potential values must be distinct")
        else:
            if self.p is None or not 0 < self.p < 1:
                raise SpecParseError(f"percolation parameter must lie in (0, 1), got {self.p}")
            values = (0.0, 1.0)
            probabilities = (float(self.p), 1.0 - float(self.p))
        if any(q <= 0 for q in probabilities):
            raise SpecParseError("probabilities must be positive")
        if abs(math.fsum(probabilities) - 1.0) > PROBABILITY_TOL:
            raise SpecParseError(f"probabilities sum to {math.fsum(probabilities)!r}")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "probabilities", probabilities)

    @classmethod
    def site_potential(
        cls, values: Sequence[float], probabilities: Optional[Sequence[float]] = None
    ) -> "DisorderModel":
        if probabilities is None:
            probabilities = [1.0 / len(values)] * len(values)
        return cls(ModelKind.SITE_POTENTIAL, tuple(values), tuple(probabilities))

    @classmethod
    def bond_percolation(cls, p: float) -> "DisorderModel":
        return cls(ModelKind.BOND_PERCOLATION, p=p)

    @classmethod
    def site_percolation(cls, p: float) -> "DisorderModel":
        return cls(ModelKind.SITE_PERCOLATION, p=p)

    @property
    def k(self) -> int:
        return len(self.values)

    @property
    def carrier(self) -> Carrier:
        if self.kind is ModelKind.BOND_PERCOLATION:
            return Carrier.EDGES
        return Carrier.SITES

    def to_dict(self) -> dict:
        if self.kind is ModelKind.SITE_POTENTIAL:
            return {
                "kind": self.kind.value,
                "values": list(self.values),
                "probabilities": list(self.probabilities),
            }
        return {"kind": self.kind.value, "p": self.p}

    @classmethod
    def from_dict(cls, data: dict) -> "DisorderModel":
        """Parse the model section of a spec file ("d" is read by the caller)."""
        try:
            kind = ModelKind(data["kind"])
            if kind is ModelKind.SITE_POTENTIAL:
                return cls.site_potential(data["values"], data.get("probabilities"))
            return cls(kind, p=float(data["p"]))
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, SpecParseError):
                raise
            raise SpecParseError(f"invalid model spec {data!r}: {exc}") from exc


@dataclass(frozen=True, eq=False)
class Configuration:
    """Model values on the sites or edges of a region."""

    region: Region
    carrier: Carrier
    symbols: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        for name in ("symbols", "values"):
            array = np.array(getattr(self, name))
            array.setflags(write=False)
            object.__setattr__(self, name, array)
        if self.symbols.shape != self.values.shape:
            raise ValueError("symbols and values differ in shape")

    @property
    def key(self) -> tuple:
        return tuple(int(s) for s in self.symbols)


def values_of(model: DisorderModel, symbols: np.ndarray) -> np.ndarray:
    """Potential values, or the bits themselves for percolation."""
    if model.kind is ModelKind.SITE_POTENTIAL:
        return np.asarray(model.values)[symbols]
    return np.asarray(symbols, dtype=np.int64)


def carrier_size(model: DisorderModel, region: Region) -> int:
    if model.carrier is Carrier.EDGES:
        return region_graph(region).n_edges
    return region.volume


def configuration_index(model: DisorderModel, symbols: np.ndarray) -> np.ndarray:
    """Lexicographic index of symbol rows (first element most significant)."""
    symbols = np.atleast_2d(symbols)
    powers = model.k ** np.arange(symbols.shape[1] - 1, -1, -1, dtype=np.int64)
    return symbols.astype(np.int64) @ powers


@dataclass(frozen=True, eq=False)
class ConfigTable:
    """All configurations of a region as a (count, carrier) symbol array."""

    model: DisorderModel
    region: Region
    symbols: np.ndarray
    probabilities: np.ndarray

    def __len__(self) -> int:
        return self.symbols.shape[0]

    def configuration(self, alpha: int) -> Configuration:
        symbols = self.symbols[alpha]
        return Configuration(
            self.region, self.model.carrier, symbols, values_of(self.model, symbols)
        )


def config_table(
    model: DisorderModel, region: Region, max_configs: int = MAX_CONFIGS
) -> ConfigTable:
    size = carrier_size(model, region)
    count = model.k**size
    if count > max_configs:
        raise CapExceededError(
            f"{count} configurations on {size} {model.carrier.value}, cap is {max_configs}",
            hint="lower the level or switch to the ids-mc (Monte Carlo) command",
        )
    if size == 0:
        symbols = np.zeros((1, 0), dtype=np.int64)
    else:
        symbols = np.indices((model.k,) * size).reshape(size, -1).T.astype(np.int64)
    probabilities = np.prod(np.asarray(model.probabilities)[symbols], axis=1)
    for array in (symbols, probabilities):
        array.setflags(write=False)
    return ConfigTable(model, region, symbols, probabilities)


def enumerate_configs(
    model: DisorderModel, region: Region, max_configs: int = MAX_CONFIGS
) -> list:
    """Every configuration in lexicographic order with its product probability."""
    table = config_table(model, region, max_configs)
    return [
        (table.configuration(alpha), float(table.probabilities[alpha]))
        for alpha in range(len(table))
    ]


def counter_rng(seed: int, stream: int = 0) -> np.random.Generator:
    """
    Philox generator keyed by (seed, stream). Draw m of a stream depends only
    on (seed, stream, m), never on which thread consumes it.
    """
    key = (int(stream) << 64) | (int(seed) & 0xFFFFFFFFFFFFFFFF)
    return np.random.Generator(np.random.Philox(key=key))


def sample_symbols(
    model: DisorderModel, size: int, seed: int, stream: int = 0
) -> np.ndarray:
    uniforms = counter_rng(seed, stream).random(size)
    thresholds = np.cumsum(model.probabilities)
    thresholds[-1] = 1.0
    return np.searchsorted(thresholds, uniforms, side="right").astype(np.int64)


def sample_config(
    model: DisorderModel, region: Region, seed: int, stream: int = 0
) -> Configuration:
    """i.i.d. draw per carrier element; element e uses draw e of (seed, stream)."""
    symbols = sample_symbols(model, carrier_size(model, region), seed, stream)
    return Configuration(region, model.carrier, symbols, values_of(model, symbols))


def open_edges(model: DisorderModel, config: Configuration) -> np.ndarray:
    """Edges of the region graph kept by a percolation configuration."""
    graph = region_graph(config.region)
    if model.kind is ModelKind.BOND_PERCOLATION:
        return graph.edges[config.symbols == 0]
    open_sites = config.symbols == 0
    keep = open_sites[graph.edges[:, 0]] & open_sites[graph.edges[:, 1]]
    return graph.edges[keep]


def model_operator(model: DisorderModel, config: Configuration) -> SymMatrix:
    """
    Truncated operator of one configuration: Delta_omega with in-region
    degrees for site potentials, the Laplacian of the open subgraph for
    percolation (isolated vertices stay as zero rows).
    """
    if config.carrier is not model.carrier:
        raise ValueError(
            f"{model.kind.value} needs a configuration on {model.carrier.value}, "
            f"got {config.carrier.value}"
        )
    expected = carrier_size(model, config.region)
    if config.symbols.size != expected:
        raise ValueError(f"configuration has {config.symbols.size} entries, expected {expected}")
    if model.kind is ModelKind.SITE_POTENTIAL:
        return laplacian(region_graph(config.region), config.values)
    return laplacian_from_edges(config.region.volume, open_edges(model, config))


def shift_to_positive(model: DisorderModel, d: int) -> Tuple[DisorderModel, float]:
    """
    Shift potential values by s = max(0, -min c) + 2d; every row of the shifted
    Delta_omega is then diagonally dominant, so it is positive semidefinite on
    every subregion of Z^d.
    """
    if model.kind is not ModelKind.SITE_POTENTIAL:
        raise ValueError("percolation Laplacians are already positive semidefinite")
    shift = max(0.0, -min(model.values)) + 2 * d
    shifted = DisorderModel.site_potential(
        [c + shift for c in model.values], model.probabilities
    )
    return shifted, shift
