"""
Finite levels of the rank ring: weighted direct sums of square matrices,
their normalized rank, and the spectral functions sigma / sigma-tilde.

sigma is computed from singular values for every block, so no positivity or
self-adjointness is required: for a general T the lambda^- spaces of T and of
the positive root of T^T T coincide.
"""

# Built-in imports
import math
from dataclasses import dataclass
from typing import Callable, Iterable, NamedTuple, Optional, Sequence

# External imports
import numpy as np

# Own imports
from common.logger import custom_logger
from spectral.linalg import RANK_TOL, numerical_rank, singular_values
from spectral.stepfn import MASS_TOL, StepFunction, from_samples

logger = custom_logger()

Mapper = Callable


class Block(NamedTuple):
    weight: float
    matrix: np.ndarray

    @property
    def size(self) -> int:
        return self.matrix.shape[0]


@dataclass(frozen=True, eq=False)
class BlockOperator:
    """Element of R_i: blocks (p_alpha, A_alpha) with sum p_alpha = 1."""

    blocks: tuple
    level: Optional[int] = None

    def __post_init__(self):
        blocks = []
        for weight, matrix in self.blocks:
            matrix = np.array(matrix, dtype=float)
            if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1] or matrix.size == 0:
                raise ValueError(f"block matrices must be square, got {matrix.shape}")
            if not 0 < weight <= 1:
                raise ValueError(f"block weights must lie in (0, 1], got {weight}")
            matrix.setflags(write=False)
            blocks.append(Block(float(weight), matrix))
        if not blocks:
            raise ValueError("a block operator needs at least one block")
        weight_sum = math.fsum(b.weight for b in blocks)
        if abs(weight_sum - 1.0) > MASS_TOL:
            raise ValueError(f"block weights sum to {weight_sum!r}, expected 1")
        object.__setattr__(self, "blocks", tuple(blocks))

    @classmethod
    def from_matrices(
        cls, weights: Sequence[float], matrices: Iterable[np.ndarray], level=None
    ) -> "BlockOperator":
        return cls(tuple(zip(weights, matrices)), level)

    @property
    def weights(self) -> np.ndarray:
        return np.array([b.weight for b in self.blocks])

    @property
    def sizes(self) -> tuple:
        return tuple(b.size for b in self.blocks)

    def _check_compatible(self, other: "BlockOperator") -> None:
        if self.sizes != other.sizes or not np.array_equal(self.weights, other.weights):
            raise ValueError("block operators live in different algebras")

    def _combine(self, other: "BlockOperator", op) -> "BlockOperator":
        self._check_compatible(other)
        return BlockOperator(
            tuple(
                (a.weight, op(a.matrix, b.matrix))
                for a, b in zip(self.blocks, other.blocks)
            ),
            self.level,
        )

    def __add__(self, other: "BlockOperator") -> "BlockOperator":
        return self._combine(other, np.add)

    def __sub__(self, other: "BlockOperator") -> "BlockOperator":
        return self._combine(other, np.subtract)

    def __matmul__(self, other: "BlockOperator") -> "BlockOperator":
        return self._combine(other, np.matmul)

    def scale(self, factor: float) -> "BlockOperator":
        return BlockOperator(
            tuple((b.weight, factor * b.matrix) for b in self.blocks), self.level
        )

    def identity_like(self) -> "BlockOperator":
        return BlockOperator(
            tuple((b.weight, np.eye(b.size)) for b in self.blocks), self.level
        )

    def zero_like(self) -> "BlockOperator":
        return BlockOperator(
            tuple((b.weight, np.zeros((b.size, b.size))) for b in self.blocks),
            self.level,
        )


def weighted_dimension(operator: BlockOperator, dimensions: Sequence[int]) -> float:
    """dim_R of the submodule with the given per-block subspace dimensions."""
    if len(dimensions) != len(operator.blocks):
        raise ValueError("one subspace dimension per block is required")
    return math.fsum(
        b.weight * dim / b.size for b, dim in zip(operator.blocks, dimensions)
    )


def rank(operator: BlockOperator, tol: float = RANK_TOL, mapper: Mapper = map) -> float:
    """Normalized rank r_i = sum p_alpha Rank(A_alpha) / n_alpha."""
    ranks = list(mapper(lambda b: numerical_rank(b.matrix, tol), operator.blocks))
    return min(1.0, weighted_dimension(operator, ranks))


def sigma(operator: BlockOperator, mapper: Mapper = map) -> StepFunction:
    """
    sigma_T: weighted singular-value counting function. Per-block values are
    merged into one sorted sample list with masses p_alpha / n_alpha, so the
    reduction does not depend on the order blocks were processed in.
    """
    spectra = list(mapper(lambda b: singular_values(b.matrix), operator.blocks))
    masses = [np.full(b.size, b.weight / b.size) for b in operator.blocks]
    logger.debug(
        f"sigma over {len(operator.blocks)} blocks",
        ring_level=operator.level,
    )
    return from_samples(np.concatenate(spectra), np.concatenate(masses))


def sigma_tilde(operator: BlockOperator, mapper: Mapper = map) -> StepFunction:
    """Maximal weighted dimension of lambda^+ spaces: 1 - sigma_T."""
    return sigma(operator, mapper).complement()


def gershgorin_shift(operator: BlockOperator) -> float:
    """Smallest c >= 0 making every block of T + cI diagonally dominant."""
    shift = 0.0
    for block in operator.blocks:
        diagonal = np.diag(block.matrix)
        radius = np.abs(block.matrix).sum(axis=1) - np.abs(diagonal)
        shift = max(shift, float(np.max(radius - diagonal)))
    return shift


def eigenvalue_distribution(operator: BlockOperator, mapper: Mapper = map) -> StepFunction:
    """
    Weighted eigenvalue-counting function of a symmetric operator that need
    not be positive: sigma of T + cI, moved back by c.
    """
    shift = gershgorin_shift(operator)
    if shift == 0.0:
        return sigma(operator, mapper)
    shifted = operator + operator.identity_like().scale(shift)
    return sigma(shifted, mapper).translate(-shift)
