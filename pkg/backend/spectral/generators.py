"""Random operators with known structure, for the rank and spectral checks."""

# Built-in imports
from typing import Optional, Sequence

# External imports
import numpy as np

# Own imports
from spectral.rankring import BlockOperator


def random_psd(rng: np.random.Generator, n: int, floor: float = 0.1) -> np.ndarray:
    """Symmetric positive definite matrix with eigenvalues >= floor."""
    q, _ = np.linalg.qr(rng.standard_normal((n, n)))
    eigenvalues = floor + rng.exponential(1.0, size=n)
    return (q * eigenvalues) @ q.T


def random_symmetric_low_rank(
    rng: np.random.Generator, n: int, r: int, scale: float = 1.0
) -> np.ndarray:
    """Symmetric matrix of rank exactly r (almost surely)."""
    if not 0 <= r <= n:
        raise ValueError(f"rank {r} outside 0..{n}")
    vectors = rng.standard_normal((n, r))
    signs = rng.choice([-1.0, 1.0], size=r)
    return scale * (vectors * signs) @ vectors.T


def random_low_rank(rng: np.random.Generator, n: int, r: int) -> np.ndarray:
    """General square matrix of rank r (almost surely)."""
    if not 0 <= r <= n:
        raise ValueError(f"rank {r} outside 0..{n}")
    return rng.standard_normal((n, r)) @ rng.standard_normal((r, n))


def random_weights(rng: np.random.Generator, count: int) -> np.ndarray:
    weights = rng.uniform(0.1, 1.0, size=count)
    weights = weights / weights.sum()
    # exact unit sum for the block-operator validation
    weights[-1] = 1.0 - weights[:-1].sum()
    return weights


def random_block_operator(
    rng: np.random.Generator,
    max_blocks: int = 3,
    max_size: int = 16,
    sizes: Optional[Sequence[int]] = None,
    weights: Optional[Sequence[float]] = None,
    positive: bool = False,
    low_rank: bool = False,
) -> BlockOperator:
    """
    Random element of some R_i. Passing `sizes` and `weights` gives operators
    in one common algebra, as needed for sums and products.
    """
    if sizes is None:
        sizes = rng.integers(1, max_size + 1, size=rng.integers(1, max_blocks + 1))
    sizes = [int(n) for n in sizes]
    if weights is None:
        weights = random_weights(rng, len(sizes))
    matrices = []
    for n in sizes:
        if positive:
            matrices.append(random_psd(rng, n))
        elif low_rank:
            matrices.append(random_low_rank(rng, n, int(rng.integers(0, n + 1))))
        else:
            matrices.append(rng.standard_normal((n, n)))
    return BlockOperator.from_matrices(weights, matrices)
