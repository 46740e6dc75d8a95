# Built-in imports
from typing import Dict

# External imports
import numpy as np

# Own imports
from common.logger import custom_logger
from experiments.base_experiment import BaseExperiment, check
from experiments.commands.percolation import CLOSED_FORM_TOL, plateau_closed_form
from spectral.bratteli import (
    cauchy_report,
    check_compatibility,
    check_dimension_compatibility,
    check_embedding_invariance,
    ids_approx,
)
from spectral.generators import (
    random_block_operator,
    random_psd,
    random_symmetric_low_rank,
    random_weights,
)
from spectral.lattice import Region
from spectral.linalg import spectral_distribution
from spectral.models import (
    DisorderModel,
    ModelKind,
    model_operator,
    sample_config,
    shift_to_positive,
)
from spectral.rankring import rank, sigma, sigma_tilde
from spectral.stepfn import sup_distance

logger = custom_logger()

PERTURBATION_SLACK = 1e-8
ORACLE_TOL = 1e-8
COMPATIBILITY_TOL = 1e-12
ORACLE_GAP = 1e-6
CAUCHY_CASES = ((1, 2, 0.5), (2, 3, 0.25))


def counting_oracle(operator, points: np.ndarray) -> np.ndarray:
    """sum p_alpha #{eigenvalues <= lambda} / n_alpha with numpy's own eigvalsh."""
    total = np.zeros(points.size)
    for block in operator.blocks:
        eigenvalues = np.linalg.eigvalsh(block.matrix)
        counts = np.searchsorted(np.sort(eigenvalues), points, side="right")
        total += block.weight * counts / block.size
    return total


def oracle_points(operator) -> np.ndarray:
    """Midpoints of well separated eigenvalue gaps, plus both tails."""
    eigenvalues = np.sort(
        np.concatenate([np.linalg.eigvalsh(b.matrix) for b in operator.blocks])
    )
    gaps = np.diff(eigenvalues)
    midpoints = (eigenvalues[:-1] + eigenvalues[1:])[gaps > ORACLE_GAP] / 2
    return np.concatenate(([eigenvalues[0] - 1.0], midpoints, [eigenvalues[-1] + 1.0]))


class Verify(BaseExperiment):
    """
    This class contains the methods that run the invariant suite of the
    toolkit and fail with exit status 2 on any violated inequality.
    """

    def __init__(self, event, mapper=map):
        super().__init__(event, logger=logger, mapper=mapper)

    def run_verify(self):
        """
        Method to run every property check and write one report.
        """
        self.rng = np.random.default_rng(int(self.param("seed", 0)))
        self.trials = int(self.param("trials", self.config.verify_trials))
        model, d = self.load_model()
        self.logger.info(f"Starting verify with {self.trials} random trials...")

        checks: Dict[str, dict] = {}
        checks.update(self.verify_sigma_identity())
        checks.update(self.verify_rank_lipschitz())
        checks.update(self.verify_perturbation_bound())
        checks.update(self.verify_rank_axioms())
        checks.update(self.verify_compatibility(model))
        checks.update(self.verify_cauchy_chain(model))
        checks.update(self.verify_embedding_invariance(model))
        checks.update(self.verify_percolation())
        checks.update(self.verify_positivity_shift(model, d))

        for name, entry in checks.items():
            status = "pass" if entry["passed"] else "FAIL"
            self.logger.info(f"{name}: {status}")

        return self.write_report(
            model=model.to_dict(),
            parameters={"d": d, "trials": self.trials, "seed": int(self.param("seed", 0))},
            results={"checks_run": len(checks)},
            checks=checks,
        )

    def verify_sigma_identity(self) -> Dict[str, dict]:
        """sigma + sigma~ = 1, and sigma = eigenvalue counting on positive inputs."""
        worst_identity, worst_oracle = 0.0, 0.0
        for _ in range(self.trials):
            operator = random_block_operator(self.rng, max_blocks=3, max_size=16)
            f, g = sigma(operator, self.mapper), sigma_tilde(operator, self.mapper)
            worst_identity = max(
                worst_identity, float(np.max(np.abs(f(f.breakpoints) + g(g.breakpoints) - 1)))
            )
            positive = random_block_operator(self.rng, 3, 16, positive=True)
            points = oracle_points(positive)
            observed = sigma(positive, self.mapper)(points)
            worst_oracle = max(
                worst_oracle,
                float(np.max(np.abs(observed - counting_oracle(positive, points)))),
            )
        return {
            "sigma_complement_identity": check(worst_identity <= 1e-12, worst=worst_identity),
            "sigma_eigenvalue_oracle": check(worst_oracle <= ORACLE_TOL, worst=worst_oracle),
        }

    def verify_rank_lipschitz(self) -> Dict[str, dict]:
        """sup |sigma_A - sigma_B| <= r(A - B) on random pairs of one algebra."""
        worst = -np.inf
        for _ in range(self.trials):
            a = random_block_operator(self.rng, 3, 16)
            b = a + random_block_operator(
                self.rng, sizes=a.sizes, weights=a.weights, low_rank=True
            )
            margin = sup_distance(sigma(a), sigma(b)) - rank(a - b, self.config.rank_tol)
            worst = max(worst, margin)
        return {"sigma_rank_lipschitz": check(worst <= PERTURBATION_SLACK, worst_margin=worst)}

    def verify_perturbation_bound(self, trials: int = 100, n: int = 64) -> Dict[str, dict]:
        """||N_A - N_B|| <= r / n for B = A + symmetric rank-r perturbation."""
        worst = -np.inf
        for trial in range(trials):
            r = trial % 8 + 1
            a = random_psd(self.rng, n)
            b = a + random_symmetric_low_rank(self.rng, n, r)
            margin = sup_distance(spectral_distribution(a), spectral_distribution(b)) - r / n
            worst = max(worst, margin)
        return {"finite_rank_perturbation": check(worst <= PERTURBATION_SLACK, worst_margin=worst)}

    def verify_rank_axioms(self) -> Dict[str, dict]:
        tol = self.config.rank_tol
        worst_sum, worst_product = -np.inf, -np.inf
        for _ in range(self.trials):
            sizes = self.rng.integers(1, 9, size=self.rng.integers(1, 4))
            weights = random_weights(self.rng, len(sizes))
            a = random_block_operator(self.rng, sizes=sizes, weights=weights, low_rank=True)
            b = random_block_operator(self.rng, sizes=sizes, weights=weights, low_rank=True)
            ra, rb = rank(a, tol), rank(b, tol)
            worst_sum = max(worst_sum, rank(a + b, tol) - ra - rb)
            worst_product = max(worst_product, rank(a @ b, tol) - min(ra, rb))
        return {
            "rank_subadditive": check(worst_sum <= 2 * tol, worst_margin=worst_sum),
            "rank_submultiplicative": check(
                worst_product <= 2 * tol, worst_margin=worst_product
            ),
        }

    def verify_compatibility(self, model: DisorderModel) -> Dict[str, dict]:
        cases = [(model, 1, 1), (model, 1, 2), (model, 2, 1)]
        cases += [(DisorderModel.bond_percolation(0.5), 1, 1)]
        cases += [(DisorderModel.site_percolation(0.5), 1, 1)]
        checks = {}
        for case_model, d, i in cases:
            name = f"compatibility_{case_model.kind.value}_d{d}_i{i}"
            residual = check_compatibility(case_model, i, d, self.config.max_configs)
            dimension = check_dimension_compatibility(case_model, i, d, self.config.max_configs)
            checks[name] = check(
                residual <= COMPATIBILITY_TOL and dimension == 0,
                residual=residual,
                dimension_residual=dimension,
            )
        return checks

    def verify_cauchy_chain(self, model: DisorderModel) -> Dict[str, dict]:
        checks = {}
        for i, j, expected_bound in CAUCHY_CASES:
            report = cauchy_report(
                model, i, j, 1, self.config.rank_tol, self.config.max_configs, self.mapper
            )
            checks[f"cauchy_{i}_{j}"] = check(
                report.within_bound
                and report.lipschitz_holds
                and report.bound <= expected_bound + 1e-12,
                **report.to_dict(),
            )
        return checks

    def verify_embedding_invariance(self, model: DisorderModel) -> Dict[str, dict]:
        report = check_embedding_invariance(
            model, 1, 2, 1, self.config.rank_tol, self.config.max_configs, self.mapper
        )
        drift = max(report.rank_drift, report.identity_rank_drift, report.sigma_drift)
        return {"embedding_invariance": check(drift <= 1e-9, worst_drift=drift)}

    def verify_percolation(self) -> Dict[str, dict]:
        worst = 0.0
        for p in self.config.p_grid:
            for kind, model in (
                ("bond", DisorderModel.bond_percolation(p)),
                ("site", DisorderModel.site_percolation(p)),
            ):
                f = ids_approx(model, 1, 1, self.config.max_configs, self.mapper)
                worst = max(worst, abs(f(1.0) - plateau_closed_form(kind, p)))
        return {"percolation_plateaus": check(worst <= CLOSED_FORM_TOL, worst=worst)}

    def verify_positivity_shift(self, model: DisorderModel, d: int) -> Dict[str, dict]:
        if model.kind is not ModelKind.SITE_POTENTIAL:
            return {}
        shifted, shift = shift_to_positive(model, d)
        region = Region.cube(d, 4)
        smallest = min(
            float(np.min(np.linalg.eigvalsh(
                model_operator(shifted, sample_config(shifted, region, 0, stream=m)).entries
            )))
            for m in range(20)
        )
        return {"positivity_shift": check(smallest >= -1e-8, shift=shift, smallest=smallest)}
