# Own imports
from common.logger import custom_logger
from experiments.base_experiment import BaseExperiment, check
from spectral.bratteli import cauchy_report, ids_chain, level_algebra
from spectral.models import ModelKind
from spectral.rankring import eigenvalue_distribution, gershgorin_shift

logger = custom_logger()


class IdsApprox(BaseExperiment):
    """
    This class contains the methods that compute the levelwise approximants
    ids_approx(i) together with their Cauchy certificates.
    """

    def __init__(self, event, mapper=map):
        super().__init__(event, logger=logger, mapper=mapper)

    def run_ids_approx(self):
        """
        Method to run the exact enumeration chain over the requested levels.
        """
        model, d = self.load_model()
        levels = sorted(set(int(i) for i in self.param("levels", [1, 2])))
        self.logger.info(f"Starting ids-approx for levels {levels} in d={d}...")

        chain = ids_chain(
            model,
            d,
            levels,
            tol=self.config.rank_tol,
            max_configs=self.config.max_configs,
            mapper=self.mapper,
        )
        steps = list(chain.steps)
        if len(levels) == 1:
            steps.append(
                cauchy_report(
                    model,
                    levels[0],
                    levels[0],
                    d,
                    self.config.rank_tol,
                    self.config.max_configs,
                    self.mapper,
                )
            )

        # sigma counts singular values; it is the IDS only for positive operators
        positive = model.kind is not ModelKind.SITE_POTENTIAL or min(model.values) >= 1
        level_results = []
        for level in levels:
            entry = {
                "level": level,
                "sigma_csv": self.write_function(f"sigma_level{level}", chain.functions[level]),
                "jumps": len(chain.functions[level].breakpoints),
                "certified_error": chain.certified_error[level],
            }
            if not positive:
                delta = level_algebra(
                    model, level, d, self.config.max_configs, self.mapper
                ).delta
                entry["shift"] = gershgorin_shift(delta)
                entry["ids_csv"] = self.write_function(
                    f"ids_level{level}", eigenvalue_distribution(delta, self.mapper)
                )
            else:
                entry["ids_csv"] = entry["sigma_csv"]
            level_results.append(entry)

        checks = {}
        for step in steps:
            checks[f"cauchy_{step.i}_{step.j}_rank_within_bound"] = check(
                step.within_bound, rank_distance=step.rank_distance, bound=step.bound
            )
            checks[f"cauchy_{step.i}_{step.j}_sup_within_rank"] = check(
                step.lipschitz_holds,
                sigma_distance=step.sigma_distance,
                rank_distance=step.rank_distance,
            )

        return self.write_report(
            model=model.to_dict(),
            parameters={"d": d, "levels": levels, "rank_tol": self.config.rank_tol},
            results={
                "positive": positive,
                "levels": level_results,
                "steps": [step.to_dict() for step in steps],
                "certified_error_truncated_at": chain.deepest,
            },
            checks=checks,
        )
