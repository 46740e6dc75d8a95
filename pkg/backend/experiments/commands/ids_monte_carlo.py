# Own imports
from common.exceptions import CapExceededError
from common.logger import custom_logger
from experiments.base_experiment import BaseExperiment, check
from spectral.bratteli import ids_approx, ids_monte_carlo
from spectral.stepfn import sup_distance

logger = custom_logger()

MC_TOLERANCE = 0.05


class IdsMonteCarlo(BaseExperiment):
    """
    This class contains the methods that estimate ids_approx(i) by sampling,
    for levels whose configurations cannot be enumerated.
    """

    def __init__(self, event, mapper=map):
        super().__init__(event, logger=logger, mapper=mapper)

    def run_ids_monte_carlo(self):
        """
        Method to run the Monte Carlo estimate and compare it with the exact
        approximant when the level is enumerable.
        """
        seed = self.require_seed()
        model, d = self.load_model()
        level = int(self.param("level", 2))
        samples = int(self.param("samples", 10_000))
        self.logger.info(f"Starting ids-mc at level {level} with {samples} samples...")

        estimate = ids_monte_carlo(model, level, d, samples, seed, self.mapper)
        self.write_function(f"ids_mc_level{level}", estimate)

        results = {"samples": samples, "jumps": len(estimate.breakpoints)}
        checks = {}
        try:
            exact = ids_approx(model, level, d, self.config.max_configs, self.mapper)
        except CapExceededError as exc:
            self.logger.warning(f"exact comparison skipped: {exc}")
            exact = None
        if exact is not None:
            self.write_function(f"ids_level{level}", exact)
            distance = sup_distance(estimate, exact)
            results["sup_distance_to_exact"] = distance
            checks["monte_carlo_vs_exact"] = check(
                distance <= MC_TOLERANCE,
                certified=False,
                sup_distance=distance,
                tolerance=MC_TOLERANCE,
            )

        return self.write_report(
            model=model.to_dict(),
            parameters={"d": d, "level": level, "samples": samples, "seed": seed},
            results=results,
            checks=checks,
        )
