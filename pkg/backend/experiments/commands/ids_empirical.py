# Own imports
from common.logger import custom_logger
from experiments.base_experiment import BaseExperiment, check
from spectral.bratteli import empirical_run
from spectral.models import values_of

logger = custom_logger()

SAMPLING_TERM = 0.05
FREQUENCY_SIGMAS = 3.0


class IdsEmpirical(BaseExperiment):
    """
    This class contains the methods that compare one sampled configuration on
    a box with its C_j tiling and with ids_approx(j).
    """

    def __init__(self, event, mapper=map):
        super().__init__(event, logger=logger, mapper=mapper)

    def run_ids_empirical(self):
        """
        Method to run one empirical Folner comparison.
        """
        seed = self.require_seed()
        model, d = self.load_model()
        side = int(self.param("side", 4096))
        j = int(self.param("level", 2))
        sampling_term = float(self.param("sampling_term", SAMPLING_TERM))
        self.logger.info(f"Starting ids-empirical on side {side} with tiles C_{j}...")

        report = empirical_run(
            model,
            d,
            side,
            j,
            seed,
            tol=self.config.rank_tol,
            dense_limit=self.config.dense_limit,
            max_configs=self.config.max_configs,
            mapper=self.mapper,
        )
        self.write_function("n_full", report.n_full)
        self.write_function("n_tiles", report.n_tiles)
        if report.ids_level is not None:
            self.write_function(f"ids_level{j}", report.ids_level)

        frequencies = [
            {
                "configuration": [float(v) for v in values_of(model, list(key))],
                "observed": report.frequencies.get(key, 0.0),
                "expected": expected,
                "z": report.z_scores[key],
            }
            for key, expected in report.expected.items()
        ]
        max_z = max((abs(z) for z in report.z_scores.values()), default=0.0)

        checks = {
            "rank_defect_within_tile_boundary": check(
                report.defect_within_boundary,
                rank_defect=report.rank_defect,
                tile_boundary_fraction=report.tile_boundary_fraction,
            ),
            "tiles_sup_within_rank_defect": check(
                report.perturbation_bound_holds,
                sup_distance=report.tiles_distance,
                rank_defect=report.rank_defect,
            ),
            "tile_frequencies": check(
                max_z <= FREQUENCY_SIGMAS, certified=False, max_abs_z=max_z
            ),
        }
        if report.ids_distance is not None:
            checks["ids_distance"] = check(
                report.ids_distance <= report.rank_defect + sampling_term,
                certified=False,
                sup_distance=report.ids_distance,
                allowed=report.rank_defect + sampling_term,
            )

        return self.write_report(
            model=model.to_dict(),
            parameters={"d": d, "side": side, "level": j, "seed": seed},
            results={
                "tile_count": report.tile_count,
                "frequencies": frequencies,
                "rank_defect": report.rank_defect,
                "row_defect": report.row_defect,
                "tile_boundary_fraction": report.tile_boundary_fraction,
                "tiles_distance": report.tiles_distance,
                "ids_distance": report.ids_distance,
            },
            checks=checks,
        )
