# External imports
import networkx as nx

# Own imports
from common.logger import custom_logger
from experiments.base_experiment import BaseExperiment, check
from spectral.selfsimilar import (
    SelfSimilarSpec,
    build_tower,
    check_self_similar,
    kernel_by_name,
    path_spec,
    pattern_census,
    tower_ids,
)

logger = custom_logger()


def is_path(graph: nx.Graph) -> bool:
    n = graph.number_of_nodes()
    return (
        graph.number_of_edges() == n - 1
        and max((deg for _, deg in graph.degree()), default=0) <= 2
        and nx.is_connected(graph)
    )


class SelfSimilar(BaseExperiment):
    """
    This class contains the methods that build a self-similar tower and
    certify the convergence of its pattern-operator spectra.
    """

    def __init__(self, event, mapper=map):
        super().__init__(event, logger=logger, mapper=mapper)

    def run_self_similar(self):
        """
        Method to run tower_ids, the self-similarity diagnostic and the census.
        """
        spec_data = self.event.get("spec")
        spec = SelfSimilarSpec.from_dict(spec_data) if spec_data else path_spec()
        max_level = int(self.param("level", 6))
        kernel_name = self.params.get("kernel") or spec.kernel or "laplacian"
        radius = int(self.param("radius", 1))
        kernel = kernel_by_name(kernel_name)
        self.logger.info(
            f"Starting selfsimilar for {spec.name!r} up to level {max_level} "
            f"with kernel {kernel.name!r}..."
        )

        tower = tower_ids(
            spec,
            kernel,
            max_level,
            tol=self.config.rank_tol,
            dense_limit=self.config.dense_limit,
            mapper=self.mapper,
        )
        diagnostic = check_self_similar(spec, max_level, self.config.max_vertices)
        graphs = build_tower(spec, max_level, self.config.max_vertices)
        census = {t.level: pattern_census(t.graph, radius) for t in graphs}
        for level, f in zip(tower.levels, tower.functions):
            self.write_function(f"tower_level{level}", f)

        checks = {
            "successive_sup_within_rank_defect": check(
                tower.perturbation_bound_holds,
                distances=tower.distances,
                rank_defects=tower.rank_defects,
            ),
            "rank_defects_within_glue_bound": check(
                tower.defects_within_bounds, bounds=tower.bounds
            ),
            "self_similar": check(
                diagnostic.self_similar, certified=False, ratios=diagnostic.ratios
            ),
        }
        results = {
            "levels": tower.levels,
            "n_vertices": tower.n_vertices,
            "distances": tower.distances,
            "rank_defects": tower.rank_defects,
            "bounds": tower.bounds,
            "certified_error": tower.certified_error,
            "diagnostic": diagnostic.to_dict(),
            "census": {str(level): classes for level, classes in census.items()},
        }
        if kernel.name == "laplacian" and is_path(graphs[-1].graph):
            distance = tower.reference_distance()
            allowed = 2.0 / tower.n_vertices[-1]
            results["path_limit_distance"] = distance
            checks["path_limit"] = check(distance <= allowed, distance=distance, allowed=allowed)

        return self.write_report(
            model=spec.to_dict(),
            parameters={"level": max_level, "kernel": kernel.name, "radius": radius},
            results=results,
            checks=checks,
        )
