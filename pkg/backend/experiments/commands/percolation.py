# Own imports
from common.logger import custom_logger
from experiments.base_experiment import BaseExperiment, check
from spectral.bratteli import ids_approx
from spectral.models import DisorderModel

logger = custom_logger()

CLOSED_FORM_TOL = 1e-10


def plateau_closed_form(kind: str, p: float) -> float:
    """Level-1 value on [0, 2) in d=1: the edge is present with p (bond) or p^2 (site)."""
    present = p if kind == "bond" else p * p
    return 1.0 - present / 2.0


class Percolation(BaseExperiment):
    """
    This class contains the methods that sweep bond and site percolation over
    a grid of retention parameters.
    """

    def __init__(self, event, mapper=map):
        super().__init__(event, logger=logger, mapper=mapper)

    def run_percolation(self):
        """
        Method to compute ids_approx for both percolation kinds at every p.
        """
        d = int(self.param("dim", 1))
        level = int(self.param("level", 1))
        p_grid = [float(p) for p in self.params.get("p_grid") or self.config.p_grid]
        self.logger.info(f"Starting percolation sweep over p={p_grid}...")

        constructors = {
            "bond": DisorderModel.bond_percolation,
            "site": DisorderModel.site_percolation,
        }
        results, checks = [], {}
        for p in p_grid:
            for kind, constructor in constructors.items():
                f = ids_approx(
                    constructor(p), level, d, self.config.max_configs, self.mapper
                )
                entry = {
                    "kind": kind,
                    "p": p,
                    "at_zero": f(0.0),
                    "csv": self.write_function(f"{kind}_p{p:g}_level{level}", f),
                }
                if d == 1 and level == 1:
                    expected = plateau_closed_form(kind, p)
                    entry["closed_form"] = expected
                    checks[f"{kind}_p{p:g}_plateau"] = check(
                        abs(f(1.0) - expected) <= CLOSED_FORM_TOL and f(2.5) == 1.0,
                        observed=f(1.0),
                        expected=expected,
                    )
                results.append(entry)

        return self.write_report(
            model=None,
            parameters={"d": d, "level": level, "p_grid": p_grid},
            results={"sweep": results},
            checks=checks,
        )
