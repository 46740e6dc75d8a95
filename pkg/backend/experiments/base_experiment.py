# Built-in imports
import uuid
from typing import Callable, Dict, List, Optional, Tuple

# External imports
from aws_lambda_powertools import Logger

# Own imports
from common.config import AppConfig, load_app_config
from common.exceptions import InvariantViolationError, SpecParseError
from common.helpers.output_helper import OutputHelper
from common.logger import custom_logger
from spectral.models import DisorderModel

REPORT_SCHEMA = 1


class BaseExperiment:
    """
    Class that contains the base helpers/attributes for all experiment commands.
    """

    command: str = ""
    correlation_id: str = ""

    def __init__(
        self,
        event: dict,
        logger: Optional[Logger] = None,
        mapper: Callable = map,
    ):
        self.event = event
        self.logger = logger or custom_logger()
        self.mapper = mapper

        self.logger.info(self.__class__.__name__ + " class event")
        self.logger.info(event, message_details="Received Event")

        self.command: str = self.event.get("command", "")
        self.params: dict = self.event.get("params", {})
        self.seed: Optional[int] = self.params.get("seed")

        # Load correlation ID from event, or generate a new one
        correlation_id_from_event = self.event.get("correlation_id")
        self.correlation_id: str = correlation_id_from_event or str(uuid.uuid4())

        self.logger.append_keys(
            correlation_id=self.correlation_id,
            command=self.command,
            seed=self.seed,
        )

        self.config: AppConfig = load_app_config(self.event.get("environment"))
        self.config = self.config.with_overrides(rank_tol=self.params.get("tol"))
        self.logger.setLevel(self.config.log_level)

        self.output = OutputHelper(self.event.get("output_dir", "."))
        self.artifacts: List[str] = []

    def param(self, name: str, default=None):
        value = self.params.get(name)
        return default if value is None else value

    def require_seed(self) -> int:
        if self.seed is None:
            raise SpecParseError(f"{self.command} is stochastic and needs --seed")
        return int(self.seed)

    def load_model(self) -> Tuple[DisorderModel, int]:
        """Model from the event (or the profile default) and its lattice dimension."""
        data = self.event.get("model") or self.config.default_model
        model = DisorderModel.from_dict(data)
        d = self.params.get("dim") or data.get("d") or 1
        return model, int(d)

    def write_function(self, name: str, step_function) -> str:
        """Write `<name>.csv` and return the file name (reports stay path independent)."""
        file_name = f"{name}.csv"
        self.artifacts.append(self.output.write_step_function(file_name, step_function))
        return file_name

    def write_report(
        self,
        model: Optional[dict],
        parameters: dict,
        results: dict,
        checks: Dict[str, dict],
    ) -> dict:
        """
        Write report.json and raise InvariantViolationError when a certified
        check failed. Statistical checks are reported only.
        """
        report = {
            "schema": REPORT_SCHEMA,
            "command": self.command,
            "model": model,
            "parameters": parameters,
            "results": results,
            "checks": checks,
        }
        path = self.output.write_json("report.json", report)
        self.artifacts.append(path)

        failed = [
            name
            for name, check in checks.items()
            if check.get("certified", True) and not check["passed"]
        ]
        if failed:
            self.logger.error(f"certified checks failed: {failed}")
            raise InvariantViolationError(failed)

        self.logger.info(f"{self.command} finished with {len(self.artifacts)} artifacts")
        return {
            "command": self.command,
            "artifacts": list(self.artifacts),
            "checks": {name: check["passed"] for name, check in checks.items()},
        }


def check(passed: bool, certified: bool = True, **details) -> dict:
    """One entry of the report "checks" section."""
    return {"passed": bool(passed), "certified": certified, **details}
