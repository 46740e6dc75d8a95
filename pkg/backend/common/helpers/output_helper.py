# Built-in imports
import os
import csv
import json
from typing import Any

# Own imports
from common.logger import custom_logger

logger = custom_logger()


class OutputHelper:
    """Custom helper for reading experiment inputs and writing their artifacts."""

    def __init__(self, output_dir: str) -> None:
        """
        :param output_dir (str): Directory where CSV and JSON artifacts are written.
        """
        self.output_dir = output_dir

    def _path(self, name: str) -> str:
        # Make sure the output directory exists
        os.makedirs(self.output_dir, exist_ok=True)
        return os.path.join(self.output_dir, name)

    @staticmethod
    def read_json(input_path: str) -> Any:
        """
        Method to load a JSON document (model or self-similar spec) from disk.
        :param input_path (str): The local file path of the document.
        """
        try:
            with open(input_path, "r", encoding="utf-8") as f:
                return json.load(f)

        except OSError as exc:
            logger.error(
                f"read_json operation failed for: "
                f"input_path: {input_path}. "
                f"exc: {exc}."
            )
            raise exc

    def write_json(self, name: str, data: Any) -> str:
        """
        Method to write a JSON object with stable key order and formatting.
        :param name (str): File name inside the output directory.
        :param data (Any): The in memory data to serialize (e.g., a report dict).
        """
        path = self._path(name)
        try:
            with open(path, "w", encoding="utf-8") as f:
                f.write(json.dumps(data, indent=2, sort_keys=True, default=str))
                f.write("\n")
            return path

        except OSError as exc:
            logger.error(
                f"write_json operation failed for: "
                f"path: {path}. "
                f"exc: {exc}."
            )
            raise exc

    def write_step_function(self, name: str, step_function) -> str:
        """
        Method to write a step function as `lambda,value` CSV.
        :param name (str): File name inside the output directory.
        :param step_function (StepFunction): The function to serialize.
        """
        path = self._path(name)
        try:
            with open(path, "w", encoding="utf-8", newline="") as f:
                writer = csv.writer(f, lineterminator="\n")
                writer.writerow(["lambda", "value"])
                writer.writerows(step_function.to_csv_rows())
            return path

        except OSError as exc:
            logger.error(
                f"write_step_function operation failed for: "
                f"path: {path}. "
                f"exc: {exc}."
            )
            raise exc
