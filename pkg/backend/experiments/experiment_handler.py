# Built-in imports
from typing import Callable

# Own imports
from common.logger import custom_logger
from experiments.__init__ import *  # noqa NOSONAR


logger = custom_logger()

# CLI subcommand -> (class, method)
COMMANDS = {
    "ids-approx": ("IdsApprox", "run_ids_approx"),
    "ids-empirical": ("IdsEmpirical", "run_ids_empirical"),
    "ids-mc": ("IdsMonteCarlo", "run_ids_monte_carlo"),
    "percolation": ("Percolation", "run_percolation"),
    "selfsimilar": ("SelfSimilar", "run_self_similar"),
    "verify": ("Verify", "run_verify"),
}


def experiment_handler(event: dict, mapper: Callable = map):
    try:
        # Gather custom class and method handlers from input event
        class_name = event.get("params", {}).get("class_name")
        method_name = event.get("params", {}).get("method_name")
        if class_name is None and event.get("command") in COMMANDS:
            class_name, method_name = COMMANDS[event["command"]]
        logger.info("Experiment Main Handler Event")
        logger.debug(event)

        if class_name is not None and method_name is not None:
            # Dynamically load and initialize the target class at runtime
            target_class = globals()[class_name]
            target_instance = target_class(event, mapper=mapper)
            logger.debug(f"dynamically loaded target_instance: {target_instance}")

            # Dynamically load and execute the method at runtime
            target_method = getattr(target_instance, method_name)
            logger.debug(f"dynamically loaded target_method: {target_method}")
            return target_method()
        else:
            message = "class_name and method_name are not provided in event params"
            logger.info(message)
            return {"Message": message}
    except Exception as e:
        logger.exception(f"Error while executing experiment handler: {e}")
        logger.exception(f"Experiment Event was: {event}")
        raise e
