# Built-in imports
import sys
from typing import Optional, Union
import uuid

# External imports
from aws_lambda_powertools import Logger


def custom_logger(
    correlation_id: Optional[Union[str, uuid.UUID, None]] = None,
    level: Optional[str] = None,
) -> Logger:
    """Returns a custom <aws_lambda_powertools.Logger> Object."""
    return Logger(
        service="rank-ring-ids",
        level=level,
        log_uncaught_exceptions=True,
        stream=sys.stderr,
        correlation_id=correlation_id,
    )
