"""
Logging Configuration
"""

import logging
import sys
from pathlib import Path

from config import settings


def setup_logging(app_name='concentric-fit', level=None):
    """Configure logging for the application"""

    if level is None:
        level = getattr(logging, settings.LOG_LEVEL, logging.INFO)

    # stderr keeps stdout free for CSV/JSON output
    handlers = [logging.StreamHandler(sys.stderr)]

    if settings.LOG_TO_FILE:
        log_dir = Path(settings.LOG_DIR)
        log_dir.mkdir(parents=True, exist_ok=True)
        handlers.append(logging.FileHandler(log_dir / f'{app_name}.log'))

    # Configure root logger
    logging.basicConfig(
        level=level,
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        handlers=handlers,
        force=True,
    )

    # Set specific log levels for libraries
    logging.getLogger('uvicorn.access').setLevel(logging.WARNING)
    logging.getLogger('httpx').setLevel(logging.WARNING)

    return logging.getLogger(app_name)
