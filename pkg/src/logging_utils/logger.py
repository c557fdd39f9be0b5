import logging
import sys

from config import get_config


def setup_logger(name="ncf_testbed"):
    logger = logging.getLogger(name)
    level = str(get_config("NCF_LOG_LEVEL", default="INFO")).upper()
    logger.setLevel(getattr(logging, level, logging.INFO))
    # stdout is reserved for data
    handler = logging.StreamHandler(sys.stderr)
    formatter = logging.Formatter('[%(asctime)s] %(levelname)s: %(message)s')
    handler.setFormatter(formatter)
    if not logger.handlers:
        logger.addHandler(handler)
    logger.propagate = False
    return logger
