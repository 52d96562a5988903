from functools import wraps
import logging


def log_processing(func):
    logger = logging.getLogger(func.__module__)

    @wraps(func)
    def wrapper(*args, **kwargs):
        logger.info(f"Processing {func.__name__}...")
        value = func(*args, **kwargs)
        return value

    return wrapper
