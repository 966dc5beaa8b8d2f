import logging
import sys
from typing import Iterable, TypeVar

from tqdm import tqdm

from .settings import get_settings

T = TypeVar("T")


def setup_logging(level: str | int | None = None) -> None:
    logging.basicConfig(
        level=level if level is not None else get_settings().LOG_LEVEL,
        format="%(asctime)s | %(levelname)s | %(name)s | %(message)s",
        handlers=[
            logging.StreamHandler(sys.stdout)
        ],
        force=True,
    )
    logging.getLogger("numexpr").setLevel(logging.WARNING)
    logging.getLogger("urllib3").setLevel(logging.WARNING)


def progress(items: Iterable[T], desc: str, total: int | None = None) -> Iterable[T]:
    """tqdm over ``items`` unless GSAN_PROGRESS is off."""
    return tqdm(items, desc=desc, total=total, disable=not get_settings().PROGRESS, leave=False)


logger = logging.getLogger("gsan")
