import logging

from rich.logging import RichHandler

from mhdkin.core.config import settings


def configure_logging(debug: bool | None = None) -> None:
    """Install a single rich handler on the root logger."""
    debug = settings.debug if debug is None else debug
    logging.basicConfig(
        level=logging.DEBUG if debug else logging.INFO,
        format="%(message)s",
        datefmt="[%X]",
        handlers=[RichHandler(rich_tracebacks=True, show_path=debug)],
        force=True,
    )
