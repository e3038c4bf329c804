# console.py
import logging
import sys

from colorama import Fore, Style, init

init(autoreset=True)

ROOT_LOGGER = "tagtrend"

_TAGS = {
    logging.DEBUG:    ("[DBG] ", Style.DIM),
    logging.INFO:     ("[INFO]", Fore.CYAN),
    logging.WARNING:  ("[WARN]", Fore.YELLOW),
    logging.ERROR:    ("[FAIL]", Fore.RED),
    logging.CRITICAL: ("[FAIL]", Fore.RED + Style.BRIGHT),
}


class BracketFormatter(logging.Formatter):
    """Render records as '[WARN] message', colored when writing to a terminal."""

    def __init__(self, color: bool = True):
        super().__init__()
        self.color = color

    def format(self, record: logging.LogRecord) -> str:
        tag, color = _TAGS.get(record.levelno, ("[INFO]", ""))
        if getattr(record, "ok", False):
            tag, color = "[OK]  ", Fore.GREEN
        msg = record.getMessage()
        if record.exc_info:
            msg = f"{msg}\n{self.formatException(record.exc_info)}"
        if self.color:
            return f"{color}{tag}{Style.RESET_ALL} {msg}"
        return f"{tag} {msg}"


def get_logger(name: str) -> logging.Logger:
    short = name.rsplit(".", 1)[-1]
    return logging.getLogger(f"{ROOT_LOGGER}.{short}")


def setup_console(verbose: bool = False, stream=None) -> logging.Logger:
    root = logging.getLogger(ROOT_LOGGER)
    stream = stream or sys.stderr
    for h in list(root.handlers):
        if getattr(h, "_tagtrend_console", False):
            root.removeHandler(h)
    handler = logging.StreamHandler(stream)
    handler.setFormatter(BracketFormatter(color=hasattr(stream, "isatty") and stream.isatty()))
    handler._tagtrend_console = True
    root.addHandler(handler)
    root.setLevel(logging.DEBUG if verbose else logging.INFO)
    return root


def ok(logger: logging.Logger, msg: str, *args) -> None:
    """Log a success line, shown with the green [OK] tag."""
    logger.info(msg, *args, extra={"ok": True})
