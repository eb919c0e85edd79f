"""
Logger Module for ShareChain
Colored console logging, optional file logging and the console printers
used by the CLI (banner, interval headers, tables, outcome lines)
"""

import logging
from typing import Optional

import pandas as pd
from colorama import init, Fore, Style, Back

import config

# Windows consoles need the ANSI shim
init()

LEVEL_COLORS = {
    logging.DEBUG: Fore.CYAN,
    logging.INFO: Fore.GREEN,
    logging.WARNING: Fore.YELLOW,
    logging.ERROR: Fore.RED,
    logging.CRITICAL: Fore.RED + Back.WHITE,
}

LINE_FORMAT = '%(asctime)s | %(levelname)s | %(message)s'


class ColoredFormatter(logging.Formatter):
    """Colors level name and message by severity; leaves the record untouched for other handlers"""

    def format(self, record):
        color = LEVEL_COLORS.get(record.levelno, Fore.WHITE)
        tinted = logging.makeLogRecord(record.__dict__)
        tinted.levelname = f"{color}{record.levelname}{Style.RESET_ALL}"
        tinted.msg = f"{color}{record.msg}{Style.RESET_ALL}"
        return super().format(tinted)


def _level(name: str) -> int:
    level = logging.getLevelName(name.upper())
    return level if isinstance(level, int) else logging.INFO


def setup_logger(name: str = "ShareChain", log_file: Optional[str] = None) -> logging.Logger:
    """
    Logger with a colored stderr handler and, when LOG_TO_FILE is set (or
    log_file is given), a plain file handler. Calling it twice is harmless.
    """
    log = logging.getLogger(name)
    log.setLevel(_level(config.LOG_LEVEL))
    if log.handlers:
        return log

    console = logging.StreamHandler()
    console.setFormatter(ColoredFormatter(LINE_FORMAT, datefmt='%H:%M:%S'))
    log.addHandler(console)

    path = log_file or (config.LOG_FILE_PATH if config.LOG_TO_FILE else None)
    if path:
        file_handler = logging.FileHandler(path, encoding='utf-8')
        file_handler.setFormatter(logging.Formatter(LINE_FORMAT, datefmt='%Y-%m-%d %H:%M:%S'))
        log.addHandler(file_handler)
    return log


def set_level(name: str):
    logger.setLevel(_level(name))


# =============================================================================
# Console printers
# =============================================================================

def print_banner():
    """Print startup banner"""
    mode = f"{Fore.GREEN}strict" if config.STRICT_VERIFICATION else f"{Fore.YELLOW}constant-only"
    banner = f"""
{Fore.CYAN}╔══════════════════════════════════════════════════════════════╗
║  {Fore.YELLOW}🔐 SHARECHAIN: TWO-LEVEL SECRET SHARING ON A CHAIN 🔐{Fore.CYAN}        ║
║  {Fore.WHITE}Level 1: h-shares prove honesty via H(s){Fore.CYAN}                    ║
║  {Fore.WHITE}Level 2: f-shares released only after verification{Fore.CYAN}         ║
╚══════════════════════════════════════════════════════════════╝{Style.RESET_ALL}
  one-way {config.DEFAULT_ONEWAY} | verification {mode}{Style.RESET_ALL} | tau1 {config.TAU1_TICKS} ticks
"""
    print(banner)


def print_interval_header(interval: int, tx_count: int):
    rule = f"{Fore.CYAN}{'=' * 60}{Style.RESET_ALL}"
    print(f"\n{rule}\n{Fore.CYAN}⛓️  Interval #{interval} | {tx_count} transactions{Style.RESET_ALL}\n{rule}")


def print_table(title: str, frame: pd.DataFrame):
    """Titled pandas table, wide enough for a full share row"""
    print(f"\n{Fore.WHITE}{Style.BRIGHT}{title}{Style.RESET_ALL}")
    with pd.option_context('display.max_columns', config.TABLE_MAX_COLUMNS, 'display.width', 200):
        print(frame.to_string())


def print_block_summary(block):
    flag = f"{Fore.YELLOW}timeout_validated" if block.timeout_validated else f"{Fore.GREEN}validated"
    print(f"{Fore.WHITE}🧱 height={block.height} hash={block.hash_hex()[:16]}… "
          f"txs={len(block.transactions)} nonce={block.header.nonce} {flag}{Style.RESET_ALL}")


def print_outcome(line: str, ok: bool):
    """Session summary line: green when recovered, red when aborted"""
    color = Fore.GREEN if ok else Fore.RED
    print(f"{color}{'🔓' if ok else '🔒'} {line}{Style.RESET_ALL}")


logger = setup_logger()
