# main.py

import logging
import sys

import colorlog
from dotenv import load_dotenv

from cli import main as cli_main
from config import Config

# Load environment variables
load_dotenv()

LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'


def setup_logging(level: int = None):
    """Coloured log lines on stderr, keeping stdout for command results"""
    handler = colorlog.StreamHandler(sys.stderr)
    handler.setFormatter(colorlog.ColoredFormatter('%(log_color)s' + LOG_FORMAT))
    root = logging.getLogger()
    root.handlers[:] = [handler]
    root.setLevel(level if level is not None else Config.log_level())


logger = logging.getLogger(__name__)


def main(argv=None) -> int:
    """Entry point of the odometry toolkit"""
    try:
        Config.validate()
        setup_logging()
    except ValueError as e:
        print(f"error: config: {e}", file=sys.stderr)
        return 1

    try:
        return cli_main(argv)
    except KeyboardInterrupt:
        logger.info("Stopped by user")
        return 1


if __name__ == "__main__":
    sys.exit(main())
