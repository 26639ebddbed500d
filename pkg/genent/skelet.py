import argparse
import logging
import logging.handlers
import os
import tempfile
import time
from contextlib import contextmanager

from . import config
from . import report


LOG_FORMAT = "%(asctime)s %(name)s %(threadName)s %(levelname)s %(message)s"


def setup_logger(app_name, stderr_log_lvl):
    """
    Console gets `stderr_log_lvl`, the rotating log file next to other
    temporary files always gets everything from DEBUG up.
    """
    logging.basicConfig(level=logging.NOTSET, handlers=[], force=True)
    root = logging.getLogger()

    formatter = logging.Formatter(LOG_FORMAT)
    formatter.converter = time.gmtime

    # scipy.optimize gets noisy on DEBUG
    for chatty in ("scipy",):
        logging.getLogger(chatty).setLevel(logging.WARNING)

    console = logging.StreamHandler()
    console.setFormatter(formatter)
    console.setLevel(stderr_log_lvl)
    root.addHandler(console)

    logfile = logging.handlers.RotatingFileHandler(
        filename=os.path.join(tempfile.gettempdir(), f"{app_name}.log"),
        maxBytes=1000 * 1000,
        backupCount=2,
    )
    logfile.setFormatter(formatter)
    logfile.setLevel(logging.DEBUG)
    root.addHandler(logfile)

    return logging.getLogger(app_name)


def add_logging_opts(parser):
    parser.add_argument(
        "--config",
        type=argparse.FileType("r"),
        help="YAML file with tolerances, dim_cap, restarts and max_iters",
    )
    verbosity = parser.add_mutually_exclusive_group()
    verbosity.add_argument(
        "-v",
        "--verbose",
        action="store_true",
        help="Log progress of searches and sweeps",
    )
    verbosity.add_argument(
        "-d",
        "--debug",
        action="store_true",
        help="Log every iteration and residual",
    )


@contextmanager
def run_setup(args, logger_name="genent"):
    """
    Configure logging and numerics for one command run. Yields the run
    config and a report document which is saved on exit if it got
    a filename assigned.
    """
    if args.debug:
        level = logging.DEBUG
    elif args.verbose:
        level = logging.INFO
    else:
        level = logging.WARNING
    logger = setup_logger(logger_name, level)
    logger.debug(f"Args: {args}")

    run_config = config.run_config_from_args(args)
    logger.debug(f"Run config: {run_config}")

    rdata = report.Report(None)
    rdata.set("command", run_config.command)
    rdata.set("seed", run_config.seed)
    rdata.set("config_hash", run_config.config_hash())
    rdata.set("parameters", run_config.dump())

    try:
        yield (run_config, rdata)
    finally:
        if rdata.filename is not None:
            rdata.save()
            logger.info(f"Report saved to {rdata.filename}")
