"""
Command-line entry point.

Builds the argparse tree from the subcommand modules, resolves settings
(flag > env > .env > config file > default), configures logging and maps
errors to exit codes: 0 success, 2 domain error, 1 unexpected failure.
Errors are reported on stderr as one JSON object; stdout only carries
prompts and reports.
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional

from pydantic import ValidationError

from driverse import __version__
from driverse.cli import anchors, dwg, gae, lma, pipeline, synth, tokenize
from driverse.config import Settings, load_settings
from driverse.exceptions import DriverseError, ParameterError
from driverse.utils.files import dumps_json

logger = logging.getLogger(__name__)

LOG_FORMAT = "%(asctime)s | %(levelname)s | %(name)s | %(message)s"

COMMAND_GROUPS = (synth, tokenize, anchors, dwg, lma, gae, pipeline)


def configure_logging(level: str) -> None:
    """Single place for log format and level; the handler writes to stderr."""
    logging.basicConfig(
        level=getattr(logging, level.upper(), logging.WARNING),
        format=LOG_FORMAT,
        handlers=[logging.StreamHandler(sys.stderr)],
        force=True,
    )


def create_parser() -> argparse.ArgumentParser:
    """Factory for the CLI parser. Keeps main() small and testable."""
    parser = argparse.ArgumentParser(
        prog="driverse",
        description="Trajectory tokens, spatial anchors, window planning, latent alignment and GAE.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--config", type=Path, default=None, help="JSON config file with setting defaults")
    parser.add_argument("--log-level", dest="log_level", default=None, help="DEBUG, INFO, WARNING, ERROR")
    subparsers = parser.add_subparsers(dest="command", required=True)
    for group in COMMAND_GROUPS:
        group.register(subparsers)
    return parser


def _settings_from_args(args: argparse.Namespace) -> Settings:
    overrides = {name: getattr(args, name) for name in Settings.model_fields if hasattr(args, name)}
    try:
        return load_settings(args.config, **overrides)
    except ValidationError as e:
        errors = [
            {"field": ".".join(str(p) for p in err["loc"]), "message": err["msg"]} for err in e.errors()
        ]
        raise ParameterError(
            "invalid settings: " + "; ".join(f"{x['field']}: {x['message']}" for x in errors), errors=errors
        ) from e


def _report_error(payload: Dict[str, Any]) -> None:
    sys.stderr.write(dumps_json(payload))


def main(argv: Optional[List[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    args = create_parser().parse_args(argv)
    args.invocation = ["driverse", *argv]

    configure_logging(args.log_level or "WARNING")
    try:
        settings = _settings_from_args(args)
        configure_logging(settings.log_level)
        logger.info("Running %s", " ".join(args.invocation))
        return int(args.handler(args, settings))
    except DriverseError as e:
        _report_error(e.to_dict())
        return 2
    except FileNotFoundError as e:
        _report_error({"error": "file_not_found", "detail": str(e)})
        return 2
    except Exception as e:
        logger.exception("Unexpected failure: %s", e)
        _report_error({"error": "internal_error", "detail": str(e)[:500]})
        return 1


if __name__ == "__main__":
    sys.exit(main())
