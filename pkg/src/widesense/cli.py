"""Command-line entry point.

    widesense <experiment> --config <path.json> [--seed U64] [--trials N]
              [--out PATH] [--force]

Exit codes: 0 success, 2 configuration error, 3 numerical error.
"""

from __future__ import annotations

import argparse
import json
import sys

from .errors import ConfigError, DomainError, NumericalError
from .harness import EXPERIMENTS, run_experiment, spec_from_dict


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="widesense",
        description="Blind wideband spectrum sensing experiments",
    )
    parser.add_argument("experiment", choices=EXPERIMENTS)
    parser.add_argument("--config", required=True, help="experiment config JSON")
    parser.add_argument("--seed", type=int, help="override master_seed")
    parser.add_argument("--trials", type=int, help="override trial count")
    parser.add_argument("--out", help="override output path")
    parser.add_argument(
        "--force", action="store_true", help="overwrite results with a different config hash"
    )
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        try:
            with open(args.config) as fh:
                raw = json.load(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from exc
        if not isinstance(raw, dict):
            raise ConfigError("config must be a JSON object")
        if args.seed is not None:
            raw["master_seed"] = args.seed
        if args.trials is not None:
            raw["trials"] = args.trials
        if args.out is not None:
            raw["out"] = args.out
        spec = spec_from_dict(raw, experiment=args.experiment)
        if spec.out is None:
            raise ConfigError("no output path: set 'out' in the config or pass --out")
        run_experiment(spec, spec.out, force=args.force)
    except (ConfigError, DomainError) as exc:
        print(f"widesense: config error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"widesense: numerical error: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
