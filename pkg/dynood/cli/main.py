import argparse
import logging
import sys
from typing import List, Optional, Sequence, Tuple

from ..shared.exceptions import EXIT_INTERNAL_ERROR, EXIT_OK, EXIT_USER_ERROR, ConfigurationError, DynoodError
from ..shared.logging_utils import setup_logging
from ..training.schemas import Ablation
from .commands import run_eval, run_generate, run_sweep, run_train, run_validate

logger = logging.getLogger(__name__)


def parse_overrides(extra: Sequence[str]) -> List[Tuple[str, str]]:
    """``--key value`` or ``--key=value`` pairs; dashes in keys become underscores."""
    overrides = []
    items = list(extra)
    while items:
        item = items.pop(0)
        if not item.startswith("--") or len(item) == 2:
            raise ConfigurationError(f"unexpected argument {item!r}")
        key = item[2:]
        if "=" in key:
            key, value = key.split("=", 1)
        elif items and not items[0].startswith("--"):
            value = items.pop(0)
        else:
            raise ConfigurationError(f"override --{key} needs a value")
        overrides.append((key.replace("-", "_"), value))
    return overrides


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dynood", description="Out-of-distribution generalisation on dynamic graphs")
    parser.add_argument("--run-root", default=None, help="Directory that receives run directories")
    parser.add_argument("--log-level", default=None)
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", allow_abbrev=False, help="Generate a synthetic dataset from a spec file")
    gen.add_argument("spec")
    gen.add_argument("--out", default=None, help="Write the dataset here instead of a run directory")

    tr = sub.add_parser("train", allow_abbrev=False, help="Train one model; unknown --key value pairs override the config")
    tr.add_argument("config")
    tr.add_argument("--ablate", choices=[a.value for a in Ablation], default=None)

    ev = sub.add_parser("eval", allow_abbrev=False, help="Evaluate checkpoints (one per seed) into a report")
    ev.add_argument("checkpoints", nargs="+")
    ev.add_argument("--dataset", default=None)
    ev.add_argument("--split", choices=["train", "val", "test"], default="test")
    ev.add_argument("--protocol", choices=["standard", "ood"], default="standard")
    ev.add_argument("--ood-rule", default=None)

    sw = sub.add_parser("sweep", allow_abbrev=False, help="Train a grid of configurations over several seeds")
    sw.add_argument("config")
    sw.add_argument("--grid", action="append", default=[], help="key=v1,v2 (repeatable)")
    sw.add_argument("--seeds", default=None, help="Comma-separated seeds")
    sw.add_argument("--workers", type=int, default=None)
    sw.add_argument("--ablate", choices=[a.value for a in Ablation], default=None)

    va = sub.add_parser("validate", allow_abbrev=False, help="Check a dataset against the graph invariants")
    va.add_argument("dataset")
    return parser


def _seeds(value: Optional[str]) -> Optional[List[int]]:
    if not value:
        return None
    try:
        return [int(s) for s in value.split(",") if s.strip()]
    except ValueError:
        raise ConfigurationError(f"--seeds expects comma-separated integers, got {value!r}")


def dispatch(args: argparse.Namespace, extra: Sequence[str]) -> int:
    if args.command in ("train", "sweep", "generate"):
        overrides = parse_overrides(extra)
    elif extra:
        raise ConfigurationError(f"unexpected arguments: {' '.join(extra)}")

    if args.command == "generate":
        run_dir, _ = run_generate(args.spec, overrides, args.out, args.run_root)
        print(run_dir)
    elif args.command == "train":
        run_dir, manifest = run_train(args.config, overrides, args.ablate, args.run_root)
        print(run_dir)
    elif args.command == "eval":
        run_dir, _, text = run_eval(args.checkpoints, args.dataset, args.split, args.protocol,
                                    args.ood_rule, args.run_root)
        print(text, end="")
        print(run_dir)
    elif args.command == "sweep":
        run_dir, _, code = run_sweep(args.config, args.grid, _seeds(args.seeds), overrides, args.ablate,
                                     args.workers, args.run_root)
        print(run_dir)
        return code
    elif args.command == "validate":
        violations = run_validate(args.dataset)
        for violation in violations:
            print(violation)
        return EXIT_USER_ERROR if violations else EXIT_OK
    return EXIT_OK


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args, extra = parser.parse_known_args(argv)
    setup_logging(args.log_level)
    try:
        return dispatch(args, extra)
    except DynoodError as exc:
        logger.error(exc.detail)
        return exc.exit_code
    except Exception:
        logger.exception("Unexpected failure")
        return EXIT_INTERNAL_ERROR


if __name__ == "__main__":
    sys.exit(main())
