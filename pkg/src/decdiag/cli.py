"""Command line entry point: ``decdiag prove FILE.trs``."""

from __future__ import annotations

import argparse
import json
import sys
from typing import List, Optional

from .prover import CRITERIA, ProverConfig, check_certificate, prove
from .trs import TRSInputError, parse_cops

EXIT_OK, EXIT_INPUT, EXIT_INTERNAL = 0, 1, 2


def _criteria(text: str):
    names = tuple(c.strip() for c in text.split(",") if c.strip())
    unknown = [c for c in names if c not in CRITERIA]
    if unknown or not names:
        raise argparse.ArgumentTypeError(
            f"unknown criteria {', '.join(unknown) or '(none)'}; choose from {', '.join(CRITERIA)}"
        )
    return names


def _non_negative(text: str) -> int:
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError("must be non-negative")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="decdiag", description="Confluence via decreasing diagrams.")
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("prove", help="decide confluence of a COPS .trs problem")
    p.add_argument("file", help="TRS in COPS format")
    p.add_argument("--criterion", type=_criteria, default=CRITERIA,
                   help="comma-separated criteria to enable (default: all)")
    p.add_argument("--max-join", type=_non_negative, default=4, metavar="N")
    p.add_argument("--label-bound", type=_non_negative, default=3, metavar="K")
    p.add_argument("--timeout", type=_non_negative, default=None, metavar="MS")
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.add_argument("--check", metavar="CERT.json", help="check a certificate instead of proving")
    return parser


def run(args: argparse.Namespace) -> int:
    try:
        with open(args.file, "rb") as fh:
            trs = parse_cops(fh.read())
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT
    except TRSInputError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT
    config = ProverConfig(
        max_join=args.max_join,
        label_bound=args.label_bound,
        criteria=args.criterion,
        timeout_ms=args.timeout,
        format=args.format,
    )
    if args.check:
        try:
            with open(args.check) as fh:
                cert = json.load(fh)
        except (OSError, json.JSONDecodeError) as e:
            print(f"error: {e}", file=sys.stderr)
            return EXIT_INPUT
        ok = check_certificate(trs, cert, config)
        verdict = cert.get("verdict") if isinstance(cert, dict) else None
        print(verdict if verdict in ("YES", "NO", "MAYBE") else "MAYBE")
        print("certificate: valid" if ok else "certificate: invalid")
        return EXIT_OK if ok else EXIT_INPUT
    cert = prove(trs, config)
    if args.format == "json":
        print(cert.verdict)
        print(json.dumps(cert.to_json(), indent=2))
    else:
        sys.stdout.write(cert.to_text())
    return EXIT_OK


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return run(args)
    except Exception as e:  # noqa: BLE001 - reported as an internal error
        print(f"internal error: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
