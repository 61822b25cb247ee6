"""Command-line entry point.

``mprx run`` executes a Monte-Carlo scenario and writes a CSV of
per-iteration metrics; ``mprx selftest`` runs a quick battery of
oracle-backed sanity checks.  Worker count is controlled by the
``MPRX_WORKERS`` environment variable.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from .frame import build_default_config, load_config
from .channel import etu_profile
from .harness import Scenario, emit_results, run_monte_carlo
from .receivers import ReceiverKind
from . import selftest as selftest_mod


def _parse_receivers(text: str) -> tuple[ReceiverKind, ...]:
    kinds = []
    for token in text.split(","):
        token = token.strip().lower()
        if not token:
            continue
        try:
            kinds.append(ReceiverKind(token))
        except ValueError:
            valid = ", ".join(k.value for k in ReceiverKind)
            raise argparse.ArgumentTypeError(f"unknown receiver {token!r}; valid kinds: {valid}")
    if not kinds:
        raise argparse.ArgumentTypeError("no receiver kinds given")
    return tuple(kinds)


def _parse_floats(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(tok) for tok in text.split(",") if tok.strip())
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"invalid dB list {text!r}") from exc


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mprx", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run a Monte-Carlo scenario and emit CSV metrics")
    run_p.add_argument("--config", help="JSON configuration file (defaults to the built-in system)")
    run_p.add_argument("--receiver", type=_parse_receivers, default=(ReceiverKind.I_DJC_DD,),
                       help="comma-separated receiver kinds")
    run_p.add_argument("--ebn0", type=_parse_floats, default=(8.0,), help="comma-separated Eb/N0 grid in dB")
    run_p.add_argument("--frames", type=int, default=100, help="frames per Eb/N0 point")
    run_p.add_argument("--iters", type=int, default=None, help="iteration count (default: per-receiver)")
    run_p.add_argument("--seed", type=int, default=0, help="master seed")
    run_p.add_argument("--out", required=True, help="output CSV path")
    run_p.add_argument("--early-stop", action="store_true",
                       help="stop a cell after 200 bit errors and 50 frames")

    sub.add_parser("selftest", help="run the built-in oracle/property checks")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "selftest":
        return selftest_mod.run_selftest()

    if args.config:
        loaded = load_config(args.config)
        cfg, profile = loaded.frame, loaded.profile
    else:
        cfg, profile = build_default_config(), etu_profile()

    scenario = Scenario(
        config=cfg,
        receivers=args.receiver,
        eb_n0_grid=args.ebn0,
        frames=args.frames,
        master_seed=args.seed,
        iterations=args.iters,
        profile=profile,
        early_stop=args.early_stop,
    )
    table = run_monte_carlo(scenario)
    emit_results(table, args.out)
    rows = table.rows()
    print(f"wrote {len(rows)} rows to {args.out}")
    for row in rows:
        ber = "-" if np.isnan(row.ber) else f"{row.ber:.3e}"
        mse = "-" if np.isnan(row.channel_mse) else f"{row.channel_mse:.3e}"
        print(
            f"  {row.receiver:14s} ebn0={row.eb_n0_db:6.2f} it={row.iteration:2d} "
            f"ber={ber} mse={mse} frames={row.frames}"
        )
    return 0


if __name__ == "__main__":
    sys.exit(main())
