"""Command-line front end: ``embgame {eval,sweep,classical,bound,seesaw,stab}``.

Exit codes: 0 success, 2 invalid input, 3 resource limit, 4 numerical failure.
With ``--out``, a ``<out>.manifest.json`` sidecar records flags, timing and checksums.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import math
import sys
import time
from pathlib import Path

from . import __version__
from .bounds import dim_lower_bound, emb_bound, qubits_for
from .evaluation import BudgetExceeded, classical_value, value_dense, value_structured
from .games import get_game
from .pauli import ghz_stabilizers
from .qcore import DimensionError, NumericalError
from .seesaw import SeesawConfig, seesaw_optimize
from .strategies import HONEST, emb_strategy, load_strategy, overlap_closed_form, save_strategy

SCHEMA_VERSION = 1
SWEEP_COLUMNS = ("d", "overlap", "part_d_success", "total_success", "eps", "d_times_eps",
                 "bound_infidelity")
EXIT_OK, EXIT_INVALID, EXIT_RESOURCE, EXIT_NUMERICAL = 0, 2, 3, 4


class UsageError(ValueError):
    pass


def _json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _emb_d(spec: str) -> int:
    try:
        d = int(spec.split(":", 1)[1])
    except (IndexError, ValueError):
        raise UsageError(f"bad strategy {spec!r}; expected emb:<d>") from None
    if d < 1:
        raise UsageError("emb:<d> needs d >= 1")
    return d


def _strategy(game_name: str, spec: str):
    game = get_game(game_name)
    if spec == "honest":
        if game_name not in HONEST:
            raise UsageError(f"no honest strategy for {game_name!r}; use emb:<d>")
        return HONEST[game_name]()
    if spec.startswith("emb:"):
        if game_name != "main":
            raise UsageError("emb:<d> strategies play the main game only")
        return emb_strategy(_emb_d(spec))
    if spec.startswith("file:"):
        return load_strategy(spec[5:], game)
    raise UsageError(f"unknown strategy {spec!r}; use honest, emb:<d> or file:<path>")


def cmd_eval(args) -> str:
    parts = args.parts.split(",") if args.parts else None
    if args.engine == "structured":
        if args.game != "main" or not args.strategy.startswith("emb:"):
            raise UsageError("the structured engine handles --game main --strategy emb:<d> only")
        if parts:
            raise UsageError("--parts applies to the dense engine")
        report = value_structured(_emb_d(args.strategy), per_query=args.per_query)
    else:
        report = value_dense(get_game(args.game), _strategy(args.game, args.strategy),
                             parts=parts, per_query=args.per_query)
    out = report.to_dict()
    out.update(game=args.game, strategy=args.strategy, engine=args.engine)
    return _json(out)


def _sweep_ds(args) -> list[int]:
    if not 1 <= args.d_min <= args.d_max:
        raise UsageError("need 1 <= d_min <= d_max")
    if args.geometric:
        ds, d = [], args.d_min
        while d <= args.d_max:
            ds.append(d)
            d *= 2
        return ds
    return list(range(args.d_min, args.d_max + 1))


def cmd_sweep(args) -> str:
    rows = [",".join(SWEEP_COLUMNS)]
    game = get_game("main") if args.engine == "dense" else None
    for d in _sweep_ds(args):
        if game is not None:
            rep = value_dense(game, emb_strategy(d))
        else:
            rep = value_structured(d)
        eps = 1.0 - rep.total
        vals = (overlap_closed_form(d), rep.per_part["d"][1], rep.total, eps, d * eps,
                emb_bound(1, 2**d))
        rows.append(",".join([str(d)] + ["%.12g" % v for v in vals]))
    return "\n".join(rows) + "\n"


def cmd_classical(args) -> str:
    res = classical_value(get_game(args.game), mode=args.mode, budget=args.budget,
                          seed=args.seed, restarts=args.restarts)
    return _json({"schema_version": SCHEMA_VERSION, "game": args.game, "mode": args.mode,
                  "value": float(res.value), "fraction": str(res.value), "exact": res.exact,
                  "tables": [[str(a) for a in t] for t in res.tables]})


def _base(text: str) -> float:
    if text == "e":
        return math.e
    try:
        return float(text)
    except ValueError:
        raise UsageError(f"bad log base {text!r}") from None


def cmd_bound(args) -> str:
    base = _base(args.base)
    out = {"schema_version": SCHEMA_VERSION, "S": args.S, "base": args.base}
    if args.delta is not None:
        t = dim_lower_bound(args.delta, args.S, base)
        out.update(delta=args.delta, t_min=t, qubits_min=qubits_for(t))
    if args.t is not None:
        out.update(t=args.t, emb_bound=emb_bound(args.S, args.t, base))
    if args.delta is None and args.t is None:
        raise UsageError("give --delta and/or --t")
    return _json(out)


def cmd_seesaw(args) -> str:
    game = get_game(args.game)
    try:
        qubits = tuple(int(q) for q in args.qubits.split(","))
    except ValueError:
        raise UsageError(f"bad --qubits {args.qubits!r}") from None
    if len(qubits) == 1:
        qubits = qubits * game.n_players
    cfg = SeesawConfig(qubits, restarts=args.restarts, max_sweeps=args.sweeps, tol=args.tol,
                       seed=args.seed)
    res = seesaw_optimize(game, cfg)
    if args.strategy_out:
        save_strategy(res.strategy, args.strategy_out)
    return _json({"schema_version": SCHEMA_VERSION, "game": args.game, "best": res.best,
                  "dims": [2**q for q in qubits], "restarts": args.restarts, "seed": args.seed,
                  "best_restart": res.restart, "trace": list(res.trace)})


def cmd_stab(args) -> str:
    copies = {"ghz1": 1, "ghz2": 2}.get(args.state)
    if copies is None:
        raise UsageError("state must be ghz1 or ghz2")
    return "".join(f"{w}\n" for w in ghz_stabilizers(copies))


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="embgame", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, func, help_):
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("--out", help="write here instead of stdout (adds a manifest sidecar)")
        sp.set_defaults(func=func)
        return sp

    sp = add("eval", cmd_eval, "winning probability of a strategy")
    sp.add_argument("--game", required=True, choices=["ghz", "ms", "pauli", "main"])
    sp.add_argument("--strategy", default="honest", help="honest, emb:<d> or file:<path>")
    sp.add_argument("--engine", default="dense", choices=["dense", "structured"])
    sp.add_argument("--parts", help="comma-separated part tags (dense engine)")
    sp.add_argument("--per-query", action="store_true")

    sp = add("sweep", cmd_sweep, "embezzlement trade-off table as CSV")
    sp.add_argument("--d-min", type=int, default=1)
    sp.add_argument("--d-max", type=int, default=8)
    sp.add_argument("--geometric", action="store_true", help="double d instead of stepping by 1")
    sp.add_argument("--engine", default="structured", choices=["dense", "structured"])

    sp = add("classical", cmd_classical, "best deterministic strategy")
    sp.add_argument("--game", required=True, choices=["ghz", "ms", "pauli", "main"])
    sp.add_argument("--mode", default="exact", choices=["exact", "heuristic"])
    sp.add_argument("--budget", type=float, default=1e10)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--restarts", type=int, default=32)

    sp = add("bound", cmd_bound, "entropy/dimension bound")
    sp.add_argument("--delta", type=float)
    sp.add_argument("--t", type=int, help="ancilla dimension for the infidelity bound")
    sp.add_argument("--S", type=float, default=1.0)
    sp.add_argument("--base", default="2", help="log base: 2 (default), e, or a number")

    sp = add("seesaw", cmd_seesaw, "see-saw search at fixed local dimension")
    sp.add_argument("--game", required=True, choices=["ghz", "ms", "pauli", "main"])
    sp.add_argument("--qubits", default="1", help="per-player qubits, e.g. 1,1,1 or 1")
    sp.add_argument("--restarts", type=int, default=20)
    sp.add_argument("--sweeps", type=int, default=200)
    sp.add_argument("--tol", type=float, default=1e-9)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--strategy-out", help="save the best strategy as JSON")

    sp = add("stab", cmd_stab, "list GHZ stabilizer elements")
    sp.add_argument("--state", required=True, help="ghz1 or ghz2")
    return p


def _manifest(args, argv, elapsed: float, files: list[str]) -> dict:
    flags = {k: v for k, v in vars(args).items() if k != "func"}
    sums = {f: hashlib.sha256(Path(f).read_bytes()).hexdigest() for f in files}
    return {"schema_version": SCHEMA_VERSION, "subcommand": args.command, "argv": list(argv),
            "flags": flags, "seed": flags.get("seed"), "version": __version__,
            "wall_clock_s": elapsed, "sha256": sums}


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code == 0 else EXIT_INVALID
    start = time.perf_counter()
    try:
        text = args.func(args)
    except (BudgetExceeded, MemoryError, OverflowError) as e:
        print(f"embgame: resource limit: {e}", file=sys.stderr)
        return EXIT_RESOURCE
    except NumericalError as e:
        print(f"embgame: numerical failure: {e}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (UsageError, DimensionError, ValueError, KeyError, OSError) as e:
        print(f"embgame: {e}", file=sys.stderr)
        return EXIT_INVALID
    elapsed = time.perf_counter() - start
    if args.out:
        Path(args.out).write_text(text)
        files = [args.out] + ([args.strategy_out] if getattr(args, "strategy_out", None) else [])
        Path(args.out + ".manifest.json").write_text(_json(_manifest(args, argv, elapsed, files)))
    else:
        sys.stdout.write(text)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
