"""Command-line harness: ``solve``, ``generate`` and ``validate``.

Exit codes: 0 success (solver trouble is reported in the rows), 1 for
unreadable input files or a plan with violations, 2 for bad usage or
configuration.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from rmfs_alloc import __version__
from rmfs_alloc.errors import (
    InfeasibleStockError,
    InvariantError,
    LimitZero,
    ParseError,
    ProfileError,
    Stage1Infeasible,
)
from rmfs_alloc.formulations import FormulationOptions, Strategy
from rmfs_alloc.instance import GeneratorProfile, dump_instance, generate_instance, read_instance
from rmfs_alloc.milp import resolve_backend
from rmfs_alloc.pipeline import AllocationPlan, RunOptions, run_two_stage, validate

CSV_VERSION = 1
NUMERIC = ("T1(s)", "GAP1", "T2(s)", "GAP2", "|Theta|", "|S|", "NPO")
AVERAGE_RULE = "mean over rows; TL counts as the time limit; NF and blank cells are excluded"


class UsageError(Exception):
    pass


@dataclass(frozen=True)
class RunConfig:
    sources: tuple[str, ...]
    strategies: tuple[Strategy, ...]
    rack_reduction: bool = False
    tau: int | None = None
    time_limit_s: float = 300.0
    backend: str | None = None
    output: str = "table"
    jobs: int = 1
    drop_unsatisfiable: bool = False
    formulation: FormulationOptions = field(default_factory=FormulationOptions)
    plans_out: str | None = None


def parse_generator_spec(text: str) -> tuple[int, int, int, int, int]:
    """``gen:N,O,R,P,seed`` -> integers."""
    body = text[len("gen:"):]
    try:
        parts = tuple(int(x) for x in body.split(","))
    except ValueError:
        raise UsageError(f"bad generator spec {text!r}; expected gen:N,O,R,P,seed") from None
    if len(parts) != 5:
        raise UsageError(f"bad generator spec {text!r}; expected gen:N,O,R,P,seed")
    return parts


def load_source(source: str, drop_unsatisfiable: bool):
    if source.startswith("gen:"):
        n, o, r, p, seed = parse_generator_spec(source)
        return generate_instance(n, o, r, p, seed, name=f"gen-{n}-{o}-{r}-{p}-s{seed}")
    return read_instance(source, drop_unsatisfiable=drop_unsatisfiable)


def _run_one(job) -> list[tuple[dict, list[tuple[str, str]]]]:
    """Rows (and plan files) for one instance across all requested strategies."""
    source, cfg = job
    inst = load_source(source, cfg.drop_unsatisfiable)
    opts = RunOptions(
        rack_reduction=cfg.rack_reduction,
        tau=cfg.tau,
        time_limit_s=cfg.time_limit_s,
        backend=cfg.backend,
        formulation=cfg.formulation,
    )
    out = []
    for strategy in cfg.strategies:
        plans = []
        try:
            res = run_two_stage(inst, strategy, opts)
            row = res.report.row()
            for tag, plan in (("stage1", res.stage1), ("stage2", res.stage2)):
                if plan is not None:
                    plans.append((f"{inst.name}-{strategy.value}-{tag}.json", plan.to_json(inst)))
            row["witness"] = ""
        except Stage1Infeasible as exc:
            row = exc.report.row()
            row["status1"] = "infeasible"
            row["witness"] = " ".join(str(o) for o in exc.witness)
        except InfeasibleStockError as exc:
            row = {"instance": inst.name, "strategy": strategy.value, "status1": "infeasible_stock",
                   "witness": " ".join(str(i) for i in exc.products)}
        row["seed"] = "" if inst.seed is None else str(inst.seed)
        out.append((row, plans))
    return out


COLUMNS = (
    "instance", "seed", "strategy", "reduction", "tau", "T1(s)", "GAP1", "T2(s)", "GAP2",
    "|Theta|", "|S|", "NPO", "|Upsilon|", "status1", "status2", "pio_fallback", "witness", "note",
)


def averages(rows: list[dict], time_limit: float) -> dict:
    avg = {c: "" for c in COLUMNS}
    avg["instance"] = "Average:"
    avg["note"] = AVERAGE_RULE
    for col in NUMERIC:
        vals = []
        for row in rows:
            cell = row.get(col, "")
            if cell == "TL":
                vals.append(time_limit)
            elif cell == "--":
                vals.append(0.0)
            elif cell not in ("", "NF"):
                vals.append(float(cell))
        avg[col] = f"{sum(vals) / len(vals):.1f}" if vals else ""
    return avg


def render(rows: list[dict], fmt: str, cfg: RunConfig) -> str:
    full = [{c: row.get(c, "") for c in COLUMNS} for row in rows]
    avg = averages(full, cfg.time_limit_s)
    if fmt == "json":
        doc = {
            "version": CSV_VERSION,
            "time_limit_s": cfg.time_limit_s,
            "average_rule": AVERAGE_RULE,
            "rows": full,
            "average": avg,
        }
        return json.dumps(doc, indent=1) + "\n"
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=COLUMNS, lineterminator="\n")
        writer.writeheader()
        writer.writerows(full + [avg])
        return buf.getvalue()
    shown = [c for c in COLUMNS if c != "note" and any(r[c] for r in full + [avg])]
    table = [shown] + [[r[c] for c in shown] for r in full + [avg]]
    widths = [max(len(line[k]) for line in table) for k in range(len(shown))]
    lines = ["  ".join(cell.rjust(w) for cell, w in zip(line, widths)) for line in table]
    lines.insert(1, "  ".join("-" * w for w in widths))
    return "\n".join(lines) + f"\n({AVERAGE_RULE})\n"


def cmd_solve(cfg: RunConfig, stdout) -> int:
    jobs = [(src, cfg) for src in cfg.sources]
    if cfg.jobs > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            results = list(pool.map(_run_one, jobs))
    else:
        results = [_run_one(j) for j in jobs]
    rows = [row for batch in results for row, _ in batch]
    if cfg.plans_out:
        target = Path(cfg.plans_out)
        target.mkdir(parents=True, exist_ok=True)
        for batch in results:
            for _, plans in batch:
                for name, text in plans:
                    (target / name).write_text(text)
    stdout.write(render(rows, cfg.output, cfg))
    return 0


def cmd_generate(args, stdout) -> int:
    profile = GeneratorProfile()
    if args.profile:
        try:
            doc = json.loads(Path(args.profile).read_text())
        except json.JSONDecodeError as exc:
            raise ProfileError(f"profile is not valid JSON: {exc}") from exc
        profile = GeneratorProfile.from_dict(doc)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    suffix = "json" if args.format == "json" else "txt"
    entries = []
    for seed in args.seeds:
        name = f"{args.prefix}-{args.products}-{args.orders}-{args.racks}-{args.pickers}-s{seed}"
        inst = generate_instance(args.products, args.orders, args.racks, args.pickers, seed, profile, name=name)
        text = dump_instance(inst, args.format)
        path = out / f"{name}.{suffix}"
        path.write_text(text)
        entries.append({"file": path.name, "seed": seed, "sha256": hashlib.sha256(text.encode()).hexdigest()})
    manifest = {
        "version": 1,
        "generator": __version__,
        "n_products": args.products,
        "n_orders": args.orders,
        "n_racks": args.racks,
        "n_pickers": args.pickers,
        "profile": profile.as_dict(),
        "instances": entries,
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=1) + "\n")
    stdout.write(f"wrote {len(entries)} instances to {out}\n")
    return 0


def cmd_validate(args, stdout) -> int:
    inst = read_instance(args.instance)
    try:
        plan = AllocationPlan.from_json(Path(args.plan).read_text())
    except OSError as exc:
        raise ParseError(str(exc)) from exc
    strategy = Strategy.parse(args.strategy) if args.strategy else plan.strategy
    res = validate(plan, inst, strategy)
    for v in res.violations:
        stdout.write(f"{v.kind} {list(v.indices)} {v.detail}\n")
    stdout.write("ok\n" if res.ok else f"{len(res.violations)} violations\n")
    return 0 if res.ok else 1


def _strategies(text: str) -> tuple[Strategy, ...]:
    try:
        return tuple(Strategy.parse(t) for t in text.split(",") if t.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"unknown strategy in {text!r}") from None


def _positive_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"{text!r} is not an integer") from None
    if v < 1:
        raise argparse.ArgumentTypeError("must be at least 1")
    return v


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="rmfs-alloc", description="Order and rack allocation for robotic fulfilment.")
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="verb", required=True)

    s = sub.add_parser("solve", help="run the two-stage pipeline and print report rows")
    s.add_argument("instances", nargs="+", help="instance files or gen:N,O,R,P,seed specs")
    s.add_argument("--strategy", type=_strategies, default=(Strategy.S1, Strategy.S2, Strategy.S3),
                   help="comma-separated subset of s1,s2,s3 (default: all)")
    s.add_argument("--rack-reduction", action="store_true")
    s.add_argument("--pio", action="store_true", help="use the picker-by-picker heuristic for both stages")
    s.add_argument("--tau", type=_positive_int, default=None, help="pickers made binary per PIO round (default 1)")
    s.add_argument("--time-limit", type=float, default=300.0, help="seconds per stage")
    s.add_argument("--backend", default=None, help="builtin, highs or module:attr (default from env or builtin)")
    s.add_argument("--format", choices=("csv", "json", "table"), default="table")
    s.add_argument("--jobs", type=_positive_int, default=1)
    s.add_argument("--drop-unsatisfiable", action="store_true", help="drop orders no warehouse stock can fill")
    s.add_argument("--plans-out", default=None, help="directory for plan JSON files")
    for flag in ("gamma", "delta", "order-rack", "picker-lb", "unique-rack"):
        s.add_argument(f"--no-{flag}", action="store_true", help=f"omit the {flag} constraint block")

    g = sub.add_parser("generate", help="write seeded random instances plus a manifest")
    g.add_argument("--products", type=_positive_int, required=True)
    g.add_argument("--orders", type=_positive_int, required=True)
    g.add_argument("--racks", type=_positive_int, required=True)
    g.add_argument("--pickers", type=_positive_int, required=True)
    g.add_argument("--seeds", type=int, nargs="+", required=True)
    g.add_argument("--out", required=True)
    g.add_argument("--profile", default=None, help="JSON file with generator profile fields")
    g.add_argument("--format", choices=("json", "text"), default="json")
    g.add_argument("--prefix", default="inst")

    v = sub.add_parser("validate", help="check a plan file against an instance")
    v.add_argument("instance")
    v.add_argument("plan")
    v.add_argument("--strategy", default=None)
    return ap


def config_from_args(args) -> RunConfig:
    if args.tau is not None and not args.pio:
        raise UsageError("--tau needs --pio")
    if not args.time_limit > 0:
        raise UsageError("--time-limit must be positive")
    if args.backend is not None:
        try:
            resolve_backend(args.backend)
        except (ImportError, AttributeError, ValueError) as exc:
            raise UsageError(f"cannot load backend {args.backend!r}: {exc}") from exc
    formulation = FormulationOptions(
        use_gamma=not args.no_gamma,
        use_delta=not args.no_delta,
        use_order_rack_links=not args.no_order_rack,
        use_picker_lb=not args.no_picker_lb,
        use_unique_rack_links=not args.no_unique_rack,
    )
    for src in args.instances:
        if src.startswith("gen:"):
            parse_generator_spec(src)
    return RunConfig(
        sources=tuple(args.instances),
        strategies=args.strategy,
        rack_reduction=args.rack_reduction,
        tau=(args.tau or 1) if args.pio else None,
        time_limit_s=args.time_limit,
        backend=args.backend,
        output=args.format,
        jobs=args.jobs,
        drop_unsatisfiable=args.drop_unsatisfiable,
        formulation=formulation,
        plans_out=args.plans_out,
    )


def main(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        if args.verb == "solve":
            return cmd_solve(config_from_args(args), stdout)
        if args.verb == "generate":
            return cmd_generate(args, stdout)
        return cmd_validate(args, stdout)
    except (UsageError, ProfileError, LimitZero) as exc:
        stderr.write(f"rmfs-alloc: error: {exc}\n")
        return 2
    except (OSError, ParseError, InvariantError) as exc:
        stderr.write(f"rmfs-alloc: error: {exc}\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
