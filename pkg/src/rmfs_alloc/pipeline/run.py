"""End-to-end two-stage runs and their report rows."""

from __future__ import annotations

import time
from dataclasses import asdict, dataclass, field, replace

from rmfs_alloc.errors import PioFailed, PlanValidationError, Stage1Infeasible
from rmfs_alloc.formulations import (
    FormulationOptions,
    Strategy,
    build_first_stage,
    build_second_stage,
    partition_orders,
)
from rmfs_alloc.instance import DerivedSets, Instance, derive_sets
from rmfs_alloc.milp import Limits, Model, SolveOutcome, Status, solve
from rmfs_alloc.pio import pio_solve
from rmfs_alloc.pipeline.plan import AllocationPlan, extract_plan, normalize_idle_racks
from rmfs_alloc.pipeline.validate import validate
from rmfs_alloc.rack_reduction import reduce_racks

REPORT_VERSION = 1


@dataclass(frozen=True)
class RunOptions:
    """Knobs of one pipeline run.

    ``time_limit_s`` applies to each stage separately. ``tau`` switches the
    PIO heuristic on for both stages; a failed PIO stage falls back to the
    exact solve with whatever time is left.
    """

    rack_reduction: bool = False
    penalty_weight: float | None = None
    tau: int | None = None
    time_limit_s: float = 300.0
    backend: object = None
    formulation: FormulationOptions = field(default_factory=FormulationOptions)
    check_plans: bool = True

    def __post_init__(self) -> None:
        if self.tau is not None and self.tau < 1:
            raise ValueError("tau must be at least 1")
        Limits(time_limit_s=self.time_limit_s)


@dataclass
class StageReport:
    status: str = "skipped"
    wall_time_s: float = 0.0
    gap_pct: float | None = None
    objective: float | None = None
    method: str = "exact"
    pio_failure: str | None = None
    nodes: int = 0

    @property
    def at_limit(self) -> bool:
        return self.status in (Status.FEASIBLE_AT_LIMIT.value, Status.NO_INCUMBENT_AT_LIMIT.value)

    @property
    def no_solution(self) -> bool:
        return self.status in (Status.NO_INCUMBENT_AT_LIMIT.value, Status.INFEASIBLE.value)


@dataclass
class RunReport:
    instance: str
    seed: int | None
    strategy: str
    reduction: bool
    tau: int | None
    time_limit_s: float
    extras: dict
    n_orders: int
    n_racks: int
    n_pickers: int
    reduced_racks: int | None = None
    stage1: StageReport = field(default_factory=StageReport)
    stage2: StageReport = field(default_factory=StageReport)
    theta: int | None = None
    s_size: int = 0
    npo: int | None = None
    artificial_orders: int = 0
    witness: tuple[int, ...] = ()

    def to_dict(self) -> dict:
        doc = asdict(self)
        doc["version"] = REPORT_VERSION
        doc["witness"] = list(self.witness)
        return doc

    def row(self) -> dict[str, str]:
        """Table row in the published column layout.

        T(s) shows ``TL`` when the stage stopped at the limit; a missing
        incumbent shows ``NF`` in the rack column with GAP left blank; a zero
        GAP is printed as ``--``.
        """
        s1, s2 = self.stage1, self.stage2
        return {
            "instance": self.instance,
            "strategy": self.strategy,
            "reduction": "yes" if self.reduction else "no",
            "tau": "" if self.tau is None else str(self.tau),
            "T1(s)": _time_cell(s1),
            "GAP1": _gap_cell(s1),
            "T2(s)": _time_cell(s2),
            "GAP2": _gap_cell(s2),
            "|Theta|": "NF" if s1.no_solution or self.theta is None else str(self.theta),
            "|S|": str(self.s_size),
            "NPO": "" if self.npo is None else ("NF" if s2.no_solution else str(self.npo)),
            "|Upsilon|": "" if self.reduced_racks is None else str(self.reduced_racks),
            "status1": s1.status,
            "status2": s2.status,
            "pio_fallback": ";".join(x for x in (s1.pio_failure, s2.pio_failure) if x),
        }


def _time_cell(st: StageReport) -> str:
    if st.status == "skipped":
        return ""
    return "TL" if st.at_limit else f"{st.wall_time_s:.1f}"


def _gap_cell(st: StageReport) -> str:
    if st.status == "skipped" or st.no_solution or st.gap_pct is None:
        return ""
    return "--" if st.gap_pct <= 1e-9 else f"{st.gap_pct:.1f}"


@dataclass
class RunResult:
    report: RunReport
    stage1: AllocationPlan | None
    stage2: AllocationPlan | None
    sets: DerivedSets | None = None

    @property
    def final(self) -> AllocationPlan | None:
        return self.stage2 or self.stage1


def _stage_report(out: SolveOutcome, method: str, failure: str | None, elapsed: float) -> StageReport:
    return StageReport(
        status=out.status.value,
        wall_time_s=elapsed,
        gap_pct=out.gap_pct,
        objective=out.objective,
        method=method,
        pio_failure=failure,
        nodes=out.nodes,
    )


def _solve_stage(sm, options: RunOptions) -> tuple[SolveOutcome, StageReport]:
    start = time.perf_counter()
    limits = Limits(time_limit_s=options.time_limit_s)
    failure = None
    if options.tau is not None:
        try:
            res = pio_solve(sm, options.tau, limits, options.backend)
            return res.outcome, _stage_report(res.outcome, "pio", None, time.perf_counter() - start)
        except PioFailed as exc:
            failure = str(exc)
        left = options.time_limit_s - (time.perf_counter() - start)
        if left <= 0:
            out = SolveOutcome(Status.NO_INCUMBENT_AT_LIMIT, None, None, None, sm.model.sense)
            return out, _stage_report(out, "pio", failure, time.perf_counter() - start)
        limits = Limits(time_limit_s=left)
    out = solve(sm.model, limits, options.backend)
    method = "exact" if failure is None else "pio+exact"
    return out, _stage_report(out, method, failure, time.perf_counter() - start)


def single_rack_witness(inst: Instance, sets: DerivedSets, F, backend=None) -> tuple[int, ...]:
    """Orders behind a clash of full-supply rack stock under Strategy 3.

    Maximises how many multi-unit F orders can each draw their whole demand
    from one rack with racks' stock shared. If some must be dropped, the
    witness is the dropped orders plus every kept order drawing from a rack
    the dropped ones could have used. Empty when no such clash exists.
    """
    orders = [o for o in F if o not in sets.single_unit_orders]
    if not orders:
        return ()
    q, s = inst.demand, inst.stock
    m = Model("single-rack-witness")
    z = {}
    for o in orders:
        for r in sets.full_supply_racks[o]:
            z[o, r] = m.add_var(f"z_{o}_{r}")
    m.set_objective({v: 1.0 for v in z.values()}, "max")
    for o in orders:
        terms = {z[o, r]: 1 for r in sets.full_supply_racks[o]}
        if terms:
            m.add_constraint(terms, "<=", 1, f"one_{o}")
    for r in sorted({r for _, r in z}):
        for i in sets.active_products:
            terms = {z[o, r]: float(q[i, o]) for o in orders if (o, r) in z and q[i, o]}
            if terms:
                m.add_constraint(terms, "<=", float(s[i, r]), f"stock_{i}_{r}")
    out = solve(m, Limits(time_limit_s=60.0), backend)
    if not out.has_incumbent:
        return tuple(orders)
    kept = {o: r for (o, r), v in z.items() if out.values[v] > 0.5}
    dropped = [o for o in orders if o not in kept]
    if not dropped:
        return ()
    contested = {r for o in dropped for r in sets.full_supply_racks[o]}
    involved = set(dropped) | {o for o, r in kept.items() if r in contested}
    return tuple(sorted(involved))


def run_two_stage(
    inst: Instance,
    strategy: Strategy | str,
    options: RunOptions | None = None,
    sets: DerivedSets | None = None,
) -> RunResult:
    """Stage one (racks plus F orders), then stage two over the chosen racks.

    Raises :class:`Stage1Infeasible` when stage one provably has no solution;
    the partially filled report rides on the exception. Running out of time
    is not an error: the report then carries TL/NF markers.
    """
    strategy = Strategy.parse(strategy)
    options = options or RunOptions()
    sets = sets or derive_sets(inst)
    F, S = partition_orders(strategy, sets, inst.n_orders)
    fopts = options.formulation
    report = RunReport(
        instance=inst.name,
        seed=inst.seed,
        strategy=strategy.value,
        reduction=options.rack_reduction,
        tau=options.tau,
        time_limit_s=options.time_limit_s,
        extras={
            "gamma": fopts.use_gamma,
            "delta": fopts.use_delta,
            "order_rack": fopts.use_order_rack_links,
            "picker_lb": fopts.use_picker_lb,
            "unique_rack": fopts.use_unique_rack_links,
        },
        n_orders=inst.n_orders,
        n_racks=inst.n_racks,
        n_pickers=inst.n_pickers,
        s_size=len(S),
    )

    if options.rack_reduction:
        kept = reduce_racks(inst, sets, F, strategy)
        report.reduced_racks = len(kept)
        fopts = replace(fopts, rack_penalty=(frozenset(kept), options.penalty_weight))

    sm1 = build_first_stage(inst, sets, strategy, fopts)
    out1, report.stage1 = _solve_stage(sm1, options)
    if out1.status is Status.INFEASIBLE:
        witness = single_rack_witness(inst, sets, F, options.backend) if strategy is Strategy.S3 else ()
        report.witness = witness
        raise Stage1Infeasible(
            f"stage one of {strategy.value} has no feasible solution"
            + (f"; conflicting orders {list(witness)}" if witness else ""),
            witness,
            report,
        )
    if not out1.has_incumbent:
        return RunResult(report, None, None, sets)

    plan1 = normalize_idle_racks(extract_plan(sm1, out1.values), inst)
    _check(plan1, inst, options)
    report.theta = len(plan1.rack_set)
    report.artificial_orders = len(plan1.artificial_orders)
    if strategy is Strategy.S1:
        report.npo = 0
        return RunResult(report, plan1, None, sets)

    sm2 = build_second_stage(
        inst, sets, strategy, F, S, plan1.rack_set, replace(fopts, rack_penalty=None), capacities=plan1.capacities
    )
    out2, report.stage2 = _solve_stage(sm2, options)
    if not out2.has_incumbent:
        return RunResult(report, plan1, None, sets)
    plan2 = extract_plan(sm2, out2.values)
    _check(plan2, inst, options)
    report.npo = plan2.npo
    report.artificial_orders = len(plan2.artificial_orders)
    return RunResult(report, plan1, plan2, sets)


def _check(plan: AllocationPlan, inst: Instance, options: RunOptions) -> None:
    if not options.check_plans:
        return
    res = validate(plan, inst)
    if not res.ok:
        raise PlanValidationError(res.violations)
