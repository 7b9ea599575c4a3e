import itertools
import sys
import types

import numpy as np
import pytest
from scipy.optimize import linprog

from rmfs_alloc.errors import BoundViolation, LimitZero, ModelError
from rmfs_alloc.milp import (
    BACKEND_ENV,
    DenseLP,
    HighsBackend,
    Limits,
    Model,
    Status,
    VarKind,
    fix,
    make_binary,
    relax,
    resolve_backend,
    solve,
    to_lp_format,
)


def knapsack():
    m = Model("knap")
    w, v = [3, 4, 2, 5], [4, 5, 3, 6]
    xs = [m.add_var(f"x{k}") for k in range(4)]
    m.add_constraint({x: wk for x, wk in zip(xs, w)}, "<=", 7, "cap")
    m.set_objective({x: vk for x, vk in zip(xs, v)}, "max")
    return m, xs


def test_knapsack_optimum():
    m, xs = knapsack()
    out = solve(m)
    assert out.status is Status.OPTIMAL
    assert out.objective == pytest.approx(9)
    assert out.gap_pct == 0.0


def test_relax_gives_fractional_bound():
    m, _ = knapsack()
    out = solve(relax(m))
    assert out.objective == pytest.approx(9.5)


def test_fix_and_make_binary_round_trip():
    m, xs = knapsack()
    fixed = fix(m, {xs[0]: 1.0})
    assert solve(fixed).value(xs[0]) == pytest.approx(1.0)
    back = make_binary(relax(m), xs)
    assert all(v.kind is VarKind.BINARY for v in back.variables)
    assert m.variables[0].kind is VarKind.BINARY  # copies, not in-place


def test_fix_rejects_out_of_domain():
    m, xs = knapsack()
    with pytest.raises(BoundViolation):
        fix(m, {xs[0]: 0.5})
    with pytest.raises(ModelError):
        fix(m, {99: 1.0})


def test_model_rejects_bad_input():
    m = Model()
    with pytest.raises(ModelError):
        m.add_var("y", "continuous", 0.0, float("inf"))
    x = m.add_var("x")
    with pytest.raises(ModelError):
        m.add_constraint({x + 5: 1.0}, "<=", 1)
    with pytest.raises(ModelError):
        m.add_constraint({x: 1.0}, "<", 1)


def test_infeasible_model():
    m = Model()
    x = m.add_var("x")
    m.add_constraint({x: 1}, ">=", 2)
    m.set_objective({x: 1})
    assert solve(m).status is Status.INFEASIBLE


def test_zero_time_limit_rejected():
    with pytest.raises(LimitZero):
        Limits(time_limit_s=0)


def test_node_limit_reports_limit_status():
    rng = np.random.default_rng(3)
    m = Model()
    xs = [m.add_var(f"x{k}") for k in range(25)]
    w = rng.integers(5, 40, 25)
    m.add_constraint({x: float(wk) for x, wk in zip(xs, w)}, "<=", float(w.sum() // 2) + 0.5)
    m.set_objective({x: float(wk) + 0.1 * k for k, (x, wk) in enumerate(zip(xs, w))}, "max")
    out = solve(m, Limits(node_limit=2))
    assert out.status in (Status.FEASIBLE_AT_LIMIT, Status.NO_INCUMBENT_AT_LIMIT)
    assert out.at_limit


def brute_force(m: Model):
    best = None
    n = m.n_vars
    for bits in itertools.product((0.0, 1.0), repeat=n):
        x = np.array(bits)
        if m.violations(x):
            continue
        val = m.evaluate(x)
        if best is None or (val < best if m.sense == "min" else val > best):
            best = val
    return best


@pytest.mark.parametrize("seed", range(60))
def test_branch_and_bound_matches_brute_force(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 9))
    m = Model()
    xs = [m.add_var(f"x{k}") for k in range(n)]
    for j in range(int(rng.integers(1, 5))):
        coeffs = {x: float(rng.integers(-3, 6)) for x in xs if rng.random() < 0.7}
        if coeffs:
            m.add_constraint(coeffs, str(rng.choice(["<=", ">=", "="])), float(rng.integers(-1, 6)), f"c{j}")
    m.set_objective({x: float(rng.integers(-5, 6)) for x in xs}, str(rng.choice(["min", "max"])))
    out = solve(m)
    want = brute_force(m)
    if want is None:
        assert out.status is Status.INFEASIBLE
    else:
        assert out.status is Status.OPTIMAL
        assert out.objective == pytest.approx(want, abs=1e-7)
        assert not m.violations(out.values)


@pytest.mark.parametrize("seed", range(40))
def test_dense_lp_matches_linprog(seed):
    rng = np.random.default_rng(1000 + seed)
    n, k = int(rng.integers(2, 8)), int(rng.integers(1, 6))
    a = rng.integers(-3, 5, (k, n)).astype(float)
    c = rng.normal(size=n)
    row_lo = np.where(rng.random(k) < 0.5, -np.inf, rng.integers(-2, 3, k).astype(float))
    row_hi = np.where(np.isinf(row_lo), rng.integers(0, 6, k).astype(float), np.inf)
    lo, hi = np.zeros(n), rng.integers(1, 4, n).astype(float)
    ours = DenseLP(c, a, row_lo, row_hi).solve(lo, hi)
    a_ub = np.vstack([a[np.isfinite(row_hi)], -a[np.isfinite(row_lo)]])
    b_ub = np.concatenate([row_hi[np.isfinite(row_hi)], -row_lo[np.isfinite(row_lo)]])
    ref = linprog(c, A_ub=a_ub, b_ub=b_ub, bounds=list(zip(lo, hi)), method="highs")
    if ref.status == 2:
        assert ours.status == "infeasible"
    else:
        assert ours.status == "optimal"
        assert ours.objective == pytest.approx(ref.fun, abs=1e-7)


def test_highs_backend_agrees():
    m, _ = knapsack()
    assert solve(m, backend="highs").objective == pytest.approx(solve(m).objective)
    assert solve(m, backend=HighsBackend()).status is Status.OPTIMAL


def test_backend_resolution(monkeypatch):
    mod = types.ModuleType("fake_backend_mod")

    class Echo:
        name = "echo"

        def solve(self, model, limits):
            return "called"

    mod.Echo = Echo
    monkeypatch.setitem(sys.modules, "fake_backend_mod", mod)
    assert resolve_backend("fake_backend_mod:Echo").name == "echo"
    monkeypatch.setenv(BACKEND_ENV, "highs")
    assert resolve_backend().name == "highs"
    monkeypatch.delenv(BACKEND_ENV)
    assert resolve_backend().name == "builtin"
    with pytest.raises(ValueError):
        resolve_backend("nonsense")


def test_lp_export_is_stable():
    m, _ = knapsack()
    text = to_lp_format(m)
    assert text == m.copy().to_lp()
    assert text.splitlines()[1] == "Maximize"
    assert " cap: 3 x0 + 4 x1 + 2 x2 + 5 x3 <= 7" in text
    assert "Binaries" in text and text.endswith("End\n")


def test_gap_for_limit_outcome():
    from rmfs_alloc.milp import SolveOutcome

    out = SolveOutcome(Status.FEASIBLE_AT_LIMIT, np.zeros(1), 10.0, 8.0, "min")
    assert out.gap_pct == pytest.approx(20.0)
    assert SolveOutcome(Status.NO_INCUMBENT_AT_LIMIT, None, None, 3.0).gap_pct is None
