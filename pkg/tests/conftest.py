import math
import sys
import warnings

import numpy as np
import pytest

from rdp.measures import DivergenceKind


def cvx_rdp(p, delta, D, P, kind=DivergenceKind.TV):
    """R(D, P) in bits from a generic conic solver; independent of rdp.solver."""
    cp = pytest.importorskip("cvxpy")
    p = np.asarray(p, float)
    delta = np.asarray(delta, float)
    n, m = delta.shape
    Q = cp.Variable((n, m), nonneg=True)
    pi = cp.multiply(p[:, None], Q)
    q = p @ Q
    outer = cp.reshape(p, (n, 1), order="C") @ cp.reshape(q, (1, m), order="C")
    obj = cp.sum(cp.rel_entr(pi, outer)) / np.log(2)
    cons = [cp.sum(Q, axis=1) == 1, cp.sum(cp.multiply(pi, delta)) <= D]
    if P == 0:
        cons.append(q == p)
    elif math.isfinite(P):
        if kind is DivergenceKind.TV:
            cons.append(0.5 * cp.norm1(q - p) <= P)
        else:
            cons.append(cp.sum(cp.rel_entr(p, q)) / np.log(2) <= P)
    prob = cp.Problem(cp.Minimize(obj), cons)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        prob.solve(solver="CLARABEL")
    return float(prob.value)


@pytest.fixture
def rng():
    return np.random.default_rng(20240521)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for n in range(1, 13):
        if n in results:
            ok, detail = results[n]
            terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
        else:
            terminalreporter.write_line(f"criterion {n:2d}: NOT RUN")
