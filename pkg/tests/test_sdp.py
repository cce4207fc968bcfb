import numpy as np
import pytest

from sharpkit import linalg, sdp
from sharpkit.config import DEFAULT
from conftest import SX, SY, SZ


def trace_cap(d=3):
    prob = sdp.SdpProblem()
    x = prob.hermitian("X", d, psd=False)
    s = prob.hermitian("S", d)
    prob.add_eq("slack", np.eye(d) - x - s, np.zeros((d, d)))
    prob.maximize(x.trace())
    return prob


def test_trace_cap():
    sol = sdp.solve(trace_cap())
    assert sol.status == sdp.OPTIMAL
    assert sol.objective == pytest.approx(3, abs=1e-8)
    assert np.allclose(sol["X"], np.eye(3), atol=1e-7)


@pytest.mark.parametrize("h,top", [(SZ, 1.0), (SX + 0.5 * SY, np.sqrt(1.25)), (np.diag([0.2, -3.0]), 0.2)])
def test_variational_eigenvalue(h, top):
    prob = sdp.SdpProblem()
    x = prob.hermitian("X", 2)
    prob.add_eq("trace", x.trace(), 1.0)
    prob.maximize(x.trace(h))
    sol = sdp.solve(prob)
    assert sol.status == sdp.OPTIMAL
    assert sol.objective == pytest.approx(top, abs=1e-8)
    assert sol.gap <= 1e-8 * (1 + abs(sol.objective))


def helstrom(eta, axis=SZ):
    rho1 = (np.eye(2) + eta * axis) / 2
    rho2 = (np.eye(2) - eta * axis) / 2
    prob = sdp.SdpProblem()
    y = prob.hermitian("Y", 2, psd=False)
    prob.add_psd("one", y - rho1 / 2)
    prob.add_psd("two", y - rho2 / 2)
    prob.minimize(y.trace())
    return prob


@pytest.mark.parametrize("eta", [0.0, 0.1, 0.5, 0.9, 1.0])
@pytest.mark.parametrize("axis", [SZ, SY])
def test_helstrom(eta, axis):
    sol = sdp.solve(helstrom(eta, axis))
    assert sol.status == sdp.OPTIMAL
    # (1/2)(1 + (1/2)||rho1 - rho2||_1) with ||rho1 - rho2||_1 = 2 eta
    assert sol.objective == pytest.approx((1 + eta) / 2, abs=1e-8)
    assert sol.gap <= 1e-8 * (1 + abs(sol.objective))


def test_weak_duality_and_hermitian_output():
    for prob in (trace_cap(), helstrom(0.3, SY)):
        sol = sdp.solve(prob)
        # maximization after sign flip: dual bound never below primal
        assert sol.dual_objective * prob.sense >= sol.objective * prob.sense - sol.gap - 1e-12
        for v in sol.values.values():
            v = np.atleast_2d(v)
            assert np.max(np.abs(v - v.conj().T)) <= 1e-10


@pytest.mark.parametrize("c", [0.01, 3.0, 250.0])
def test_objective_scaling(c):
    prob = sdp.SdpProblem()
    x = prob.hermitian("X", 2)
    prob.add_eq("trace", x.trace(), 1.0)
    prob.maximize(x.trace(SX + SZ))
    base = sdp.solve(prob).objective
    prob.maximize(x.trace(c * (SX + SZ)))
    assert sdp.solve(prob).objective == pytest.approx(c * base, rel=1e-8)


def test_duals_certify_objective():
    # max Tr[H X] s.t. Tr X = 1: the trace multiplier is the top eigenvalue
    h = np.diag([0.3, -1.0, 0.9])
    prob = sdp.SdpProblem()
    x = prob.hermitian("X", 3)
    prob.add_eq("trace", x.trace(), 1.0)
    prob.maximize(x.trace(h))
    sol = sdp.solve(prob)
    assert sol.duals["trace"] == pytest.approx(0.9, abs=1e-7)
    w = sol.lmi_duals["X>=0"]
    assert linalg.is_psd(w, 1e-7)
    assert np.allclose(w, 0.9 * np.eye(3) - h, atol=1e-7)


def test_unbounded_is_solver_failure():
    prob = sdp.SdpProblem()
    x = prob.hermitian("X", 2)
    prob.maximize(x.trace())
    sol = sdp.solve(prob)
    assert sol.status == sdp.SOLVER_FAILURE


def test_iteration_cap_is_solver_failure():
    sol = sdp.solve(helstrom(0.4), DEFAULT.replace(max_iter=1))
    assert sol.status == sdp.SOLVER_FAILURE


def test_inconsistent_equalities():
    prob = sdp.SdpProblem()
    t = prob.scalar("t")
    prob.add_eq("a", t, 1.0)
    prob.add_eq("b", t, 2.0)
    prob.maximize(t)
    assert sdp.solve(prob).status == sdp.INFEASIBLE


def test_redundant_equalities_are_fine():
    prob = sdp.SdpProblem()
    x = prob.hermitian("X", 2)
    prob.add_eq("a", x.trace(), 1.0)
    prob.add_eq("b", x.trace() * 2.0, 2.0)
    prob.maximize(x.trace(SZ))
    sol = sdp.solve(prob)
    assert sol.status == sdp.OPTIMAL and sol.objective == pytest.approx(1, abs=1e-8)


def test_primal_infeasible_certificate():
    prob = sdp.SdpProblem()
    x = prob.hermitian("X", 2)
    prob.add_eq("neg", x.trace(), -1.0)
    prob.maximize(x.trace(SZ))
    assert sdp.solve(prob).status == sdp.INFEASIBLE


def test_feasibility_feasible():
    prob = sdp.SdpProblem()
    x = prob.hermitian("X", 3)
    prob.add_eq("trace", x.trace(), 1.0)
    res = sdp.feasibility(prob)
    assert res.status == sdp.FEASIBLE
    assert np.allclose(res.point["X"], np.eye(3) / 3, atol=1e-6)


def test_feasibility_certificate():
    prob = sdp.SdpProblem()
    x = prob.hermitian("X", 3)
    prob.add_eq("trace", x.trace(), -1.0)
    res = sdp.feasibility(prob)
    assert res.status == sdp.INFEASIBLE
    assert res.margin >= 1e-7
    m = res.multipliers["trace"][0, 0].real
    # M C - sup_{X >= 0} M Tr X equals the margin; the sup is finite only for M <= 0
    assert m <= 0
    assert m * -1.0 - 0.0 == pytest.approx(res.margin, abs=1e-7)


def test_feasibility_undecided_band():
    # Tr X = 1 with X <= (1 - 5e-8) I / 3 misses by a few 1e-8
    prob = sdp.SdpProblem()
    x = prob.hermitian("X", 3)
    prob.add_psd("cap", (1 - 6e-8) / 3 * np.eye(3) - x)
    prob.add_eq("trace", x.trace(), 1.0)
    res = sdp.feasibility(prob, ["trace"])
    assert res.status == sdp.UNDECIDED
    assert 1e-9 < res.violation < 1e-7


def test_phase_one_rejects_unknown_names():
    prob = sdp.SdpProblem()
    prob.hermitian("X", 2)
    with pytest.raises(ValueError):
        sdp.phase_one(prob, ["missing"])


def test_duplicate_variable():
    prob = sdp.SdpProblem()
    prob.hermitian("X", 2)
    with pytest.raises(ValueError):
        prob.scalar("X")


@pytest.mark.parametrize("breakdowns", [1, 2, 3])
def test_retry_ladder_recovers(monkeypatch, breakdowns):
    real = sdp.cvxopt.solvers.conelp
    calls = []

    def flaky(*args, **kwargs):
        calls.append((kwargs.get("kktsolver"), float(-args[0][0])))
        if len(calls) <= breakdowns:
            raise ZeroDivisionError("float division by zero")
        return real(*args, **kwargs)

    monkeypatch.setattr(sdp.cvxopt.solvers, "conelp", flaky)
    sol = sdp.solve(trace_cap())
    assert len(calls) == breakdowns + 1
    assert sol.status == sdp.OPTIMAL
    # duals are reported for the unscaled objective on every rung
    assert sol.objective == pytest.approx(3, abs=1e-8)
    assert sol.dual_objective == pytest.approx(3, abs=1e-8)


def test_retry_ladder_exhausted(monkeypatch):
    def broken(*args, **kwargs):
        raise ZeroDivisionError("float division by zero")

    monkeypatch.setattr(sdp.cvxopt.solvers, "conelp", broken)
    sol = sdp.solve(trace_cap())
    assert sol.status == sdp.SOLVER_FAILURE
    assert "division" in sol.message
