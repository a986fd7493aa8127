"""Trust-region baseline using truncated (unshifted) conjugate gradients."""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .arc import (STATUS_MAX_ITER, STATUS_RUNNING, STATUS_STATIONARY,
                  STATUS_TIME, STATUS_UNBOUNDED, SolverParams,
                  inner_tolerance, stationarity_threshold)
from .problems import SmoothProblem
from .records import BenchRecord, record_status

_EPS = float(np.finfo(float).eps)

EXIT_INTERIOR = "interior"
EXIT_BOUNDARY = "boundary"
EXIT_NEGATIVE_CURVATURE = "negative_curvature"
EXIT_CAPPED = "capped"


@dataclass
class TrParams(SolverParams):
    """Trust-region configuration; update constants shared with ArcParams."""

    delta0: float = 1.0

    def __post_init__(self):
        self.validate()
        if self.delta0 <= 0:
            raise ValueError("delta0 must be positive")


@dataclass
class TruncatedCgResult:
    d: np.ndarray
    exit: str
    iterations: int
    hd: np.ndarray          # H @ d, maintained for free from the recurrence
    residual_norm: float


def _boundary_tau(d, p, delta):
    """Positive root of ||d + tau*p|| = delta via the stable formula."""
    a = float(p @ p)
    b = 2.0 * float(d @ p)
    c = float(d @ d) - delta ** 2
    disc = max(b * b - 4.0 * a * c, 0.0)
    root = np.sqrt(disc)
    if b >= 0:
        q = -(b + root) / 2.0
        return c / q
    return (-b + root) / (2.0 * a)


def truncated_cg(apply_H, g, delta, tol, max_iter=None,
                 callback=None) -> TruncatedCgResult:
    """Steihaug-Toint CG for min g'd + 0.5 d'Hd subject to ||d|| <= delta.

    Iterations stop at the required accuracy, when crossing the region
    boundary, or when a direction of nonpositive curvature appears; in the
    latter two cases the returned step sits exactly on the boundary.
    """
    g = np.asarray(g, dtype=float)
    if delta <= 0:
        raise ValueError("delta must be positive")
    if max_iter is None:
        max_iter = 2 * g.size
    d = np.zeros_like(g)
    hd = np.zeros_like(g)
    r = g.copy()                      # gradient of the model at d
    p = -g
    rr = float(r @ r)
    for j in range(max_iter):
        hp = np.asarray(apply_H(p), dtype=float)
        if not np.all(np.isfinite(hp)):
            raise ValueError("operator returned non-finite values")
        kappa = float(p @ hp)
        if kappa <= 0.0:
            tau = _boundary_tau(d, p, delta)
            return TruncatedCgResult(d + tau * p, EXIT_NEGATIVE_CURVATURE,
                                     j + 1, hd + tau * hp,
                                     float(np.linalg.norm(g + hd + tau * hp)))
        alpha = rr / kappa
        d_next = d + alpha * p
        if float(np.linalg.norm(d_next)) >= delta:
            tau = _boundary_tau(d, p, delta)
            return TruncatedCgResult(d + tau * p, EXIT_BOUNDARY, j + 1,
                                     hd + tau * hp,
                                     float(np.linalg.norm(g + hd + tau * hp)))
        d = d_next
        hd = hd + alpha * hp
        r = r + alpha * hp
        rr_next = float(r @ r)
        if callback is not None:
            callback(j, d)
        if np.sqrt(rr_next) <= tol:
            return TruncatedCgResult(d, EXIT_INTERIOR, j + 1, hd,
                                     float(np.sqrt(rr_next)))
        p = -r + (rr_next / rr) * p
        rr = rr_next
    return TruncatedCgResult(d, EXIT_CAPPED, max_iter, hd,
                             float(np.linalg.norm(g + hd)))


@dataclass
class TrTraceRecord:
    k: int
    delta: float
    step_norm: float
    rho: float
    success: bool
    exit: str
    delta_q: float
    f_before: float
    grad_norm: float
    inner_iterations: int
    step: np.ndarray


@dataclass
class TrState:
    x: np.ndarray
    delta: float
    k: int = 0
    f_val: float = np.nan
    grad_norm: float = np.nan
    status: str = STATUS_RUNNING
    trace: list = field(default_factory=list)
    g0_norm: float = np.nan
    elapsed_seconds: float = 0.0


def st_minimize(problem: SmoothProblem, params: TrParams = None,
                callback=None):
    """Classical trust-region loop; returns ``(TrState, BenchRecord)``.

    Uses the same acceptance thresholds, inner accuracy rule and stopping
    test as the cubic-regularization solver so the two are comparable.
    """
    params = TrParams() if params is None else params
    t0 = time.perf_counter()
    counters0 = problem.counters.snapshot()
    x = problem.x0.copy()
    state = TrState(x=x, delta=params.delta0)

    f = problem.eval_f(x)
    g = problem.eval_grad(x)
    if not (np.isfinite(f) and np.all(np.isfinite(g))):
        raise ValueError(f"{problem.name}: non-finite objective or gradient "
                         "at the start point")
    state.g0_norm = float(np.linalg.norm(g))
    threshold = stationarity_threshold(state.g0_norm, params)

    while True:
        gnorm = float(np.linalg.norm(g))
        state.f_val, state.grad_norm, state.x = f, gnorm, x
        if gnorm <= threshold:
            state.status = STATUS_STATIONARY
            break
        if state.k >= params.max_outer_iter:
            state.status = STATUS_MAX_ITER
            break
        if (params.time_budget is not None
                and time.perf_counter() - t0 > params.time_budget):
            state.status = STATUS_TIME
            break

        tol = inner_tolerance(gnorm, params.zeta)
        res = truncated_cg(lambda w: problem.eval_hvp(x, w), g, state.delta,
                           tol)
        d = res.d
        delta_q = -float(g @ d) - 0.5 * float(d @ res.hd)
        degenerate = delta_q <= 64.0 * _EPS * (1.0 + abs(f))
        if degenerate:
            rho, f_trial = -np.inf, None
        else:
            f_trial = problem.eval_f(x + d)
            if np.isnan(f_trial) or f_trial == -np.inf:
                state.status = STATUS_UNBOUNDED
                state.k += 1
                break
            rho = (f - f_trial) / delta_q
        success = not degenerate and rho >= params.eta1

        rec = TrTraceRecord(
            k=state.k, delta=state.delta, step_norm=float(np.linalg.norm(d)),
            rho=rho, success=success, exit=res.exit, delta_q=delta_q,
            f_before=f, grad_norm=gnorm, inner_iterations=res.iterations,
            step=d)
        state.trace.append(rec)
        state.k += 1
        if callback is not None:
            callback(rec, state)

        if success:
            x = x + d
            f = f_trial
            g = problem.eval_grad(x)
            if not np.all(np.isfinite(g)):
                raise ValueError(f"{problem.name}: gradient became "
                                 "non-finite after an accepted step")
            if rho > params.eta2:
                state.delta = params.gamma2 * state.delta
        else:
            state.delta = params.gamma1 * state.delta

    state.elapsed_seconds = time.perf_counter() - t0
    counters = problem.counters.snapshot()
    record = BenchRecord(
        name=problem.name, nvar=problem.n,
        f=state.f_val, grad_norm=state.grad_norm, iter=state.k,
        neval_f=counters["neval_f"] - counters0["neval_f"],
        neval_grad=counters["neval_grad"] - counters0["neval_grad"],
        neval_hvp=counters["neval_hvp"] - counters0["neval_hvp"],
        elapsed_seconds=state.elapsed_seconds,
        status=record_status(state.status))
    return state, record
