"""Hamiltonian flow integration and conservation drift certification.

Hamilton's equations in Liouville/Lie coordinates,

    dxi/dt  =  dH/dp_xi,   deta/dt  =  dH/dp_eta,
    dp_xi/dt = -dH/dxi,    dp_eta/dt = -dH/deta,

are integrated with an explicit embedded Dormand-Prince 5(4) pair under
PI step-size control.  The conformal-metric Hamiltonians are
non-separable (p_xi p_eta / g coupling), so explicit symplectic
splitting does not apply; tight tolerances substitute for structure
preservation and conservation drift is the acceptance metric.

Integration stops early with a ``domain_exit`` status when the state
leaves the class domain (pole-margin exclusions, positivity, metric
magnitude), recording the exit time.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, StepFailure
from .jets import Dual4, PhasePoint
from .poisson import _bracket_jets
from .systems import (SystemSpec, algebra_constants, build_fns, hamiltonian,
                      integral_A, integral_B, sample_domain)

__all__ = ["Trajectory", "integrate", "drift_report", "trajectory_csv",
           "clamp_energy"]

# Dormand-Prince 5(4) tableau; the 5th-order solution is propagated (FSAL).
# The flow is autonomous, so the c-nodes never enter the stage evaluations.
_A = [
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
]
_B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_B4 = np.array([5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200,
                187 / 2100, 1 / 40])
_E = _B5 - _B4

_MIN_DT = 1e-14


@dataclass(frozen=True)
class Trajectory:
    """Accepted integration states and bookkeeping for one run."""

    times: np.ndarray
    states: np.ndarray            # shape (4, n): xi, eta, p_xi, p_eta
    status: str                   # "completed" | "domain_exit"
    exit_time: float = None
    stats: dict = field(default_factory=dict)

    @property
    def points(self) -> PhasePoint:
        return PhasePoint.from_array(self.states)

    def __len__(self):
        return self.times.size


def _rhs_fn(spec: SystemSpec):
    H = hamiltonian(spec, enforce_min_g=False)

    def rhs(y):
        args = [Dual4.seed(y[i], i) for i in range(4)]
        out = H.fn(*args)
        d = out.d
        return np.array([d[2], d[3], -d[0], -d[1]])

    return rhs


def _in_domain(spec, fns, dom, y):
    xi, eta = y[0], y[1]
    if not np.all(np.isfinite(y)):
        return False
    if not bool(dom.admits(xi, eta)):
        return False
    try:
        g = fns.metric(float(xi), float(eta))
        X, Y = fns.X_of_xi(float(xi)), fns.Y_of_eta(float(eta))
        gt = fns.F_tilde(X + Y) + fns.G_tilde(X - Y)
    except (DomainError, FloatingPointError, ZeroDivisionError):
        return False
    # both conformal factors must stay non-degenerate: g divides H and A,
    # the recoordinatized one divides B
    return (np.isfinite(g) and abs(g) >= dom.min_abs_g
            and np.isfinite(gt) and abs(gt) >= dom.min_abs_g)


def integrate(spec: SystemSpec, initial: PhasePoint, t_end: float,
              rel_tol: float = 1e-10, abs_tol: float = 1e-12,
              max_steps: int = 1_000_000) -> Trajectory:
    """Integrate Hamilton's equations from ``initial`` for ``t_end`` time units.

    Adaptive embedded RK5(4) with PI step control.  Observables are meant
    to be evaluated at accepted steps only (no dense output).  Raises
    :class:`StepFailure` if the step size underflows below 1e-14.
    """
    if t_end <= 0:
        raise ValueError("t_end must be positive")
    fns = build_fns(spec)
    dom = sample_domain(spec)
    rhs = _rhs_fn(spec)

    y = initial.as_array().astype(float).reshape(4)
    if not _in_domain(spec, fns, dom, y):
        raise DomainError("initial", tuple(y), "initial state outside class domain")

    t = 0.0
    times = [0.0]
    states = [y.copy()]
    n_acc = n_rej = 0
    min_dt, max_dt = np.inf, 0.0
    status, exit_time = "completed", None

    k = np.empty((7, 4))
    k[0] = rhs(y)
    nevals = 1

    # initial step: conservative scale from the first derivative
    scale0 = abs_tol + rel_tol * np.abs(y)
    d0 = np.sqrt(np.mean((y / scale0) ** 2))
    d1 = np.sqrt(np.mean((k[0] / scale0) ** 2))
    h = min(t_end, 0.01 * d0 / d1 if d1 > 1e-10 else 1e-4)

    err_prev = 1.0
    safety, beta1, beta2 = 0.9, 0.17, 0.08

    for _ in range(max_steps):
        if t >= t_end:
            break
        h = min(h, t_end - t)
        if h < _MIN_DT:
            raise StepFailure(f"step size underflow (dt={h:.3e}) at t={t:.6g}")
        try:
            for i in range(1, 7):
                yi = y + h * sum(a * k[j] for j, a in enumerate(_A[i]))
                k[i] = rhs(yi)
            nevals += 6
        except (DomainError, OverflowError, ZeroDivisionError, ValueError):
            n_rej += 1
            h *= 0.5
            continue

        y_new = y + h * (_B5[:, None] * k).sum(axis=0)
        err_vec = h * (_E[:, None] * k).sum(axis=0)
        scale = abs_tol + rel_tol * np.maximum(np.abs(y), np.abs(y_new))
        err = float(np.sqrt(np.mean((err_vec / scale) ** 2)))

        if not np.isfinite(err) or err > 1.0:
            n_rej += 1
            h *= max(0.2, safety * (max(err, 1e-10)) ** -0.2) if np.isfinite(err) else 0.5
            err_prev = 1.0
            continue

        # accepted
        t += h
        n_acc += 1
        min_dt, max_dt = min(min_dt, h), max(max_dt, h)
        y = y_new
        k[0] = k[6]  # FSAL
        if not _in_domain(spec, fns, dom, y):
            status, exit_time = "domain_exit", t
            break
        times.append(t)
        states.append(y.copy())
        e = max(err, 1e-10)
        h *= min(5.0, max(0.2, safety * e**-beta1 * err_prev**beta2))
        err_prev = e
    else:
        raise StepFailure(f"max_steps={max_steps} exceeded at t={t:.6g}")

    stats = {"accepted": n_acc, "rejected": n_rej, "rhs_evals": nevals,
             "min_dt": float(min_dt) if n_acc else 0.0,
             "max_dt": float(max_dt)}
    return Trajectory(np.array(times), np.array(states).T, status, exit_time, stats)


def conserved_values(spec: SystemSpec, points: PhasePoint):
    """H, A, B and the Casimir combination along a batch of states.

    The Casimir combination freezes the energy-dependent constants at the
    first state's energy, making it a bona fide conserved scalar.
    """
    H = hamiltonian(spec, enforce_min_g=False).eval(points)
    A = integral_A(spec).eval(points)
    B = integral_B(spec).eval(points)
    C = _bracket_jets(A, B)
    E0 = float(np.atleast_1d(H.val)[0])
    con = algebra_constants(spec, E0)
    Av, Bv = A.val, B.val
    kcomb = (C.val**2 - 2.0 * con.alpha * Av**2 * Bv - 2.0 * con.gamma * Av * Bv**2
             - 2.0 * con.delta * Av * Bv - con.epsilon * Bv**2 - 2.0 * con.zeta * Bv
             + (2.0 / 3.0) * con.a * Av**3 + con.d * Av**2 + 2.0 * con.z * Av)
    return {"H": H.val, "A": Av, "B": Bv, "K": kcomb}


def drift_report(spec: SystemSpec, traj: Trajectory) -> dict:
    """Max |Q(t) - Q(0)| (absolute and normalized) for Q in {H, A, B, K}."""
    if len(traj) == 0:
        raise ValueError("empty trajectory")
    vals = conserved_values(spec, traj.points)
    out = {}
    for name, q in vals.items():
        drift = float(np.abs(q - q[0]).max())
        out[name] = {"max_drift": drift,
                     "normalized": drift / (1.0 + float(np.abs(q).max()))}
    return out


def trajectory_csv(spec: SystemSpec, traj: Trajectory) -> str:
    """CSV export: t,xi,eta,p_xi,p_eta,H,A,B,K with 17 significant digits."""
    vals = conserved_values(spec, traj.points)
    cols = [traj.times, traj.states[0], traj.states[1], traj.states[2],
            traj.states[3], vals["H"], vals["A"], vals["B"], vals["K"]]
    lines = ["t,xi,eta,p_xi,p_eta,H,A,B,K"]
    for row in zip(*cols):
        lines.append(",".join(f"{v:.17g}" for v in row))
    return "\n".join(lines) + "\n"


def clamp_energy(spec: SystemSpec, point: PhasePoint, max_abs_h: float = 10.0) -> PhasePoint:
    """Scale momenta down until |H| <= max_abs_h (keeps step sizes sane)."""
    H = hamiltonian(spec, enforce_min_g=False)
    arr = point.as_array().astype(float).reshape(4)
    for _ in range(60):
        if abs(float(H.value(PhasePoint.from_array(arr)))) <= max_abs_h:
            return PhasePoint.from_array(arr)
        arr[2:] *= 0.7
    return PhasePoint.from_array(arr)
