"""Poisson-bracket engine and verifiers for the quadratic algebra.

The canonical bracket in Liouville/Lie coordinates is

    {F, G} = F_xi G_pxi - F_pxi G_xi + F_eta G_peta - F_peta G_eta.

Values of nested brackets like {A, {A, B}} need first derivatives of
{A, B}, which in turn need second derivatives of A and B; that is why
observables are evaluated with order-2 jets.

Residuals are normalized as |lhs - rhs| / (1 + max(|lhs|, |rhs|)) where
lhs/rhs are the signed-term aggregates of the identity under test; the
denominator also carries the largest term entering the bracket
contractions, so the check measures genuine identity violation relative
to the magnitudes the computation actually handled (near-degenerate
sample points otherwise drown the tolerance in float64 roundoff).
"""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import least_squares

from .errors import IllConditioned
from .jets import Jet2, Observable, PhasePoint
from .systems import (SystemSpec, algebra_constants, constants_poly, hamiltonian,
                      integral_A, integral_B, sample_points, spec_to_dict)

__all__ = [
    "BracketValue",
    "bracket",
    "bracket_fd",
    "c_observable",
    "verify_algebra",
    "verify_casimir",
    "polynomial_membership",
    "casimir_coefficients",
    "VerificationReport",
    "Identity",
    "DEFAULT_SEED",
    "TOL_BRACKET",
    "TOL_NESTED",
]

DEFAULT_SEED = 0xC0FFEE
TOL_BRACKET = 1e-9   # first brackets {H, .}
TOL_NESTED = 1e-8    # nested brackets (algebra rows), Casimir

_PAIRS = ((0, 2), (1, 3))  # (coordinate, conjugate momentum) index pairs


def _hess_full(jet: Jet2):
    """Unpack the 10-entry Hessian to a (4, 4, ...) view-like array."""
    h = jet.hess
    idx = np.array([[0, 1, 2, 3], [1, 4, 5, 6], [2, 5, 7, 8], [3, 6, 8, 9]])
    return h[idx]


@dataclass(frozen=True)
class BracketValue:
    """{F, G} truncated to order 1: value, gradient, and term scales.

    ``val_scale`` is the largest |term| in the value contraction;
    ``grad_scale`` the same per gradient component.  These feed the
    normalization of downstream residuals.
    """

    val: np.ndarray
    grad: np.ndarray
    val_scale: np.ndarray
    grad_scale: np.ndarray


def _bracket_jets(F: Jet2, G: Jet2) -> BracketValue:
    terms = np.stack([F.grad[q] * G.grad[p] for q, p in _PAIRS]
                     + [-F.grad[p] * G.grad[q] for q, p in _PAIRS])
    val = terms.sum(axis=0)
    val_scale = np.abs(terms).max(axis=0)

    FH, GH = _hess_full(F), _hess_full(G)
    gterms = []
    for q, p in _PAIRS:
        gterms += [FH[q] * G.grad[p], F.grad[q] * GH[p],
                   -FH[p] * G.grad[q], -F.grad[p] * GH[q]]
    gstack = np.stack(gterms)
    grad = gstack.sum(axis=0)
    grad_scale = np.abs(gstack).max(axis=0)
    return BracketValue(val, grad, val_scale, grad_scale)


def bracket(F: Observable, G: Observable, point: PhasePoint) -> BracketValue:
    """{F, G} at ``point`` (batched), with first derivatives."""
    return _bracket_jets(F.eval(point), G.eval(point))


def bracket_fd(F: Observable, G: Observable, point: PhasePoint, h: float = 1e-5):
    """Bracket value from finite-difference gradients (oracle path)."""
    from .jets import fd_derivatives

    gF, _ = fd_derivatives(F, point, h=h)
    gG, _ = fd_derivatives(G, point, h=h)
    return sum(gF[q] * gG[p] - gF[p] * gG[q] for q, p in _PAIRS)


def _grad_bracket_value(Xjet: Jet2, C: BracketValue):
    """Value and scale of {X, C} from X's gradient and C's gradient."""
    terms = np.stack([Xjet.grad[q] * C.grad[p] for q, p in _PAIRS]
                     + [-Xjet.grad[p] * C.grad[q] for q, p in _PAIRS])
    # error carriers: X's gradient times the roundoff scale of C's gradient
    carriers = np.stack([np.abs(Xjet.grad[q]) * C.grad_scale[p] for q, p in _PAIRS]
                        + [np.abs(Xjet.grad[p]) * C.grad_scale[q] for q, p in _PAIRS])
    val = terms.sum(axis=0)
    scale = np.maximum(np.abs(terms).max(axis=0), carriers.max(axis=0))
    return val, scale


class CObservable:
    """C = {A, B}: evaluable to order 1 (value + gradient), batched."""

    label = "C"

    def __init__(self, spec: SystemSpec):
        self._A = integral_A(spec)
        self._B = integral_B(spec)

    def order1(self, point: PhasePoint) -> BracketValue:
        return bracket(self._A, self._B, point)

    def value(self, point: PhasePoint):
        return self.order1(point).val

    __call__ = order1


def c_observable(spec: SystemSpec) -> CObservable:
    """The cubic integral C = {A, B} as an order-1 evaluable observable."""
    return CObservable(spec)


# ---------------------------------------------------------------------------
# Reports


@dataclass(frozen=True)
class Identity:
    name: str
    max_residual: float
    tolerance: float

    @property
    def passed(self):
        return bool(self.max_residual <= self.tolerance)

    def to_dict(self):
        return {"name": self.name, "max_residual": self.max_residual,
                "tolerance": self.tolerance, "pass": self.passed}


@dataclass(frozen=True)
class VerificationReport:
    """Outcome of one verification run, serializable to a stable document."""

    kind: str
    spec: SystemSpec
    seed: int
    n_points: int
    identities: tuple
    correction_applied: bool = False
    correction: dict = None
    extra: dict = field(default_factory=dict)

    @property
    def passed(self):
        return all(i.passed for i in self.identities)

    def to_dict(self):
        doc = {
            "schema": "superint-report/1",
            "kind": self.kind,
            "spec": spec_to_dict(self.spec),
            "seed": self.seed,
            "n_points": self.n_points,
            "identities": [i.to_dict() for i in self.identities],
            "correction_applied": self.correction_applied,
            "pass": self.passed,
        }
        if self.correction:
            doc["correction"] = self.correction
        if self.extra:
            doc.update(self.extra)
        return doc

    def to_json(self, **kwargs):
        return json.dumps(self.to_dict(), sort_keys=True, **kwargs)

    def summary_lines(self):
        lines = []
        for i in self.identities:
            status = "pass" if i.passed else "FAIL"
            lines.append(f"{i.name:12s} max_residual={i.max_residual:.3e} "
                         f"tol={i.tolerance:.1e} {status}")
        return lines


# ---------------------------------------------------------------------------
# Core residual assembly


def _norm(num, *scales):
    s = scales[0]
    for extra in scales[1:]:
        s = np.maximum(s, extra)
    return np.abs(num) / (1.0 + s)


def _row_residuals(spec, pts, a_off=0.0, b_off=0.0):
    """Per-point residuals of HA, HB, HC, AC-row, BC-row and the Casimir.

    ``a_off``/``b_off`` are the affine-match offsets (normally zero).
    Returns a dict of residual arrays.
    """
    H = hamiltonian(spec).eval(pts)
    A = integral_A(spec).eval(pts)
    B = integral_B(spec).eval(pts)

    C = _bracket_jets(A, B)
    HA = _bracket_jets(H, A)
    HB = _bracket_jets(H, B)
    HC_val, HC_scale = _grad_bracket_value(H, C)
    AC_val, AC_scale = _grad_bracket_value(A, C)
    BC_val, BC_scale = _grad_bracket_value(B, C)

    E = H.val
    con = algebra_constants(spec, E)
    Av, Bv = A.val + a_off, B.val + b_off

    def poly_terms(*terms):
        t = np.stack(terms)
        return t.sum(axis=0), np.abs(t).max(axis=0)

    one = np.ones_like(E)
    rhs_AC, s_AC = poly_terms(con.alpha * Av**2, 2.0 * con.gamma * Av * Bv,
                              con.delta * Av, con.epsilon * Bv, con.zeta * one)
    rhs_BC, s_BC = poly_terms(con.a * Av**2, -con.gamma * Bv**2,
                              -2.0 * con.alpha * Av * Bv, con.d * Av,
                              -con.delta * Bv, con.z * one)
    kcomb, s_K = poly_terms(C.val**2, -2.0 * con.alpha * Av**2 * Bv,
                            -2.0 * con.gamma * Av * Bv**2, -2.0 * con.delta * Av * Bv,
                            -con.epsilon * Bv**2, -2.0 * con.zeta * Bv,
                            (2.0 / 3.0) * con.a * Av**3, con.d * Av**2,
                            2.0 * con.z * Av)
    # roundoff carrier of C^2 via C's own contraction scale
    s_K = np.maximum(s_K, np.abs(C.val) * C.val_scale)

    return {
        "HA": _norm(HA.val, HA.val_scale),
        "HB": _norm(HB.val, HB.val_scale),
        "HC": _norm(HC_val, HC_scale),
        "AC_row": _norm(AC_val - rhs_AC, AC_scale, s_AC),
        "BC_row": _norm(BC_val - rhs_BC, BC_scale, s_BC),
        "casimir": _norm(kcomb - con.K_casimir, s_K, np.abs(con.K_casimir)),
    }


def _chunked_max(spec, pts, names, threads, a_off=0.0, b_off=0.0, chunk=256):
    """Max residual per identity over fixed chunks (thread-count invariant)."""
    arr = pts.as_array()
    n = arr.shape[1]
    bounds = [(i, min(i + chunk, n)) for i in range(0, n, chunk)]

    def work(b):
        lo, hi = b
        sub = PhasePoint.from_array(arr[:, lo:hi])
        res = _row_residuals(spec, sub, a_off, b_off)
        return {k: float(res[k].max()) for k in names}

    if threads and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            parts = list(ex.map(work, bounds))
    else:
        parts = [work(b) for b in bounds]
    return {k: max(p[k] for p in parts) for k in names}


def _fit_offsets(spec, pts):
    """Affine-match pre-step: constant offsets for A and B (q=1, r=0)."""

    def cost(x):
        res = _row_residuals(spec, pts, a_off=x[0], b_off=x[1])
        return np.concatenate([res["AC_row"], res["BC_row"], res["casimir"]])

    sol = least_squares(cost, x0=np.zeros(2), method="lm", max_nfev=60)
    return float(sol.x[0]), float(sol.x[1])


def verify_algebra(spec: SystemSpec, n_points: int = 100, seed: int = DEFAULT_SEED,
                   tol_bracket: float = TOL_BRACKET, tol_nested: float = TOL_NESTED,
                   threads: int = 1) -> VerificationReport:
    """Certify {H,A} = {H,B} = {H,C} = 0 and the two quadratic-algebra rows.

    Constants are evaluated per point at E = H(point).  If a raw row
    residual exceeds tolerance, the affine-match pre-step fits constant
    offsets for A and B and re-verifies; ``correction_applied`` records
    whether that was needed (it must not be, for the printed forms).
    """
    rng = np.random.default_rng(seed)
    pts = sample_points(spec, n_points, rng)
    names = ("HA", "HB", "HC", "AC_row", "BC_row")
    tols = {"HA": tol_bracket, "HB": tol_bracket, "HC": tol_bracket,
            "AC_row": tol_nested, "BC_row": tol_nested}

    worst = _chunked_max(spec, pts, names, threads)
    correction_applied = False
    correction = None
    if any(worst[k] > tols[k] for k in ("AC_row", "BC_row")):
        a_off, b_off = _fit_offsets(spec, pts)
        correction_applied = True
        correction = {"a_offset": a_off, "b_offset": b_off}
        worst = _chunked_max(spec, pts, names, threads, a_off, b_off)

    idents = tuple(Identity(k, worst[k], tols[k]) for k in names)
    return VerificationReport("algebra", spec, seed, n_points, idents,
                              correction_applied, correction)


def verify_casimir(spec: SystemSpec, n_points: int = 100, seed: int = DEFAULT_SEED,
                   tol: float = TOL_NESTED, threads: int = 1) -> VerificationReport:
    """Certify C^2 - (quadratic-algebra combination) = K(H) per class."""
    rng = np.random.default_rng(seed)
    pts = sample_points(spec, n_points, rng)
    names = ("casimir",)
    worst = _chunked_max(spec, pts, names, threads)
    correction_applied = False
    correction = None
    if worst["casimir"] > tol:
        a_off, b_off = _fit_offsets(spec, pts)
        correction_applied = True
        correction = {"a_offset": a_off, "b_offset": b_off}
        worst = _chunked_max(spec, pts, names, threads, a_off, b_off)
    idents = (Identity("casimir", worst["casimir"], tol),)
    return VerificationReport("casimir", spec, seed, n_points, idents,
                              correction_applied, correction)


# ---------------------------------------------------------------------------
# Polynomial membership (Appendix-style least-squares oracle)


def _monomials(degree):
    return [(i, j, k) for i in range(degree + 1) for j in range(degree + 1)
            for k in range(degree + 1) if i + j + k <= degree]


@dataclass(frozen=True)
class MembershipResult:
    coefficients: dict
    rms_holdout: float
    condition: float

    def coefficient(self, i, j, k):
        return self.coefficients.get((i, j, k), 0.0)


def polynomial_membership(target, generators, spec: SystemSpec, degree: int = 3,
                          n_points: int = 400, seed: int = DEFAULT_SEED,
                          ridge_factor: float = 1e-12,
                          holdout: float = 0.2) -> MembershipResult:
    """Least-squares membership of ``target`` in polynomials of the generators.

    Fits target(point) over all monomials H^i A^j B^k with i+j+k <= degree,
    with column scaling and a small ridge; reports coefficients and the rms
    residual on a held-out split.  Raises :class:`IllConditioned` when the
    scaled design matrix's condition exceeds 1e12 (functionally dependent
    sampling; enlarge the domain).
    """
    monos = _monomials(degree)
    if n_points < 2 * len(monos):
        raise ValueError(f"need at least {2 * len(monos)} points for "
                         f"{len(monos)} monomials, got {n_points}")
    rng = np.random.default_rng(seed)
    pts = sample_points(spec, n_points, rng)
    gvals = [np.asarray(g.value(pts), dtype=float) for g in generators]
    y = np.asarray(target.value(pts), dtype=float)

    X = np.stack([gvals[0]**i * gvals[1]**j * gvals[2]**k for i, j, k in monos],
                 axis=1)
    n_hold = max(1, int(round(holdout * n_points)))
    train = slice(0, n_points - n_hold)
    hold = slice(n_points - n_hold, n_points)

    # Row weights make the fit relative: the membership identity is exact,
    # so absolute residuals scale with |row| and would otherwise let a few
    # near-degenerate sample points dominate the normal equations.
    w = 1.0 / (1.0 + np.abs(X[train]).max(axis=1) + np.abs(y[train]))
    Xw = X[train] * w[:, None]
    yw = y[train] * w

    scale = np.sqrt(np.mean(Xw**2, axis=0))
    scale[scale == 0.0] = 1.0
    Xs = Xw / scale
    sv = np.linalg.svd(Xs, compute_uv=False)
    condition = float(sv[0] / sv[-1]) if sv[-1] > 0 else np.inf
    if condition > 1e12:
        raise IllConditioned(
            f"scaled design condition {condition:.3e} exceeds 1e12; "
            "sampling looks functionally dependent - enlarge the domain")

    lam = ridge_factor * sv[0]
    aug = np.vstack([Xs, lam * np.eye(Xs.shape[1])])
    rhs = np.concatenate([yw, np.zeros(Xs.shape[1])])
    cs, *_ = np.linalg.lstsq(aug, rhs, rcond=None)
    coefs = cs / scale

    pred = X[hold] @ coefs
    wh = 1.0 / (1.0 + np.abs(X[hold]).max(axis=1) + np.abs(y[hold]))
    num = np.sqrt(np.mean(((pred - y[hold]) * wh) ** 2))
    den = np.sqrt(np.mean((y[hold] * wh) ** 2))
    rms = float(num / (1e-12 + den))
    return MembershipResult(dict(zip(monos, coefs)), rms, condition)


def casimir_coefficients(spec: SystemSpec) -> dict:
    """Expected monomial coefficients of C^2 over H^i A^j B^k, from the
    printed structure constants (the rearranged Casimir identity)."""
    cp = constants_poly(spec)
    out = {}

    def put(i, j, k, value):
        if value != 0.0:
            out[(i, j, k)] = out.get((i, j, k), 0.0) + value

    put(0, 2, 1, 2.0 * cp.alpha)
    put(0, 1, 2, 2.0 * cp.gamma)
    put(0, 3, 0, -(2.0 / 3.0) * cp.a)
    for i, c in enumerate(np.atleast_1d(cp.delta)):
        put(i, 1, 1, 2.0 * c)
    for i, c in enumerate(np.atleast_1d(cp.epsilon)):
        put(i, 0, 2, c)
    for i, c in enumerate(np.atleast_1d(cp.zeta)):
        put(i, 0, 1, 2.0 * c)
    for i, c in enumerate(np.atleast_1d(cp.d)):
        put(i, 2, 0, -c)
    for i, c in enumerate(np.atleast_1d(cp.z)):
        put(i, 1, 0, -2.0 * c)
    for i, c in enumerate(np.atleast_1d(cp.K)):
        put(i, 0, 0, c)
    return out
