"""Curvature, surface-of-revolution and linear-integral checks.

The Gaussian curvature of the conformal metric ``ds^2 = g dxi deta`` is

    K = -(1 / 2g) d^2(ln g) / dxi deta

implemented in the log-free rational form

    K = -(g g_xieta - g_xi g_eta) / (2 g^3)

which only needs g != 0 (indefinite conformal factors are legitimate
here, so the ln branch must not be forced).

A metric is "of revolution" when it depends on only one of xi+eta or
xi-eta; that is detected as a directional-derivative null test, either in
the native coordinates or after the class's real recoordinatization
(X, Y) where the structure often only appears there.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .jets import Jet2, Observable
from .poisson import _bracket_jets
from .systems import SystemSpec, build_fns, hamiltonian, sample_points

__all__ = [
    "CurvatureClass",
    "curvature",
    "classify_curvature",
    "revolution_check",
    "linear_integral_check",
    "linear_observable",
    "TOL_CURV_ZERO",
    "TOL_CURV_CONST",
    "TOL_DIRECTIONAL",
    "TOL_LINEAR",
]

TOL_CURV_ZERO = 1e-8
TOL_CURV_CONST = 1e-8
TOL_DIRECTIONAL = 1e-9
TOL_LINEAR = 1e-9


@dataclass(frozen=True)
class CurvatureClass:
    """Classification of the sampled curvature field."""

    tag: str                 # "Zero" | "Constant" | "NonConstant"
    value: float             # the constant (mean) where tag == "Constant"
    max_abs: float
    mean: float
    stddev: float

    def is_zero(self):
        return self.tag == "Zero"

    def is_constant(self, expected=None, tol=1e-7):
        if self.tag != "Constant":
            return False
        return expected is None or abs(self.mean - expected) <= tol


def _metric_jet(spec: SystemSpec, xi, eta) -> Jet2:
    fns = build_fns(spec)
    xi = np.asarray(xi, dtype=float)
    eta = np.asarray(eta, dtype=float)
    shape = np.broadcast_shapes(xi.shape, eta.shape)
    return fns.metric(Jet2.seed(np.broadcast_to(xi, shape), 0),
                      Jet2.seed(np.broadcast_to(eta, shape), 1))


def curvature(spec: SystemSpec, xi, eta):
    """Gaussian curvature K at (xi, eta); batched, momenta irrelevant."""
    g = _metric_jet(spec, xi, eta)
    g_xi, g_eta = g.grad[0], g.grad[1]
    g_cross = g.hess_at(0, 1)
    return -(g.val * g_cross - g_xi * g_eta) / (2.0 * g.val**3)


def curvature_log_form(spec: SystemSpec, xi, eta):
    """-(1/2g) d^2 ln(g) / dxi deta; needs g > 0 (consistency oracle)."""
    g = _metric_jet(spec, xi, eta)
    lng = g.log()
    return -lng.hess_at(0, 1) / (2.0 * g.val)


def _sample_coords(spec, n, rng, domain=None):
    pts = sample_points(spec, n, rng, domain=domain, require_tilde=False)
    return pts.xi, pts.eta


def classify_curvature(spec: SystemSpec, n_points: int = 50,
                       seed: int = 0xC0FFEE, tol_zero: float = TOL_CURV_ZERO,
                       tol_const: float = TOL_CURV_CONST) -> CurvatureClass:
    """Sample the domain, compute K pointwise and classify the field."""
    rng = np.random.default_rng(seed)
    xi, eta = _sample_coords(spec, n_points, rng)
    K = curvature(spec, xi, eta)
    max_abs = float(np.abs(K).max())
    mean = float(K.mean())
    std = float(K.std())
    if max_abs <= tol_zero:
        tag = "Zero"
    elif std <= tol_const:
        tag = "Constant"
    else:
        tag = "NonConstant"
    return CurvatureClass(tag, mean if tag == "Constant" else 0.0, max_abs, mean, std)


# ---------------------------------------------------------------------------
# Revolution detection

# Real recoordinatization used for the directional test in (X, Y).  This is
# the class's B-integral map except for II1, whose own map is the identity;
# there the log map linearizes the Lie metric's xi-dependence, which is the
# natural real map exhibiting rotational symmetry (e.g. g = kappa xi eta).
_XY_KIND = {"I1": "sqrt", "I2": "log", "I3": "atanexp",
            "II1": "log", "II2": "sqrt", "II3": "log"}


def _dcoord(kind, c):
    """d(coordinate)/dX evaluated at the native coordinate c (= sqrt(A))."""
    if kind == "sqrt":      # X = 2 sqrt(c)
        return np.sqrt(c)
    if kind == "log":       # X = ln c
        return c
    # X = arctan(e^c)
    return np.exp(c) + np.exp(-c)


def _directional_residuals(spec: SystemSpec, xi, eta, coords: str):
    """Normalized |dg/d(xi-eta)| and |dg/d(xi+eta)| samples (or X,Y analogue)."""
    if coords == "liouville":
        g = _metric_jet(spec, xi, eta)
        gx, gy = g.grad[0], g.grad[1]
    elif coords == "transformed":
        kind = _XY_KIND[spec.tag]
        sx = _dcoord(kind, np.asarray(xi, dtype=float))
        sy = _dcoord(kind, np.asarray(eta, dtype=float))
        fns = build_fns(spec)
        xj = Jet2.seed(np.asarray(xi, dtype=float), 0)
        ej = Jet2.seed(np.asarray(eta, dtype=float), 1)
        # transformed conformal factor g~ = g * (dxi/dX) * (deta/dY)
        gt = fns.metric(xj, ej) * _dcoord_jet(kind, xj) * _dcoord_jet(kind, ej)
        gx = gt.grad[0] * sx   # d g~ / dX
        gy = gt.grad[1] * sy   # d g~ / dY
    else:
        raise ValueError("coords must be 'liouville' or 'transformed'")
    scale = 1.0 + np.maximum(np.abs(gx), np.abs(gy))
    return np.abs(gx - gy) / scale, np.abs(gx + gy) / scale


def _dcoord_jet(kind, j: Jet2) -> Jet2:
    if kind == "sqrt":
        return j.sqrt()
    if kind == "log":
        return j
    return j.exp() + (-j).exp()


def revolution_check(spec: SystemSpec, n_points: int = 50, seed: int = 0xC0FFEE,
                     coords: str = "liouville",
                     tol: float = TOL_DIRECTIONAL) -> str:
    """Classify the metric's direction dependence: SumOnly, DiffOnly, Both or Neither.

    SumOnly means g depends only on xi+eta (the xi-eta directional
    derivative vanishes); DiffOnly the converse; Both means a constant
    metric.  With ``coords='transformed'`` the test runs on the
    recoordinatized conformal factor.
    """
    rng = np.random.default_rng(seed)
    xi, eta = _sample_coords(spec, n_points, rng)
    r_sum, r_diff = _directional_residuals(spec, xi, eta, coords)
    sum_only = float(r_sum.max()) <= tol
    diff_only = float(r_diff.max()) <= tol
    if sum_only and diff_only:
        return "Both"
    if sum_only:
        return "SumOnly"
    if diff_only:
        return "DiffOnly"
    return "Neither"


# ---------------------------------------------------------------------------
# Linear integrals


def linear_observable(spec: SystemSpec, sign: str, coords: str = "liouville") -> Observable:
    """p_xi +/- p_eta, or its transformed analogue p_X +/- p_Y."""
    s = {"plus": 1.0, "minus": -1.0}[sign]
    if coords == "liouville":
        return Observable(lambda xi, eta, p_xi, p_eta: p_xi + s * p_eta,
                          label=f"p_xi{'+' if s > 0 else '-'}p_eta")
    if coords == "transformed":
        fns = build_fns(spec)
        return Observable(lambda xi, eta, p_xi, p_eta:
                          fns.sqrtA(xi) * p_xi + s * fns.sqrtB(eta) * p_eta,
                          label=f"p_X{'+' if s > 0 else '-'}p_Y")
    if coords == "eta-only":
        return Observable(lambda xi, eta, p_xi, p_eta: p_eta + 0.0 * p_xi,
                          label="p_eta")
    if coords == "xi-only":
        return Observable(lambda xi, eta, p_xi, p_eta: p_xi + 0.0 * p_eta,
                          label="p_xi")
    raise ValueError(f"unknown coords {coords!r}")


def linear_integral_check(spec: SystemSpec, sign: str, n_points: int = 50,
                          seed: int = 0xC0FFEE,
                          coords: str = "liouville") -> float:
    """Max normalized residual of {H, p_xi +/- p_eta} over sampled points.

    A residual below ~1e-9 certifies the linear integral (whose square is
    the catalog's quadratic form).
    """
    rng = np.random.default_rng(seed)
    pts = sample_points(spec, n_points, rng, require_tilde=False)
    H = hamiltonian(spec).eval(pts)
    L = linear_observable(spec, sign, coords).eval(pts)
    br = _bracket_jets(H, L)
    return float((np.abs(br.val) / (1.0 + br.val_scale)).max())
