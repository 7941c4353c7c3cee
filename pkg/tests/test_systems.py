"""Closed forms of the six subclasses against hand-computed values."""

import numpy as np
import pytest

from superint.errors import SamplingError
from superint.jets import PhasePoint
from superint.systems import (CLASS_TAGS, SystemSpec, algebra_constants,
                              build_fns, characteristic_residual, hamiltonian,
                              integral_A, integral_B, metric_observable,
                              sample_domain, sample_points, spec_from_dict,
                              spec_to_dict, structural_pde_residual)

GENERIC = dict(kappa=1.0, lam=0.5, mu=-0.3, nu=2.0, k=0.4, ell=-0.1, m=0.2, n=1.0)


# -- build_fns -----------------------------------------------------------


def test_i1_constant_metric():
    fns = build_fns(SystemSpec("I1", nu=2.0))
    xs = np.linspace(0.2, 2.0, 7)
    for xi in xs:
        for eta in xs:
            assert fns.metric(xi, eta) == 2.0


def test_i2_metric_point_value():
    fns = build_fns(SystemSpec("I2", kappa=1.0))
    # g(1, 0) = F(1) + G(1) = 1 + 0
    assert fns.metric(1.0, 0.0) == 1.0


def test_ii1_product_metric():
    fns = build_fns(SystemSpec("II1", kappa=1.0))
    for xi in (0.5, 1.0, 1.7):
        for eta in (0.6, 1.2):
            assert fns.metric(xi, eta) == xi * eta


# -- Hamiltonian ---------------------------------------------------------


def test_h_free_strip():
    H = hamiltonian(SystemSpec("I1", nu=2.0))
    assert H.value(PhasePoint(1.0, 0.5, 2.0, 3.0)) == 3.0


def test_h_ii1_point_value():
    H = hamiltonian(SystemSpec("II1", kappa=1.0, k=1.0))
    assert H.value(PhasePoint(1.0, 2.0, 1.0, 1.0)) == 1.5


def test_h_i2_unit_metric_line():
    H = hamiltonian(SystemSpec("I2", kappa=1.0))
    for pxi, peta in ((0.3, -1.2), (1.0, 1.0)):
        assert np.isclose(H.value(PhasePoint(1.0, 0.0, pxi, peta)), pxi * peta)


# -- integrals -----------------------------------------------------------


def test_a_free_case():
    A = integral_A(SystemSpec("I1", nu=2.0))
    assert A.value(PhasePoint(1.0, 0.5, 2.0, 3.0)) == 13.0


def test_a_ii1_point_value():
    A = integral_A(SystemSpec("II1", kappa=1.0, k=1.0))
    assert A.value(PhasePoint(1.0, 2.0, 1.0, 1.0)) == -1.0


def _b_ii1_oracle(kappa, lam, mu, nu, k, ell, m, n, xi, eta, pxi, peta):
    """Independent assembly of the II1 second integral from its printed
    quadratic tilde polynomials (no shared code with the package path)."""
    Ft = lambda u: kappa * u**2 / 4 + (lam + mu) * u / 2 + nu / 2
    Gt = lambda v: -kappa * v**2 / 4 + (lam - mu) * v / 2 + nu / 2
    ft = lambda u: k * u**2 / 4 + (ell + m) * u / 2 + n / 2
    gt = lambda v: -k * v**2 / 4 + (ell - m) * v / 2 + n / 2
    u, v = xi + eta, xi - eta
    gm = Ft(u) + Gt(v)
    return (pxi**2 + peta**2 - 2 * pxi * peta * (Ft(u) - Gt(v)) / gm
            + 4 * (ft(u) * Gt(v) - gt(v) * Ft(u)) / gm)


def test_b_ii1_pinned_value():
    B = integral_B(SystemSpec("II1", kappa=1.0, k=1.0))
    got = float(B.value(PhasePoint(1.0, 2.0, 1.0, 1.0)))
    assert got == pytest.approx(-0.5, abs=1e-14)
    oracle = _b_ii1_oracle(1, 0, 0, 0, 1, 0, 0, 0, 1.0, 2.0, 1.0, 1.0)
    assert got == pytest.approx(oracle, abs=1e-14)


def test_b_ii1_oracle_random_points():
    spec = SystemSpec("II1", **GENERIC)
    B = integral_B(spec)
    rng = np.random.default_rng(3)
    pts = sample_points(spec, 50, rng)
    got = B.value(pts)
    want = _b_ii1_oracle(*spec.metric_params, *spec.potential_params,
                         pts.xi, pts.eta, pts.p_xi, pts.p_eta)
    assert np.abs(got - want).max() <= 1e-12 * (1 + np.abs(want).max())


def test_b_i2_no_momentum_free_term():
    B = integral_B(SystemSpec("I2", **dict(GENERIC, k=0.0, ell=0.0, m=0.0, n=0.0)))
    rng = np.random.default_rng(4)
    xi, eta = rng.uniform(0.4, 1.8, 20), rng.uniform(0.4, 1.8, 20)
    vals = B.value(PhasePoint(xi, eta, np.zeros(20), np.zeros(20)))
    assert np.abs(vals).max() <= 1e-12


def test_tilde_metric_consistency():
    # F~(X+Y) + G~(X-Y) must equal g * sqrt(A(xi) B(eta)) identically
    rng = np.random.default_rng(11)
    for tag in CLASS_TAGS:
        spec = SystemSpec(tag, **GENERIC)
        fns = build_fns(spec)
        pts = sample_points(spec, 40, rng)
        X, Y = fns.X_of_xi(pts.xi), fns.Y_of_eta(pts.eta)
        gt = fns.F_tilde(X + Y) + fns.G_tilde(X - Y)
        want = fns.metric(pts.xi, pts.eta) * fns.sqrtA(pts.xi) * fns.sqrtB(pts.eta)
        assert np.abs(gt - want).max() <= 1e-9 * (1 + np.abs(want).max()), tag


# -- characteristic equation ---------------------------------------------


def test_characteristic_examples():
    assert characteristic_residual(SystemSpec("I1"), 0.7) == 0.0
    assert characteristic_residual(SystemSpec("I2"), 0.7) == 0.0


def test_characteristic_i3_constant_a_derivation():
    # solve the characteristic equation for the inhomogeneous constant and
    # confirm xi-independence: it comes out 0 for the printed alpha, gamma
    fns = build_fns(SystemSpec("I3"))
    alpha, gamma, a = fns.char_constants
    xs = np.array([-1.0, 0.0, 0.7] + list(np.linspace(-1.2, 1.2, 17)))
    from superint.systems import _univariate_jet

    A, A1, _ = _univariate_jet(fns.A_of_xi, xs)
    derived = -(6.0 * A1**2 - 3.0 * gamma * A**2 - 3.0 * alpha * A)
    assert np.abs(derived.mean() - a) <= 1e-10
    assert derived.std() <= 1e-10


@pytest.mark.parametrize("tag", CLASS_TAGS)
def test_characteristic_residual_sweep(tag):
    rng = np.random.default_rng(21)
    for _ in range(50):
        spec = SystemSpec(tag, *rng.uniform(-2, 2, 8))
        try:
            pts = sample_points(spec, 20, rng)
        except SamplingError:
            continue
        r = np.abs(characteristic_residual(spec, pts.xi))
        scale = 1.0 + np.abs(pts.xi).max()
        assert (r / scale).max() <= 1e-10


# -- structural PDEs ------------------------------------------------------


def test_pde_i1_generic_point():
    spec = SystemSpec("I1", kappa=1.0, lam=0.5, mu=-0.3, nu=2.0)
    r = structural_pde_residual(spec, "metric_pair", 1.2, 0.4)
    assert float(r) <= 1e-9


def test_pde_zero_potential_exact():
    spec = SystemSpec("I1", kappa=1.0, lam=0.5, mu=-0.3, nu=2.0)
    r = structural_pde_residual(spec, "potential_pair", 1.2, 0.4)
    assert float(r) == 0.0


def test_pde_ii1_linear_forms_exact():
    spec = SystemSpec("II1", **GENERIC)
    assert float(structural_pde_residual(spec, "metric_pair", 1.0, 1.4)) == 0.0


@pytest.mark.parametrize("tag", CLASS_TAGS)
def test_pde_sweep(tag):
    rng = np.random.default_rng(31)
    for _ in range(10):
        spec = SystemSpec(tag, *rng.uniform(-2, 2, 8))
        try:
            pts = sample_points(spec, 20, rng)
        except SamplingError:
            continue
        for which in ("metric_pair", "potential_pair"):
            r = structural_pde_residual(spec, which, pts.xi, pts.eta)
            assert r.max() <= 1e-9, (tag, which)


# -- algebra constants ----------------------------------------------------


def test_constants_i1_delta():
    con = algebra_constants(SystemSpec("I1", kappa=1.0), 2.0)
    assert con.delta == 32.0


def test_constants_ii3_shape():
    con = algebra_constants(SystemSpec("II3", **GENERIC), 1.3)
    assert (con.alpha, con.gamma, con.a) == (8.0, 0.0, 0.0)
    assert con.delta == 0.0 and con.epsilon == 0.0


def test_constants_i3_bare():
    con = algebra_constants(SystemSpec("I3"), 0.9)
    assert (con.alpha, con.gamma) == (-32.0, 8.0)
    for name in ("a", "delta", "epsilon", "zeta", "d", "z", "K_casimir"):
        assert getattr(con, name) == 0.0
    assert con.beta == 0.0


# -- shift redundancy ------------------------------------------------------


@pytest.mark.parametrize("tag", CLASS_TAGS)
def test_shift_redundancy(tag):
    from superint.poisson import bracket, verify_algebra

    c = 0.7
    base = SystemSpec(tag, **GENERIC)
    shifted = SystemSpec(tag, kappa=base.kappa, lam=base.lam, mu=base.mu,
                         nu=base.nu, k=base.k + c * base.kappa,
                         ell=base.ell + c * base.lam, m=base.m + c * base.mu,
                         n=base.n + c * base.nu)
    rng = np.random.default_rng(41)
    pts = sample_points(base, 60, rng)
    dH = hamiltonian(shifted).value(pts) - hamiltonian(base).value(pts)
    assert np.abs(dH - c).max() <= 1e-10
    # A and B themselves are invariant under the shift, so every bracket is
    dA = integral_A(shifted).value(pts) - integral_A(base).value(pts)
    dB = integral_B(shifted).value(pts) - integral_B(base).value(pts)
    scale_A = 1.0 + np.abs(integral_A(base).value(pts)).max()
    scale_B = 1.0 + np.abs(integral_B(base).value(pts)).max()
    assert np.abs(dA).max() <= 1e-10 * scale_A
    assert np.abs(dB).max() <= 1e-10 * scale_B
    dC = (bracket(integral_A(shifted), integral_B(shifted), pts).val
          - bracket(integral_A(base), integral_B(base), pts).val)
    assert np.abs(dC).max() <= 1e-10 * (1.0 + np.abs(dC).max() + scale_A * scale_B)
    rep = verify_algebra(shifted, n_points=60, seed=99)
    assert rep.passed and not rep.correction_applied


# -- metric separability (same code path, bit-consistent) ------------------


def test_metric_separability_bitwise():
    rng = np.random.default_rng(51)
    for tag in CLASS_TAGS:
        spec = SystemSpec(tag, **GENERIC)
        fns = build_fns(spec)
        pts = sample_points(spec, 30, rng)
        g = metric_observable(spec).value(pts)
        if spec.is_class_one():
            again = fns.F(pts.xi + pts.eta) + fns.G(pts.xi - pts.eta)
        else:
            again = fns.F(pts.eta) * pts.xi + fns.G(pts.eta)
        assert np.array_equal(g, again)


# -- serialization ---------------------------------------------------------


def test_spec_roundtrip():
    spec = SystemSpec("II2", **GENERIC)
    doc = spec_to_dict(spec)
    assert set(doc) == {"class", "kappa", "lambda", "mu", "nu", "k", "ell", "m", "n"}
    assert doc["class"] == "II2" and doc["lambda"] == 0.5
    assert spec_from_dict(doc) == spec


def test_spec_from_dict_rejects_bad_docs():
    doc = spec_to_dict(SystemSpec("I1", **GENERIC))
    with pytest.raises(ValueError):
        spec_from_dict({k: v for k, v in doc.items() if k != "mu"})
    with pytest.raises(ValueError):
        spec_from_dict({**doc, "extra": 1.0})
    with pytest.raises(ValueError):
        SystemSpec("I9")


# -- sampling ---------------------------------------------------------------


def test_degenerate_spec_sampling_error():
    with pytest.raises(SamplingError):
        sample_points(SystemSpec("I1"), 50, np.random.default_rng(0))


def test_samples_respect_domain():
    spec = SystemSpec("I1", **GENERIC)
    dom = sample_domain(spec)
    pts = sample_points(spec, 200, np.random.default_rng(7))
    assert np.abs(pts.xi - pts.eta).min() >= 0.15
    fns = build_fns(spec)
    assert np.abs(fns.metric(pts.xi, pts.eta)).min() >= dom.min_abs_g
    assert pts.p_xi.min() >= -2.0 and pts.p_xi.max() <= 2.0
