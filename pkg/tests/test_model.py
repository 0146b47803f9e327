import dataclasses
import math

import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from birkhoff_hessian.model import (
    builtin_names,
    builtin_problem,
    check_derivatives,
    endpoint_eval,
    hamiltonian_eval,
    zero_problem,
)


def test_hamiltonian_tp1_example():
    h = hamiltonian_eval(builtin_problem("tp1"), 2.0, 1.0, 3.0)
    assert (h.H, h.H_x, h.H_u, h.H_uu, h.H_lamx, h.H_lamu) == (16.0, -2.0, 12.0, 4.0, -1.0, 6.0)
    assert h.H_lam == 8.0 and h.H_xx == 0.0 and h.H_xu == 0.0


def test_hamiltonian_tp2_example():
    h = hamiltonian_eval(builtin_problem("tp2"), 1.0, 1.0, 0.0)
    assert (h.H, h.H_x, h.H_xx, h.H_uu) == (-1.0, -3.0, -6.0, 2.0)


@pytest.mark.parametrize("name", builtin_names())
def test_hamiltonian_zero_costate(name):
    p = builtin_problem(name)
    x, u = np.array([0.4, 1.3]), np.array([-0.2, 0.7])
    h = hamiltonian_eval(p, 0.0, x, u)
    for fld in ("H", "H_x", "H_u", "H_xx", "H_xu", "H_uu"):
        np.testing.assert_array_equal(getattr(h, fld), 0.0)
    np.testing.assert_array_equal(h.H_lamx, p.f_x(x, u))
    np.testing.assert_array_equal(h.H_lamu, p.f_u(x, u))
    np.testing.assert_array_equal(h.H_lam, p.f(x, u))


def test_endpoint_tp1_example():
    ep = endpoint_eval(builtin_problem("tp1"), 0.5, 1.0, 2.0)
    assert (ep.Ebar, ep.Ebar_a, ep.Ebar_b, ep.Ebar_anu, ep.Ebar_bnu) == (2.0, 0.5, 1.0, 1.0, 0.0)
    assert ep.Ebar_aa == ep.Ebar_ab == ep.Ebar_bb == 0.0
    assert ep.Ebar_nunu == 0.0


def test_endpoint_quadratic_cost():
    p = dataclasses.replace(
        zero_problem(),
        E=lambda a, b: b**2,
        E_b=lambda a, b: 2.0 * b,
        E_bb=lambda a, b: 2.0,
    )
    ep = endpoint_eval(p, 0.0, 0.0, 3.0)
    assert ep.Ebar_b == 6.0 and ep.Ebar_bb == 2.0


@pytest.mark.parametrize("name", builtin_names())
def test_endpoint_at_zero_multiplier(name):
    p = builtin_problem(name)
    ep = endpoint_eval(p, 0.0, 0.7, -0.3)
    assert ep.Ebar == p.E(0.7, -0.3)
    assert ep.Ebar_nu == p.e(0.7, -0.3)


@settings(max_examples=50, deadline=None)
@given(
    name=st.sampled_from(builtin_names()),
    c=st.floats(-10, 10),
    lam=st.floats(-3, 3),
    x=st.floats(0.2, 2),
    u=st.floats(-2, 2),
)
def test_hamiltonian_linear_in_costate(name, c, lam, x, u):
    p = builtin_problem(name)
    a = hamiltonian_eval(p, c * lam, x, u).H
    b = hamiltonian_eval(p, lam, x, u).H
    assert a == pytest.approx(c * b, rel=1e-12, abs=1e-12)


@settings(max_examples=50, deadline=None)
@given(name=st.sampled_from(builtin_names()), nu=st.floats(-5, 5), a=st.floats(-2, 2), b=st.floats(-2, 2))
def test_endpoint_affine_in_multiplier(name, nu, a, b):
    p = builtin_problem(name)
    d = endpoint_eval(p, nu, a, b).Ebar - endpoint_eval(p, 0.0, a, b).Ebar
    assert d == pytest.approx(nu * float(p.e(a, b)), rel=1e-12, abs=1e-12)


@pytest.mark.parametrize("name", builtin_names())
def test_builtin_derivatives_consistent(name):
    report = check_derivatives(builtin_problem(name))
    assert max(report.values()) <= 1e-6, report


def test_linear_constraint_second_derivatives_exact():
    report = check_derivatives(builtin_problem("tp1"))
    assert report["e_aa"] == report["e_ab"] == report["e_bb"] == 0.0


def test_injected_defect_is_flagged():
    p = builtin_problem("tp2")
    bad = dataclasses.replace(p, f_x=lambda x, u: 1.1 * p.f_x(x, u))
    report = check_derivatives(bad)
    # |1.1 d - d| / max(1, |d|) = 0.1 wherever |d| >= 1
    assert report["f_x"] == pytest.approx(0.1, abs=2e-3)
    assert report["f_u"] <= 1e-6


def test_check_derivatives_needs_enough_points():
    with pytest.raises(ValueError):
        check_derivatives(builtin_problem("tp1"), n_points=5)


def test_unknown_problem():
    with pytest.raises(LookupError):
        builtin_problem("tp9")


def test_frozen_analytic_values():
    assert builtin_problem("tp1").analytic.xb == pytest.approx(0.1353353, abs=1e-7)
    assert builtin_problem("tp2").analytic.lam_a == pytest.approx(0.0894427, abs=1e-7)
    assert builtin_problem("tp3").analytic is None


def _symbolic_solution(name):
    t = sp.Symbol("t")
    if name == "tp1":
        x, lam, u = sp.exp(-(t + 1)), sp.exp(t - 1), sp.Integer(0)
        f = -x + u**2
    else:
        x, lam, u = (3 + 2 * t) ** sp.Rational(-1, 2), ((3 + 2 * t) / 5) ** sp.Rational(3, 2), sp.Integer(0)
        f = -(x**3) + u**2
    X, U = sp.symbols("X U")
    fsym = {"tp1": -X + U**2, "tp2": -(X**3) + U**2}[name]
    H_x = lam * sp.diff(fsym, X).subs({X: x, U: u})
    H_u = lam * sp.diff(fsym, U).subs({X: x, U: u})
    return t, sp.diff(x, t) - f, sp.diff(lam, t) + H_x, H_u, x, lam


@pytest.mark.parametrize("name", ["tp1", "tp2"])
def test_analytic_solution_by_symbolic_substitution(name):
    t, state_res, adj_res, H_u, x, lam = _symbolic_solution(name)
    assert sp.simplify(state_res) == 0
    assert sp.simplify(adj_res) == 0
    assert sp.simplify(H_u) == 0
    sol = builtin_problem(name).analytic
    taus = np.linspace(-1, 1, 100)
    fx = sp.lambdify(t, x)
    fl = sp.lambdify(t, lam)
    np.testing.assert_allclose(sol.x(taus), fx(taus), rtol=1e-14)
    np.testing.assert_allclose(sol.lam(taus), fl(taus), rtol=1e-14)
    # numeric pointwise check through the package's own callables
    p = builtin_problem(name)
    h = hamiltonian_eval(p, sol.lam(taus), sol.x(taus), sol.u(taus))
    assert np.max(np.abs(sol.xdot(taus) - h.H_lam)) <= 1e-12
    assert np.max(np.abs(sol.lamdot(taus) + h.H_x)) <= 1e-12
    assert np.max(np.abs(h.H_u)) <= 1e-12


@pytest.mark.parametrize("name", ["tp1", "tp2"])
def test_transversality(name):
    p = builtin_problem(name)
    s = p.analytic
    ep = endpoint_eval(p, s.nu, s.xa, s.xb)
    assert s.lam_a == pytest.approx(-ep.Ebar_a, abs=1e-15)
    assert s.lam_b == pytest.approx(ep.Ebar_b, abs=1e-15)
    assert ep.Ebar_nu == pytest.approx(0.0, abs=1e-15)
    assert float(s.lam(-1.0)) == pytest.approx(s.lam_a, rel=1e-14)
    assert float(s.lam(1.0)) == pytest.approx(s.lam_b, rel=1e-14)
    assert float(s.x(1.0)) == pytest.approx(s.xb, rel=1e-14)
    assert s.xb == pytest.approx(math.exp(-2.0) if name == "tp1" else 5**-0.5, rel=1e-15)


@pytest.mark.parametrize("name", ["tp1", "tp2"])
def test_legendre_clebsch(name):
    p = builtin_problem(name)
    s = p.analytic
    taus = np.linspace(-1, 1, 201)
    h = hamiltonian_eval(p, s.lam(taus), s.x(taus), s.u(taus))
    assert np.all(h.H_uu > 0)


def test_zero_problem_is_identically_zero():
    p = zero_problem()
    h = hamiltonian_eval(p, 1.3, -0.4, 2.0)
    assert all(float(getattr(h, f.name)) == 0.0 for f in dataclasses.fields(h))
