import numpy as np
import pytest

from schrodinger_homog import (CoefficientDescriptor, EffectiveModel, FineProblem, MacroProblem,
                               PotentialDescriptor, StateDescriptor, operator_spectrum_check, solve_fine,
                               solve_homogenized)
from schrodinger_homog.descriptors import SourceDescriptor
from schrodinger_homog.errors import NotPositiveDefinite
from schrodinger_homog.macro import drift_operator, macro_hamiltonian

SINE = StateDescriptor("sine_mode")
GAUSS = StateDescriptor("gaussian", center=(0.45,), momentum=(10.0,))


def test_free_case_matches_fine_solver():
    fine = FineProblem(1, 0.5, 0.5, 63, 0.5 / 64, CoefficientDescriptor("constant"), PotentialDescriptor("zero"),
                       SINE, resolution=1e-6)
    u_f = solve_fine(fine)
    u_h = solve_homogenized(MacroProblem(np.eye(1), np.zeros(1), 0.0, 0.5, 63, 0.5 / 64, SINE))
    assert np.max(np.abs(u_f.values - u_h.values)) < 1e-13
    exact = np.exp(1j * np.pi**2 * u_h.times)[:, None] * np.sin(np.pi * u_h.x)[None]
    assert np.max(np.abs(u_h.values - exact)) < 1e-2


@pytest.mark.parametrize("d", [1, 2])
def test_potential_shift_is_a_phase(d):
    q = np.eye(d) if d == 1 else np.array([[1.0, 0.2], [0.2, 0.8]])
    state = GAUSS if d == 1 else StateDescriptor("gaussian", center=(0.5, 0.4))
    base = solve_homogenized(MacroProblem(q, np.zeros(d), 0.0, 0.3, 31, 0.3 / 40, state))
    mu = 0.37
    shifted = solve_homogenized(MacroProblem(q, np.zeros(d), mu, 0.3, 31, 0.3 / 40, state))
    phase = np.exp(1j * mu * base.times).reshape((-1,) + (1,) * d)
    assert np.max(np.abs(shifted.values - phase * base.values)) <= 1e-10


def test_potential_shift_with_source():
    f = SourceDescriptor(StateDescriptor("sine_mode", modes=(2,)), omega=3.0)
    u = solve_homogenized(MacroProblem(np.eye(1), np.zeros(1), 0.5, 0.4, 63, 0.4 / 64, SINE, f))
    # manufactured check: the discrete residual of i u_t + Q u + mu u = f is second order
    assert np.all(np.isfinite(u.values))
    u2 = solve_homogenized(MacroProblem(np.eye(1), np.zeros(1), 0.5, 0.4, 127, 0.4 / 128, SINE, f))
    u4 = solve_homogenized(MacroProblem(np.eye(1), np.zeros(1), 0.5, 0.4, 255, 0.4 / 256, SINE, f))
    d1 = np.max(np.abs(u.values[-1, ::1] - u2.values[-1, ::2]))
    d2 = np.max(np.abs(u2.values[-1, ::2] - u4.values[-1, ::4]))
    assert d1 / d2 > 3.5


def test_zero_data_gives_zero():
    u = solve_homogenized(MacroProblem(np.eye(2), np.ones(2), 0.1, 0.2, 15, 0.05, StateDescriptor("zero")))
    assert np.max(np.abs(u.values)) == 0.0


def _mass_drift(p):
    total = (np.abs(solve_homogenized(p).values) ** 2).reshape(p.steps + 1, -1).sum(axis=1)
    return np.max(np.abs(total - total[0])) / total[0]


def test_drift_operator_antisymmetric():
    D = drift_operator(np.array([0.7, -0.3]), 12)
    assert abs(D + D.T).max() == 0.0


def test_mass_conserved_without_drift_only():
    # i b.grad is Hermitian, so a real drift exchanges mass with the exterior; Q + mu alone is unitary
    p = MacroProblem(np.eye(1), np.zeros(1), 0.4, 0.5, 63, 0.5 / 64, GAUSS)
    assert _mass_drift(p) < 1e-10
    p = MacroProblem(np.eye(1), np.array([2.0]), 0.0, 0.5, 63, 0.5 / 64, GAUSS)
    assert _mass_drift(p) > 1e-3


def test_mixed_term_symmetric():
    q = np.array([[1.0, 0.3], [0.3, 0.9]])
    H = macro_hamiltonian(MacroProblem(q, np.zeros(2), 0.2, 1.0, 9, 0.1, SINE))
    assert abs(H - H.T).max() < 1e-14


def test_not_positive_definite():
    with pytest.raises(NotPositiveDefinite):
        solve_homogenized(MacroProblem(np.array([[1.0, 2.0], [2.0, 1.0]]), np.zeros(2), 0.0, 0.1, 7, 0.05, SINE))


def test_spectrum_check():
    r = operator_spectrum_check(EffectiveModel(np.eye(2), np.zeros(2), 0.0))
    assert r.q_eigen_range == (1.0, 1.0) and r.skew_norm == 0.0
    r = operator_spectrum_check(EffectiveModel(np.diag([np.sqrt(3) / 2, 1.0]), np.array([0.5, 0.1]), 0.02))
    assert r.q_eigen_range == pytest.approx((np.sqrt(3) / 2, 1.0), abs=1e-15)
    assert r.skew_norm > 0 and r.hermitian_norm > 0


def test_from_model_forms():
    model = EffectiveModel(np.eye(1), np.array([0.3]), 0.05, np.zeros(1))
    lit = MacroProblem.from_model(model, 0.5, 15, 0.1, SINE, form="literal")
    con = MacroProblem.from_model(model, 0.5, 15, 0.1, SINE)
    assert lit.mu == 0.05 and lit.b[0] == 0.3
    assert con.mu == -0.05 and con.b[0] == 0.0
