import math

import numpy as np
import pytest

from algthermo.ensemble import LN2, EnsembleParams, gibbs_stats
from algthermo.errors import IllConditionedError, RegionError, ValidationError
from algthermo.thermo import (
    LoopPath,
    conjugates,
    constrained_partial,
    cycle_integrals,
    fundamental_residual,
    lnZ_derivatives,
    maxwell_residual,
    parse_loop_spec,
    quantity,
    stoddard_loop,
    trace_isoline,
)


@pytest.fixture(scope="module")
def stoddard(c14):
    return stoddard_loop(c14, EnsembleParams(0.6, 1.0, 0.2), beta_high=1.0, gamma_low=0.8)


def test_conjugates():
    c = conjugates(EnsembleParams(1, LN2, 0))
    assert (c.T, c.P, c.mu) == (1.0, LN2, 0.0)
    c = conjugates(EnsembleParams(2, 2, 2))
    assert (c.T, c.P, c.mu) == (0.5, 1.0, -1.0)
    with pytest.raises(RegionError):
        conjugates(EnsembleParams(0, LN2, 0))


def test_lnz_derivatives_match_moments(c6):
    params = EnsembleParams(0.5, 1.0, 0.1)
    st = gibbs_stats(c6, params)
    d = lnZ_derivatives(c6, params, h=1e-4)
    assert np.all(np.abs(d.grad + st.means) <= 1e-6 * (1 + np.abs(st.means)))
    assert d.hess[0, 0] >= 0
    assert d.hess[0, 0] == pytest.approx(st.var_E, rel=1e-4)
    assert d.hess[0, 1] == d.hess[1, 0]
    assert d.hess[0, 1] == pytest.approx(st.cov_EV, rel=1e-4)
    assert np.array_equal(d.hess, d.hess.T)


def test_lnz_stencil_must_stay_certified(c6):
    with pytest.raises(RegionError):
        lnZ_derivatives(c6, EnsembleParams(0.5, LN2, 0.1))
    with pytest.raises(RegionError):
        lnZ_derivatives(c6, EnsembleParams(0.5, 1.0, 0.0))


def test_constrained_partial_examples(c14):
    p = EnsembleParams(0.7, 1.2, 0.2)
    assert constrained_partial("S", "E", ("V", "N"), c14, p).value == pytest.approx(0.7, rel=1e-3)
    assert constrained_partial("E", "V", ("S", "N"), c14, p).value == pytest.approx(-1.2 / 0.7, rel=1e-3)
    assert constrained_partial("E", "N", ("S", "V"), c14, p).value == pytest.approx(-0.2 / 0.7, rel=1e-3)
    assert constrained_partial("E", "S", ("V", "N"), c14, p).value == pytest.approx(1 / 0.7, rel=1e-3)
    dT = constrained_partial("T", "V", ("S", "N"), c14, p).value
    dP = constrained_partial("P", "S", ("V", "N"), c14, p).value
    assert dT == pytest.approx(-dP, rel=1e-3)
    assert maxwell_residual(dT, dP) <= 1e-3


def test_remaining_entropy_derivatives(c14):
    p = EnsembleParams(0.9, 1.1, 0.3)
    assert constrained_partial("S", "V", ("E", "N"), c14, p).value == pytest.approx(1.1, rel=1e-3)
    assert constrained_partial("S", "N", ("E", "V"), c14, p).value == pytest.approx(0.3, rel=1e-3)


def test_constrained_partial_detects_singular_system(c6):
    # three records span only a plane of (E, V, N): the 3x3 system is singular
    with pytest.raises(IllConditionedError) as exc:
        constrained_partial("S", "E", ("V", "N"), c6, EnsembleParams(0.7, 1.2, 0.2))
    assert exc.value.condition_number > 1e8


def test_constrained_partial_argument_checks(c14):
    p = EnsembleParams(0.7, 1.2, 0.2)
    with pytest.raises(ValidationError):
        constrained_partial("S", "E", ("E", "N"), c14, p)
    with pytest.raises(ValidationError):
        constrained_partial("Q", "E", ("V", "N"), c14, p)
    with pytest.raises(RegionError):
        constrained_partial("S", "E", ("V", "N"), c14, EnsembleParams(0.0, 1.2, 0.2))


@pytest.mark.parametrize("direction", [(1, 0, 0), (0, 1, 0), (0, 0, 1)])
def test_fundamental_relation_axes(c14, direction):
    assert fundamental_residual(c14, EnsembleParams(0.8, 1.0, 0.2), direction, h=1e-4) <= 1e-3


def test_fundamental_relation_random_directions(c14):
    worst = 0.0
    for seed in range(10):
        d = np.random.default_rng(seed).standard_normal(3)
        worst = max(worst, fundamental_residual(c14, EnsembleParams(0.8, 1.0, 0.2), d / np.linalg.norm(d)))
    assert worst <= 1e-3
    with pytest.raises(ValidationError):
        fundamental_residual(c14, EnsembleParams(0.8, 1.0, 0.2), (0, 0, 0))


def test_zero_length_isoline(c14):
    start = EnsembleParams(0.6, 1.0, 0.2)
    assert trace_isoline(c14, "V", start, "beta", 0.6, step=0.01) == [start]


@pytest.mark.parametrize("hold,drive,target", [("V", "beta", 0.9), ("S", "gamma", 0.85)])
def test_isoline_holds_quantities(c14, hold, drive, target):
    start = EnsembleParams(0.6, 1.0, 0.2)
    path = trace_isoline(c14, hold, start, drive, target, step=0.02)
    h0 = quantity(c14, hold, start.as_array())
    n0 = quantity(c14, "N", start.as_array())
    for p in path:
        assert abs(quantity(c14, hold, p.as_array()) - h0) <= 1e-8 * abs(h0)
        assert abs(quantity(c14, "N", p.as_array()) - n0) <= 1e-8 * abs(n0)
    assert getattr(path[-1], drive) == target


def test_iso_v_path_is_monotone_in_beta(c14):
    path = trace_isoline(c14, "V", EnsembleParams(0.6, 1.0, 0.2), "beta", 1.0, step=0.05)
    betas = [p.beta for p in path]
    assert len(path) == 9
    assert all(b2 > b1 for b1, b2 in zip(betas, betas[1:]))


def test_isoline_leaving_region(c14):
    with pytest.raises(RegionError):
        trace_isoline(c14, "V", EnsembleParams(0.6, 1.0, 0.2), "beta", -0.5, step=0.1)
    with pytest.raises(ValidationError):
        trace_isoline(c14, "E", EnsembleParams(0.6, 1.0, 0.2), "beta", 0.7, step=0.1)


def test_degenerate_loop(c14):
    v = EnsembleParams(0.7, 1.0, 0.2)
    rep = cycle_integrals(c14, LoopPath([v, v, v], ["parametric"] * 3), refinement=8)
    assert rep.delta_Q == 0 and rep.work_term == 0 and rep.mu_term == 0


def test_parametric_reversal_is_exact(c14):
    loop = LoopPath(
        [EnsembleParams(0.6, 1.0, 0.2), EnsembleParams(0.9, 1.1, 0.3), EnsembleParams(0.7, 1.3, 0.1)],
        ["parametric"] * 3,
    )
    fwd = cycle_integrals(c14, loop, refinement=16)
    back = cycle_integrals(c14, loop.reversed(), refinement=16)
    assert back.delta_Q == -fwd.delta_Q
    assert back.work_term == -fwd.work_term
    assert back.mu_term == -fwd.mu_term
    assert fwd.delta_Q != 0


def test_parametric_loop_satisfies_cycle_identity(c14):
    loop = LoopPath(
        [EnsembleParams(0.6, 1.0, 0.2), EnsembleParams(0.9, 1.1, 0.3), EnsembleParams(0.7, 1.3, 0.1)],
        ["parametric"] * 3,
    )
    rep = cycle_integrals(c14, loop, refinement=64)
    assert rep.closure_residual <= 1e-3 * abs(rep.delta_Q)
    assert abs(rep.mu_term) > 0


def test_stoddard_loop_closes(c14, stoddard):
    rep = cycle_integrals(c14, stoddard, refinement=64)
    assert rep.closure_residual <= 1e-3 * abs(rep.delta_Q)
    assert abs(rep.mu_term) <= 1e-9 * abs(rep.delta_Q)
    assert rep.work_term == pytest.approx(rep.delta_Q, rel=1e-3)
    back = cycle_integrals(c14, stoddard.reversed(), refinement=64)
    assert back.delta_Q == pytest.approx(-rep.delta_Q, rel=1e-9)
    assert len(rep.segments) == 4 * 64


def test_loop_validation(c14, stoddard):
    with pytest.raises(ValidationError):
        LoopPath([EnsembleParams(0.6, 1.0, 0.2)] * 2, ["parametric"] * 2)
    with pytest.raises(RegionError):
        LoopPath([EnsembleParams(0.6, 0.5, 0.2)] * 3, ["parametric"] * 3)
    with pytest.raises(ValidationError):
        LoopPath([EnsembleParams(0.6, 1.0, 0.2)] * 3, ["iso_Q"] * 3)
    broken = LoopPath(stoddard.vertices[:3] + [EnsembleParams(0.9, 0.9, 0.1)], stoddard.legs)
    with pytest.raises(ValidationError, match="does not reach"):
        cycle_integrals(c14, broken, refinement=4)


def test_parse_loop_spec(c14, stoddard):
    v1, v2 = stoddard.vertices[1], stoddard.vertices[2]
    text = f"""
    # Stoddard-style engine
    START 0.6 1.0 0.2
    ISO_V {v1.beta!r}
    ISO_S {v2.gamma!r}
    ISO_V close
    ISO_S close
    """
    loop = parse_loop_spec(text, c14)
    assert loop.legs == ["iso_V", "iso_S", "iso_V", "iso_S"]
    for a, b in zip(loop.vertices, stoddard.vertices):
        assert np.allclose(a.as_array(), b.as_array(), rtol=1e-7)


def test_parse_loop_spec_errors(c14):
    with pytest.raises(ValidationError, match="START"):
        parse_loop_spec("ISO_V 1.0", c14)
    with pytest.raises(ValidationError, match="open"):
        parse_loop_spec("START 0.6 1.0 0.2\nISO_V 0.9\nISO_S 0.9\n", c14)
    with pytest.raises(ValidationError, match="line 2"):
        parse_loop_spec("START 0.6 1.0 0.2\nSPIN 3\n", c14)
    triangle = parse_loop_spec("START 0.6 1.0 0.2\nPARAM 0.9 1.1 0.3\nPARAM 0.7 1.3 0.1\nPARAM close\n", c14)
    assert len(triangle.vertices) == 3 and math.isclose(triangle.vertices[2].gamma, 1.3)
