"""Thermodynamic calculus on a truncated Gibbs family.

The records of a corpus are treated as the complete set of microstates, so
every identity below holds exactly and numerical error comes only from
finite differences, Newton tolerances and quadrature.

Coordinates are ``theta = (beta, gamma, delta)``. Derived quantities are
``T = 1/beta``, ``P = gamma/beta``, ``mu = -delta/beta`` and the ensemble means
``E``, ``V``, ``N`` with entropy ``S`` (nats).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .ensemble import EnsembleParams, gibbs_stats, ln_z_trunc
from .enumeration import CorpusSnapshot
from .errors import ConvergenceError, IllConditionedError, RegionError, ValidationError

QUANTITIES = ("S", "E", "V", "N", "T", "P", "mu")
COORDS = ("beta", "gamma", "delta")
MAX_CONDITION = 1e8


@dataclass(frozen=True)
class ConjugateReadout:
    T: float
    P: float
    mu: float


def conjugates(params: EnsembleParams) -> ConjugateReadout:
    if params.beta == 0:
        raise RegionError("beta = 0 is the infinite-temperature limit; T, P and mu are undefined")
    return ConjugateReadout(T=1.0 / params.beta, P=params.gamma / params.beta, mu=-params.delta / params.beta)


def fd_step(x: float, h: float | None = None) -> float:
    return h if h is not None else 1e-4 * max(1.0, abs(x))


def _require_interior(corpus, theta, need_beta=False):
    p = EnsembleParams.from_array(theta)
    if not p.certified_region:
        raise RegionError(f"point {tuple(theta)} leaves the certified region (gamma >= ln 2, beta, delta >= 0)")
    if need_beta and p.beta <= 0:
        raise RegionError(f"point {tuple(theta)} needs beta > 0")
    return p


def quantities(corpus: CorpusSnapshot, params: EnsembleParams) -> dict[str, float]:
    """All of ``S, E, V, N, T, P, mu`` at one point (``T, P, mu`` need ``beta > 0``)."""
    st = gibbs_stats(corpus, params)
    out = {"S": st.entropy_S, "E": st.mean_E, "V": st.mean_V, "N": st.mean_N}
    if params.beta > 0:
        c = conjugates(params)
        out.update(T=c.T, P=c.P, mu=c.mu)
    return out


def quantity(corpus: CorpusSnapshot, name: str, theta) -> float:
    if name not in QUANTITIES:
        raise ValidationError(f"unknown quantity {name!r}; choose from {', '.join(QUANTITIES)}")
    p = EnsembleParams.from_array(theta)
    if name in ("T", "P", "mu"):
        return getattr(conjugates(p), name)
    st = gibbs_stats(corpus, p, check=False)
    return {"S": st.entropy_S, "E": st.mean_E, "V": st.mean_V, "N": st.mean_N}[name]


# -- derivatives of ln Z --------------------------------------------------

@dataclass(frozen=True)
class LnZDerivatives:
    grad: np.ndarray
    hess: np.ndarray
    steps: np.ndarray


def lnZ_derivatives(corpus: CorpusSnapshot, params: EnsembleParams, h: float | None = None) -> LnZDerivatives:
    """Central-difference gradient and Hessian of ``ln z_trunc``.

    Expected to match minus the means and the covariance matrix of
    ``(E, V, N)``. The Hessian is evaluated on the upper triangle and mirrored,
    so it is symmetric to the last bit.
    """
    theta = params.as_array()
    steps = np.array([fd_step(x, h) for x in theta])
    if np.any(steps <= 0):
        raise ValidationError("finite-difference step must be positive")
    for i in range(3):
        for s in (-1, 1):
            for j in range(3):
                for t in (-1, 1):
                    _require_interior(corpus, theta + s * steps[i] * np.eye(3)[i] + t * steps[j] * np.eye(3)[j])

    def f(*shifts):
        x = theta.copy()
        for i, s in shifts:
            x[i] += s * steps[i]
        return ln_z_trunc(corpus, EnsembleParams.from_array(x))

    f0 = f()
    grad = np.array([(f((i, 1)) - f((i, -1))) / (2 * steps[i]) for i in range(3)])
    hess = np.empty((3, 3))
    for i in range(3):
        hess[i, i] = (f((i, 1)) - 2 * f0 + f((i, -1))) / steps[i] ** 2
        for j in range(i + 1, 3):
            val = (f((i, 1), (j, 1)) - f((i, 1), (j, -1)) - f((i, -1), (j, 1)) + f((i, -1), (j, -1)))
            hess[i, j] = hess[j, i] = val / (4 * steps[i] * steps[j])
    return LnZDerivatives(grad=grad, hess=hess, steps=steps)


def gradient(corpus: CorpusSnapshot, name: str, theta, h: float | None = None) -> np.ndarray:
    theta = np.asarray(theta, dtype=float)
    g = np.empty(3)
    for i in range(3):
        e = np.zeros(3)
        e[i] = fd_step(theta[i], h)
        g[i] = (quantity(corpus, name, theta + e) - quantity(corpus, name, theta - e)) / (2 * e[i])
    return g


# -- constrained partial derivatives --------------------------------------

@dataclass(frozen=True)
class ConstrainedPartial:
    value: float
    condition_number: float
    direction: np.ndarray


def constrained_partial(target: str, wrt: str, held: tuple[str, str], corpus: CorpusSnapshot,
                        params: EnsembleParams, h: float | None = None) -> ConstrainedPartial:
    """Derivative of ``target`` with respect to ``wrt`` keeping ``held`` fixed.

    Finds the parameter-space direction ``u`` with ``d(wrt) = 1`` and
    ``d(held) = 0`` from the gradients of the three constraint quantities, then
    differentiates ``target`` along it.
    """
    names = (target, wrt, *held)
    for q in names:
        if q not in QUANTITIES:
            raise ValidationError(f"unknown quantity {q!r}; choose from {', '.join(QUANTITIES)}")
    if len(set((wrt, *held))) != 3:
        raise ValidationError("wrt and the two held quantities must be distinct")
    if params.beta <= 0:
        raise RegionError("constrained partials need beta > 0")
    theta = params.as_array()
    for i in range(3):
        for s in (-1, 1):
            _require_interior(corpus, theta + s * fd_step(theta[i], h) * np.eye(3)[i], need_beta=True)
    J = np.vstack([gradient(corpus, q, theta, h) for q in (wrt, *held)])
    cond = float(np.linalg.cond(J))
    if not np.isfinite(cond) or cond > MAX_CONDITION:
        raise IllConditionedError(f"constraint Jacobian of ({wrt}; {held[0]}, {held[1]}) is singular", cond)
    u = np.linalg.solve(J, np.array([1.0, 0.0, 0.0]))
    value = float(gradient(corpus, target, theta, h) @ u)
    return ConstrainedPartial(value=value, condition_number=cond, direction=u)


def fundamental_residual(corpus: CorpusSnapshot, params: EnsembleParams, direction, h: float | None = None) -> float:
    """Relative defect of ``dE = T dS - P dV + mu dN`` along a parameter direction."""
    d = np.asarray(direction, dtype=float)
    if not np.any(d):
        raise ValidationError("direction must be nonzero")
    if params.beta <= 0:
        raise RegionError("the fundamental relation needs beta > 0")
    theta = params.as_array()
    step = fd_step(float(np.max(np.abs(theta))), h) / float(np.max(np.abs(d)))
    lo, hi = theta - step * d, theta + step * d
    _require_interior(corpus, lo, need_beta=True)
    _require_interior(corpus, hi, need_beta=True)
    q_lo = quantities(corpus, EnsembleParams.from_array(lo))
    q_hi = quantities(corpus, EnsembleParams.from_array(hi))
    dq = {k: (q_hi[k] - q_lo[k]) / (2 * step) for k in ("E", "S", "V", "N")}
    c = conjugates(params)
    rhs = c.T * dq["S"] - c.P * dq["V"] + c.mu * dq["N"]
    return abs(dq["E"] - rhs) / max(abs(dq["E"]), 1e-300)


@dataclass(frozen=True)
class RelationReport:
    params: EnsembleParams
    grad_residual: float
    hess_residual: float
    entropy_residual: float
    dS_dE: ConstrainedPartial
    dE_dV: ConstrainedPartial
    dE_dN: ConstrainedPartial
    dT_dV: ConstrainedPartial
    dP_dS: ConstrainedPartial

    @property
    def residuals(self) -> dict[str, float]:
        c = conjugates(self.params)
        return {
            "grad": self.grad_residual,
            "hess": self.hess_residual,
            "entropy": self.entropy_residual,
            "dS_dE_minus_beta": abs(self.dS_dE.value - self.params.beta) / abs(self.params.beta),
            "dE_dV_plus_P": abs(self.dE_dV.value + c.P) / max(abs(c.P), 1e-300),
            "dE_dN_minus_mu": abs(self.dE_dN.value - c.mu) / max(abs(c.mu), 1e-300),
            "maxwell": maxwell_residual(self.dT_dV.value, self.dP_dS.value),
        }


def maxwell_residual(dT_dV: float, dP_dS: float) -> float:
    return abs(dT_dV + dP_dS) / max(abs(dT_dV), abs(dP_dS), 1e-300)


def derivative_residuals(corpus: CorpusSnapshot, params: EnsembleParams, h: float | None = None) -> tuple[float, float]:
    """Relative mismatch of FD derivatives of ``ln z_trunc`` against direct moments.

    Gradient entries are scaled by ``1 + |mean|``; Hessian entries by
    ``sqrt(var_i var_j)``, the natural size of a covariance.
    """
    st = gibbs_stats(corpus, params)
    d = lnZ_derivatives(corpus, params, h)
    g = np.max(np.abs(d.grad + st.means) / (1 + np.abs(st.means)))
    cov = st.covariance
    sd = np.sqrt(np.diag(cov))
    scale = np.maximum(np.outer(sd, sd), 1e-300)
    return float(g), float(np.max(np.abs(d.hess - cov) / scale))


def entropy_residual(corpus: CorpusSnapshot, params: EnsembleParams) -> float:
    st = gibbs_stats(corpus, params, check=False)
    rhs = st.ln_z_trunc + float(params.as_array() @ st.means)
    return abs(st.entropy_S - rhs) / max(abs(st.entropy_S), abs(rhs), 1e-300)


def check_relations(corpus: CorpusSnapshot, params: EnsembleParams, h: float | None = None) -> RelationReport:
    g, H = derivative_residuals(corpus, params, h)
    return RelationReport(
        params=params,
        grad_residual=g,
        hess_residual=H,
        entropy_residual=entropy_residual(corpus, params),
        dS_dE=constrained_partial("S", "E", ("V", "N"), corpus, params, h),
        dE_dV=constrained_partial("E", "V", ("S", "N"), corpus, params, h),
        dE_dN=constrained_partial("E", "N", ("S", "V"), corpus, params, h),
        dT_dV=constrained_partial("T", "V", ("S", "N"), corpus, params, h),
        dP_dS=constrained_partial("P", "S", ("V", "N"), corpus, params, h),
    )


# -- isolines ---------------------------------------------------------------

def _newton(corpus, theta, drive, held, targets, tol, max_iter=20):
    """Solve ``held(theta) = targets`` over the two non-drive coordinates."""
    free = [i for i in range(3) if i != drive]
    theta = theta.copy()
    scale = np.maximum(np.abs(targets), 1e-12)

    def resid(x):
        return np.array([quantity(corpus, q, x) for q in held]) - targets

    r = resid(theta)
    for _ in range(max_iter):
        if np.all(np.abs(r) <= tol * scale):
            return theta
        J = np.empty((2, 2))
        for k, i in enumerate(free):
            e = np.zeros(3)
            e[i] = fd_step(theta[i])
            J[:, k] = (resid(theta + e) - resid(theta - e)) / (2 * e[i])
        try:
            dx = np.linalg.solve(J, -r)
        except np.linalg.LinAlgError:
            raise ConvergenceError("singular corrector Jacobian", EnsembleParams.from_array(theta)) from None
        theta[free] += dx
        _require_interior(corpus, theta, need_beta=True)
        r = resid(theta)
    if np.all(np.abs(r) <= tol * scale):
        return theta
    raise ConvergenceError(
        f"corrector did not converge in {max_iter} iterations (residual {np.max(np.abs(r) / scale):.3g})",
        EnsembleParams.from_array(theta),
    )


def _nodes(a: float, b: float, n: int) -> list[float]:
    # symmetric in (a, b) so a reversed sweep hits bit-identical nodes
    return [a if k == 0 else b if k == n else ((n - k) * a + k * b) / n for k in range(n + 1)]


def trace_isoline(corpus: CorpusSnapshot, hold: str, start: EnsembleParams, drive: str,
                  target_value: float, step: float, also_hold: str = "N",
                  tol: float = 1e-12) -> list[EnsembleParams]:
    """Follow the curve on which ``hold`` and ``also_hold`` keep their start values.

    ``drive`` moves from its start value to ``target_value`` in equal
    increments no larger than ``step``; at each node a tangent predictor is
    corrected by Newton's method on the other two coordinates, to relative
    tolerance ``tol`` (at most ``1e-8``).
    """
    if hold not in ("S", "V") or also_hold != "N":
        raise ValidationError("isolines hold S or V, together with N")
    if drive not in COORDS:
        raise ValidationError(f"drive must be one of {COORDS}")
    if step <= 0:
        raise ValidationError("step must be positive")
    tol = min(tol, 1e-8)
    k = COORDS.index(drive)
    theta0 = start.as_array()
    _require_interior(corpus, theta0, need_beta=True)
    dist = target_value - theta0[k]
    n = math.ceil(abs(dist) / step - 1e-9) if dist else 0
    return _trace(corpus, (hold, also_hold), theta0, k, _nodes(theta0[k], target_value, n), tol)


def _trace(corpus, held, theta0, k, drive_values, tol):
    targets = np.array([quantity(corpus, q, theta0) for q in held])
    free = [i for i in range(3) if i != k]
    path = [EnsembleParams.from_array(theta0)]
    theta = theta0.copy()
    prev = None
    for x in drive_values[1:]:
        guess = theta.copy()
        guess[k] = x
        if prev is not None and theta[k] != prev[k]:
            # secant predictor along the curve
            frac = (x - theta[k]) / (theta[k] - prev[k])
            guess[free] = theta[free] + frac * (theta[free] - prev[free])
        _require_interior(corpus, guess, need_beta=True)
        prev, theta = theta, _newton(corpus, guess, k, held, targets, tol)
        path.append(EnsembleParams.from_array(theta))
    return path


def solve_on_isoline(corpus: CorpusSnapshot, hold: str, start: EnsembleParams, drive: str,
                     goal: str, goal_value: float, bracket: float, tol: float = 1e-12) -> EnsembleParams:
    """Point on the ``(hold, N)`` isoline through ``start`` where ``goal`` equals ``goal_value``.

    ``bracket`` is a drive-coordinate value on the far side of the root.
    """
    from scipy.optimize import brentq

    k = COORDS.index(drive)
    theta0 = start.as_array()
    held = (hold, "N")

    cache = {}

    def point(x):
        if x == theta0[k]:
            return start
        if x not in cache:
            cache[x] = _trace(corpus, held, theta0, k, _nodes(theta0[k], x, 16), tol)[-1]
        return cache[x]

    def f(x):
        return quantity(corpus, goal, point(x).as_array()) - goal_value

    x = brentq(f, theta0[k], bracket, xtol=1e-14, rtol=1e-14)
    return point(x)


# -- cycles -----------------------------------------------------------------

LEG_KINDS = ("parametric", "iso_V", "iso_S")
_LEG_DRIVE = {"iso_V": ("V", 0), "iso_S": ("S", 1)}  # held quantity, drive coordinate


@dataclass
class LoopPath:
    """Closed loop: ``legs[i]`` joins ``vertices[i]`` to ``vertices[(i + 1) % n]``.

    Iso legs drive ``beta`` (iso_V) or ``gamma`` (iso_S) to the next vertex's
    value while holding mean length or entropy, together with mean output.
    """

    vertices: list[EnsembleParams]
    legs: list[str]

    def __post_init__(self):
        if len(self.vertices) < 3:
            raise ValidationError("a loop needs at least three vertices")
        if len(self.legs) != len(self.vertices):
            raise ValidationError("need one leg per vertex (the last leg closes the loop)")
        for leg in self.legs:
            if leg not in LEG_KINDS:
                raise ValidationError(f"unknown leg kind {leg!r}; choose from {LEG_KINDS}")
        for v in self.vertices:
            if not (v.certified_region and v.beta > 0):
                raise RegionError(f"loop vertex {v} is outside the certified region with beta > 0")

    def reversed(self) -> "LoopPath":
        verts = [self.vertices[0]] + self.vertices[:0:-1]
        return LoopPath(verts, self.legs[::-1])


@dataclass(frozen=True)
class Segment:
    leg: int
    kind: str
    start: EnsembleParams
    end: EnsembleParams
    T: float
    P: float
    mu: float
    dS: float
    dV: float
    dN: float
    dE: float


@dataclass
class CycleReport:
    delta_Q: float
    work_term: float
    mu_term: float
    closure_residual: float
    segments: list[Segment] = field(default_factory=list, repr=False)


def _leg_points(corpus, kind, a, b, refinement, tol, close_tol):
    """``2 * refinement + 1`` points from ``a`` to ``b``; odd ones are midpoints."""
    m = 2 * refinement
    ta, tb = a.as_array(), b.as_array()
    if kind == "parametric":
        pts = []
        for j in range(m + 1):
            if j == 0:
                pts.append(a)
            elif j == m:
                pts.append(b)
            else:
                pts.append(EnsembleParams.from_array(((m - j) * ta + j * tb) / m))
        for p in pts:
            _require_interior(corpus, p.as_array(), need_beta=True)
        return pts
    hold, k = _LEG_DRIVE[kind]
    pts = _trace(corpus, (hold, "N"), ta, k, _nodes(ta[k], tb[k], m), tol)
    gap = np.max(np.abs(pts[-1].as_array() - tb) / np.maximum(1.0, np.abs(tb)))
    if gap > close_tol:
        raise ValidationError(
            f"{kind} leg from {a} does not reach the next vertex {b} (misses by {gap:.3g}); "
            "the loop is not consistent with its leg kinds"
        )
    pts[-1] = b
    return pts


def cycle_integrals(corpus: CorpusSnapshot, loop: LoopPath, refinement: int = 256,
                    tol: float = 1e-12, close_tol: float = 1e-7) -> CycleReport:
    """Midpoint-rule line integrals of ``T dS``, ``P dV`` and ``mu dN`` around a loop."""
    if refinement < 1:
        raise ValidationError("refinement must be at least 1")
    qs_cache: dict[EnsembleParams, dict] = {}

    def q(p):
        if p not in qs_cache:
            qs_cache[p] = quantities(corpus, p)
        return qs_cache[p]

    segments = []
    n = len(loop.vertices)
    for i, kind in enumerate(loop.legs):
        a, b = loop.vertices[i], loop.vertices[(i + 1) % n]
        if a == b:
            continue
        pts = _leg_points(corpus, kind, a, b, refinement, tol, close_tol)
        for j in range(0, len(pts) - 1, 2):
            s, mid, e = q(pts[j]), q(pts[j + 1]), q(pts[j + 2])
            segments.append(Segment(
                leg=i, kind=kind, start=pts[j], end=pts[j + 2],
                T=mid["T"], P=mid["P"], mu=mid["mu"],
                dS=e["S"] - s["S"], dV=e["V"] - s["V"], dN=e["N"] - s["N"], dE=e["E"] - s["E"],
            ))
    dQ = math.fsum(sg.T * sg.dS for sg in segments)
    work = math.fsum(sg.P * sg.dV for sg in segments)
    mu_term = math.fsum(sg.mu * sg.dN for sg in segments)
    return CycleReport(dQ, work, mu_term, abs(dQ - (work - mu_term)), segments)


def stoddard_loop(corpus: CorpusSnapshot, start: EnsembleParams, beta_high: float, gamma_low: float) -> LoopPath:
    """Four-leg loop at fixed mean output: iso-V, iso-S, iso-V, iso-S.

    Leg 1 drives ``beta`` to ``beta_high`` at constant mean length; leg 2
    drives ``gamma`` to ``gamma_low`` at constant entropy (lengthening the
    programs); leg 3 returns the entropy to its starting value at the new
    length; leg 4 comes back at that entropy.
    """
    v0 = start
    S0 = quantity(corpus, "S", v0.as_array())
    v1 = trace_isoline(corpus, "V", v0, "beta", beta_high, step=abs(beta_high - v0.beta) / 32 or 1.0)[-1]
    v2 = trace_isoline(corpus, "S", v1, "gamma", gamma_low, step=abs(gamma_low - v1.gamma) / 32 or 1.0)[-1]
    v3 = solve_on_isoline(corpus, "V", v2, "beta", "S", S0, bracket=v0.beta)
    return LoopPath([v0, v1, v2, v3], ["iso_V", "iso_S", "iso_V", "iso_S"])


# -- loop description files -------------------------------------------------

def parse_loop_spec(text: str, corpus: CorpusSnapshot) -> LoopPath:
    """Build a loop from a line-oriented description.

    ``START beta gamma delta`` first, then one leg per line::

        ISO_V <beta>|close      # constant mean length, drive beta
        ISO_S <gamma>|close     # constant entropy, drive gamma
        PARAM <beta> <gamma> <delta>|close

    ``close`` on an ISO_V leg stops where the entropy regains its start value;
    on an ISO_S leg where the mean length does; on a PARAM leg at the start.
    The final leg must end at the start point.
    """
    lines = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            lines.append((lineno, line.split()))
    if not lines or lines[0][1][0].upper() != "START":
        raise ValidationError("loop file must begin with 'START beta gamma delta'")
    lineno, head = lines[0]
    try:
        start = EnsembleParams(*(float(x) for x in head[1:4]))
    except (TypeError, ValueError):
        raise ValidationError(f"line {lineno}: START needs three numbers") from None
    if len(head) != 4:
        raise ValidationError(f"line {lineno}: START needs three numbers")
    _require_interior(corpus, start.as_array(), need_beta=True)
    start_q = quantities(corpus, start)

    vertices, legs = [start], []
    for lineno, parts in lines[1:]:
        kind, args = parts[0].upper(), parts[1:]
        cur = vertices[-1]
        try:
            if kind in ("ISO_V", "ISO_S"):
                if len(args) != 1:
                    raise ValidationError(f"{kind} takes one target")
                leg = "iso_V" if kind == "ISO_V" else "iso_S"
                hold, k = _LEG_DRIVE[leg]
                drive = COORDS[k]
                if args[0].lower() == "close":
                    goal = "S" if leg == "iso_V" else "V"
                    nxt = _close_on_isoline(corpus, hold, cur, drive, goal, start_q[goal])
                else:
                    target = float(args[0])
                    nxt = trace_isoline(corpus, hold, cur, drive, target, step=abs(target - cur.as_array()[k]) / 32 or 1.0)[-1]
            elif kind == "PARAM":
                leg = "parametric"
                if len(args) == 1 and args[0].lower() == "close":
                    nxt = start
                elif len(args) == 3:
                    nxt = EnsembleParams(*(float(x) for x in args))
                else:
                    raise ValidationError("PARAM takes beta gamma delta, or close")
            else:
                raise ValidationError(f"unknown leg {parts[0]!r}; use ISO_V, ISO_S or PARAM")
        except ValidationError as exc:
            raise ValidationError(f"line {lineno}: {exc}") from None
        except ValueError:
            raise ValidationError(f"line {lineno}: bad number in {' '.join(parts)!r}") from None
        legs.append(leg)
        vertices.append(nxt)
    if not legs:
        raise ValidationError("loop file has no legs")
    end = vertices.pop()
    gap = np.max(np.abs(end.as_array() - start.as_array()) / np.maximum(1.0, np.abs(start.as_array())))
    if gap > 1e-7:
        raise ValidationError(f"loop is open: the last leg ends at {end}, not at the start {start}")
    return LoopPath(vertices, legs)


def _close_on_isoline(corpus, hold, cur, drive, goal, goal_value):
    """Scan the drive coordinate outward until ``goal`` crosses ``goal_value``, then refine."""
    k = COORDS.index(drive)
    x0 = cur.as_array()[k]
    f0 = quantity(corpus, goal, cur.as_array()) - goal_value
    if f0 == 0:
        return cur
    for direction in (1.0, -1.0):
        step = 0.05 * max(1.0, abs(x0))
        for _ in range(40):
            x = x0 + direction * step
            try:
                p = trace_isoline(corpus, hold, cur, drive, x, step=abs(x - x0) / 16)[-1]
            except (RegionError, ConvergenceError):
                break
            if (quantity(corpus, goal, p.as_array()) - goal_value) * f0 < 0:
                return solve_on_isoline(corpus, hold, cur, drive, goal, goal_value, bracket=x)
            step *= 1.5
    raise ValidationError(f"could not find a point on the {hold}-isoline where {goal} returns to {goal_value:.6g}")
