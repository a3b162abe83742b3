"""Gibbs ensembles over the halting records of a corpus.

Weights are ``exp(-beta*E - gamma*V - delta*N)`` with ``E = log2(t)`` the log
runtime in bits, ``V`` the program length and ``N`` the output. Entropies are
in nats unless a name says otherwise.

Two kinds of results live here:

* enclosures, which bound the value over the *whole* domain of the machine
  using the undecided part of the corpus (live prefixes and still-running
  programs), and are only issued where the full sum is known to converge;
* truncated statistics, which treat the decided records as the entire
  ensemble and are exact for that finite Gibbs family.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .enumeration import CorpusSnapshot, HaltingRecord
from .errors import RegionError, ValidationError

LN2 = math.log(2.0)


@dataclass(frozen=True)
class EnsembleParams:
    beta: float
    gamma: float
    delta: float

    @property
    def certified_region(self) -> bool:
        return self.gamma >= LN2 and self.beta >= 0 and self.delta >= 0

    def as_array(self) -> np.ndarray:
        return np.array([self.beta, self.gamma, self.delta], dtype=float)

    @classmethod
    def from_array(cls, theta) -> "EnsembleParams":
        b, g, d = (float(x) for x in theta)
        return cls(b, g, d)

    def __iter__(self):
        return iter((self.beta, self.gamma, self.delta))


OMEGA_PARAMS = EnsembleParams(0.0, LN2, 0.0)


@dataclass(frozen=True)
class Interval:
    lo: float
    hi: float

    def __contains__(self, x) -> bool:
        return self.lo <= x <= self.hi

    @property
    def width(self) -> float:
        return self.hi - self.lo


@dataclass(frozen=True)
class PartitionEnclosure:
    z_lo: float
    z_hi: float
    tail_unexplored: float
    tail_running: float
    certified: bool = True

    @property
    def tails(self) -> float:
        return self.tail_unexplored + self.tail_running

    def interval(self) -> Interval:
        return Interval(self.z_lo, self.z_hi)


@dataclass(frozen=True)
class EnsembleStats:
    mean_E: float
    mean_V: float
    mean_N: float
    var_E: float
    var_V: float
    var_N: float
    cov_EV: float
    cov_EN: float
    cov_VN: float
    entropy_S: float
    z_trunc: float
    ln_z_trunc: float

    @property
    def means(self) -> np.ndarray:
        return np.array([self.mean_E, self.mean_V, self.mean_N])

    @property
    def covariance(self) -> np.ndarray:
        return np.array([
            [self.var_E, self.cov_EV, self.cov_EN],
            [self.cov_EV, self.var_V, self.cov_VN],
            [self.cov_EN, self.cov_VN, self.var_N],
        ])


class EntropyIdentityError(ArithmeticError):
    pass


def _exponent(params, E, V, N):
    # 0 * inf never occurs: observables are finite
    return -(params.beta * E + params.gamma * V + params.delta * N)


def weight(record: HaltingRecord, params: EnsembleParams) -> float:
    # length factor as a power of exp(-gamma): exactly 2**-V at gamma = ln 2
    rest = math.exp(-(params.beta * math.log2(record.t) + params.delta * record.N))
    return rest * math.exp(-params.gamma) ** record.V


def require_certified(params: EnsembleParams) -> None:
    if params.certified_region:
        return
    if params.beta == 0 and params.gamma == 0 and params.delta == 0:
        raise RegionError("Z(0,0,0) diverges: every halting program contributes 1")
    if params.gamma < LN2:
        raise RegionError(f"gamma={params.gamma!r} < ln 2: the length sum diverges, no certified enclosure")
    raise RegionError(f"beta and delta must be >= 0 for a certified enclosure, got {params}")


def partition_enclosure(corpus: CorpusSnapshot, params: EnsembleParams,
                        allow_uncertified: bool = False) -> PartitionEnclosure:
    """Certified interval for the full partition function.

    The running tail uses that any later halt of a still-running string takes
    more steps than it has already used; the unexplored tail uses that the
    halting extensions of a live prefix ``p`` have Kraft mass at most
    ``2**-|p|`` and are all strictly longer than ``p``.

    Outside the certified region the call is refused unless
    ``allow_uncertified`` is set, in which case only the lower end is
    meaningful and ``z_hi`` is infinite.
    """
    z_lo = math.fsum(weight(r, params) for r in corpus.records)
    if not params.certified_region:
        if not allow_uncertified:
            require_certified(params)
        return PartitionEnclosure(z_lo, math.inf, math.inf, math.inf, certified=False)

    shrink = 2.0 * math.exp(-params.gamma)  # <= 1 in the certified region
    tail_running = math.fsum(
        math.exp(-params.beta * math.log2(r.steps) - params.gamma * len(r.bits))
        for r in corpus.running
    )
    tail_unexplored = math.fsum(
        min(2.0 ** -len(p), 2.0 ** -len(p) * shrink ** (len(p) + 1)) for p in corpus.live
    )
    return PartitionEnclosure(
        z_lo=z_lo,
        z_hi=z_lo + tail_unexplored + tail_running,
        tail_unexplored=tail_unexplored,
        tail_running=tail_running,
    )


def omega_enclosure(corpus: CorpusSnapshot) -> PartitionEnclosure:
    return partition_enclosure(corpus, OMEGA_PARAMS)


def log_weights(corpus: CorpusSnapshot, params: EnsembleParams) -> np.ndarray:
    E, V, N = corpus.observables()
    return _exponent(params, E, V, N)


def ln_z_trunc(corpus: CorpusSnapshot, params: EnsembleParams) -> float:
    lw = log_weights(corpus, params)
    if lw.size == 0:
        return -math.inf
    top = lw.max()
    return float(top + math.log(np.exp(lw - top).sum()))


def gibbs_probabilities(corpus: CorpusSnapshot, params: EnsembleParams) -> np.ndarray:
    lw = log_weights(corpus, params)
    p = np.exp(lw - lw.max())
    return p / p.sum()


def shannon_entropy(p) -> float:
    """``-sum p ln p`` in nats, with ``0 ln 0 = 0``."""
    p = np.asarray(p, dtype=float)
    nz = p[p > 0]
    return float(-(nz * np.log(nz)).sum())


def gibbs_stats(corpus: CorpusSnapshot, params: EnsembleParams, check: bool = True) -> EnsembleStats:
    """Moments and entropy of the Gibbs measure restricted to the records."""
    if not corpus.records:
        raise ValidationError("corpus has no halting records; nothing to average over")
    E, V, N = corpus.observables()
    lw = log_weights(corpus, params)
    top = lw.max()
    u = np.exp(lw - top)
    lnz = float(top + math.log(math.fsum(u.tolist())))
    p = np.exp(lw - lnz)
    p /= math.fsum(p.tolist())
    obs = np.vstack([E, V, N])
    # correctly rounded sums: cycle integrals difference these at nearby points
    means = np.array([math.fsum((row * p).tolist()) for row in obs])
    centred = obs - means[:, None]
    cov = (centred * p) @ centred.T
    # ln p = lw - lnz exactly, so no logarithm of a rounded probability is taken
    S = lnz - math.fsum((p * lw).tolist())
    if check:
        rhs = lnz + params.beta * means[0] + params.gamma * means[1] + params.delta * means[2]
        scale = max(abs(S), abs(lnz), abs(rhs - lnz), 1e-300)
        if abs(S - rhs) > 1e-9 * scale:
            raise EntropyIdentityError(f"entropy {S!r} != ln Z + beta.E + gamma.V + delta.N = {rhs!r}")
    return EnsembleStats(
        mean_E=float(means[0]), mean_V=float(means[1]), mean_N=float(means[2]),
        var_E=float(max(cov[0, 0], 0.0)), var_V=float(max(cov[1, 1], 0.0)), var_N=float(max(cov[2, 2], 0.0)),
        cov_EV=float(cov[0, 1]), cov_EN=float(cov[0, 2]), cov_VN=float(cov[1, 2]),
        entropy_S=S, z_trunc=math.exp(lnz), ln_z_trunc=lnz,
    )


def pushforward_measure(corpus: CorpusSnapshot, params: EnsembleParams, n: int) -> Interval:
    """Interval for the probability that a Gibbs-random program outputs ``n``.

    Undecided programs might output ``n``, so the upper end adds the full
    enclosure tails to the witnessed numerator.
    """
    enc = partition_enclosure(corpus, params)
    if enc.z_lo == 0:
        raise ValidationError("no halting records yet: the partition function has no positive lower bound")
    num = math.fsum(weight(r, params) for r in corpus.records if r.N == n)
    return Interval(num / enc.z_hi, min(1.0, (num + enc.tails) / enc.z_lo))


@dataclass(frozen=True)
class EntropyInterval:
    """Bounds on ``-ln sum_{N(x)=n} exp(-gamma |x|)``, in nats.

    ``hi`` comes from witnessed records alone; ``lo`` also credits every
    undecided string with output ``n``. Without a witness ``hi`` is infinite.
    """

    lo: float
    hi: float
    witnessed: bool

    @property
    def lo_bits(self) -> float:
        return self.lo / LN2

    @property
    def hi_bits(self) -> float:
        return self.hi / LN2


def algorithmic_entropy(corpus: CorpusSnapshot, gamma: float, n: int) -> EntropyInterval:
    params = EnsembleParams(0.0, gamma, 0.0)
    require_certified(params)
    witnessed = math.fsum(math.exp(-gamma * r.V) for r in corpus.records if r.N == n)
    tails = partition_enclosure(corpus, params).tails
    lo = -math.log(witnessed + tails) if witnessed + tails > 0 else math.inf
    hi = -math.log(witnessed) if witnessed > 0 else math.inf
    return EntropyInterval(lo, hi, witnessed > 0)


@dataclass(frozen=True)
class FiniteMeasure:
    mass: dict

    def __post_init__(self):
        if any(m < 0 for m in self.mass.values()):
            raise ValidationError("measure masses must be non-negative")

    @property
    def support(self):
        return {x for x, m in self.mass.items() if m > 0}

    @property
    def total(self) -> float:
        return math.fsum(self.mass.values())

    def is_probability(self, tol: float = 1e-12) -> bool:
        return abs(self.total - 1.0) <= tol

    def normalized(self) -> "FiniteMeasure":
        z = self.total
        if z <= 0:
            raise ValidationError("cannot normalise a zero measure")
        return FiniteMeasure({x: m / z for x, m in self.mass.items()})

    @classmethod
    def point(cls, x) -> "FiniteMeasure":
        return cls({x: 1.0})


def relative_entropy(p: FiniteMeasure, q: FiniteMeasure) -> float:
    """``-sum p ln(p/q)`` in nats: minus the KL divergence, so always ``<= 0``."""
    for name, m in (("p", p), ("q", q)):
        if not m.is_probability():
            raise ValidationError(f"{name} is not a probability measure (total {m.total!r})")
    missing = [x for x in p.support if q.mass.get(x, 0.0) <= 0]
    if missing:
        raise ValidationError(f"q vanishes where p does not: {sorted(missing, key=repr)[:5]}")
    return -math.fsum(p.mass[x] * math.log(p.mass[x] / q.mass[x]) for x in p.support)


def pushforward_lower_measure(corpus: CorpusSnapshot, params: EnsembleParams) -> FiniteMeasure:
    """Witnessed output distribution ``n -> sum_{N(x)=n} weight / z_lo``, a
    probability measure on the outputs seen so far."""
    mass: dict[int, list[float]] = {}
    for r in corpus.records:
        mass.setdefault(r.N, []).append(weight(r, params))
    z = math.fsum(math.fsum(v) for v in mass.values())
    return FiniteMeasure({n: math.fsum(v) / z for n, v in sorted(mass.items())})


@dataclass(frozen=True)
class ComplexityProxies:
    k_proxy: int
    levin_proxy: float


def complexity_proxies(corpus: CorpusSnapshot, n: int) -> ComplexityProxies | None:
    """Shortest witnessed length and shortest ``V + log2 t`` among programs printing ``n``.

    ``None`` when no record outputs ``n``.
    """
    witnesses = [r for r in corpus.records if r.N == n]
    if not witnesses:
        return None
    return ComplexityProxies(
        k_proxy=min(r.V for r in witnesses),
        levin_proxy=min(r.V + math.log2(r.t) for r in witnesses),
    )
