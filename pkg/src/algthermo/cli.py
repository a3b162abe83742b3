"""Command line: ``algthermo <subcommand> ...``.

Exit status is 0 on success, 1 for invalid input (flags, files, parameters
outside the certified region) and 2 when a numerical procedure fails
(singular Jacobian, corrector not converging).

CSV outputs
-----------
stats / omega (one row per parameter point)
    beta, gamma, delta, certified, z_lo, z_hi, tail_unexplored, tail_running,
    z_trunc, mean_E, mean_V, mean_N, var_E, var_V, var_N, cov_EV, cov_EN,
    cov_VN, entropy_S_nats, entropy_S_bits
relations (one row per parameter point)
    beta, gamma, delta, then one column per residual and the five
    constrained partials with their condition numbers
cycle (one row per leg segment)
    leg, kind, beta0, gamma0, delta0, beta1, gamma1, delta1, T, P, mu,
    dS, dV, dN, dE, T_dS, P_dV, mu_dN
"""
from __future__ import annotations

import argparse
import csv
import io
import logging
import math
import os
import sys
import tempfile
from pathlib import Path

from . import ensemble as ens
from . import thermo
from .enumeration import (
    DEFAULT_LENGTH,
    DEFAULT_STEPS,
    dovetail_enumerate,
    kraft_sum,
    load_corpus,
    save_corpus,
)
from .errors import NumericalConditionError, ValidationError

log = logging.getLogger("algthermo")

LN2 = math.log(2.0)
# tolerances reported by `relations`
RELATION_TOLERANCES = {
    "grad": 1e-6,
    "hess": 1e-4,
    "entropy": 1e-9,
    "dS_dE_minus_beta": 1e-3,
    "dE_dV_plus_P": 1e-3,
    "dE_dN_minus_mu": 1e-3,
    "maxwell": 1e-3,
    "fundamental": 1e-3,
}


class UsageError(ValidationError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _fmt(x) -> str:
    if isinstance(x, float):
        return repr(x)
    return str(x)


def _write_csv(path, header, rows) -> None:
    """Write atomically so a failure never leaves a partial table behind."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(v) for v in row])
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent if str(path.parent) else ".", prefix=".tmp-", suffix=".csv")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(buf.getvalue())
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _real(text):
    try:
        x = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not math.isfinite(x):
        raise argparse.ArgumentTypeError(f"must be finite: {text!r}")
    return x


def _positive_real(text):
    x = _real(text)
    if x <= 0:
        raise argparse.ArgumentTypeError(f"must be positive: {text!r}")
    return x


def _nat(minimum):
    def parse(text):
        try:
            n = int(text, 0)
        except ValueError:
            raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
        if n < minimum:
            raise argparse.ArgumentTypeError(f"must be >= {minimum}: {text!r}")
        return n
    return parse


def _params(args) -> ens.EnsembleParams:
    return ens.EnsembleParams(args.beta, args.gamma, args.delta)


# -- subcommands ------------------------------------------------------------

def cmd_enumerate(args, out):
    snap = dovetail_enumerate(args.max_len, args.max_steps, threads=args.threads)
    save_corpus(snap, args.out)
    if args.verify:
        again = load_corpus(args.out, verify=True)
        if again != snap:
            raise ValidationError(f"{args.out}: re-loaded corpus differs from the enumerated one")
    enc = ens.omega_enclosure(snap)
    print(f"enumerated L={snap.L} Tmax={snap.Tmax} machine={snap.machine_id}", file=out)
    print(f"  halting records : {len(snap.records)}", file=out)
    print(f"  still running   : {len(snap.running)}", file=out)
    print(f"  live prefixes   : {len(snap.live)}", file=out)
    print(f"  Kraft sum       : {float(kraft_sum(snap, exact=True))!r} (exact dyadic, <= 1)", file=out)
    print(f"  Omega in [{enc.z_lo!r}, {enc.z_hi!r}]", file=out)
    if args.verify:
        print(f"  verified: every record and running string reproduced from {args.out}", file=out)
    print(f"wrote {args.out}", file=out)


_STATS_HEADER = [
    "beta", "gamma", "delta", "certified", "z_lo", "z_hi", "tail_unexplored", "tail_running",
    "z_trunc", "mean_E", "mean_V", "mean_N", "var_E", "var_V", "var_N",
    "cov_EV", "cov_EN", "cov_VN", "entropy_S_nats", "entropy_S_bits",
]


def _print_enclosure(enc, out):
    tag = "certified" if enc.certified else "UNCERTIFIED (lower bound only)"
    print(f"partition function [{tag}]", file=out)
    print(f"  Z in [{enc.z_lo!r}, {enc.z_hi!r}]", file=out)
    print(f"  tails: unexplored {enc.tail_unexplored!r}, running {enc.tail_running!r}", file=out)
    if enc.z_lo > 0:
        lo_n = -math.log(enc.z_hi) if enc.z_hi < math.inf else -math.inf
        hi_n = -math.log(enc.z_lo)
        print(f"  -ln Z in [{lo_n!r}, {hi_n!r}] nats = [{lo_n / LN2!r}, {hi_n / LN2!r}] bits", file=out)


def _stats_row(params, enc, st):
    return [
        params.beta, params.gamma, params.delta, int(enc.certified), enc.z_lo, enc.z_hi,
        enc.tail_unexplored, enc.tail_running, st.z_trunc, st.mean_E, st.mean_V, st.mean_N,
        st.var_E, st.var_V, st.var_N, st.cov_EV, st.cov_EN, st.cov_VN,
        st.entropy_S, st.entropy_S / LN2,
    ]


def _stats_for(corpus, params, allow_uncertified, out, csv_path):
    enc = ens.partition_enclosure(corpus, params, allow_uncertified=allow_uncertified)
    st = ens.gibbs_stats(corpus, params)
    _print_enclosure(enc, out)
    print(f"truncated Gibbs ensemble over {len(corpus.records)} records (L={corpus.L}, Tmax={corpus.Tmax})", file=out)
    print(f"  z_trunc = {st.z_trunc!r}", file=out)
    print(f"  means     E={st.mean_E!r} (log2 steps)  V={st.mean_V!r}  N={st.mean_N!r}", file=out)
    print(f"  variances E={st.var_E!r}  V={st.var_V!r}  N={st.var_N!r}", file=out)
    print(f"  cov       EV={st.cov_EV!r}  EN={st.cov_EN!r}  VN={st.cov_VN!r}", file=out)
    print(f"  entropy S = {st.entropy_S!r} nats = {st.entropy_S / LN2!r} bits (truncated ensemble)", file=out)
    if params.beta > 0:
        c = thermo.conjugates(params)
        print(f"  T={c.T!r}  P={c.P!r}  mu={c.mu!r}", file=out)
    if csv_path:
        _write_csv(csv_path, _STATS_HEADER, [_stats_row(params, enc, st)])


def cmd_stats(args, out):
    params = _params(args)
    if not args.uncertified:
        ens.require_certified(params)
    corpus = load_corpus(args.corpus)
    _stats_for(corpus, params, args.uncertified, out, args.csv)


def cmd_omega(args, out):
    corpus = load_corpus(args.corpus)
    enc = ens.omega_enclosure(corpus)
    print(f"Omega = Z(0, ln 2, 0) for machine {corpus.machine_id}, L={corpus.L}, Tmax={corpus.Tmax}", file=out)
    print(f"  Omega in [{enc.z_lo!r}, {enc.z_hi!r}]  (width {enc.z_hi - enc.z_lo!r})", file=out)
    print(f"  z_lo = {enc.z_lo!r}", file=out)
    print(f"  tails: unexplored {enc.tail_unexplored!r}, running {enc.tail_running!r}", file=out)
    if enc.z_lo > 0:
        print(f"  -log2 Omega in [{-math.log2(enc.z_hi)!r}, {-math.log2(enc.z_lo)!r}] bits", file=out)
    if args.csv:
        st = ens.gibbs_stats(corpus, ens.OMEGA_PARAMS)
        _write_csv(args.csv, _STATS_HEADER, [_stats_row(ens.OMEGA_PARAMS, enc, st)])


def cmd_entropy(args, out):
    params = ens.EnsembleParams(0.0, args.gamma, 0.0)
    ens.require_certified(params)
    corpus = load_corpus(args.corpus)
    n = args.output_value
    h = ens.algorithmic_entropy(corpus, args.gamma, n)
    print(f"algorithmic entropy of output {n} at gamma={args.gamma!r}", file=out)
    if h.witnessed:
        print(f"  in [{h.lo!r}, {h.hi!r}] nats", file=out)
        print(f"  in [{h.lo_bits!r}, {h.hi_bits!r}] bits", file=out)
    else:
        print(f"  no witness at L={corpus.L}: only the lower end is known, >= {h.lo!r} nats = {h.lo_bits!r} bits", file=out)
    proxies = ens.complexity_proxies(corpus, n)
    if proxies is None:
        print("  complexity proxies: no program in the corpus outputs this value", file=out)
    else:
        print(f"  shortest program length (Kolmogorov proxy): {proxies.k_proxy} bits", file=out)
        print(f"  min length + log2 runtime (Levin proxy): {proxies.levin_proxy!r} bits", file=out)
    if ens.partition_enclosure(corpus, params).z_lo > 0:
        q = ens.pushforward_measure(corpus, params, n)
        print(f"  probability of output {n} under the gamma-ensemble in [{q.lo!r}, {q.hi!r}]", file=out)


def cmd_relations(args, out):
    params = _params(args)
    ens.require_certified(params)
    if params.beta <= 0:
        raise ValidationError("relations need beta > 0 (T, P and mu are undefined at beta = 0)")
    corpus = load_corpus(args.corpus)
    rep = thermo.check_relations(corpus, params, args.h)
    res = dict(rep.residuals)
    for name, d in (("fundamental_beta", (1, 0, 0)), ("fundamental_gamma", (0, 1, 0)), ("fundamental_delta", (0, 0, 1))):
        res[name] = thermo.fundamental_residual(corpus, params, d, args.h)
    print(f"thermodynamic relations at beta={params.beta!r} gamma={params.gamma!r} delta={params.delta!r}", file=out)
    print(f"  on the truncated ensemble of {len(corpus.records)} records (L={corpus.L}, Tmax={corpus.Tmax})", file=out)
    for name, value in res.items():
        tol = RELATION_TOLERANCES[name.split("_")[0] if name.startswith("fundamental") else name]
        verdict = "ok" if value <= tol else "FAIL"
        print(f"  {name:<20} {value:.3e}  (tol {tol:.0e})  {verdict}", file=out)
    print(f"  dT/dV|S,N = {rep.dT_dV.value!r}   -dP/dS|V,N = {-rep.dP_dS.value!r}", file=out)
    if args.csv:
        partials = [rep.dS_dE, rep.dE_dV, rep.dE_dN, rep.dT_dV, rep.dP_dS]
        pnames = ["dS_dE", "dE_dV", "dE_dN", "dT_dV", "dP_dS"]
        header = ["beta", "gamma", "delta", *res.keys()]
        header += [f"{p}{suffix}" for p in pnames for suffix in ("", "_cond")]
        row = [params.beta, params.gamma, params.delta, *res.values()]
        row += [x for p in partials for x in (p.value, p.condition_number)]
        _write_csv(args.csv, header, [row])


def cmd_cycle(args, out):
    corpus = load_corpus(args.corpus)
    try:
        text = Path(args.spec).read_text(encoding="utf-8")
    except OSError as exc:
        raise ValidationError(f"cannot read loop file {args.spec}: {exc.strerror}") from None
    loop = thermo.parse_loop_spec(text, corpus)
    rep = thermo.cycle_integrals(corpus, loop, args.refinement)
    print(f"cycle with {len(loop.legs)} legs at refinement {args.refinement}", file=out)
    for v, leg in zip(loop.vertices, loop.legs):
        print(f"  vertex beta={v.beta!r} gamma={v.gamma!r} delta={v.delta!r} -> {leg}", file=out)
    print(f"  heat  oint T dS  = {rep.delta_Q!r}", file=out)
    print(f"  work  oint P dV  = {rep.work_term!r}", file=out)
    print(f"        oint mu dN = {rep.mu_term!r}", file=out)
    rel = rep.closure_residual / max(abs(rep.delta_Q), 1e-300)
    print(f"  |heat - (work - mu term)| = {rep.closure_residual!r} (relative {rel:.3e})", file=out)
    if args.csv:
        header = ["leg", "kind", "beta0", "gamma0", "delta0", "beta1", "gamma1", "delta1",
                  "T", "P", "mu", "dS", "dV", "dN", "dE", "T_dS", "P_dV", "mu_dN"]
        rows = [[s.leg, s.kind, *s.start, *s.end, s.T, s.P, s.mu, s.dS, s.dV, s.dN, s.dE,
                 s.T * s.dS, s.P * s.dV, s.mu * s.dN] for s in rep.segments]
        _write_csv(args.csv, header, rows)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="algthermo", description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("enumerate", help="decide all programs up to a length and step budget")
    s.add_argument("--max-len", type=_nat(0), default=DEFAULT_LENGTH, help="max program length L in bits")
    s.add_argument("--max-steps", type=_nat(1), default=DEFAULT_STEPS, help="step budget Tmax")
    s.add_argument("--threads", type=_nat(1), default=1)
    s.add_argument("--out", required=True, help="corpus file to write")
    s.add_argument("--verify", action="store_true", help="re-run every saved record and running string")
    s.set_defaults(func=cmd_enumerate)

    def ensemble_flags(s, beta=True, delta=True):
        if beta:
            s.add_argument("--beta", type=_real, required=True, help="conjugate of log2 runtime")
        s.add_argument("--gamma", type=_real, required=True, help="conjugate of program length")
        if delta:
            s.add_argument("--delta", type=_real, required=True, help="conjugate of output")

    s = sub.add_parser("stats", help="enclosure of Z and truncated Gibbs statistics")
    s.add_argument("--corpus", required=True)
    ensemble_flags(s)
    s.add_argument("--uncertified", action="store_true",
                   help="outside gamma >= ln 2, beta, delta >= 0: report lower bounds only instead of refusing")
    s.add_argument("--csv")
    s.set_defaults(func=cmd_stats)

    s = sub.add_parser("omega", help="enclosure of Chaitin's Omega, Z(0, ln 2, 0)")
    s.add_argument("--corpus", required=True)
    s.add_argument("--csv")
    s.set_defaults(func=cmd_omega)

    s = sub.add_parser("entropy", help="algorithmic entropy and complexity proxies of one output")
    s.add_argument("--corpus", required=True)
    ensemble_flags(s, beta=False, delta=False)
    s.add_argument("--output-value", type=_nat(0), required=True)
    s.set_defaults(func=cmd_entropy)

    s = sub.add_parser("relations", help="check derivative, Maxwell and fundamental relations")
    s.add_argument("--corpus", required=True)
    ensemble_flags(s)
    s.add_argument("--h", type=_positive_real, default=None, help="finite-difference step (default 1e-4*max(1,|x|))")
    s.add_argument("--csv")
    s.set_defaults(func=cmd_relations)

    s = sub.add_parser("cycle", help="integrate heat and work around a loop of ensembles")
    s.add_argument("--corpus", required=True)
    s.add_argument("--spec", required=True, help="loop file: START b g d, then ISO_V/ISO_S/PARAM legs")
    s.add_argument("--refinement", type=_nat(1), default=256)
    s.add_argument("--csv")
    s.set_defaults(func=cmd_cycle)
    return p


def main(argv=None, out=None) -> int:
    out = out if out is not None else sys.stdout
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        args.func(args, out)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except NumericalConditionError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"error: no such file: {exc.filename}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc.filename or ''}: {exc.strerror}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
