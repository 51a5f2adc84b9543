"""Command-line batch runner.

Every suite returns a report dict with a sorted list of assertions; the
process exits 0 when all pass, 1 when any fails and 2 on usage errors.
Reports contain no timestamps, so equal arguments give byte-identical output.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from fractions import Fraction

import numpy as np

from . import __version__
from .approximation import ac_test, approximate_simple, dyadic_cover, non_ac_split
from .associate import SearchClass, associate_norm, holder_check, second_associate_lower_bound
from .dilation import dilate, dilation_sweep, empirical_dilation_ratio, split_rearrangement_check, shift_formula, shift_position
from .measure import Box
from .quasinorm import NormSelectorError, check_quasinorm_axioms, disjoint_witness_pair, linf, lp, parse_norm
from .rearrangement import distribution_function, nonincreasing_rearrangement, radial_rearrangement, shuffle_pieces
from .sampling import random_cover_instance, random_profile, random_step_function, rng_from_seed
from .series import (
    chained_triangle_check,
    pairing_functional,
    parse_generator,
    resonance_witness,
    riesz_fischer_sum,
    spike,
)
from .stepfunction import StepFunction

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


# -- report plumbing -----------------------------------------------------------------


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if math.isfinite(x) else ("inf" if x > 0 else "-inf" if x < 0 else "nan")
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    return obj


class Report:
    def __init__(self, suite: str, **meta):
        self.suite = suite
        self.meta = meta
        self.assertions: list[dict] = []
        self.data: dict = {}

    def check(self, name: str, anchor: str, ok: bool, margin=None, witness=None) -> bool:
        self.assertions.append(
            {"name": name, "anchor": anchor, "status": "pass" if ok else "fail", "margin": margin, "witness": witness}
        )
        return ok

    @property
    def passed(self) -> bool:
        return all(a["status"] == "pass" for a in self.assertions)

    def to_dict(self) -> dict:
        return _clean(
            {
                "suite": self.suite,
                "meta": self.meta,
                "passed": self.passed,
                "assertions": sorted(self.assertions, key=lambda a: a["name"]),
                "data": self.data,
            }
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["name", "status", "margin"])
        for a in sorted(self.assertions, key=lambda a: a["name"]):
            w.writerow([a["name"], a["status"], _clean(a["margin"])])
        return buf.getvalue()


def _norm(args):
    try:
        return parse_norm(args.norm)
    except NormSelectorError as exc:
        raise UsageError(str(exc)) from exc


def _samples(rng, count, **kw):
    return [random_step_function(rng, **kw) for _ in range(count)]


def _parse_grid(text: str) -> list[Fraction]:
    """``start:stop:step`` (inclusive) or a comma list."""
    try:
        if ":" in text:
            a, b, c = (Fraction(x) for x in text.split(":"))
            if c <= 0:
                raise ValueError
            out, x = [], a
            while x <= b + c / 1000:
                out.append(x)
                x += c
            return out
        return [Fraction(x) for x in text.split(",") if x]
    except (ValueError, ZeroDivisionError) as exc:
        raise UsageError(f"malformed grid {text!r}") from exc


def _load_function(path: str) -> StepFunction:
    try:
        with open(path) as fh:
            return StepFunction.from_json(fh.read())
    except (OSError, ValueError, KeyError, TypeError) as exc:
        raise UsageError(f"cannot read step function from {path}: {exc}") from exc


# -- suites ------------------------------------------------------------------------------


def suite_axioms(args) -> Report:
    X = _norm(args)
    rng = rng_from_seed(args.seed)
    samples = _samples(rng, args.samples, complex_prob=0.2)
    samples += list(disjoint_witness_pair(X))
    rep = check_quasinorm_axioms(X, samples)
    r = Report("axioms", norm=X.selector, seed=args.seed, samples=args.samples)
    r.data = {
        "modulus_of_concavity": X.C,
        "empirical_C": rep.empirical_C,
        "worst_pair": rep.worst_pair,
        "checks": rep.checks,
        "failures": [vars(f) for f in rep.failures[:20]],
    }
    r.check("axioms", "quasinorm and function-norm axioms", rep.passed, witness=r.data["failures"][:1] or None)
    r.check("triangle constant", "modulus of concavity", rep.empirical_C <= X.C * (1 + 1e-9), margin=X.C - rep.empirical_C)
    if X.name == "lp" and X.param("p") < 1:
        target = 2.0 ** (1 / X.param("p") - 1)
        r.check("triangle tightness", "disjoint equal-norm pair", abs(rep.empirical_C - target) <= 1e-9, margin=rep.empirical_C - target)
    return r


def suite_rearrangement(args) -> Report:
    rng = rng_from_seed(args.seed)
    r = Report("rearrangement", seed=args.seed, samples=args.samples)
    bad_eq = bad_rad = bad_shuf = None
    for i in range(args.samples):
        f = random_step_function(rng, complex_prob=0.2)
        prof = nonincreasing_rearrangement(f)
        mu = distribution_function(f)
        for s in (Fraction(0),) + prof.values:
            if mu(s) != prof.distribution(s):
                bad_eq = i if bad_eq is None else bad_eq
        rad = radial_rearrangement(f).to_step_function()
        if nonincreasing_rearrangement(rad) != prof:
            bad_rad = i if bad_rad is None else bad_rad
        if nonincreasing_rearrangement(shuffle_pieces(f, rng)) != prof:
            bad_shuf = i if bad_shuf is None else bad_shuf
    r.check("equimeasurable", "distribution of f* equals that of |f|", bad_eq is None, witness=bad_eq)
    r.check("radial profile", "rearranging the radial rearrangement", bad_rad is None, witness=bad_rad)
    r.check("shuffle invariance", "measure-preserving maps", bad_shuf is None, witness=bad_shuf)
    return r


def suite_lacunary(args) -> Report:
    rng = rng_from_seed(args.seed)
    r = Report("lacunary", seed=args.seed, samples=args.samples)
    worst, points, witness = None, 0, None
    for _ in range(args.samples):
        g = random_profile(rng)
        ts = [Fraction(float(x)) for x in rng.uniform(0, float(g.support_measure) * 0.7, 1000)]
        rep = split_rearrangement_check(g, ts)
        points += rep.points
        if worst is None or rep.worst_margin < worst:
            worst = rep.worst_margin
        witness = witness or rep.counterexample
    r.check("rearranged lacunary restriction", "(R_i g)*(t) <= g(3t/2)", witness is None and worst >= Fraction(-1, 10**12), margin=worst, witness=witness)
    shifts_ok = True
    for k in range(0, 5):
        lo, hi = Fraction(1, 2 ** (2 * k + 2)), Fraction(1, 2 ** (2 * k + 1))
        for j in range(1, 16):
            x = lo + (hi - lo) * Fraction(j, 16)
            shifts_ok &= shift_position(x) == shift_formula(x, k)
    r.check("shift map", "t_x = x - (2/3) 2^-(2k+2)", shifts_ok)
    r.data = {"points": points, "worst_margin": worst}
    return r


def suite_dilation(args) -> Report:
    X = _norm(args)
    n = args.n
    rng = rng_from_seed(args.seed)
    samples = _samples(rng, args.samples, dim=n, signed=False) if n > 1 else _samples(rng, args.samples)
    grid = _parse_grid(args.a_grid)
    sweep = dilation_sweep(X, grid, samples, n)
    r = Report("dilation-sweep", norm=X.selector, n=n, seed=args.seed, samples=args.samples)
    r.data = {"rows": [{"a": row.a, "empirical_ratio": row.ratio, "tbd_bound": row.bound} for row in sweep.rows]}
    r.check("within dilation bound", "operator-norm bound for D_a", sweep.within_bound,
            margin=min(row.bound - row.ratio for row in sweep.rows))
    r.check("monotone in a", "a < b implies ||D_b f|| <= ||D_a f||", sweep.monotone, witness=sweep.monotone_violation)
    b = Fraction(2, 3) if n == 1 else None
    if b is not None:
        d = empirical_dilation_ratio(X, b, samples, n)
        r.check("dilation by 2/3", "||D_b|| <= 2C", d.ratio <= 2 * X.C * (1 + 1e-12), margin=2 * X.C - d.ratio)
    if X.name == "lp":
        p = X.param("p")
        worst = 0.0
        for a in grid:
            for f in samples:
                nf = X(f)
                want = float(a) ** (-n / p) * nf
                worst = max(worst, abs(X(dilate(f, a)) - want) / want)
        r.check("Lp closed form", "||D_a f||_p = a^(-n/p) ||f||_p", worst <= 1e-10, margin=worst)
    return r


def suite_associate(args) -> Report:
    X = _norm(args)
    rng = rng_from_seed(args.seed)
    search = SearchClass(refine=args.refine, value_grid=tuple(_parse_grid(args.value_grid)))
    r = Report("associate", norm=X.selector, seed=args.seed, samples=args.samples, search=search.describe())
    holder_bad = second_bad = None
    worst_witness_slack = 0.0
    values = []
    small = SearchClass(refine=0, value_grid=(Fraction(1),))
    for i in range(args.samples):
        f = random_step_function(rng, max_pieces=4, complex_prob=0.2)
        g = random_step_function(rng, max_pieces=4)
        h = holder_check(f, g, X, search)
        values.append(associate_norm(f, X, search).value)
        worst_witness_slack = max(worst_witness_slack, abs(h.witness_slack))
        if not h.holds and holder_bad is None:
            holder_bad = i
        s = second_associate_lower_bound(f, X, small)
        if not s.holds and second_bad is None:
            second_bad = i
    r.check("Hoelder inequality", "int|fg| <= ||g|| ||f||'", holder_bad is None, witness=holder_bad)
    r.check("witness attains", "zero slack at the searched maximiser", worst_witness_slack <= 1e-9, margin=worst_witness_slack)
    r.check("second associate", "||f||'' <= ||f||", second_bad is None, witness=second_bad)
    r.data = {"associate_values": values}
    if X.name == "lp" and X.param("p") > 1:
        p = X.param("p")
        q = p / (p - 1)
        f = StepFunction.from_intervals([(Fraction(j, 2), Fraction(j + 1, 2), Fraction(j + 1, 3)) for j in range(8)])
        got = associate_norm(f, X, SearchClass(value_grid=(Fraction(1),))).value
        want = sum(float(v) ** q * float(b.measure) for b, v in f.pieces) ** (1 / q)
        r.check("dual closed form", "associate of Lp is Lp'", abs(got - want) <= 1e-6 * want, margin=abs(got - want) / want)
    return r


def suite_cover(args) -> Report:
    rng = rng_from_seed(args.seed)
    r = Report("cover", seed=args.seed, samples=args.samples)
    failures, rows = [], []
    for i in range(args.samples):
        K, G, eps, k0 = random_cover_instance(rng, dim=1 + (i % 2))
        res = dyadic_cover(K, G, eps, k0)
        rows.append({"k": res.k, "cubes": res.cube_count, "excess": res.excess, "eps": eps})
        if not res.ok or res.k < k0 or not res.excess < eps:
            failures.append(i)
    r.check("cover properties", "inside G, covers K, small excess, cubes meet K", not failures, witness=failures[:5] or None)
    r.data = {"instances": rows}
    return r


def suite_approximate(args) -> Report:
    X = _norm(args)
    eps_list = _parse_grid(args.eps) if isinstance(args.eps, str) else [Fraction(args.eps)]
    r = Report("approximate", norm=X.selector, seed=args.seed, samples=args.samples, eps=eps_list)
    if getattr(args, "input", None):
        fs = [_load_function(args.input)]
    else:
        rng = rng_from_seed(args.seed)
        fs = _samples(rng, args.samples, complex_prob=0.3)
    traces, bad_bound, bad_budget, bad_sum = [], [], [], []
    last_s = None
    for i, f in enumerate(fs):
        for eps in eps_list:
            s, bound, tr = approximate_simple(f, X, float(eps))
            last_s = s
            measured = X(f - s)
            if measured > bound * (1 + 1e-12):
                bad_bound.append(i)
            if tr is not None:
                traces.append(tr.to_dict())
                if not tr.budgets_ok():
                    bad_budget.append(i)
                if measured > tr.weighted_sum * (1 + 1e-9):
                    bad_sum.append(i)
    r.check("certified bound", "(2C + C^2 + C^3 + C^4 + C^5) eps", not bad_bound, witness=bad_bound[:5] or None)
    r.check("term budgets", "each construction term within its budget", not bad_budget, witness=bad_budget[:5] or None)
    r.check("term sum", "error below the weighted sum of the terms", not bad_sum, witness=bad_sum[:5] or None)
    r.data = {"traces": traces}
    if getattr(args, "out_function", None) and last_s is not None:
        with open(args.out_function, "w") as fh:
            fh.write(last_s.to_json(indent=2) + "\n")
    if getattr(args, "trace", None):
        with open(args.trace, "w") as fh:
            fh.write(json.dumps(_clean(traces), sort_keys=True, indent=2) + "\n")
    return r


def suite_ac(args) -> Report:
    r = Report("absolute-continuity")
    f = StepFunction.indicator(Box.interval(0, 1))
    lp_w = ac_test(f, lp(0.5), depth=20)
    sup_w = ac_test(f, linf(), depth=20)
    r.check("Lp is AC", "norms vanish along shrinking sets", lp_w.verdict == "AC")
    r.check("sup norm is not AC", "norms stay at 1", sup_w.verdict == "non-AC")
    split = non_ac_split(f, linf(), lambda k: [Box.interval(0, Fraction(1, 2**k))], 0.5, 5)
    r.check("non-AC split", "m pieces, norms > eps, disjoint, dominated", split.ok and len(split.pieces) == 5, witness=split.indices)
    return r


def suite_riesz_fischer(args) -> Report:
    X = _norm(args)
    gen = parse_generator(args.generator)
    r = Report("riesz-fischer", norm=X.selector, generator=args.generator, prefix=args.prefix, seed=args.seed)
    try:
        cert = riesz_fischer_sum(gen, X, args.prefix)
    except ValueError as exc:
        r.check("tail condition", "weighted absolute summability", False, witness=str(exc))
        return r
    for k, v in cert.holds.items():
        r.check(k, "Riesz-Fischer certificate", v)
    r.data = cert.to_dict()
    rng = rng_from_seed(args.seed)
    bad = None
    for i in range(args.samples):
        rep = chained_triangle_check(_samples(rng, 8, complex_prob=0.2), X)
        if not rep.holds and bad is None:
            bad = i
    r.check("chained quasi-triangle", "||sum x_n|| <= sum C^(n+1) ||x_n||", bad is None, witness=bad)
    return r


def suite_resonance(args) -> Report:
    X = _norm(args)
    r = Report("resonance", norm=X.selector, prefix=args.prefix)
    C = X.C
    w = resonance_witness(lambda n: spike(n, C), X, prefix=args.prefix)
    r.check("divergence", "Phi(f) >= (2C)^(-k-1) Phi(g_k) >= k", w.ok and all(w.phi_f >= k for k in range(args.prefix + 1)),
            margin=float(w.phi_f) - args.prefix)
    r.check("finite quasinorm", "weighted series bound", w.norm_prefix <= w.norm_bound, margin=w.norm_bound - w.norm_prefix)
    f0 = StepFunction.indicator(Box.interval(0, 1))
    w2 = resonance_witness(lambda n: spike(n, C), X, pairing_functional(f0), prefix=args.prefix)
    r.check("pairing divergence", "int|f0 g| unbounded on the unit ball", w2.ok)
    r.data = {"divergence": w.divergence_log(), "norm_bound": w.norm_bound, "norm_prefix": w.norm_prefix}
    return r


SUITES = {
    "axioms": suite_axioms,
    "rearrangement": suite_rearrangement,
    "lacunary": suite_lacunary,
    "associate": suite_associate,
    "dilation-sweep": suite_dilation,
    "cover": suite_cover,
    "approximate": suite_approximate,
    "absolute-continuity": suite_ac,
    "riesz-fischer": suite_riesz_fischer,
    "resonance": suite_resonance,
}

_DEFAULT_NORM = {
    "axioms": "lp:p=0.5",
    "associate": "lp:p=2",
    "dilation-sweep": "lorentz:p=2,q=0.5",
    "approximate": "lp:p=0.5",
    "riesz-fischer": "lp:p=0.5",
    "resonance": "lp:p=0.5",
}


# -- argument parsing ------------------------------------------------------------------


def _common(p: argparse.ArgumentParser, norm: str | None, samples: int) -> None:
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--samples", type=int, default=samples)
    p.add_argument("--out", help="write the report here instead of stdout")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--norm", default=norm or "lp:p=0.5", help="lp:p=..., lorentz:p=...,q=...[,C=...] or linf")
    p.add_argument("--config", help="key=value file supplying defaults for these options")


def _suite_options(p: argparse.ArgumentParser, suite: str) -> None:
    if suite == "associate":
        p.add_argument("--refine", type=int, default=0)
        p.add_argument("--value-grid", default="0,1/2,1")
    elif suite == "dilation-sweep":
        p.add_argument("--n", type=int, default=1)
        p.add_argument("--a-grid", default="0.1:1.0:0.1")
    elif suite == "approximate":
        p.add_argument("--eps", default="1/64")
        p.add_argument("--input", help="step function JSON to approximate")
        p.add_argument("--out-function", dest="out_function", help="write the simple function here")
        p.add_argument("--trace", help="write the construction terms here")
    elif suite == "riesz-fischer":
        p.add_argument("--generator", default="geometric:ratio=0.25")
        p.add_argument("--prefix", type=int, default=20)
    elif suite == "resonance":
        p.add_argument("--prefix", type=int, default=10)


_SAMPLE_DEFAULT = {"axioms": 200, "rearrangement": 500, "lacunary": 100, "associate": 100, "dilation-sweep": 200, "cover": 50, "approximate": 10, "riesz-fischer": 100}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qbfs", description="Exact verification suites for quasi-Banach function spaces.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    verify = sub.add_parser("verify", help="run a verification suite")
    vsub = verify.add_subparsers(dest="suite", required=True)
    for name in SUITES:
        p = vsub.add_parser(name)
        _common(p, _DEFAULT_NORM.get(name), _SAMPLE_DEFAULT.get(name, 1))
        _suite_options(p, name)

    for name in ("associate", "dilation-sweep", "approximate", "riesz-fischer", "resonance", "cover"):
        p = sub.add_parser(name, help=f"run the {name} suite")
        _common(p, _DEFAULT_NORM.get(name), _SAMPLE_DEFAULT.get(name, 1))
        _suite_options(p, name)
        if name == "dilation-sweep":
            p.set_defaults(format="csv")

    run = sub.add_parser("run", help="run a suite described by a key=value config file")
    run.add_argument("config", help="file with lines like suite=axioms, norm=lp:p=0.5, seed=7")
    run.add_argument("--out")
    return parser


def read_config(path: str) -> dict[str, str]:
    out = {}
    try:
        with open(path) as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from exc
    for n, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{n}: expected key=value")
        k, v = line.split("=", 1)
        out[k.strip().replace("_", "-")] = v.strip()
    return out


def _config_argv(cfg: dict[str, str], skip=("suite", "subcommand", "command")) -> list[str]:
    argv = []
    for k, v in cfg.items():
        if k not in skip:
            argv += [f"--{k}", v]
    return argv


def _render(report: Report, fmt: str) -> str:
    if report.suite == "dilation-sweep" and fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["a", "empirical_ratio", "tbd_bound"])
        for row in report.data["rows"]:
            w.writerow([float(row["a"]), repr(float(row["empirical_ratio"])), repr(float(row["tbd_bound"]))])
        return buf.getvalue()
    return report.to_csv() if fmt == "csv" else report.to_json()


def _dispatch(args) -> Report:
    suite = args.suite if args.command == "verify" else args.command
    return SUITES[suite](args)


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0) and EXIT_USAGE
    try:
        if args.command == "run":
            cfg = read_config(args.config)
            suite = cfg.get("suite") or cfg.get("subcommand") or cfg.get("command")
            if suite not in SUITES:
                raise UsageError(f"config names unknown suite {suite!r}")
            sub_argv = ["verify", suite] + _config_argv(cfg)
            if args.out:
                sub_argv += ["--out", args.out]
            return main(sub_argv)
        if getattr(args, "config", None):
            cfg = read_config(args.config)
            head = 2 if argv[0] == "verify" else 1
            args = parser.parse_args(argv[:head] + _config_argv(cfg) + argv[head:])
        report = _dispatch(args)
    except UsageError as exc:
        print(f"qbfs: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    text = _render(report, args.format)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK if report.passed else EXIT_FAIL


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
