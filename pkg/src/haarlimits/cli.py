"""Command-line entry point: ``haarlimits <subcommand> ...`` (or ``python -m haarlimits``).

Exit codes: 0 on success, 1 when a verification fails, 2 on usage errors.
"""

from __future__ import annotations

import argparse
import json
import os
import re
import sys
from dataclasses import asdict, dataclass, field
from fractions import Fraction

from . import __version__

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    """Everything that determines a run."""

    subcommand: str
    flags: dict = field(default_factory=dict)
    output: str = "table"
    precision: int = 50
    seed: int = 0
    threads: int = 1

    @classmethod
    def from_args(cls, ns: argparse.Namespace) -> "RunConfig":
        flags = {k: v for k, v in vars(ns).items() if k not in ("command", "json", "precision", "seed", "threads", "func")}
        return cls(ns.command, flags, "json" if ns.json else "table", ns.precision, ns.seed, ns.threads)


def _ints(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a comma list of integers, got {text!r}")


def _floats(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a comma list of numbers, got {text!r}")


def _emit(cfg: RunConfig, payload: dict, table: str):
    if cfg.output == "json":
        payload = {"config": asdict(cfg), "version": __version__, **payload}
        print(json.dumps(payload, indent=2, default=str))
    else:
        print(table)


# ---------------------------------------------------------------------------
# subcommands


def cmd_wg(cfg: RunConfig) -> int:
    from .combinatorics import format_partition
    from .weingarten import SYMBOLIC_MAX_N, weingarten_values, wg_table

    f = cfg.flags
    if f["n"] < 1:
        raise UsageError("--n must be positive")
    if f["at_N"] is None:
        if f["n"] > SYMBOLIC_MAX_N:
            raise UsageError(f"symbolic tables are available for n <= {SYMBOLIC_MAX_N}")
        t = wg_table(f["group"], f["n"])
        payload = t.to_json()
        lines = [f"C{format_partition(mu)} = {t[mu]}" for mu in t.classes()]
    else:
        vals = weingarten_values(f["group"], f["n"], f["at_N"])
        payload = {
            "group": f["group"].upper(),
            "n": f["n"],
            "N": f["at_N"],
            "provenance": "exact",
            "entries": [{"class": format_partition(mu), "value": str(v)} for mu, v in vals.items()],
        }
        lines = [f"C{format_partition(mu)}(N={f['at_N']}) = {v}" for mu, v in vals.items()]
    _emit(cfg, payload, "\n".join(lines))
    return EXIT_OK


def cmd_moment(cfg: RunConfig) -> int:
    from .moments import MomentQuery, contract_traces, moment

    f = cfg.flags
    if f["trace"]:
        res = contract_traces(f["group"], f["trace"], f["at_N"], threads=cfg.threads)
        payload = {"integrand": f["trace"], "N": f["at_N"], "provenance": "exact", "terms": res.to_json()}
        _emit(cfg, payload, str(res))
        return EXIT_OK
    if f["i"] is None or f["j"] is None:
        raise UsageError("give --i and --j (and --k/--l for U), or --trace")
    q = MomentQuery(f["group"], f["i"], f["j"], f["k"] or (), f["l"] or ())
    v = moment(q, f["at_N"])
    _emit(cfg, {"query": q.describe(), "N": f["at_N"], "value": str(v), "provenance": "exact"}, f"E[{q.describe()}] = {v}")
    return EXIT_OK


_WORD_KEY = re.compile(r"^(Xd|X)+$")


def _parse_eval(text: str):
    from .cumulants import MomentVector

    phi, mixed = {}, {}
    for item in text.split(","):
        if not item.strip():
            continue
        if "=" not in item:
            raise UsageError(f"--eval entries look like phi2=1 or XXd=0.5, got {item!r}")
        key, val = (s.strip() for s in item.split("=", 1))
        try:
            x = Fraction(val)
        except ValueError:
            x = float(val)
        if key.startswith("phi"):
            phi[int(key[3:])] = x
        elif _WORD_KEY.match(key):
            word = tuple("X*" if t == "Xd" else "X" for t in re.findall("Xd|X", key))
            mixed[word] = x
        else:
            raise UsageError(f"unknown --eval key {key!r}")
    return MomentVector(phi, mixed)


def cmd_cumulant(cfg: RunConfig) -> int:
    from .cumulants import MissingMoment, evaluate_normalized, normalize_tag, psi, psi_polarized, UnknownTag

    f = cfg.flags
    try:
        if f["polarized"]:
            tag = normalize_tag(f["polarized"])
            expr = psi_polarized(tag, "X")
            name = f"psi_{tag}"
        else:
            if f["q"] is None or f["q"] < 1:
                raise UsageError("give --q >= 1 or --polarized")
            expr = psi(f["q"], "X")
            name = f"psi_{f['q']}"
    except UnknownTag as e:
        raise UsageError(str(e.args[0]))
    shown = expr
    if f["unnormalized"]:
        shown = _to_unnormalized(expr)
    payload = {"name": name, "normalized": not f["unnormalized"], "expression": shown.to_json(), "provenance": "exact"}
    lines = [f"{name} = {shown}"]
    if f["eval"]:
        m = _parse_eval(f["eval"])
        try:
            val = evaluate_normalized(expr, m)
        except MissingMoment as e:
            raise UsageError(str(e.args[0]))
        payload["value"] = str(val)
        lines.append(f"value = {val}")
    _emit(cfg, payload, "\n".join(lines))
    return EXIT_OK


def _to_unnormalized(expr):
    """Rewrite ``tr`` as ``Tr / N``: coefficients pick up ``N^-#traces``."""
    from .algebra import RationalFunctionN
    from .traces import TracePolynomial

    out = TracePolynomial(expr.context, normalized=False)
    N = RationalFunctionN.N()
    for mono, c in expr.terms.items():
        out._add_term(mono, RationalFunctionN.coerce(c) / N ** len(mono))
    return out


def cmd_expand(cfg: RunConfig) -> int:
    from .series import expand_external_field, expand_hciz

    f = cfg.flags
    if f["integral"] == "ext":
        s = expand_external_field(f["group"], f["order"])
    else:
        s = expand_hciz(f["group"], f["variant"], f["order"])
    lines = [f"{s.kind} expansion over {s.group}(N), large-N free energy:"]
    for n in sorted(s.limit):
        lines.append(f"  order {n}: {s.limit[n]}")
    _emit(cfg, s.to_json(), "\n".join(lines))
    return EXIT_OK


def cmd_universality(cfg: RunConfig) -> int:
    from .series import check_claim2_and_claim3, check_claim_half_external

    f = cfg.flags
    if f["claim"] == 1:
        rep = check_claim_half_external(f["order"])
    else:
        rep = check_claim2_and_claim3(f["order"])
        keep = "symmetric" if f["claim"] == 2 else "generic"
        rep.rows = [r for r in rep.rows if r.note == keep]
        rep.claim = str(f["claim"])
    _emit(cfg, rep.to_json(), rep.table())
    return EXIT_OK if rep.passed else EXIT_FAIL


def cmd_hciz(cfg: RunConfig) -> int:
    import mpmath

    from .hciz import CartanElement, hc_orthogonal_skew, hc_unitary, skew_asymptotic_compare

    f = cfg.flags
    group = f["group"].upper()
    if f["N_list"]:
        # in this mode --a and --b, if given, are the (lo, hi) ranges of the block-parameter profiles
        ranges = {}
        for key in ("a", "b"):
            if f[key] is not None:
                if len(f[key]) != 2:
                    raise UsageError(f"with --N-list, --{key} is a range lo,hi")
                ranges[f"{key}_range"] = tuple(f[key])
        rep = skew_asymptotic_compare(kappa=f["kappa"], N_list=f["N_list"], precision=cfg.precision, **ranges)
        lines = ["    N   N^-2 log Z_U   2 N^-2 log Z_O   gap"]
        for r in rep.rows:
            lines.append(f"{r.N:5d}   {r.free_unitary:12.6e}   {r.free_orthogonal_doubled:14.6e}   {r.gap:.3e}")
        lines.append(f"monotone: {rep.monotone}   slope vs 1/N: {rep.fitted_slope():.4e}")
        _emit(cfg, rep.to_json(), "\n".join(lines))
        return EXIT_OK
    if f["a"] is None or f["b"] is None:
        raise UsageError("give --a and --b, or --N-list")
    if group == "U":
        res = hc_unitary(f["a"], f["b"], f["kappa"], precision=cfg.precision)
    else:
        a = CartanElement("O", f["a"], odd=f["odd"])
        b = CartanElement("O", f["b"], odd=f["odd"])
        res = hc_orthogonal_skew(a, b, f["kappa"], precision=cfg.precision)
    _emit(
        cfg,
        res.to_json(),
        f"Z = {mpmath.nstr(res.value, 15)}  (condition {res.condition:.2e}, {res.precision} digits)",
    )
    return EXIT_OK


def cmd_dpcheck(cfg: RunConfig) -> int:
    from .hciz import dp_elegant_check_unitary, dp_identity_check

    f = cfg.flags
    if f["p"] < 1 or f["p"] > 3 or f["N"] < 2 or f["N"] > 3:
        raise UsageError("supported grid: 1 <= p <= 3, 2 <= N <= 3")
    rep = dp_identity_check(f["beta"], f["p"], f["N"], kappa_order=f["order"])
    payload = {"dp": rep.to_json()}
    lines = [f"D_{rep.p} at beta={rep.beta}, N={rep.N}, through kappa^{rep.kappa_order}: {'PASS' if rep.passed else 'FAIL'}"]
    lines.append(f"  note: {rep.note}")
    ok = rep.passed
    if f["elegant"]:
        if f["beta"] != 2:
            raise UsageError("the Vandermonde form is a beta = 2 statement")
        el = dp_elegant_check_unitary(f["p"], f["N"])
        payload["elegant"] = el.to_json()
        lines.append(f"Vandermonde form: {'PASS' if el.passed else 'FAIL'}")
        lines += [f"  {name}: {'ok' if good else 'FAIL'}" for name, good in el.rows]
        ok = ok and el.passed
    _emit(cfg, payload, "\n".join(lines))
    return EXIT_OK if ok else EXIT_FAIL


def _parse_target(text: str) -> tuple[str, dict]:
    kind, _, rest = text.partition(":")
    kind = kind.strip()
    fields = {}
    sep = ";" if kind == "moment" else None
    if kind == "moment":
        for item in rest.split(sep):
            if item.strip():
                k, _, v = item.partition("=")
                fields[k.strip()] = _ints(v)
    elif kind == "Z":
        # kappa=0.1,a=1,0.5,b=0.3,0.2: values run until the next key
        key = None
        for tok in rest.split(","):
            tok = tok.strip()
            if "=" in tok:
                key, _, tok = tok.partition("=")
                fields[key] = []
            if key is None:
                raise UsageError(f"cannot parse target {text!r}")
            fields[key].append(float(tok))
    else:
        raise UsageError("--target is moment:i=..;j=.. or Z:kappa=..,a=..,b=..")
    return kind, fields


def cmd_mc(cfg: RunConfig) -> int:
    import numpy as np

    from .hciz import CartanElement
    from .moments import MomentQuery
    from .montecarlo import HaarSampler, estimate, moment_integrand, partition_integrand

    f = cfg.flags
    s = HaarSampler(f["group"], f["N"], cfg.seed, f["stream"])
    kind, fields = _parse_target(f["target"])
    if kind == "moment":
        q = MomentQuery(f["group"], fields.get("i", ()), fields.get("j", ()), fields.get("k", ()), fields.get("l", ()))
        if q.max_index() > f["N"]:
            raise UsageError("index exceeds N")
        r = estimate(moment_integrand(q), s, f["samples"], threads=cfg.threads)
        r.label = q.describe()
    else:
        kappa = fields["kappa"][0]
        a, b = fields.get("a"), fields.get("b")
        if a is None or b is None:
            raise UsageError("Z target needs a= and b=")
        if s.group == "U":
            if len(a) != f["N"] or len(b) != f["N"]:
                raise UsageError("U(N) needs N eigenvalues for a and b")
            A, B = np.diag(a), np.diag(b)
        else:
            odd = f["N"] % 2 == 1
            if 2 * len(a) + odd != f["N"] or len(b) != len(a):
                raise UsageError("O(N) needs floor(N/2) block parameters for a and b")
            A, B = CartanElement("O", a, odd).matrix(), CartanElement("O", b, odd).matrix()
        r = estimate(partition_integrand(A, B, kappa, f["N"]), s, f["samples"], threads=cfg.threads)
        r.label = f"Z(kappa={kappa})"
    _emit(cfg, r.to_json(), f"{r.label}: {r.mean:.8g} +- {r.stderr:.3g}  (n={r.n}, seed={r.seed}, stream={r.stream})")
    return EXIT_OK


def cmd_verify_all(cfg: RunConfig) -> int:
    from .verify import INFO, run_criteria

    f = cfg.flags
    echo = None if cfg.output == "json" else print
    results = run_criteria(f["only"] or None, seed=cfg.seed, samples=f["samples"], threads=cfg.threads, echo=echo)
    payload = {"pass": all(r.passed for r in results), "criteria": [r.to_json() for r in results]}
    if f["report"]:
        with open(f["report"], "w") as fh:
            json.dump({"config": asdict(cfg), "version": __version__, **payload}, fh, indent=2, default=str)
    if cfg.output == "json":
        _emit(cfg, payload, "")
    else:
        for r in results:
            for name, ok, detail in r.checks:
                if name.startswith(INFO):
                    print(f"  criterion {r.number}: {name} {'holds' if ok else 'fails'}  {detail}")
                elif not ok:
                    print(f"  criterion {r.number}: FAIL {name}  {detail}")
        print("all criteria pass" if payload["pass"] else "some criteria FAIL")
    return EXIT_OK if payload["pass"] else EXIT_FAIL


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="machine-readable output")
    common.add_argument("--threads", type=int, default=1, help="worker cap")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument(
        "--precision", type=int, default=int(os.environ.get("HAARLIMITS_PRECISION", "50")), help="mpmath digits"
    )
    grp = dict(choices=["o", "u", "O", "U"], required=True)

    p = argparse.ArgumentParser(prog="haarlimits", description="Weingarten calculus and HCIZ expansions on O(N), U(N)")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("wg", parents=[common], help="Weingarten table")
    s.add_argument("--group", **grp)
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--at-N", dest="at_N", type=int)
    s.set_defaults(func=cmd_wg)

    s = sub.add_parser("moment", parents=[common], help="exact Haar moment or trace integral")
    s.add_argument("--group", **grp)
    for name in "ijkl":
        s.add_argument(f"--{name}", type=_ints)
    s.add_argument("--trace", help='e.g. "Tr(A O B Ot)^2"')
    s.add_argument("--at-N", dest="at_N", type=int)
    s.set_defaults(func=cmd_moment)

    s = sub.add_parser("cumulant", parents=[common], help="free cumulant as a trace polynomial")
    s.add_argument("--q", type=int)
    s.add_argument("--polarized", help="2t, 3t, 4t, 4tt or 4t|t")
    s.add_argument("--eval", help="phi1=0,phi2=1,... and mixed words such as XXd=0.5")
    s.add_argument("--unnormalized", action="store_true", help="print in Tr instead of tr")
    s.set_defaults(func=cmd_cumulant)

    s = sub.add_parser("expand", parents=[common], help="free-energy expansion")
    s.add_argument("--integral", choices=["ext", "hciz"], required=True)
    s.add_argument("--group", **grp)
    s.add_argument("--order", type=int, required=True)
    s.add_argument("--variant", choices=["sym", "generic"], default="generic")
    s.set_defaults(func=cmd_expand)

    s = sub.add_parser("universality", parents=[common], help="check F_O = F_U / 2 per monomial")
    s.add_argument("--claim", type=int, choices=[1, 2, 3], required=True)
    s.add_argument("--order", type=int, required=True)
    s.set_defaults(func=cmd_universality)

    s = sub.add_parser("hciz", parents=[common], help="Harish-Chandra determinant formula")
    s.add_argument("--group", **grp)
    s.add_argument("--a", type=_floats)
    s.add_argument("--b", type=_floats)
    s.add_argument("--kappa", type=float, required=True)
    s.add_argument("--odd", action="store_true", help="O(2m+1) instead of O(2m)")
    s.add_argument("--N-list", dest="N_list", type=_ints, help="skew large-N comparison over these N")
    s.set_defaults(func=cmd_hciz)

    s = sub.add_parser("dpcheck", parents=[common], help="exact D_p identity check")
    s.add_argument("--beta", type=int, choices=[1, 2], required=True)
    s.add_argument("--p", type=int, required=True)
    s.add_argument("--N", type=int, required=True)
    s.add_argument("--order", type=int, default=3)
    s.add_argument("--elegant", action="store_true", help="also check the Vandermonde form (beta = 2)")
    s.set_defaults(func=cmd_dpcheck)

    s = sub.add_parser("mc", parents=[common], help="Monte Carlo estimate")
    s.add_argument("--group", **grp)
    s.add_argument("--N", type=int, required=True)
    s.add_argument("--samples", type=int, default=100_000)
    s.add_argument("--stream", type=int, default=0)
    s.add_argument("--target", required=True, help='"moment:i=1,1;j=1,1" or "Z:kappa=0.1,a=1,0,b=1,0"')
    s.set_defaults(func=cmd_mc)

    s = sub.add_parser("verify-all", parents=[common], help="run the acceptance battery")
    s.add_argument("--report", help="write the JSON report here")
    s.add_argument("--samples", type=int, default=1_000_000)
    s.add_argument("--only", type=_ints, help="comma list of criterion numbers")
    s.set_defaults(func=cmd_verify_all)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    cfg = RunConfig.from_args(ns)
    try:
        return ns.func(cfg)
    except UsageError as e:
        parser.print_usage(sys.stderr)
        print(f"haarlimits {cfg.subcommand}: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, KeyError) as e:
        # domain errors on user input (odd parity, index > N, unknown letters, ...)
        print(f"haarlimits {cfg.subcommand}: error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
