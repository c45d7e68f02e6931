"""Command-line front end.

Every verb prints one JSON report ``{command, version, mode, payload, status}``
to stdout.  Exit codes: 0 pass, 1 fail (violation, definitive failed claim or
library error), 2 input error, 3 indeterminate (approximate input could not
be decided).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from typing import Callable

from orbitrep import __version__
from orbitrep.dynamics import (
    MapSpec,
    branch_structure,
    integer_part_branch_count,
    itinerary,
    kneading_data,
)
from orbitrep.errors import (
    ApproxIndeterminate,
    BoundaryHit,
    DomainError,
    OrbitRepError,
    RangeError,
    ResourceLimit,
    ScalarSyntaxError,
)
from orbitrep.numeric import MP, Scalar, parse_scalar, render
from orbitrep.operators import (
    commutant_certificate,
    default_test_vectors,
    equivalence_report,
    mk_convergence,
    remark_checks,
    verify_relations,
)
from orbitrep.operators.verify import KINDS
from orbitrep.orbit import export_orbit_graph, generalized_orbit
from orbitrep.symbolic import (
    PERIODIC_DIGIT_CONVENTION,
    MarkovVerdict,
    admissible_words,
    alpha_from_periodic,
    cylinder_interval,
    markov_analysis,
)

EXIT_PASS, EXIT_FAIL, EXIT_USAGE, EXIT_INDETERMINATE = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


# -- argument handling ------------------------------------------------------------

def _int_list(text: str) -> list[int]:
    try:
        return [int(t) for t in text.replace(" ", "").split(",") if t]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma separated integers, got {text!r}") from None


def _common(p: argparse.ArgumentParser, need_map: bool = True):
    if need_map:
        p.add_argument("--beta", required=True, help="slope, e.g. 2 or (1+1*sqrt(2))/1")
        p.add_argument("--alpha", default="0", help="translation in [0, 1[")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--precision", type=int, default=256, metavar="BITS",
                   help="working precision of approximate arithmetic")
    p.add_argument("--epsilon", type=float, default=None, help="radius attached to decimal literals")


def _orbit_args(p: argparse.ArgumentParser, x_default: str | None = "0"):
    p.add_argument("--x", default=x_default, required=x_default is None, help="orbit root x0")
    p.add_argument("--forward", type=int, default=6)
    p.add_argument("--depth", type=int, default=4)
    p.add_argument("--max-points", type=int, default=5000)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="orbitrep", description="Symbolic dynamics and orbit representations of "
                                                  "x -> beta*x + alpha mod 1")
    parser.add_argument("--version", action="version", version=f"orbitrep {__version__}")
    sub = parser.add_subparsers(dest="verb", required=True, parser_class=_Parser)

    p = sub.add_parser("partition", help="monotonicity partition and branches")
    _common(p)

    p = sub.add_parser("itinerary", help="address sequence of a point")
    _common(p)
    p.add_argument("--x", required=True)
    p.add_argument("--len", type=int, default=12)

    p = sub.add_parser("kneading", help="one-sided itineraries of breakpoint images, 0+ and 1-")
    _common(p)
    p.add_argument("--len", type=int, default=12)

    p = sub.add_parser("words", help="admissible words of length k")
    _common(p)
    p.add_argument("--k", type=int, required=True)

    p = sub.add_parser("cylinder", help="cylinder interval of a word")
    _common(p)
    p.add_argument("--word", type=_int_list, required=True, help="symbols, e.g. 1,2")

    p = sub.add_parser("markov", help="Markov partition detection")
    _common(p)
    p.add_argument("--horizon", type=int, default=32)

    p = sub.add_parser("alpha-from-digits", help="alpha from the digits of a periodic orbit of 0")
    _common(p, need_map=False)
    p.add_argument("--beta", required=True)
    p.add_argument("--digits", type=_int_list, required=True, help="branch offsets, e.g. 0,1")

    p = sub.add_parser("orbit", help="truncated generalized orbit")
    _common(p)
    _orbit_args(p)
    p.add_argument("--dot", metavar="PATH", help="also write the orbit graph in DOT format")

    p = sub.add_parser("equiv", help="orbit equivalence of two points")
    _common(p)
    p.add_argument("--x", required=True)
    p.add_argument("--y", required=True)
    p.add_argument("--budget", type=int, default=32)
    p.add_argument("--forward", type=int, default=4)
    p.add_argument("--depth", type=int, default=3)
    p.add_argument("--max-points", type=int, default=2000)

    p = sub.add_parser("rep-verify", help="verify the generator relations on an orbit")
    _common(p)
    _orbit_args(p)
    p.add_argument("--word-depth", type=int, default=2)
    p.add_argument("--kind", choices=KINDS, default="all")
    p.add_argument("--halo", type=int, default=None,
                   help="extra truncation levels for the operators (default 2*word-depth)")

    p = sub.add_parser("rep-mk", help="residuals of M_k - U on core basis vectors")
    _common(p)
    _orbit_args(p)
    p.add_argument("--k", type=int, default=8, help="largest k")
    p.add_argument("--vectors", type=int, default=10, help="number of core basis vectors")

    p = sub.add_parser("rep-certificate", help="commutant certificate of an orbit basis")
    _common(p)
    _orbit_args(p)
    return parser


# -- report assembly ----------------------------------------------------------------

class Context:
    def __init__(self, args):
        self.args = args
        self.exact = True

    def scalar(self, name: str) -> Scalar:
        text = getattr(self.args, name)
        try:
            v = parse_scalar(text, self.args.epsilon)
        except (ScalarSyntaxError, DomainError) as exc:
            raise UsageError(f"--{name}: {exc}") from None
        self.exact = self.exact and v.is_exact
        return v

    def spec(self) -> MapSpec:
        beta, alpha = self.scalar("beta"), self.scalar("alpha")
        try:
            return MapSpec(beta, alpha)
        except DomainError as exc:
            raise UsageError(str(exc)) from None


Outcome = tuple[dict, str, list[list] | None]


def _csv(rows: list[list]) -> str:
    buf = io.StringIO()
    csv.writer(buf, lineterminator="\n").writerows(rows)
    return buf.getvalue()


def cmd_partition(ctx: Context) -> Outcome:
    spec = ctx.spec()
    bs = branch_structure(spec)
    ip = integer_part_branch_count(spec)
    payload = {"map": spec.to_json(), **bs.to_json(), "integer_part_rule": ip,
               "integer_part_rule_agrees": ip == bs.n}
    rows = [["branch", "left", "right", "offset", "image_left", "image_right"]]
    rows += [[k + 1, *iv.to_json(), o, *img.to_json()]
             for k, (iv, o, img) in enumerate(zip(bs.intervals, bs.offsets, bs.images))]
    return payload, "pass", rows


def cmd_itinerary(ctx: Context) -> Outcome:
    spec = ctx.spec()
    x = ctx.scalar("x")
    try:
        rec = itinerary(spec, x, ctx.args.len)
    except BoundaryHit as exc:
        return {"map": spec.to_json(), "x": render(x), "boundary_hit": {"step": exc.step,
                                                                       "point": render(exc.point)}}, "fail", None
    rows = [["step", "point", "symbol"]] + [[j, render(p), s] for j, (p, s) in enumerate(zip(rec.points,
                                                                                              rec.symbols))]
    return {"map": spec.to_json(), "x": render(x), **rec.to_json()}, "pass", rows


def cmd_kneading(ctx: Context) -> Outcome:
    spec = ctx.spec()
    recs = kneading_data(spec, ctx.args.len)
    rows = [["label", "symbols", "preperiod", "period"]]
    rows += [[r.label, "".join(map(str, r.symbols)), *(r.periodicity or ("", ""))] for r in recs]
    return {"map": spec.to_json(), "sequences": [r.to_json() for r in recs]}, "pass", rows


def cmd_words(ctx: Context) -> Outcome:
    spec = ctx.spec()
    words = admissible_words(spec, ctx.args.k)
    rows = [["word"]] + [["".join(map(str, w)) if max(w) < 10 else ".".join(map(str, w))] for w in words]
    return {"map": spec.to_json(), "k": ctx.args.k, "count": len(words),
            "words": [list(w) for w in words]}, "pass", rows


def cmd_cylinder(ctx: Context) -> Outcome:
    spec = ctx.spec()
    iv = cylinder_interval(spec, ctx.args.word)
    return {"map": spec.to_json(), "word": ctx.args.word, "empty": iv is None,
            "interval": None if iv is None else iv.to_json(),
            "length_approx": None if iv is None else float(iv.length)}, "pass", None


def cmd_markov(ctx: Context) -> Outcome:
    spec = ctx.spec()
    rep = markov_analysis(spec, ctx.args.horizon)
    payload = {"map": spec.to_json(), **rep.to_json()}
    status = "pass"
    if rep.alpha_formula_check is not None and not rep.alpha_formula_check["match"]:
        status = "fail"
    if rep.verdict is MarkovVerdict.INDETERMINATE:
        status = "indeterminate"
    rows = None
    if rep.transition_matrix is not None:
        m = len(rep.transition_matrix)
        rows = [["cell", *range(1, m + 1)]] + [[i + 1, *r] for i, r in enumerate(rep.transition_matrix)]
    return payload, status, rows


def cmd_alpha_from_digits(ctx: Context) -> Outcome:
    beta = ctx.scalar("beta")
    try:
        alpha = alpha_from_periodic(beta, ctx.args.digits)
    except RangeError as exc:
        return {"beta": render(beta), "digits": ctx.args.digits, "error": str(exc)}, "fail", None
    return {"beta": render(beta), "digits": ctx.args.digits, "convention": PERIODIC_DIGIT_CONVENTION,
            "alpha": render(alpha), "alpha_approx": float(alpha)}, "pass", None


def _basis(ctx: Context):
    spec = ctx.spec()
    x = ctx.scalar("x")
    a = ctx.args
    return spec, generalized_orbit(spec, x, a.forward, a.depth, a.max_points)


def cmd_orbit(ctx: Context) -> Outcome:
    spec, basis = _basis(ctx)
    if ctx.args.dot:
        with open(ctx.args.dot, "w") as fh:
            fh.write(export_orbit_graph(basis).to_dot())
    payload = basis.to_json()
    rows = [["index", "point", "approx", "forward_steps", "preimage_depth", "image_in_basis",
             "all_preimages_in_basis"]]
    rows += [[p["index"], p["point"], p["approx"], p["forward_steps"], p["preimage_depth"],
              p["image_in_basis"], p["all_preimages_in_basis"]] for p in payload["points"]]
    return payload, "pass", rows


def cmd_equiv(ctx: Context) -> Outcome:
    spec = ctx.spec()
    x, y = ctx.scalar("x"), ctx.scalar("y")
    a = ctx.args
    rep = equivalence_report(spec, x, y, a.budget, (a.forward, a.depth, a.max_points))
    status = "fail" if rep.witness_replayed is False or rep.cycles_disjoint is False else "pass"
    return {"map": spec.to_json(), "x": render(x), "y": render(y), "budget": a.budget,
            **rep.to_json()}, status, None


def cmd_rep_verify(ctx: Context) -> Outcome:
    spec, basis = _basis(ctx)
    a = ctx.args
    halo = 2 * a.word_depth if a.halo is None else a.halo
    rep = verify_relations(None, basis, a.kind, a.word_depth, halo=halo)
    remarks = remark_checks(None, basis, halo=halo)
    payload = {"map": spec.to_json(), "root": render(basis.root), "truncated": basis.truncated,
               **rep.to_json(), "remarks": remarks.to_json()}
    status = "pass" if rep.passed and remarks.consistent else "fail"
    rows = [["relation", "instances", "columns_checked", "columns_censored", "evaluations", "violations"]]
    rows += [[r.name, r.instances, r.columns_checked, r.columns_censored, r.evaluations, r.violation_count]
             for r in rep.relations]
    return payload, status, rows


def cmd_rep_mk(ctx: Context) -> Outcome:
    spec, basis = _basis(ctx)
    vecs = default_test_vectors(basis, ctx.args.vectors)
    if not vecs:
        return {"map": spec.to_json(), "error": "no core basis vectors"}, "fail", None
    rep = mk_convergence(None, basis, ctx.args.k, vecs)
    payload = {"map": spec.to_json(), "root": render(basis.root), **rep.to_json()}
    status = "pass" if rep.within_bound else "fail"
    rows = [["k", "max_residual", "bound", "within_bound"]]
    rows += [[r["k"], r["max_residual"], r["bounds"][0], r["within_bound"]] for r in payload["rows"]]
    return payload, status, rows


def cmd_rep_certificate(ctx: Context) -> Outcome:
    spec, basis = _basis(ctx)
    cert = commutant_certificate(basis)
    return {"map": spec.to_json(), "root": render(basis.root), **cert.to_json()}, \
        "pass" if cert.certified else "fail", None


COMMANDS: dict[str, Callable[[Context], Outcome]] = {
    "partition": cmd_partition,
    "itinerary": cmd_itinerary,
    "kneading": cmd_kneading,
    "words": cmd_words,
    "cylinder": cmd_cylinder,
    "markov": cmd_markov,
    "alpha-from-digits": cmd_alpha_from_digits,
    "orbit": cmd_orbit,
    "equiv": cmd_equiv,
    "rep-verify": cmd_rep_verify,
    "rep-mk": cmd_rep_mk,
    "rep-certificate": cmd_rep_certificate,
}

_EXIT = {"pass": EXIT_PASS, "fail": EXIT_FAIL, "indeterminate": EXIT_INDETERMINATE}


def _echo(args) -> dict:
    return {k: v for k, v in sorted(vars(args).items()) if v is not None}


def execute(args) -> tuple[str, int]:
    """Run a parsed command; returns the text to print and the exit code."""
    ctx = Context(args)
    old_prec = MP.prec
    MP.prec = max(53, args.precision)
    try:
        try:
            payload, status, rows = COMMANDS[args.verb](ctx)
        except ApproxIndeterminate as exc:
            payload, status, rows = {"error": str(exc)}, "indeterminate", None
        except (BoundaryHit, ResourceLimit, OrbitRepError) as exc:
            if isinstance(exc, DomainError):
                raise UsageError(str(exc)) from None
            payload, status, rows = {"error": f"{type(exc).__name__}: {exc}"}, "fail", None
    finally:
        MP.prec = old_prec
    if args.format == "csv":
        if rows is None:
            raise UsageError(f"{args.verb} has no tabular output; use --format json")
        return _csv(rows), _EXIT[status]
    report = {
        "command": _echo(args),
        "version": __version__,
        "mode": "exact" if ctx.exact else "approx",
        "payload": payload,
        "status": status,
    }
    return json.dumps(report, indent=2) + "\n", _EXIT[status]


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        text, code = execute(args)
    except UsageError as exc:
        print(f"orbitrep: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    sys.stdout.write(text)
    return code


if __name__ == "__main__":
    raise SystemExit(main())
