"""``pfab`` command line.

Exit status: 0 on success, 1 on bad input (domain or usage errors), 2 when a
numerical procedure fails.  Floats are written with 17 significant digits,
CSV files carry a header row, and every randomized command takes ``--seed``
so that reruns are byte-identical.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

import numpy as np

from .errors import DomainError, NumericalError, PfabError, ReductionError
from .systems import PerturbationPoly, SystemSpec, branch_of, make_system

log = logging.getLogger("pfab")

FMT = "%.17g"


def _f(x) -> str:
    return FMT % float(x)


@dataclass(frozen=True)
class RunConfig:
    """Normalised command-line settings shared by the subcommands."""

    system: SystemSpec
    command: str
    pert_path: Path | None = None
    hmin: float | None = None
    hmax: float | None = None
    count: int = 11
    spacing: str = "linear"
    seed: int = 0
    output: Path | None = None

    def grid(self) -> np.ndarray:
        if self.hmin is None or self.hmax is None:
            raise DomainError("an h-grid needs --hmin and --hmax (or a single --h)")
        if self.count < 2:
            raise DomainError("grid count must be at least 2")
        lo, hi = sorted((float(self.hmin), float(self.hmax)))
        iv = branch_of(self.system, lo)
        if not iv.contains(hi):
            raise DomainError(f"h-range [{lo}, {hi}] is not inside one interval of Sigma")
        if self.spacing == "log":
            if lo * hi <= 0:
                raise DomainError("log spacing needs an h-range of one sign")
            g = np.geomspace(abs(lo), abs(hi), self.count)
            return np.sort(g if lo > 0 else -g)
        return np.linspace(lo, hi, self.count)

    def pert(self) -> PerturbationPoly:
        if self.pert_path is None:
            raise DomainError("this command needs --config PERT.json")
        try:
            return PerturbationPoly.from_json(Path(self.pert_path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise DomainError(f"cannot read perturbation file {self.pert_path}: {exc}") from exc


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


# --------------------------------------------------------------------------
# output helpers
# --------------------------------------------------------------------------
class _Out:
    def __init__(self, path):
        self.path = path
        self.buf = io.StringIO()

    def write(self, s: str):
        self.buf.write(s)

    def close(self):
        text = self.buf.getvalue()
        if self.path is None or str(self.path) == "-":
            sys.stdout.write(text)
        else:
            Path(self.path).write_text(text)


def _csv(out: _Out, header, rows):
    w = csv.writer(out, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_f(x) if isinstance(x, (float, np.floating)) else x for x in r])


def _json(out: _Out, obj):
    out.write(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def _frac(x) -> str:
    return str(Fraction(x))


def _bound(x):
    # JSON has no infinities
    return x if np.isfinite(x) else ("inf" if x > 0 else "-inf")


# --------------------------------------------------------------------------
# subcommands
# --------------------------------------------------------------------------
def cmd_system(cfg: RunConfig, args, out: _Out):
    s = cfg.system
    _json(out, {
        "system": s.kind.value,
        "k": _frac(s.k),
        "lambda0": _frac(s.lambda0),
        "lambda1": _frac(s.lambda1),
        "lambda2": _frac(s.lambda2),
        "sigma": [{"lo": _bound(iv.lo), "hi": _bound(iv.hi), "branch": iv.branch, "orientation": iv.orientation}
                  for iv in s.sigma],
        "centers": [{"x": _frac(c.x), "y": _frac(c.y), "h": _frac(c.h)} for c in s.centers],
    })


def _hs(cfg: RunConfig, args):
    return [float(args.h)] if args.h is not None else list(cfg.grid())


def cmd_integral(cfg, args, out):
    from .quadrature import IntegralIndex, integral_I

    idx = IntegralIndex.of(args.i, args.j)
    hs = _hs(cfg, args)
    if args.h is not None:
        out.write(_f(integral_I(cfg.system, hs[0], idx)) + "\n")
        return
    _csv(out, ["h", str(idx)], [(h, integral_I(cfg.system, h, idx)) for h in hs])


def cmd_reduce(cfg, args, out):
    from .reduction import degree_details, reduce_integral, reduce_melnikov

    if cfg.pert_path is not None:
        pert = cfg.pert()
        combo = reduce_melnikov(cfg.system, pert)
        det = degree_details(combo, pert.n)
        payload = {"combination": combo.to_json_dict(), "text": str(combo),
                   "degree_check": {"ok": det["ok"], "prefactor": str(det["prefactor"]),
                                    "entries": {k: list(v) for k, v in det["entries"].items()}}}
        _json(out, payload)
        return
    if args.i is None or args.j is None:
        raise DomainError("reduce needs --i and --j, or --config")
    combo = reduce_integral(cfg.system, (Fraction(args.i), int(args.j)))
    if args.json:
        _json(out, combo.to_json_dict())
    else:
        out.write(str(combo) + "\n")


def cmd_pf(cfg, args, out):
    from .picard_fuchs import pf_matrix, pf_residual

    if args.action == "matrix":
        if args.h is None:
            raise DomainError("pf matrix needs --h")
        A = pf_matrix(cfg.system, args.h)
        _csv(out, [f"col{c}" for c in range(A.shape[1])], [tuple(float(x) for x in row) for row in A])
        return
    rows = [(h, pf_residual(cfg.system, h, args.step)) for h in _hs(cfg, args)]
    _csv(out, ["h", "residual"], rows)


def cmd_melnikov(cfg, args, out):
    from .melnikov import k_map, melnikov_field, melnikov_zero_reports
    from .symfield import evaluate_certified

    pert = cfg.pert()
    if args.action == "zeros":
        reps = melnikov_zero_reports(cfg.system, pert, grid=args.grid)
        zero = all(r.identically_zero for r in reps)
        _json(out, {
            "system": cfg.system.kind.value,
            "status": "identically zero" if zero else "ok",
            "total_count": sum(r.count for r in reps),
            "annuli": [dict(r.to_json_dict(), branch=iv.branch) for r, iv in zip(reps, cfg.system.sigma)],
        })
    elif args.action == "eval":
        rows = []
        for h in _hs(cfg, args):
            e = melnikov_field(cfg.system, pert, branch_of(cfg.system, h).branch)
            rows.append((h, float(evaluate_certified(e, [h])[0])))
        _csv(out, ["h", "M"], rows)
    else:  # kmap
        branch = args.branch
        kv = k_map(cfg.system, pert, branch)
        _json(out, {"system": kv.kind.value, "branch": kv.branch, "k": list(kv.values),
                    "c1": kv.c1, "c2": kv.c2})


def _family(cfg, args):
    from .symfield import basis_family, melnikov_family

    if args.family == "printed":
        return basis_family(cfg.system)
    return melnikov_family(cfg.system, args.branch)


def cmd_wronskian(cfg, args, out):
    from .symfield import evaluate_stable, wronskian

    fam = _family(cfg, args)
    ks = [args.k] if args.k else list(range(1, len(fam) + 1))
    hs = _hs(cfg, args)
    if args.h is not None and args.k:
        out.write(_f(evaluate_stable(wronskian(fam, args.k), hs[0])) + "\n")
        return
    rows = []
    for k in ks:
        W = wronskian(fam, k)
        rows.extend((k, h, float(evaluate_stable(W, h))) for h in hs)
    _csv(out, ["k", "h", "W"], rows)


def cmd_ect(cfg, args, out):
    from .melnikov import scan_interval
    from .symfield import ect_check, wronskian

    fam = _family(cfg, args)
    branch = args.branch or cfg.system.sigma[0].branch
    if args.hmin is not None and args.hmax is not None:
        interval = (args.hmin, args.hmax)
    else:
        # truncate with the tail of the top Wronskian
        interval = scan_interval(cfg.system, branch, wronskian(fam, len(fam)), rel_cut=1e-6)
    rep = ect_check(fam, interval, samples=args.samples)
    _json(out, {
        "system": cfg.system.kind.value,
        "family": args.family,
        "interval": list(rep.interval),
        "is_ect_evidence": rep.is_ect_evidence,
        "min_abs_per_k": list(rep.min_abs_per_k),
        "sign_changes_per_k": list(rep.sign_changes_per_k),
        "inconclusive_per_k": list(rep.inconclusive_per_k),
        "note": "numerical evidence, not a proof",
    })


def cmd_realize(cfg, args, out):
    from .melnikov import realize_max

    if not args.targets:
        raise DomainError("realize needs --targets h1,h2,...")
    targets = [float(t) for t in args.targets.split(",")]
    pert = realize_max(cfg.system, targets, smooth=args.smooth)
    out.write(pert.to_json() + "\n")


def cmd_simulate(cfg, args, out):
    from .odeharness import find_limit_cycles, full_return, start_point

    pert = cfg.pert()
    hs = _hs(cfg, args)
    rows = []
    for h in hs:
        x0 = start_point(cfg.system, h)
        s = full_return(cfg.system, pert, args.eps, x0, rtol=args.rtol)
        rows.append((s.x0, s.x_ret, s.displacement, s.h0))
    rows.sort(key=lambda r: r[3])
    _csv(out, ["x0", "x_ret", "displacement", "h0"], rows)
    xs = [start_point(cfg.system, h) for h in (hs[0], hs[-1])]
    cycles = find_limit_cycles(cfg.system, pert, args.eps, xs, samples=args.samples, rtol=args.rtol,
                               spacing=cfg.spacing)
    summary = json.dumps({"eps": args.eps, "cycles": [{"x": x, "h": h} for x, h in sorted(cycles, key=lambda c: c[1])]},
                         indent=2, sort_keys=True) + "\n"
    if args.summary and args.summary != "-":
        Path(args.summary).write_text(summary)
    else:
        sys.stderr.write(summary)


def cmd_audit(cfg, args, out):
    from .melnikov import bound_audit

    rng = np.random.default_rng(cfg.seed)
    smooth_opts = {"both": (False, True), "yes": (True,), "no": (False,)}[args.smooth]
    rows = []
    for n in range(args.nmin, args.nmax + 1):
        for smooth in smooth_opts:
            for r in bound_audit(cfg.system, n, smooth, args.trials, rng, grid=args.grid):
                rows.append((r.kind, r.n, int(r.smooth), r.trial, r.count, r.tangencies, r.bound, int(r.ok)))
    _csv(out, ["system", "n", "smooth", "trial", "zeros", "tangencies", "bound", "ok"], rows)
    bad = sum(1 for r in rows if not r[-1])
    log.info("audit: %d rows, %d bound violations", len(rows), bad)


COMMANDS = {
    "system": cmd_system,
    "integral": cmd_integral,
    "reduce": cmd_reduce,
    "pf": cmd_pf,
    "melnikov": cmd_melnikov,
    "wronskian": cmd_wronskian,
    "ect": cmd_ect,
    "realize": cmd_realize,
    "simulate": cmd_simulate,
    "audit": cmd_audit,
}


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="pfab", description="Abelian integrals, Picard-Fuchs systems and Melnikov zeros "
                                         "for four discontinuously perturbed quadratic centres.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, grid=True):
        sp.add_argument("--system", required=True, help="s1, s2, r19 or r20")
        sp.add_argument("-o", "--output", default=None, help="output file (default stdout)")
        if grid:
            sp.add_argument("--h", type=float, default=None, help="single level h")
            sp.add_argument("--hmin", type=float)
            sp.add_argument("--hmax", type=float)
            sp.add_argument("--count", type=int, default=11)
            sp.add_argument("--spacing", choices=("linear", "log"), default="linear")
        return sp

    common(sub.add_parser("system", help="print the system data"), grid=False)

    sp = common(sub.add_parser("integral", help="I_{i,j}(h) by quadrature"))
    sp.add_argument("--i", required=True)
    sp.add_argument("--j", type=int, required=True)

    sp = common(sub.add_parser("reduce", help="reduce I_{i,j} or M(h) to the basis"), grid=False)
    sp.add_argument("--i")
    sp.add_argument("--j", type=int)
    sp.add_argument("--config", help="perturbation JSON (reduces M instead)")
    sp.add_argument("--json", action="store_true")

    sp = common(sub.add_parser("pf", help="Picard-Fuchs matrix and residual check"))
    sp.add_argument("action", choices=("check", "matrix"))
    sp.add_argument("--step", type=float, default=None)

    sp = common(sub.add_parser("melnikov", help="zeros, values or k-vector of M(h)"))
    sp.add_argument("action", choices=("zeros", "eval", "kmap"))
    sp.add_argument("--config", required=True, help="perturbation JSON")
    sp.add_argument("--grid", type=int, default=2048)
    sp.add_argument("--branch", default=None)

    for name, helptext in (("wronskian", "Wronskians W_k of the n=2 family"),
                           ("ect", "numerical ECT evidence for the n=2 family")):
        sp = common(sub.add_parser(name, help=helptext))
        sp.add_argument("--family", choices=("printed", "melnikov"), default="printed")
        sp.add_argument("--branch", default=None)
        if name == "wronskian":
            sp.add_argument("--k", type=int, default=None)
        else:
            sp.add_argument("--samples", type=int, default=400)

    sp = common(sub.add_parser("realize", help="perturbation with prescribed simple zeros"), grid=False)
    sp.add_argument("--targets", required=True, help="comma separated h values")
    sp.add_argument("--smooth", action="store_true")

    sp = common(sub.add_parser("simulate", help="return map and limit cycles of the perturbed flow"))
    sp.add_argument("--config", required=True)
    sp.add_argument("--eps", type=float, required=True)
    sp.add_argument("--rtol", type=float, default=1e-10)
    sp.add_argument("--samples", type=int, default=200)
    sp.add_argument("--summary", default=None, help="cycle summary JSON (default stderr)")

    sp = common(sub.add_parser("audit", help="randomized zero-count bound audit"), grid=False)
    sp.add_argument("--nmin", type=int, default=0)
    sp.add_argument("--nmax", type=int, default=5)
    sp.add_argument("--trials", type=int, default=100)
    sp.add_argument("--smooth", choices=("both", "yes", "no"), default="both")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--grid", type=int, default=1024)
    return p


def _config(args) -> RunConfig:
    return RunConfig(
        system=make_system(args.system),
        command=args.command,
        pert_path=Path(args.config) if getattr(args, "config", None) else None,
        hmin=getattr(args, "hmin", None),
        hmax=getattr(args, "hmax", None),
        count=getattr(args, "count", 11),
        spacing=getattr(args, "spacing", "linear"),
        seed=getattr(args, "seed", 0),
        output=Path(args.output) if args.output else None,
    )


def run(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(name)s: %(message)s")
    try:
        cfg = _config(args)
        out = _Out(cfg.output)
        COMMANDS[args.command](cfg, args, out)
        out.close()
    except DomainError as exc:
        print(f"pfab: error: {exc}", file=sys.stderr)
        return 1
    except (NumericalError, ReductionError, ArithmeticError) as exc:
        print(f"pfab: numerical failure: {exc}", file=sys.stderr)
        return 2
    except PfabError as exc:
        print(f"pfab: error: {exc}", file=sys.stderr)
        return 1
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
