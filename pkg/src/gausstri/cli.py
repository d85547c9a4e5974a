"""Command-line interface: ``gausstri <command> [options]``.

Commands: sample, verify, conjecture, density, moments, acuteness.
JSON reports hold one object with an ``entries`` array; floats are
written with 17 significant digits so reports diff cleanly.
"""
import argparse
import csv
import io
import json
import math
import os
import sys
from dataclasses import dataclass

import numpy as np

from . import acuteness as ac
from . import densities as dn
from . import moments as mo
from . import suite
from .errors import DomainError
from .model import FAMILIES, FamilySpec
from .montecarlo import MIN_SAMPLES, sample_all
from .samplers import CSV_HEADER

SEED_ENV = "GAUSSTRI_SEED"
MC_COMMANDS = ("sample", "verify", "conjecture", "moments", "acuteness")


@dataclass(frozen=True)
class RunConfig:
    command: str
    family: FamilySpec
    n_samples: int
    seed: int
    tol: float
    fmt: str
    out: str | None
    workers: int = 1

    def __post_init__(self):
        if self.command in MC_COMMANDS and self.n_samples < MIN_SAMPLES:
            raise ValueError(f"--samples must be at least {MIN_SAMPLES}")


# ---------------------------------------------------------------------------
# output

def _num(x):
    if x is None or (isinstance(x, float) and not math.isfinite(x)):
        return "null"
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".17g")


def to_json(obj, indent=0):
    """JSON text with 17-significant-digit floats; key order preserved."""
    pad = "  " * (indent + 1)
    end = "  " * indent
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {to_json(v, indent + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        return "[\n" + ",\n".join(pad + to_json(v, indent + 1) for v in obj) + "\n" + end + "]"
    if isinstance(obj, str):
        return json.dumps(obj)
    return _num(obj)


def entries_csv(entries):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(suite.ENTRY_FIELDS)
    for e in entries:
        d = e.as_dict()
        fam = d["family"]
        d["family"] = "" if fam is None else f"{fam['family']}:{fam['dim']}:{_num(fam['c'])}"
        w.writerow(["" if d[k] is None else (_num(d[k]) if not isinstance(d[k], str) else d[k])
                    for k in suite.ENTRY_FIELDS])
    return buf.getvalue()


def _write(text, out):
    if out in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


def emit(entries, cfg, extra=None):
    if cfg.fmt == "csv":
        _write(entries_csv(entries), cfg.out)
    else:
        doc = {"command": cfg.command, "seed": cfg.seed, "samples": cfg.n_samples, "tol": cfg.tol}
        doc.update(extra or {})
        doc["entries"] = [e.as_dict() for e in entries]
        _write(to_json(doc) + "\n", cfg.out)
    return 1 if any(e.gating_failure for e in entries) else 0


# ---------------------------------------------------------------------------
# commands

def cmd_sample(cfg, args):
    tri = sample_all(cfg.family, cfg.n_samples, cfg.seed, workers=cfg.workers)
    if cfg.fmt == "csv":
        _write(CSV_HEADER + "\n" + "".join(line + "\n" for line in tri.csv_lines()), cfg.out)
        return 0
    cols = CSV_HEADER.split(",")
    rows = [dict(zip(cols, [float(v) for v in line.split(",")[:-1]] + [bool(int(line[-1]))]))
            for line in tri.csv_lines()]
    _write(to_json({"command": "sample", "seed": cfg.seed, "samples": cfg.n_samples,
                    "entries": rows}) + "\n", cfg.out)
    return 0


def cmd_verify(cfg, args):
    return emit(suite.verify_entries(cfg.n_samples, cfg.seed, cfg.workers, cfg.tol), cfg)


def parse_range(text):
    lo, sep, hi = text.partition("..")
    lo = int(lo)
    hi = int(hi) if sep else lo
    if not 2 <= lo <= hi <= 8:
        raise argparse.ArgumentTypeError("range must lie within 2..8")
    return range(lo, hi + 1)


def cmd_conjecture(cfg, args):
    entries = suite.conjecture_entries(args.range, cfg.n_samples, cfg.seed, cfg.workers,
                                       args.gof_samples, args.bins)
    return emit(entries, cfg, {"range": f"{args.range.start}..{args.range.stop - 1}"})


def _density_value(cfg, args):
    fam = cfg.family
    kind = args.kind
    x, y, z = args.x, args.y, args.z
    if kind == "angles":
        if fam.family == "pinned":
            return dn.pinned_angles_ndim(fam.dim, x, y), dn.is_conjectured("pinned_angles_ndim", fam.dim)
        if fam.family == "pure":
            return dn.pure_angles_ndim(fam.dim, x, y), dn.is_conjectured("pure_angles_ndim", fam.dim)
        f = dn.staked_angles if fam.family == "staked" else dn.anchored_angles
        return f(fam.c, x, y), False
    if kind == "sides":
        if fam.family == "pinned":
            if z is None:
                raise ValueError("pinned side density needs --z")
            return dn.pinned_sides3(x, y, z), False
        if fam.family == "staked":
            return dn.staked_sides(fam.c, x, y), False
        if fam.family == "anchored":
            return dn.anchored_sides(fam.c, x, y), False
        raise ValueError("no side density for pure triangles")
    if kind == "side_marginal":
        if fam.family == "pinned":
            return dn.pinned_side_marginal(args.which or "a", x), False
        if fam.family == "staked":
            if (args.which or "b") == "a":
                return dn.rice_pdf(x, 0.0), False
            return dn.rice_pdf(x, fam.c), False
        if fam.family == "anchored":
            return dn.rice_pdf(x, 0.5 * fam.c), False
        raise ValueError("no side marginal for pure triangles")
    if kind == "angle_marginal":
        if fam.family != "pinned" or fam.dim != 2:
            raise ValueError("angle marginal available for planar pinned triangles")
        return dn.pinned_angle_marginal_g(x), False
    if kind == "corr_rice":
        params = dn.CorrRiceParams(args.rho)
        return dn.corr_rice_density(params, args.variant, x, y, fallback=True), False
    raise ValueError(f"unknown kind {kind!r}")


def cmd_density(cfg, args):
    value, conj = _density_value(cfg, args)
    value = float(value)
    point = ", ".join(f"{k}={v!r}" for k, v in (("x", args.x), ("y", args.y), ("z", args.z)) if v is not None)
    entry = suite.Entry(f"density_{args.kind}", cfg.family, closed_form=value, tolerance=0.0,
                        passed=True, conjecture_flag=conj, notes=point)
    return emit([entry], cfg, {"value": value, "in_support": value > 0})


MOMENT_CHOICES = {
    "pinned": ("all", "angles", "E_ab", "E_ac"),
    "staked": ("all", "E_ab", "b_mean"),
    "anchored": ("all", "E_ab", "a_mean", "corr_rice_trend"),
}


def cmd_moments(cfg, args):
    fam = cfg.family
    if fam.family not in MOMENT_CHOICES or fam.dim != 2:
        raise ValueError("moments are available for planar pinned, staked and anchored triangles")
    if fam.family != "pinned" and fam.c != 1.0:
        raise ValueError("closed-form moments need --c 1")
    which = args.which or "all"
    if which not in MOMENT_CHOICES[fam.family]:
        raise ValueError(f"--which must be one of {MOMENT_CHOICES[fam.family]}")
    n, seed, w = cfg.n_samples, cfg.seed, cfg.workers
    entries = []
    if fam.family == "pinned":
        if which in ("all", "angles"):
            entries += [suite.from_moment(r, fam, quad_tol=cfg.tol) for r in mo.pinned_angle_moments(n, seed, workers=w)]
        if which in ("all", "E_ab", "E_ac"):
            reps = mo.pinned_side_cross_moments(n, seed, workers=w)
            entries += [suite.from_moment(r, fam, quad_tol=cfg.tol) for r in reps if which in ("all", r.name)]
    elif fam.family == "staked":
        if which in ("all", "E_ab"):
            entries.append(suite.from_moment(mo.staked_E_ab(n, seed, workers=w), fam))
        if which in ("all", "b_mean"):
            entries += [suite.from_moment(r, fam) for r in mo.rice_reports() if r.name.startswith("staked")]
    else:
        if which in ("all", "E_ab"):
            entries.append(suite.from_moment(mo.anchored_E_ab(n, seed, workers=w), fam))
        if which in ("all", "a_mean"):
            entries += [suite.from_moment(r, fam) for r in mo.rice_reports() if r.name.startswith("anchored")]
        if which == "corr_rice_trend":
            entries += [suite.from_moment(r, conjecture=True) for r in mo.corr_rice_trend(n_mc=n, seed=seed)]
    return emit(entries, cfg)


def cmd_acuteness(cfg, args):
    fam = cfg.family
    n, seed, w = cfg.n_samples, cfg.seed, cfg.workers
    if fam.family == "pinned":
        rep = ac.pinned_obtuse_2d(n, seed, workers=w) if fam.dim == 2 else ac.pinned_obtuse_ndim(fam.dim, n, seed, workers=w)
    elif fam.family == "pure":
        rep = ac.pure_obtuse_ndim(fam.dim, n, seed, workers=w)
    else:
        if fam.dim != 2 or fam.c != 1.0:
            raise ValueError("staked and anchored acuteness is available for dim 2, c = 1")
        rep = ac.staked_obtuse(n, seed, workers=w) if fam.family == "staked" else ac.anchored_obtuse(n, seed, workers=w)
    name = f"{fam.family}_obtuse" + (f"_dim_{fam.dim}" if fam.family in ("pinned", "pure") and fam.dim != 2 else "")
    if fam.family == "pinned" and fam.dim == 2:
        name = "pinned_obtuse_2d"
    return emit([suite.from_acuteness(name, rep)], cfg)


COMMANDS = {
    "sample": cmd_sample,
    "verify": cmd_verify,
    "conjecture": cmd_conjecture,
    "density": cmd_density,
    "moments": cmd_moments,
    "acuteness": cmd_acuteness,
}


# ---------------------------------------------------------------------------
# argument parsing

def _default_seed():
    raw = os.environ.get(SEED_ENV)
    return int(raw) if raw else 0


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--family", choices=FAMILIES, default="pinned")
    common.add_argument("--dim", type=int, default=2)
    common.add_argument("--c", type=float, default=1.0)
    common.add_argument("-n", "--samples", type=int, default=10 ** 6)
    common.add_argument("--seed", type=int, default=None,
                        help=f"random seed (default: ${SEED_ENV} or 0)")
    common.add_argument("--tol", type=float, default=1e-6, help="closed form vs quadrature tolerance")
    common.add_argument("--format", dest="fmt", choices=("json", "csv"), default=None)
    common.add_argument("--out", default=None, help="output file (default: stdout)")
    common.add_argument("--workers", type=int, default=1)

    parser = argparse.ArgumentParser(prog="gausstri", description="Random Gaussian triangles.")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("sample", parents=[common], help="write sampled triangles")
    sub.add_parser("verify", parents=[common], help="closed forms vs quadrature vs Monte Carlo")
    p = sub.add_parser("conjecture", parents=[common], help="n-dimensional angle densities")
    p.add_argument("--range", type=parse_range, default=range(2, 9))
    p.add_argument("--bins", type=int, default=10)
    p.add_argument("--gof-samples", type=int, default=10 ** 5)
    p = sub.add_parser("density", parents=[common], help="evaluate a density at one point")
    p.add_argument("--kind", choices=("angles", "sides", "side_marginal", "angle_marginal", "corr_rice"),
                   default="angles")
    p.add_argument("--x", type=float, required=True)
    p.add_argument("--y", type=float, default=None)
    p.add_argument("--z", type=float, default=None)
    p.add_argument("--which", default=None)
    p.add_argument("--rho", type=float, default=0.5)
    p.add_argument("--variant", choices=dn.VARIANTS, default="opposite_center")
    p = sub.add_parser("moments", parents=[common], help="moments with cross-checks")
    p.add_argument("--which", default=None)
    sub.add_parser("acuteness", parents=[common], help="obtuse probabilities")
    return parser


def make_config(args):
    seed = args.seed if args.seed is not None else _default_seed()
    fmt = args.fmt or ("csv" if args.command == "sample" else "json")
    family = FamilySpec(args.family, args.dim, args.c)
    return RunConfig(args.command, family, args.samples, seed, args.tol, fmt, args.out, args.workers)


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "density" and args.kind not in ("side_marginal", "angle_marginal") and args.y is None:
            raise ValueError("--y is required for this density")
        cfg = make_config(args)
        return COMMANDS[args.command](cfg, args)
    except (ValueError, DomainError) as exc:
        parser.error(str(exc))


if __name__ == "__main__":
    sys.exit(main())
