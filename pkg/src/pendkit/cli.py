"""Command-line front end: ``pendkit <command> [options]``.

Commands: classify, capacity, eigen, bounds, verify, table.  Options can
also come from a ``--config`` file of ``key = value`` lines grouped under
``[section]`` headers (sections are only for readability; keys are flat).
Flags given on the command line override file values.

Output is CSV with a ``#`` provenance header (package version and a hash of
the resolved configuration).  Exit status: 0 success, 2 when a verdict is
HypothesisFailed, 1 on errors.
"""
import argparse
import configparser
import csv
import hashlib
import io
import logging
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, fields

import numpy as np

from . import __version__
from .dichotomy import (
    HYPOTHESIS_FAILED,
    ImmersedEndProfile,
    dichotomy_sweep,
    sobolev_probe,
    theorem1_classify,
    theorem2_h_tracker,
)
from .errors import ConvergenceError, ParseError, PendkitError
from .model_geometry import ModelManifold, growth_profile
from .radial_potential import (
    annulus_potential,
    caccioppoli_sweep,
    classify_end,
    p_capacity,
    p_energy,
    reflect,
)
from .spectrum import (
    DEFAULT_R_MAX,
    SHARPNESS_RTOL,
    bottom_lower_bound,
    cheng_upper_bound,
    divergence_lower_bound,
    lambda_manifold,
    poli_decay,
)

log = logging.getLogger("pendkit")

COMMANDS = ("classify", "capacity", "eigen", "bounds", "verify", "table")
SUITES = ("caccioppoli", "poli", "theorem1", "theorem2")


@dataclass
class ExperimentConfig:
    command: str = ""
    model: str = ""  # euclidean | hyperbolic | ch | qh | poly | custom
    dim: int = 3
    m: str = "1"  # integer, or a list/range such as "1..3" for table
    k: float = 0.0
    r_min: float = 0.0
    csv: str = ""
    p: str = "2"  # one value or a comma list
    q: str = ""
    S: float = 1.0
    r0: str = ""
    R: str = "inf"  # capacity: outer radius; eigen: comma list of ball radii
    size: int = 2049
    r_max: float = DEFAULT_R_MAX
    suite: str = "caccioppoli"
    family: str = "both"
    seed: int = 0
    family_size: int = 24
    out: str = ""

    def digest(self):
        text = "\n".join(f"{k}={v}" for k, v in sorted(asdict(self).items()) if k != "out")
        return hashlib.sha256(text.encode()).hexdigest()


_FIELD_TYPES = {f.name: f.type for f in fields(ExperimentConfig)}


def parse_real_list(text):
    vals = []
    for tok in str(text).split(","):
        tok = tok.strip()
        if tok:
            vals.append(math.inf if tok.lower() in ("inf", "infinity") else float(tok))
    if not vals:
        raise ValueError("empty list")
    return vals


def parse_int_range(text):
    """'1..3' -> [1, 2, 3]; '1,2' -> [1, 2]."""
    text = str(text).strip()
    if ".." in text:
        a, b = text.split("..", 1)
        return list(range(int(a), int(b) + 1))
    return [int(t) for t in text.split(",") if t.strip()]


def _find_line(path, key):
    with open(path) as fh:
        for i, line in enumerate(fh, 1):
            if line.split("=", 1)[0].strip() == key:
                return i
    return None


def read_config(path):
    """Flat key/value dict from an INI-style file, with line diagnostics."""
    cp = configparser.ConfigParser(interpolation=None, delimiters=("=",), comment_prefixes=("#", ";"))
    cp.optionxform = str
    try:
        with open(path) as fh:
            cp.read_file(fh)
    except configparser.MissingSectionHeaderError as exc:
        raise ParseError(f"{path}: key/value before any [section] header", exc.lineno) from exc
    except configparser.ParsingError as exc:
        line = exc.errors[0][0] if exc.errors else None
        raise ParseError(f"{path}: malformed line", line) from exc
    except configparser.DuplicateOptionError as exc:
        raise ParseError(f"{path}: duplicate key {exc.option!r}", exc.lineno) from exc
    values = {}
    for section in cp.sections():
        for key, raw in cp[section].items():
            if key not in _FIELD_TYPES:
                raise ParseError(f"{path}: unknown key {key!r} in [{section}]", _find_line(path, key))
            values[key] = (raw, _find_line(path, key))
    return values


def _coerce(key, raw, line=None, source="config"):
    kind = _FIELD_TYPES[key]
    try:
        if kind in (int, "int"):
            return int(raw)
        if kind in (float, "float"):
            return float(raw)
        return str(raw)
    except ValueError as exc:
        raise ParseError(f"{source}: field {key!r} expects {getattr(kind, '__name__', kind)}, got {raw!r}", line) from exc


def build_config(args):
    cfg = ExperimentConfig()
    if args.config:
        for key, (raw, line) in read_config(args.config).items():
            setattr(cfg, key, _coerce(key, raw, line, args.config))
    for key in _FIELD_TYPES:
        val = getattr(args, key, None)
        if val is not None:
            setattr(cfg, key, _coerce(key, val, source="flag"))
    cfg.command = args.command
    return cfg


def make_model(cfg):
    kind = cfg.model.lower()
    if kind == "euclidean":
        return ModelManifold.euclidean(cfg.dim, cfg.r_min)
    if kind == "hyperbolic":
        return ModelManifold.hyperbolic(cfg.dim, cfg.r_min)
    if kind == "ch":
        return ModelManifold.complex_hyperbolic(int(cfg.m), cfg.r_min)
    if kind == "qh":
        return ModelManifold.quaternionic_hyperbolic(int(cfg.m), cfg.r_min)
    if kind == "poly":
        return ModelManifold.polynomial(cfg.k, cfg.r_min)
    if kind == "custom":
        if not cfg.csv:
            raise ParseError("model 'custom' needs a csv path")
        return ModelManifold.from_csv(cfg.csv, dim=cfg.dim)
    if not kind:
        raise ParseError("no model given (--model or 'model' in the config)")
    raise ParseError(f"unknown model {cfg.model!r}")


def _workers():
    env = os.environ.get("PENDKIT_THREADS", "")
    try:
        n = int(env)
    except ValueError:
        n = os.cpu_count() or 1
    return max(1, n)


def _pmap(fn, items):
    items = list(items)
    with ThreadPoolExecutor(max_workers=min(_workers(), max(len(items), 1))) as pool:
        return list(pool.map(fn, items))


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v))
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return repr(v) if math.isfinite(v) else ("inf" if v > 0 else "-inf" if v < 0 else "nan")
    return str(v)


def _r0(cfg, model):
    return float(cfg.r0) if cfg.r0 else max(model.r_min, 1.0)


# commands ----------------------------------------------------------------------


def cmd_classify(cfg):
    model = make_model(cfg)
    r0 = _r0(cfg, model)
    header = ["model", "dim", "r_min", "p", "r0", "verdict", "tail_integral"]
    rows = []
    for p in parse_real_list(cfg.p):
        res = classify_end(model, p, r0)
        rows.append([model.label, model.dim, model.r_min, p, r0, res.verdict, res.tail_integral])
    return header, rows, 0


def cmd_capacity(cfg):
    model = make_model(cfg)
    r0 = _r0(cfg, model)
    R = parse_real_list(cfg.R)[0]
    header = ["model", "dim", "p", "r0", "R", "capacity", "energy"]
    rows = []
    for p in parse_real_list(cfg.p):
        cap = p_capacity(model, p, r0, R)
        if cap > 0:
            energy = p_energy(model, p, reflect(annulus_potential(model, p, r0, R)))
        else:
            energy = 0.0
        rows.append([model.label, model.dim, p, r0, R, cap, energy])
    return header, rows, 0


def cmd_eigen(cfg):
    model = make_model(cfg)
    R_list = parse_real_list(cfg.R) if cfg.R != "inf" else [10.0, 20.0, 40.0]
    header = ["model", "p", "R", "lambda", "lower", "upper", "gap"]

    def job(p):
        return lambda_manifold(model, p, R_list, size=cfg.size, r_max=cfg.r_max)

    rows = [row for rep in _pmap(job, parse_real_list(cfg.p)) for row in rep.rows()]
    return header, rows, 0


def cmd_bounds(cfg):
    model = make_model(cfg)
    prof = growth_profile(model, cfg.r_max)
    header = ["model", "p", "R", "lower", "upper", "growth_a", "regime"]
    rows = []
    for p in parse_real_list(cfg.p):
        rows.append([model.label, p, cfg.r_max, bottom_lower_bound(model, p, cfg.r_max),
                     cheng_upper_bound(model, p, cfg.r_max), prof.a, prof.regime])
    return header, rows, 0


def emit_cheng_table(p_list, m_list, families=("ch", "qh"), r_max=DEFAULT_R_MAX):
    """Sandwich rows [family, m, p, lower, estimate, upper, pass] for CH/QH."""
    if not p_list or not m_list:
        raise ValueError("p_list and m_list must be nonempty")
    makers = {"ch": ModelManifold.complex_hyperbolic, "qh": ModelManifold.quaternionic_hyperbolic}
    jobs = [(fam, int(m), float(p)) for fam in families for m in m_list for p in p_list]

    def job(spec):
        fam, m, p = spec
        model = makers[fam](m)
        lower = divergence_lower_bound(model, p, 1.0, r_max)
        upper = cheng_upper_bound(model, p, r_max)
        est = lambda_manifold(model, p, r_max=r_max).lambda_limit
        tol = SHARPNESS_RTOL * max(lower, upper)
        ok = lower - tol <= est <= upper + tol
        return [fam, m, p, lower, est, upper, ok]

    return _pmap(job, jobs)


def cmd_table(cfg):
    fams = ("ch", "qh") if cfg.family == "both" else (cfg.family,)
    for fam in fams:
        if fam not in ("ch", "qh"):
            raise ParseError(f"family must be ch, qh or both, got {cfg.family!r}")
    rows = emit_cheng_table(parse_real_list(cfg.p), parse_int_range(cfg.m), fams, cfg.r_max)
    header = ["family", "m", "p", "lower", "estimate", "upper", "pass"]
    return header, rows, 0 if all(r[-1] for r in rows) else 1


def _theorem2_profiles(cfg):
    if cfg.csv:
        return [ImmersedEndProfile.from_csv(cfg.csv, int(cfg.m), cfg.S)]
    c = 0.5
    return [
        ImmersedEndProfile(3, ModelManifold.hyperbolic(3, r_min=1.0), S=cfg.S, label="minimal-h3"),
        ImmersedEndProfile(3, ModelManifold.polynomial(2, r_min=1.0), H=lambda r: c / np.asarray(r, dtype=float),
                           S=cfg.S, label="cone"),
        ImmersedEndProfile(3, ModelManifold.polynomial(0, r_min=1.0),
                           H=lambda r: np.full_like(np.asarray(r, dtype=float), c), S=cfg.S, label="cylinder"),
    ]


def cmd_verify(cfg):
    suite = cfg.suite
    if suite == "caccioppoli":
        res = caccioppoli_sweep(100, cfg.seed)
        header = ["seed", "case", "config", "lhs", "rhs", "ratio", "holds"]
        rows = [[cfg.seed, i, r.label, r.lhs, r.rhs, r.ratio, r.holds] for i, r in enumerate(res)]
        n_ok = sum(r.holds for r in res)
        log.info("caccioppoli: %d/%d hold, max lhs/rhs = %.6g", n_ok, len(res), max(r.ratio for r in res))
        return header, rows, 0 if n_ok == len(res) else 1
    if suite == "poli":
        header = ["model", "p", "r", "decay", "exact", "lambda"]
        rows = []
        for k in (0, 1, 2, 3):
            model = ModelManifold.polynomial(k)
            for p in parse_real_list(cfg.p):
                lam = lambda_manifold(model, p).lambda_limit
                for r, val in poli_decay(model, p, [10.0, 100.0, 1000.0]):
                    rows.append([model.label, p, r, val, 2.0 ** (k + 1) * r**-p, lam])
        return header, rows, 0
    if suite == "theorem1":
        if cfg.model:
            model = make_model(cfg)
            status = 0
            header = ["model", "p", "q", "C", "verdict", "C3", "volume_ok"]
            rows = []
            for p in parse_real_list(cfg.p):
                q = float(cfg.q) if cfg.q else p
                sob = sobolev_probe(model, p, q, cfg.family_size, cfg.seed)
                rep = theorem1_classify(model, sob, _r0(cfg, model))
                ok = all(v[3] for v in rep.volume_check) if rep.volume_check else ""
                rows.append([model.label, p, q, sob.C, rep.verdict, rep.constants.get("C3", math.nan), ok])
                if rep.verdict == HYPOTHESIS_FAILED:
                    status = 2
            return header, rows, status
        sweep = dichotomy_sweep(p_list=parse_real_list(cfg.p), seed=cfg.seed, family_size=cfg.family_size)
        header = ["model", "p", "q", "C", "end", "volume_finite", "violation"]
        rows = [list(r) for r in sweep]
        return header, rows, 1 if any(r[-1] for r in rows) else 0
    if suite == "theorem2":
        header = ["profile", "p", "q", "r", "h", "h_bound", "verdict"]
        rows = []
        status = 0
        r_list = [3.0, 5.0, 10.0, 20.0, 40.0]
        for prof in _theorem2_profiles(cfg):
            p = parse_real_list(cfg.p)[0]
            r0 = float(cfg.r0) if cfg.r0 else prof.model.r_min + 1.0
            rep = theorem2_h_tracker(prof, p, r0, r_list)
            if rep.h_trace:
                rows += [[prof.label, p, rep.q, r, h, rep.h_bound, rep.verdict] for r, h in rep.h_trace]
            else:
                rows.append([prof.label, p, rep.q, "", "", rep.h_bound, rep.verdict])
            if cfg.csv and rep.verdict == HYPOTHESIS_FAILED:
                status = 2
        return header, rows, status
    raise ParseError(f"unknown suite {suite!r}; choose from {', '.join(SUITES)}")


HANDLERS = {
    "classify": cmd_classify,
    "capacity": cmd_capacity,
    "eigen": cmd_eigen,
    "bounds": cmd_bounds,
    "verify": cmd_verify,
    "table": cmd_table,
}


def render(cfg, header, rows):
    out = io.StringIO()
    out.write(f"# pendkit {__version__}\n")
    out.write(f"# command {cfg.command}\n")
    out.write(f"# config-sha256 {cfg.digest()}\n")
    w = csv.writer(out, lineterminator="\r\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(v) for v in row])
    return out.getvalue()


def run(cfg):
    """Dispatch ``cfg``; returns (exit status, CSV text)."""
    header, rows, status = HANDLERS[cfg.command](cfg)
    text = render(cfg, header, rows)
    if cfg.out:
        with open(cfg.out, "w", newline="") as fh:
            fh.write(text)
    return status, text


def build_parser():
    parser = argparse.ArgumentParser(prog="pendkit", description=__doc__.split("\n\n")[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key = value file; flags override it")
    common.add_argument("--model", choices=("euclidean", "hyperbolic", "ch", "qh", "poly", "custom"))
    common.add_argument("--dim", type=int)
    common.add_argument("--m")
    common.add_argument("--k", type=float)
    common.add_argument("--r-min", dest="r_min", type=float)
    common.add_argument("--csv", help="tabulated profile r,A[,H]")
    common.add_argument("--p", help="value or comma list")
    common.add_argument("--q")
    common.add_argument("--S", type=float, help="Sobolev constant for theorem2 profiles")
    common.add_argument("--r0")
    common.add_argument("--R", help="outer radius (capacity) or ball radii (eigen)")
    common.add_argument("--size", type=int)
    common.add_argument("--r-max", dest="r_max", type=float)
    common.add_argument("--seed", type=int)
    common.add_argument("--family-size", dest="family_size", type=int)
    common.add_argument("--out", help="write CSV here instead of stdout")
    for name in COMMANDS:
        sp = sub.add_parser(name, parents=[common])
        if name == "verify":
            sp.add_argument("--suite", choices=SUITES)
        if name == "table":
            sp.add_argument("--family", choices=("ch", "qh", "both"))
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s", stream=sys.stderr)
    try:
        cfg = build_config(args)
        status, text = run(cfg)
    except ConvergenceError as exc:
        log.error("%s (residual %.3g)", exc, exc.residual)
        return 1
    except (PendkitError, ValueError, OSError) as exc:
        log.error("%s", exc)
        return 1
    if not cfg.out:
        sys.stdout.write(text)
    return status


if __name__ == "__main__":
    sys.exit(main())
