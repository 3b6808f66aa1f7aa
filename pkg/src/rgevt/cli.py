"""Command-line front end: ``rgevt <subcommand> ...``.

Every file written is accompanied by ``<file>.manifest.json`` recording the
subcommand, its parameters, the tool version, the seed and a timestamp.
Failures print a JSON object ``{"error": code, "message": ..., "exit_status": k}``
on stderr and exit with ``k``.
"""

import argparse
import json
import math
import os
import sys
from datetime import datetime, timezone
from fractions import Fraction
from importlib import metadata
from pathlib import Path

import numpy as np

from . import attraction, montecarlo, perturbation
from .distributions import Case, Distribution, FixedPoint, get_distribution
from .engine import apply
from .errors import ParameterError, RGError
from .rescaling import parse_group

__all__ = ["main", "parse_and_dispatch", "RunManifest", "OUTPUT_DIR_ENV"]

OUTPUT_DIR_ENV = "RGEVT_OUTPUT_DIR"

IDS_HELP = f"""\
distribution ids:
  tent            density 4x on [0, 1/2], 4(1-x) on [1/2, 1]
  valley          density 4(1/2-x) on [0, 1/2], 4(x-1/2) on [1/2, 1]
  salpeter        Salpeter mass law on [10, 200] mapped to [0, 1]
  salpeter-mass   Salpeter mass law m**-2.35 on [10, 200]
  uniform         uniform on [0, 1]
  fixed:<case>:alpha=<a>:lambda=<l>
                  a fixed point, e.g. fixed:case2:alpha=2:lambda=2
                  (<case> is one of case0, case1-, case1+, case2)
group ids:
  <case>:alpha=<a>   e.g. case2:alpha=2
                     case0: x + s/a, case1-: e^(-s/a) x,
                     case1+: e^(s/a) x, case2: x^(e^(-s/a))
fixed-point ids (--fixed-point):
  auto | case2:alpha=<a>:lambda=<l>
environment:
  {OUTPUT_DIR_ENV}   default directory for output files
"""


class UsageError(RGError):
    code = "usage-error"
    exit_status = 64


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def tool_version():
    try:
        return metadata.version("artifact")
    except metadata.PackageNotFoundError:  # pragma: no cover - source checkout
        return "0+unknown"


class RunManifest:
    """What was run, with which parameters, by which version."""

    def __init__(self, subcommand, parameters, seed=None):
        self.subcommand = subcommand
        self.parameters = parameters
        self.tool_version = tool_version()
        self.seed = seed
        self.timestamp = datetime.now(timezone.utc).isoformat(timespec="seconds")

    def to_dict(self):
        return {
            "subcommand": self.subcommand,
            "parameters": self.parameters,
            "tool_version": self.tool_version,
            "seed": self.seed,
            "timestamp": self.timestamp,
        }

    def write_next_to(self, path):
        with open(f"{path}.manifest.json", "w") as fh:
            json.dump(self.to_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")


# ------------------------------------------------------------- helpers

def _g(v):
    return f"{float(v):.17g}"


def _write_csv(path, header, rows):
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_g(v) for v in row) + "\n")


def _output_path(args, default_name):
    if args.out:
        path = Path(args.out)
    else:
        path = Path(os.environ.get(OUTPUT_DIR_ENV, ".")) / default_name
    path.parent.mkdir(parents=True, exist_ok=True)
    return path


def _params(args):
    skip = {"func", "command"}
    return {k: str(v) if isinstance(v, Fraction) else v
            for k, v in vars(args).items() if k not in skip}


def _range(text, name, integer=False):
    """``a:b`` or ``a:b:k`` -> (a, b, k or None)."""
    parts = text.split(":")
    if len(parts) not in (2, 3):
        raise ParameterError(f"{name} must look like a:b or a:b:k, got {text!r}")
    try:
        a, b = float(parts[0]), float(parts[1])
        k = int(parts[2]) if len(parts) == 3 else None
    except ValueError:
        raise ParameterError(f"non-numeric {name} {text!r}") from None
    if not (math.isfinite(a) and math.isfinite(b) and a < b) or (k is not None and k < 2):
        raise ParameterError(f"invalid {name} {text!r}")
    if integer and a < 1:
        raise ParameterError(f"{name} must start at 1 or above")
    return a, b, k


def _snap(value, max_den, rel):
    f = Fraction(value).limit_denominator(max_den)
    return float(f) if abs(float(f) - value) <= rel * abs(value) else value


def resolve_fixed_point(dist, ident="auto"):
    """Fixed point from an id, or from the classifier for ``auto``.

    Classifier estimates within 1e-9 relative of a simple fraction are
    snapped to it so that exact series algebra sees e.g. ``alpha = 2``.
    """
    if ident != "auto":
        parts = ident.split(":")
        try:
            kv = dict(p.split("=") for p in parts[1:])
            return FixedPoint(Case.parse(parts[0]), float(kv["alpha"]), float(kv["lambda"]))
        except (KeyError, ValueError):
            raise ParameterError(f"invalid fixed-point id {ident!r}") from None
    verdict = attraction.classify(dist)
    if not verdict.converges:
        raise attraction.NonConvergence(verdict.message, verdict.diagnostics)
    return FixedPoint(Case.CASE2, _snap(verdict.alpha_hat, 100, 1e-9),
                      _snap(verdict.lambda_hat, 1000, 1e-9))


def _expansion(dist, fp, max_order, method):
    if method == "auto":
        method = "analytic" if dist.upper_poly is not None else "numeric"
    if method == "analytic":
        return perturbation.analytic_expansion(dist, fp, max_order), method
    return perturbation.extract_expansion(dist, fp, max_order), method


def _unit(dist):
    if dist.support.is_compact and (dist.support.lower, dist.support.upper) != (0.0, 1.0):
        raise ParameterError(
            f"{dist.name} is not on [0, 1]; use its rescaled id (e.g. salpeter)"
        )
    return dist


def _block_max_law(dist, n, group):
    if group is not None:
        return apply(group, math.log(n), dist)
    return Distribution(
        cdf=lambda x: np.exp(n * np.asarray(dist.logcdf(x))),
        pdf=lambda x: n * np.exp((n - 1) * np.asarray(dist.logcdf(x))) * np.asarray(dist.pdf(x)),
        support=dist.support, kinks=dist.kinks, name=f"max{n}({dist.name})",
    )


def _read_manifest(path):
    p = Path(f"{path}.manifest.json")
    if p.exists():
        with open(p) as fh:
            return json.load(fh).get("parameters", {})
    return {}


# --------------------------------------------------------- subcommands

def cmd_transform(args):
    dist = get_distribution(args.dist)
    group = parse_group(args.group)
    if args.n < 1:
        raise ParameterError("--n must be >= 1")
    law = apply(group, math.log(args.n), dist)
    lo, hi, k = _range(args.grid, "--grid") if args.grid else (*_default_grid(dist), None)
    x = np.linspace(lo, hi, k or args.points)
    out = _output_path(args, "transform.csv")
    _write_csv(out, ("x", "cdf", "pdf"),
               zip(x, np.asarray(law.cdf(x), float), np.asarray(law.pdf(x), float)))
    RunManifest("transform", _params(args)).write_next_to(out)
    return {"output": str(out)}


def _default_grid(dist):
    sup = dist.support
    if sup.is_compact:
        return sup.lower, sup.upper
    raise ParameterError("unbounded support: pass --grid a:b[:k]")


def cmd_classify(args):
    verdict = attraction.classify(get_distribution(args.dist))
    payload = verdict.to_dict()
    if args.out:
        out = _output_path(args, "classify.json")
        out.write_text(json.dumps(payload, indent=2) + "\n")
        RunManifest("classify", _params(args)).write_next_to(out)
    return payload


def cmd_expand(args):
    dist = _unit(get_distribution(args.dist))
    fp = resolve_fixed_point(dist, args.fixed_point)
    exp, method = _expansion(dist, fp, args.max_order, args.method)
    payload = {
        "fixed_point": {"case": fp.case.value, "alpha": fp.alpha, "lambda": fp.lam},
        "method": method,
        "truncation_order": float(exp.truncation_order),
        "terms": [{"beta": b, "c": c} for b, c in exp.terms],
    }
    if args.out:
        out = _output_path(args, "expand.json")
        out.write_text(json.dumps(payload, indent=2) + "\n")
        RunManifest("expand", _params(args)).write_next_to(out)
    return payload


def cmd_predict(args):
    dist = _unit(get_distribution(args.dist))
    fp = resolve_fixed_point(dist, args.fixed_point)
    exp, _ = _expansion(dist, fp, args.max_order, args.method)
    series = perturbation.predict_corrections(exp, args.order, method=args.amplitude_method)
    a, b, k = _range(args.n_grid, "--n-grid", integer=True)
    ns = np.geomspace(a, b, k or 25)
    K = len(series.amp_coeffs)
    rows = []
    for n in ns:
        total = series.amplitude(n)
        # successive scaled remainders tend to c_1, c_2, ... as n grows
        scaled, partial = [], 0.0
        for j in range(K):
            p = float(series.amp_exponents[j])
            scaled.append((total - partial) * n**p)
            partial += series.amp_coeffs[j] * n**-p
        rows.append((n, total, *scaled))
    header = ("n", "delta_pred", *(f"scaled_{j + 1}" for j in range(K)))
    out = _output_path(args, "predict.csv")
    _write_csv(out, header, rows)
    manifest = RunManifest("predict", _params(args))
    manifest.write_next_to(out)
    result = {"output": str(out),
              "amplitude": [{"power": float(p), "c": c}
                            for p, c in zip(series.amp_exponents, series.amp_coeffs)]}
    if args.n is not None:
        lo, hi, kx = _range(args.x_grid, "--x-grid")
        x = np.linspace(lo, hi, kx or 201)
        cols = [np.asarray(series.delta_coeff(j, x), float) for j in range(len(series.exponents))]
        shape = np.asarray(series.shape(args.n, x), float)
        shape_out = Path(args.shape_out) if args.shape_out else out.with_name(out.stem + "_shape.csv")
        _write_csv(shape_out, ("x", "delta_pred", *(f"delta_{j + 1}" for j in range(len(cols)))),
                   zip(x, shape, *cols))
        manifest.write_next_to(shape_out)
        result["shape_output"] = str(shape_out)
    return result


def _group_arg(dist, text):
    if text in (None, "none"):
        return None
    if text == "auto":
        fp = resolve_fixed_point(dist, "auto")
        return f"case2:alpha={fp.alpha!r}"
    parse_group(text)
    return text


def cmd_simulate(args):
    dist = get_distribution(args.dist)
    group = _group_arg(dist, args.group)
    rng = None
    if args.range:
        lo, hi, _ = _range(args.range, "--range")
        rng = (lo, hi)
    config = montecarlo.ExperimentConfig(
        dist_id=args.dist, n=args.n, replicas=args.replicas, bins=args.bins,
        seed=args.seed, chunk_size=args.chunk_size, workers=args.workers,
        range=rng, path=args.path, group=group,
    )
    result = montecarlo.run_experiment(config, dist)
    out = _output_path(args, "simulate.csv")
    montecarlo.write_result_csv(result, out)
    params = _params(args)
    params["group"] = group
    RunManifest("simulate", params, seed=args.seed).write_next_to(out)
    return {"output": str(out), "replicas": result.replicas}


def _prediction(kind, dist, n, group, fixed_point, max_order, method):
    if kind == "exact":
        return _block_max_law(dist, n, group)
    if group is None:
        raise ParameterError(f"a {kind!r} prediction needs rescaled maxima (simulate --group)")
    fp = resolve_fixed_point(dist, fixed_point)
    if kind == "fixed-point":
        return fp.distribution()
    if kind.startswith("perturbative:"):
        try:
            order = Fraction(kind.split(":", 1)[1])
        except ValueError:
            raise ParameterError(f"invalid order in {kind!r}") from None
        exp, _ = _expansion(dist, fp, max_order, method)
        return perturbation.predict_corrections(exp, order).distribution(n)
    raise ParameterError(
        f"unknown prediction {kind!r}; use exact, fixed-point or perturbative:<order>"
    )


def cmd_compare(args):
    saved = _read_manifest(args.result)
    dist_id = args.dist or saved.get("dist")
    n = args.n or saved.get("n")
    group = args.group if args.group is not None else saved.get("group")
    if dist_id is None or n is None:
        raise ParameterError("--dist and --n are needed (no manifest next to the result)")
    dist = get_distribution(dist_id)
    group = _group_arg(dist, group)
    config = montecarlo.ExperimentConfig(dist_id=dist_id, n=int(n), replicas=1, group=group)
    result = montecarlo.read_result_csv(args.result, None)
    result = montecarlo.ExperimentResult(result.bin_edges, result.counts, config)
    pred = _prediction(args.prediction, dist, int(n), group and parse_group(group),
                       args.fixed_point, args.max_order, args.method)
    cmp = montecarlo.compare(result, pred, args.scale_exponent)
    out = _output_path(args, "compare.csv")
    _write_csv(out, ("bin_mid", "observed", "predicted", "scaled_residual", "z"), cmp.rows())
    RunManifest("compare", _params(args)).write_next_to(out)
    return {"output": str(out), "l1": cmp.l1, "mean_z2": float(np.mean(cmp.z**2))}


# -------------------------------------------------------------- parser

def build_parser():
    p = _Parser(prog="rgevt", description="Renormalization-group tools for extreme value statistics.",
                epilog=IDS_HELP, formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, func, help_):
        sp = sub.add_parser(name, help=help_, description=help_, epilog=IDS_HELP,
                            formatter_class=argparse.RawDescriptionHelpFormatter)
        sp.set_defaults(func=func)
        return sp

    def expansion_opts(sp):
        sp.add_argument("--fixed-point", default="auto", help="auto or case2:alpha=<a>:lambda=<l>")
        sp.add_argument("--max-order", type=float, default=8.0, help="largest beta kept (default 8)")
        sp.add_argument("--method", choices=("auto", "analytic", "numeric"), default="auto",
                        help="exact coefficients from the polynomial CDF tail, or numeric extraction")

    sp = add("transform", cmd_transform, "Tabulate x, cdf, pdf of the RG transform T_s mu with n = e^s.")
    sp.add_argument("--dist", required=True)
    sp.add_argument("--group", required=True)
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--grid", help="a:b[:k] abscissae (default: the support, --points points)")
    sp.add_argument("--points", type=int, default=201)
    sp.add_argument("--out")

    sp = add("classify", cmd_classify, "Case-2 basin of attraction: estimates of alpha and lambda.")
    sp.add_argument("--dist", required=True)
    sp.add_argument("--out")

    sp = add("expand", cmd_expand, "Eigen-expansion mu = M (1 + sum c_i (-log x)^beta_i) as JSON.")
    sp.add_argument("--dist", required=True)
    expansion_opts(sp)
    sp.add_argument("--out")

    sp = add("predict", cmd_predict, "Predicted L1 amplitude Delta(n) and shape delta(x) at fixed n.")
    sp.add_argument("--dist", required=True)
    sp.add_argument("--order", type=Fraction, required=True, help="highest power of 1/n kept, e.g. 3 or 3/2")
    sp.add_argument("--n-grid", default="100:100000", help="a:b[:k], log-spaced (default 100:100000:25)")
    sp.add_argument("--n", type=float, help="block size for the shape table")
    sp.add_argument("--x-grid", default="0:1:201")
    sp.add_argument("--amplitude-method", choices=("perturbed", "frozen"), default="perturbed")
    expansion_opts(sp)
    sp.add_argument("--out")
    sp.add_argument("--shape-out")

    sp = add("simulate", cmd_simulate, "Monte Carlo histogram of block maxima (CSV bin_lo, bin_hi, density, stderr, count).")
    sp.add_argument("--dist", required=True)
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--replicas", type=int, required=True)
    sp.add_argument("--bins", type=int, default=50)
    sp.add_argument("--seed", type=int, required=True)
    sp.add_argument("--group", default="none", help="none, auto, or a group id; rescale maxima by g_{-log n}")
    sp.add_argument("--chunk-size", type=int, default=montecarlo.DEFAULT_CHUNK)
    sp.add_argument("--workers", type=int, default=1)
    sp.add_argument("--range", help="lo:hi binning interval (default: the support)")
    sp.add_argument("--path", choices=("fast", "oracle"), default="fast")
    sp.add_argument("--out")

    sp = add("compare", cmd_compare, "Join a simulate CSV with a prediction.")
    sp.add_argument("--result", required=True, help="CSV written by simulate")
    sp.add_argument("--prediction", default="exact", help="exact | fixed-point | perturbative:<order>")
    sp.add_argument("--scale-exponent", type=float, default=0.0)
    sp.add_argument("--dist", help="default: from the result's manifest")
    sp.add_argument("--n", type=int, help="default: from the result's manifest")
    sp.add_argument("--group", help="default: from the result's manifest")
    expansion_opts(sp)
    sp.add_argument("--out")
    return p


def parse_and_dispatch(argv):
    """Run one subcommand; returns ``(exit_status, payload)``."""
    try:
        args = build_parser().parse_args(argv)
        return 0, args.func(args)
    except RGError as exc:
        return exc.exit_status, {"error": exc.code, "message": str(exc), "exit_status": exc.exit_status}


def main(argv=None):
    status, payload = parse_and_dispatch(sys.argv[1:] if argv is None else argv)
    stream = sys.stdout if status == 0 else sys.stderr
    json.dump(payload, stream, indent=2, default=float)
    stream.write("\n")
    return status


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
