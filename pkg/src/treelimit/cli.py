"""Command-line front end: ``treelimit {generate,limits,converge,compare}``.

Exit codes: 0 pass, 1 verdict failure, 2 usage or spec error, 3 runtime error.
Every JSON report embeds the resolved configuration, and identical
configurations with the same seed produce byte-identical output.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import (
    EmpiricalTau,
    NonMalthusian,
    chi_closed_form,
    cmj_char_size,
    condensation_kappa,
    energy_distance_tau,
    ks_statistic,
    limit_family,
    run_study,
)
from .analysis.convergence import Scaling
from .dendrons import dendron_from_dict
from .generators.models import MODELS, SpecError, birth_spec_for, make_source
from .generators.offspring import OffspringSpec
from .generators.split_trees import SplitSpec
from .tree_core import write_histogram_csv

EXIT_PASS, EXIT_FAIL, EXIT_USAGE, EXIT_RUNTIME = 0, 1, 2, 3


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    subcommand: str
    model: dict | None
    n: int | None
    n_grid: list | None
    m_trees: int
    m_pairs: int
    scaling: str | None
    seed: int
    threads: int
    out: str | None
    r: int | None
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)


def _load_json_arg(text: str) -> dict:
    """Inline JSON or a path to a JSON file."""
    s = text.strip()
    if s.startswith("{"):
        return json.loads(s)
    path = Path(text)
    if not path.exists():
        raise UsageError(f"spec file not found: {text}")
    return json.loads(path.read_text())


def resolve_model(args) -> dict:
    spec: dict = {}
    if args.spec:
        try:
            spec = _load_json_arg(args.spec)
        except json.JSONDecodeError as exc:
            raise UsageError(f"invalid JSON spec: {exc}") from exc
    if args.model:
        spec["model"] = args.model
    if getattr(args, "offspring", None):
        try:
            spec["offspring"] = OffspringSpec.parse(args.offspring).to_dict()
        except (ValueError, KeyError) as exc:
            raise UsageError(f"invalid offspring law {args.offspring!r}: {exc}") from exc
    if "model" not in spec:
        raise UsageError("a model is required (--model or a spec with a 'model' field)")
    if spec["model"] not in MODELS:
        raise UsageError(f"unknown model {spec['model']!r}; choose from {', '.join(MODELS)}")
    spec.pop("n", None)
    return spec


def resolve_seed(args) -> int:
    if args.seed is not None:
        return int(args.seed)
    env = os.environ.get("TREELIMIT_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise UsageError(f"TREELIMIT_SEED must be an integer, got {env!r}") from None
    return 0


def parse_grid(text: str) -> list:
    try:
        grid = [int(float(v)) for v in text.replace(";", ",").split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"invalid --n-grid {text!r}") from None
    if not grid or any(b <= a for a, b in zip(grid, grid[1:])):
        raise UsageError("--n-grid must be a strictly increasing list")
    return grid


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text + "\n")
    else:
        sys.stdout.write(text + "\n")


def _config(args, sub: str, model, **extra) -> RunConfig:
    return RunConfig(
        subcommand=sub, model=model, n=getattr(args, "n", None),
        n_grid=getattr(args, "n_grid_list", None), m_trees=getattr(args, "m_trees", 1),
        m_pairs=getattr(args, "m_pairs", 0), scaling=getattr(args, "scale", None),
        seed=args.seed_value, threads=getattr(args, "threads", 1), out=getattr(args, "out", None),
        r=getattr(args, "r", None), extra=extra,
    )


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def cmd_generate(args) -> int:
    rng = np.random.default_rng(args.seed_value)
    if args.dendron:
        if not args.r:
            raise UsageError("--dendron needs --r")
        try:
            dspec = _load_json_arg(args.dendron)
            dend = dendron_from_dict(dspec, rng)
        except (ValueError, KeyError, json.JSONDecodeError) as exc:
            raise UsageError(f"invalid dendron spec: {exc}") from exc
        tau = EmpiricalTau.from_dendron(dend, args.r, args.m_trees, rng)
        _emit(tau.to_json(), args.out)
        return EXIT_PASS
    model = resolve_model(args)
    if args.n is None:
        raise UsageError("--n is required")
    try:
        source = make_source(model)
    except KeyError as exc:
        raise UsageError(f"invalid model spec: missing field {exc}") from exc
    except (SpecError, ValueError) as exc:
        raise UsageError(f"invalid model spec: {exc}") from exc
    if args.r:
        scale = Scaling.parse(args.scale or "none").factor(args.n)
        tau = EmpiricalTau.from_trees(source, args.n, args.r, args.m_trees, scale, rng)
        _emit(tau.to_json(), args.out)
        return EXIT_PASS
    lines = [source(args.n, child).to_json() for child in rng.spawn(args.m_trees)]
    _emit("\n".join(lines), args.out)
    return EXIT_PASS


def limits_for(model: dict) -> dict:
    """Limit constants of a model record with provenance notes."""
    name = model["model"]
    if name in ("split", "bst"):
        sp = SplitSpec.from_dict(model.get("split", {})) if name == "split" else SplitSpec.bst()
        chi = chi_closed_form(sp)
        return {"chi": chi, "a": 1 / chi, "two_a": 2 / chi, "provenance": "a = 1/chi (split-tree entropy)"}
    birth = birth_spec_for(model)
    if birth is not None:
        c = cmj_char_size(birth)
        return {"alpha": c.alpha, "beta": c.beta, "a": c.a, "two_a": c.two_a,
                "provenance": f"a = 1/(alpha beta); {c.provenance}"}
    if name == "cgw":
        off = OffspringSpec.from_dict(model.get("offspring", {"kind": "poisson", "lam": 1.0}))
        if limit_family(model) == "condensation":
            kappa = condensation_kappa(off)
            return {"kappa": kappa, "q": 1 - kappa, "max_degree_ratio": 1 - kappa,
                    "provenance": "distance to the hub is Ge(1 - kappa) on {1, 2, ...}"}
        law = off if abs(off.mean - 1) < 1e-12 else off.tilted_to_mean(1.0)
        return {"sigma": float(np.sqrt(law.variance)),
                "provenance": "d/sqrt(n) converges to the CRT coded by (2/sigma) e"}
    raise UsageError(f"no limit constants for model {name!r}")


def cmd_limits(args) -> int:
    model = resolve_model(args)
    try:
        out = limits_for(model)
    except NonMalthusian as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_RUNTIME
    out["config"] = _config(args, "limits", model).to_dict()
    _emit(json.dumps(out, sort_keys=True, indent=2), args.out)
    return EXIT_PASS


def cmd_converge(args) -> int:
    model = resolve_model(args)
    if args.n_grid:
        grid = parse_grid(args.n_grid)
    elif args.n is not None:
        grid = [args.n]
    else:
        raise UsageError("--n or --n-grid is required")
    args.n_grid_list = grid
    try:
        limit_family(model)
        make_source(model)
        if args.scale:
            Scaling.parse(args.scale)
    except (SpecError, ValueError, KeyError) as exc:
        raise UsageError(str(exc)) from exc
    config = _config(args, "converge", model, tightness=args.tightness)
    rng = np.random.default_rng(args.seed_value)
    report, hists = run_study(
        model, grid, args.m_trees, args.m_pairs, args.scale, rng, threads=args.threads,
        tightness=args.tightness, config=config.to_dict(),
    )
    if args.hist_dir:
        d = Path(args.hist_dir)
        d.mkdir(parents=True, exist_ok=True)
        for name, h in hists.items():
            write_histogram_csv(h, d / f"{name}.csv")
    _emit(report.to_json(), args.out)
    for c in report.checks:
        sys.stderr.write(f"{'PASS' if c.passed else 'FAIL'} {c.name}: {c.statistic:.6g} {c.op} {c.threshold:g}\n")
    return EXIT_PASS if report.verdict else EXIT_FAIL


def cmd_compare(args) -> int:
    try:
        a = EmpiricalTau.load(args.tau_a)
        b = EmpiricalTau.load(args.tau_b)
    except (OSError, ValueError, AssertionError) as exc:
        raise UsageError(f"cannot load EmpiricalTau: {exc}") from exc
    if args.r is not None and (a.r != args.r or b.r != args.r):
        raise UsageError(f"--r {args.r} does not match files (r={a.r}, r={b.r})")
    if a.r != b.r:
        raise UsageError(f"order mismatch: r={a.r} vs r={b.r}")
    out = {
        "r": a.r, "m_a": a.m, "m_b": b.m,
        "energy": energy_distance_tau(a, b),
        "ks_entries": ks_statistic(a.upper().ravel(), b.upper().ravel()) if a.r > 1 else 0.0,
        "config": {"subcommand": "compare", "tau_a": args.tau_a, "tau_b": args.tau_b, "r": args.r},
    }
    _emit(json.dumps(out, sort_keys=True, indent=2), args.out)
    return EXIT_PASS


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="treelimit", description="Random trees and their dendron limits.")
    p.add_argument("--version", action="version", version=f"treelimit {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, model=True):
        if model:
            sp.add_argument("--model", help=f"model name ({', '.join(MODELS)})")
            sp.add_argument("--spec", help="model spec as inline JSON or a path to a JSON file")
            sp.add_argument("--offspring", help="offspring law for cgw, e.g. poisson:1 or power_law:0.5,4")
        sp.add_argument("--seed", type=int, help="master seed (fallback: $TREELIMIT_SEED, then 0)")
        sp.add_argument("--out", help="output path (default: stdout)")

    g = sub.add_parser("generate", help="sample trees (JSON lines) or an EmpiricalTau")
    common(g)
    g.add_argument("--n", type=int, help="size parameter of the model")
    g.add_argument("--m-trees", type=int, default=1, help="number of trees / matrix draws")
    g.add_argument("--r", type=int, help="emit an EmpiricalTau of r x r matrices instead of trees")
    g.add_argument("--scale", help="scaling rule for --r: none, 1/log n, 1/sqrt n, 1/n or a number")
    g.add_argument("--dendron", help="dendron spec (JSON) to sample with --r instead of a tree model")
    g.set_defaults(func=cmd_generate)

    lim = sub.add_parser("limits", help="limit constants of a model")
    common(lim)
    lim.set_defaults(func=cmd_limits)

    c = sub.add_parser("converge", help="convergence study with a verdict")
    common(c)
    c.add_argument("--n", type=int, help="single size")
    c.add_argument("--n-grid", help="comma separated increasing sizes")
    c.add_argument("--m-trees", type=int, default=20)
    c.add_argument("--m-pairs", type=int, default=500)
    c.add_argument("--scale", help="scaling rule: none, 1/log n, 1/sqrt n, 1/n or a number")
    c.add_argument("--threads", type=int, default=1, help="worker threads for tree replicas")
    c.add_argument("--tightness", action="store_true", help="add the tightness verdict for --scale")
    c.add_argument("--hist-dir", help="directory for histogram CSVs")
    c.set_defaults(func=cmd_converge)

    cmp_ = sub.add_parser("compare", help="energy and KS distances between two EmpiricalTau files")
    cmp_.add_argument("tau_a")
    cmp_.add_argument("tau_b")
    cmp_.add_argument("--r", type=int)
    cmp_.add_argument("--out")
    cmp_.set_defaults(func=cmd_compare, seed=None)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.seed_value = resolve_seed(args)
        for name in ("m_trees", "m_pairs", "threads", "r", "n"):
            v = getattr(args, name, None)
            if v is not None and v < 1:
                raise UsageError(f"--{name.replace('_', '-')} must be positive")
        return args.func(args)
    except UsageError as exc:
        sys.stderr.write(f"treelimit: error: {exc}\n")
        return EXIT_USAGE
    except Exception as exc:  # surfaced as a runtime failure with its message
        sys.stderr.write(f"treelimit: runtime error: {type(exc).__name__}: {exc}\n")
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
