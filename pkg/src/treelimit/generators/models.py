"""Named tree models built from JSON-style spec records.

A record looks like ``{"model": "cgw", "offspring": {"kind": "poisson",
"lam": 1.0}, "n": 10000}``.  :func:`make_source` turns a record into a
callable ``(n, rng) -> RootedTree`` used by the analysis and CLI layers.
"""

from __future__ import annotations

from functools import lru_cache
from typing import Callable

import numpy as np

from ..tree_core import RootedTree
from . import deterministic
from .attachment import sample_preferential_attachment
from .cmj import BirthSpec, sample_cmj_tree
from .galton_watson import sample_conditioned_gw
from .offspring import OffspringSpec
from .simply_generated import SimplyGeneratedSampler, factorial_log_weights
from .split_trees import SplitSpec, sample_bst, sample_split_tree

Source = Callable[[int, np.random.Generator], RootedTree]

PA_PRESETS = {"rrt": (0.0, 1.0), "port": (1.0, 1.0), "bst_pa": (-1.0, 2.0)}

MODELS = (
    "path", "star", "complete_bary", "superstar", "cgw", "sgw", "split",
    "bst", "pa", "rrt", "port", "bst_pa", "bary", "cmj", "yule",
)


class SpecError(ValueError):
    pass


def _fixed(build) -> Source:
    """Source for a deterministic family; the last tree built is reused."""
    cached = lru_cache(maxsize=1)(build)
    return lambda n, rng: cached(int(n))


def _superstar_source(probs) -> Source:
    probs = {int(k): float(v) for k, v in dict(probs).items()}

    def source(n, rng):
        return deterministic.superstar({k: round(n * p) for k, p in probs.items()})

    return source


def _sgw_source(spec: dict) -> Source:
    alpha = float(spec.get("alpha", 1.0))
    cache: dict = {}

    def source(n, rng):
        if n not in cache:
            cache.clear()
            if "weights" in spec:
                cache[n] = SimplyGeneratedSampler(n, weights=spec["weights"])
            else:
                cache[n] = SimplyGeneratedSampler(n, log_weights=factorial_log_weights(n, alpha))
        return cache[n].sample(rng)

    return source


def make_source(spec: dict) -> Source:
    """Sampler ``(n, rng) -> RootedTree`` for a model record.

    For ``complete_bary`` the size argument is the height; for ``split`` it
    is the number of balls; for ``superstar`` the number of arms.
    """
    model = spec.get("model")
    if model not in MODELS:
        raise SpecError(f"unknown model {model!r}; choose from {', '.join(MODELS)}")
    if model == "path":
        return _fixed(deterministic.path)
    if model == "star":
        return _fixed(deterministic.star)
    if model == "complete_bary":
        b = int(spec.get("b", 2))
        return _fixed(lambda h: deterministic.complete_bary(b, h))
    if model == "superstar":
        return _superstar_source(spec.get("p", {1: 0.5, 2: 0.5}))
    if model == "cgw":
        off = OffspringSpec.from_dict(spec.get("offspring", {"kind": "poisson", "lam": 1.0}))
        return lambda n, rng: sample_conditioned_gw(off, n, rng)
    if model == "sgw":
        return _sgw_source(spec)
    if model == "split":
        sp = SplitSpec.from_dict(spec.get("split", {}))
        return lambda n, rng: sample_split_tree(sp, n, rng).tree
    if model == "bst":
        return sample_bst
    if model in PA_PRESETS:
        chi, rho = PA_PRESETS[model]
        return lambda n, rng: sample_preferential_attachment(chi, rho, n, rng)
    if model == "pa":
        chi, rho = float(spec["chi"]), float(spec["rho"])
        return lambda n, rng: sample_preferential_attachment(chi, rho, n, rng)
    if model == "bary":
        b = float(spec.get("b", 2))
        return lambda n, rng: sample_preferential_attachment(-1.0, b, n, rng)
    if model == "yule":
        return lambda n, rng: sample_cmj_tree(BirthSpec.yule(), n, rng)
    birth = BirthSpec.from_dict(spec["birth"])
    return lambda n, rng: sample_cmj_tree(birth, n, rng)


def birth_spec_for(spec: dict) -> BirthSpec | None:
    """Equivalent CMJ birth process for logarithmic models, if there is one."""
    model = spec.get("model")
    if model in PA_PRESETS:
        return BirthSpec.linear(*PA_PRESETS[model])
    if model == "pa":
        return BirthSpec.linear(float(spec["chi"]), float(spec["rho"]))
    if model == "bary":
        return BirthSpec.linear(-1.0, float(spec.get("b", 2)))
    if model == "bst":
        return BirthSpec.bst()
    if model == "yule":
        return BirthSpec.yule()
    if model == "cmj":
        return BirthSpec.from_dict(spec["birth"])
    return None
