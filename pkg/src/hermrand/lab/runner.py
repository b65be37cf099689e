"""Block-parallel Monte-Carlo runner.

A :class:`Task` is a small picklable description (kind plus canonical JSON
parameters).  Workers build the heavy state (Hermite tables, grids) once per
process and cache it by task.  Block ``b`` always draws from
``block_rng(seed, stream, b)`` and results are concatenated in block order,
so the output does not depend on the number of workers.
"""

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
import json
import math
import multiprocessing

import numpy as np

from .. import grids
from ..measures import (
    CoefficientProfile,
    RandomLaw,
    isotropic_profile,
    normalize_rows,
    power_profile,
    sample_coefficient_block,
)
from ..norms import NormEvaluator, NormSpec, default_grid, full_window
from ..rng import BLOCK_SIZE, block_ranges, block_rng
from ..spectral import eigenfunction_table, enumerate_window, level_window


@dataclass(frozen=True)
class Task:
    kind: str
    spec: str

    @property
    def params(self):
        return json.loads(self.spec)


def make_task(kind, **params):
    if kind not in _KINDS:
        raise ValueError(f"unknown task kind {kind!r}")
    return Task(kind, json.dumps(params, sort_keys=True))


def window_from_spec(d, spec):
    """``{"level": k}`` or ``{"h", "a_h", "b_h", "delta"}`` to a SpectralWindow."""
    if "level" in spec:
        return level_window(d, int(spec["level"]))
    return enumerate_window(d, spec["h"], spec["a_h"], spec["b_h"], spec.get("delta", 1.0))


def profile_from_spec(window, spec):
    kind = spec.get("kind", "isotropic")
    if kind == "isotropic":
        return isotropic_profile(window)
    if kind == "power":
        return power_profile(window, spec["exponent"])
    gamma = np.asarray(spec["gamma"], dtype=float)
    return CoefficientProfile(window, gamma / np.linalg.norm(gamma))


# --- task kinds -------------------------------------------------------------

def _setup_point(p):
    window = window_from_spec(p["d"], p["window"])
    profile = profile_from_spec(window, p["profile"])
    phi = eigenfunction_table(window, np.asarray(p["x0"], dtype=float)[None, :])[:, 0]
    return {"profile": profile, "law": RandomLaw.from_dict(p["law"]), "phi": phi}


def _run_point(state, rng, size):
    block = normalize_rows(sample_coefficient_block(state["profile"], state["law"], rng, size))
    return np.abs(block @ state["phi"])


def _setup_norms(p):
    window = window_from_spec(p["d"], p["window"])
    profile = profile_from_spec(window, p["profile"])
    evaluators = []
    for r, s, theta in p["specs"]:
        spec = NormSpec(math.inf if r is None else r, s, theta)
        grid = None
        if spec.is_sup and p.get("spacing_factor"):
            grid = grids.sup_grid(window.d, window.lambda_max, p["spacing_factor"])
        evaluators.append(NormEvaluator(window, spec, grid if grid is not None else default_grid(window, spec)))
    mult = window.eigenvalues() ** (p["sobolev"] / 2.0) if p.get("sobolev") else None
    return {"profile": profile, "law": RandomLaw.from_dict(p["law"]), "evaluators": evaluators, "mult": mult}


def _run_norms(state, rng, size):
    block = normalize_rows(sample_coefficient_block(state["profile"], state["law"], rng, size))
    if state["mult"] is not None:
        block = block * state["mult"][None, :]
    out = np.empty((size, len(state["evaluators"])))
    for m in range(size):
        for i, ev in enumerate(state["evaluators"]):
            out[m, i] = ev(block[m])
    return out


def _setup_coordinate(p):
    window = window_from_spec(p["d"], p["window"]) if "window" in p else None
    n = window.N if window is not None else int(p["N"])
    gamma = np.full(n, 1.0 / math.sqrt(n))
    return {"profile": CoefficientProfile(window, gamma), "law": RandomLaw.from_dict(p["law"])}


def _run_coordinate(state, rng, size):
    raw = sample_coefficient_block(state["profile"], state["law"], rng, size)
    norms_sq = np.sum(np.abs(raw) ** 2, axis=1)
    return np.stack([np.abs(raw[:, 0]) / np.sqrt(norms_sq), norms_sq], axis=1)


def _setup_vector_norm(p):
    gamma = np.asarray(p["gamma"], dtype=float)
    return {"profile": CoefficientProfile(None, gamma), "law": RandomLaw.from_dict(p["law"])}


def _run_vector_norm(state, rng, size):
    raw = sample_coefficient_block(state["profile"], state["law"], rng, size)
    return np.linalg.norm(raw, axis=1)


def _setup_besov(p):
    d = p["d"]
    n_lo, n_hi = p["n_lo"], p["n_hi"]
    # levels whose eigenvalue 2k + d lies in [2^n_lo, 2^(n_hi + 1))
    k_max = (2 ** (n_hi + 1) - 1 - d) // 2
    window = full_window(d, k_max)
    lam = window.eigenvalues()
    keep = lam >= 2**n_lo
    gamma = np.where(keep, lam ** (-float(p["decay"])), 0.0)
    blocks = np.floor(np.log2(lam)).astype(int)
    spec = NormSpec(float(p["r"]))
    ev = NormEvaluator(window, spec, default_grid(window, spec))
    return {
        "gamma": gamma,
        "law": RandomLaw.from_dict(p["law"]),
        "mult": lam ** (float(p["s"]) / 2.0),
        "blocks": [np.flatnonzero((blocks == n) & keep) for n in range(n_lo, n_hi + 1)],
        "evaluator": ev,
    }


def _run_besov(state, rng, size):
    gamma = state["gamma"]
    raw = gamma[None, :] * state["law"].sample(rng, (size, gamma.size))
    out = np.empty((size, 2))
    for m in range(size):
        c = raw[m]
        out[m, 0] = state["evaluator"](c * state["mult"])
        out[m, 1] = sum(float(np.linalg.norm(c[idx])) for idx in state["blocks"])
    return out


_KINDS = {
    "point": (_setup_point, _run_point),
    "norms": (_setup_norms, _run_norms),
    "coordinate": (_setup_coordinate, _run_coordinate),
    "vector_norm": (_setup_vector_norm, _run_vector_norm),
    "besov": (_setup_besov, _run_besov),
}

_STATE = {}


def task_state(task):
    key = (task.kind, task.spec)
    if key not in _STATE:
        if len(_STATE) > 8:
            _STATE.clear()
        _STATE[key] = _KINDS[task.kind][0](task.params)
    return _STATE[key]


def run_block(task, seed, stream, block, size):
    rng = block_rng(seed, stream, block)
    return _KINDS[task.kind][1](task_state(task), rng, size)


def run_task(task, n_samples, seed, stream=0, jobs=1, block_size=BLOCK_SIZE):
    """All ``n_samples`` statistics of ``task``, in sample order."""
    ranges = list(block_ranges(n_samples, block_size))
    args = [(task, seed, stream, b, stop - start) for b, start, stop in ranges]
    if jobs is None or jobs <= 1 or len(args) == 1:
        parts = [run_block(*a) for a in args]
    else:
        ctx = multiprocessing.get_context("fork")
        with ProcessPoolExecutor(max_workers=int(jobs), mp_context=ctx) as pool:
            parts = list(pool.map(run_block, *zip(*args)))
    return np.concatenate(parts, axis=0)
