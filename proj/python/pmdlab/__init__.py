"""Exact computation and learning for Poisson multinomial distributions."""

import json as _json

from . import _core
from ._core import Hypothesis, pmf, siirv_pmf, tv, pmd_pmf_table, siirv_pmf_table

__all__ = [
    "Hypothesis",
    "pmf",
    "siirv_pmf",
    "tv",
    "pmd_pmf_table",
    "siirv_pmf_table",
    "decompose",
    "learn_pmd",
    "learn_siirv",
]


def decompose(rows, c=0.01, t=20.0, gamma=6.5, measure=True):
    """Structural decomposition of the PMD with the given rows, as a dict with the TV ledger."""
    return _json.loads(_core.decompose_json(rows, c, t, gamma, measure))


def _learn(fn, samples, k, epsilon, delta, seed):
    hyp, report = fn([list(map(int, s)) for s in samples], k, epsilon, delta, seed)
    return hyp, _json.loads(report)


def learn_pmd(samples, k, epsilon=0.1, delta=0.1, seed=1):
    """Learn a PMD from a finite sample (drawn with replacement). Returns (Hypothesis or None, report)."""
    return _learn(_core.learn_pmd, samples, k, epsilon, delta, seed)


def learn_siirv(samples, k, epsilon=0.1, delta=0.1, seed=1):
    """Learn a SIIRV from 1-D integer samples. Returns (Hypothesis or None, report)."""
    return _learn(_core.learn_siirv, [[s] if isinstance(s, int) else s for s in samples], k, epsilon, delta, seed)
