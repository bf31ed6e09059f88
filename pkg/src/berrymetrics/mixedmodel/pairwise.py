"""Pairwise treatment comparisons with KR standard errors and df."""

import itertools
import math
from dataclasses import dataclass

import numpy as np
from scipy import stats

from ..errors import NotConverged
from .kenward_roger import kr_adjust, kr_state

CONFIDENCE = 0.95


@dataclass(frozen=True)
class PairwiseRow:
    level_a: str
    level_b: str
    estimate: float
    std_error: float
    kr_df: float
    t_value: float
    p_value: float
    ci_lo: float
    ci_hi: float
    p_tukey: float


@dataclass(frozen=True)
class PairwiseTable:
    fixed_factor: str
    rows: tuple
    confidence: float = CONFIDENCE


def _level_contrast(fit, level):
    """Contrast giving that level's mean offset relative to the reference."""
    c = np.zeros(fit.beta.size)
    if level != fit.fixed_levels[0]:
        c[1 + fit.fixed_levels[1:].index(level)] = 1.0
    return c


def pairwise(fit):
    """All unordered fixed-level pairs with unadjusted and Tukey p-values.

    Row (a, b) reports the estimate of mean(a) - mean(b); raw two-sided t
    p-values are primary, a Tukey (studentized-range) adjusted column is
    emitted alongside.
    """
    if not fit.converged:
        raise NotConverged("pairwise comparisons need a converged fit")
    levels = fit.fixed_levels
    k = len(levels)
    state = kr_state(fit) if fit.sigma2 > 0.0 else None
    rows = []
    for a, b in itertools.combinations(levels, 2):
        c = _level_contrast(fit, a) - _level_contrast(fit, b)
        est = float(c @ fit.beta)
        se, df = kr_adjust(fit, c, state=state)
        if se > 0.0:
            t = est / se
            p = 2.0 * float(stats.t.sf(abs(t), df))
            tcrit = float(stats.t.ppf(0.5 + CONFIDENCE / 2.0, df))
            ci_lo, ci_hi = est - tcrit * se, est + tcrit * se
            p_tuk = float(stats.studentized_range.sf(
                abs(t) * math.sqrt(2.0), k, df))
        else:
            t = 0.0 if est == 0.0 else math.copysign(math.inf, est)
            p = 1.0 if est == 0.0 else 0.0
            ci_lo = ci_hi = est
            p_tuk = p
        rows.append(PairwiseRow(level_a=a, level_b=b, estimate=est,
                                std_error=se, kr_df=df, t_value=t,
                                p_value=min(max(p, 0.0), 1.0),
                                ci_lo=ci_lo, ci_hi=ci_hi,
                                p_tukey=min(max(p_tuk, 0.0), 1.0)))
    return PairwiseTable(fixed_factor=fit.fixed_factor or "fixed",
                         rows=tuple(rows))
