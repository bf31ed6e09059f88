"""Model specification and design-matrix construction."""

import math
from dataclasses import dataclass, field

import numpy as np

from ..errors import SingleLevelFactor, UnknownFactor


@dataclass(frozen=True)
class ModelSpec:
    """Response + one categorical fixed factor + random intercept factors."""

    response: str
    fixed_factor: str
    random_factors: tuple = ()

    def __post_init__(self):
        rf = tuple(self.random_factors)
        if len(set(rf)) != len(rf):
            raise ValueError("random_factors must not repeat")
        object.__setattr__(self, "random_factors", rf)


@dataclass(frozen=True)
class Design:
    """Numeric design: y, fixed design X, and one indicator Z per factor."""

    y: np.ndarray
    X: np.ndarray
    Z_list: tuple
    fixed_factor: str
    fixed_levels: tuple            # alphabetical; first is the reference
    random_factors: tuple
    random_levels: dict            # factor -> tuple of levels (alphabetical)
    n_dropped: int
    beta_names: tuple = field(default=())

    @property
    def n_obs(self):
        return self.y.shape[0]


def _is_missing(v):
    return v is None or (isinstance(v, float) and math.isnan(v))


def build_design(rows, spec):
    """Turn record mappings into (y, X, Z_list) with dummy coding.

    Rows with a missing response are dropped (count reported in
    Design.n_dropped). X is an intercept plus one dummy column per
    non-reference fixed level, alphabetical; each Z is an n x q 0/1 group
    indicator with alphabetical level order.
    """
    kept = []
    n_dropped = 0
    for row in rows:
        v = row.get(spec.response)
        if _is_missing(v):
            n_dropped += 1
            continue
        kept.append(row)
    if not kept:
        raise UnknownFactor(f"response '{spec.response}' missing from "
                            "every row")
    y = np.array([float(r[spec.response]) for r in kept])

    def factor_column(name):
        vals = []
        for r in kept:
            if name not in r or _is_missing(r.get(name)):
                raise UnknownFactor(f"factor '{name}' missing from a row")
            vals.append(str(r[name]))
        levels = tuple(sorted(set(vals)))
        if len(levels) < 2:
            raise SingleLevelFactor(
                f"factor '{name}' has a single observed level")
        return vals, levels

    fixed_vals, fixed_levels = factor_column(spec.fixed_factor)
    n = len(kept)
    X = np.ones((n, len(fixed_levels)))
    for j, level in enumerate(fixed_levels[1:], start=1):
        X[:, j] = [1.0 if v == level else 0.0 for v in fixed_vals]
    beta_names = ("(intercept)",) + tuple(
        f"{spec.fixed_factor}[{lv}]" for lv in fixed_levels[1:])

    Z_list = []
    random_levels = {}
    for name in spec.random_factors:
        vals, levels = factor_column(name)
        index = {lv: k for k, lv in enumerate(levels)}
        Z = np.zeros((n, len(levels)))
        for i, v in enumerate(vals):
            Z[i, index[v]] = 1.0
        Z_list.append(Z)
        random_levels[name] = levels

    return Design(y=y, X=X, Z_list=tuple(Z_list),
                  fixed_factor=spec.fixed_factor, fixed_levels=fixed_levels,
                  random_factors=tuple(spec.random_factors),
                  random_levels=random_levels, n_dropped=n_dropped,
                  beta_names=beta_names)
