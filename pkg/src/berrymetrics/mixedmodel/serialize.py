"""JSON serialization with fixed key order and 6-significant-digit floats."""

import json


def round_sig(x, sig=6):
    """Round to `sig` significant digits (exact zeros stay zero)."""
    if x == 0 or not (x == x) or x in (float("inf"), float("-inf")):
        return x
    return float(f"{x:.{sig}g}")


def _clean(obj):
    if isinstance(obj, float):
        return round_sig(obj)
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    return obj


def dumps(obj):
    """Serialize preserving insertion order; floats at 6 significant digits."""
    return json.dumps(_clean(obj), indent=2) + "\n"


def fit_to_dict(fit):
    out = {
        "converged": bool(fit.converged),
        "n_obs": int(fit.n_obs),
        "n_params": int(fit.n_params),
        "n_dropped": int(fit.n_dropped),
        "reml_loglik": float(fit.reml_loglik),
        "sigma2": float(fit.sigma2),
        "var_components": {
            name: float(v) for name, v in
            zip(fit.random_factors or
                [f"z{i}" for i in range(len(fit.var_components))],
                fit.var_components)},
        "beta": {name: float(b) for name, b in
                 zip(fit.beta_names or
                     [f"b{i}" for i in range(fit.beta.size)], fit.beta)},
        "beta_cov": [[float(v) for v in row] for row in fit.beta_cov],
    }
    return out


def pairwise_to_dict(table):
    return {
        "fixed_factor": table.fixed_factor,
        "confidence": table.confidence,
        "rows": [{
            "level_a": r.level_a,
            "level_b": r.level_b,
            "estimate": r.estimate,
            "std_error": r.std_error,
            "kr_df": r.kr_df,
            "t_value": r.t_value,
            "p_value": r.p_value,
            "ci_lo": r.ci_lo,
            "ci_hi": r.ci_hi,
            "p_tukey": r.p_tukey,
        } for r in table.rows],
    }


def power_to_dict(result, label=None):
    out = {
        "power": result.power,
        "alpha": result.alpha,
        "n_sims": result.n_sims,
        "seed": result.seed,
        "mc_std_error": result.mc_std_error,
        "n_failed": result.n_failed,
    }
    if label:
        out["label"] = label
    return out
