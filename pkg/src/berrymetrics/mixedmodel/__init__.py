from .design import Design, ModelSpec, build_design
from .kenward_roger import KRState, kr_adjust, kr_f_test, kr_state
from .pairwise import PairwiseRow, PairwiseTable, pairwise
from .power import PowerResult, power_mc, simulate_response
from .reml import FitResult, fit_design, fit_reml
from .serialize import dumps, fit_to_dict, pairwise_to_dict, power_to_dict

__all__ = [
    "Design", "FitResult", "KRState", "ModelSpec", "PairwiseRow",
    "PairwiseTable", "PowerResult",
    "build_design", "dumps", "fit_design", "fit_reml", "fit_to_dict",
    "kr_adjust", "kr_f_test", "kr_state", "pairwise", "pairwise_to_dict",
    "power_mc", "power_to_dict", "simulate_response",
]
