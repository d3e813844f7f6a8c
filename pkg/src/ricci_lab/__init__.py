"""Numerical laboratory for four-dimensional conformal curvature invariants
and Ricci flow on symmetric model geometries."""

from ._kernels import BACKEND
from .curvature import (AlgebraicCurvature, CurvatureDecomposition, Metric4,
                        SingerThorpeBlocks, decompose, g_k, kulkarni_nomizu,
                        scalars, schouten, singer_thorpe_blocks)
from .flow import (FlowConfig, FlowState, FlowTrace, g2_monitor,
                   integral_evolution_check, integrate_flow,
                   pointwise_evolution_check, reduced_rhs)
from .fuzzing import (FuzzConfig, FuzzReport, check_block_bound, check_sharp33,
                      check_wee, check_young, run_campaign, sample_curvature)
from .invariants import (InvariantReport, conformal_invariance_check,
                         gap_check, global_report, integrate,
                         modified_quotient, pinch_suite, yamabe_quotient)
from .models import (FubiniStudy, ProductS2S2, RoundS4, conformal_chart_s4,
                     conformal_schouten, from_spec, random_conformal_exponent)

__version__ = "0.1.0"

__all__ = [
    "AlgebraicCurvature", "BACKEND", "CurvatureDecomposition", "FlowConfig",
    "FlowState", "FlowTrace", "FubiniStudy", "FuzzConfig", "FuzzReport",
    "InvariantReport", "Metric4", "ProductS2S2", "RoundS4",
    "SingerThorpeBlocks", "check_block_bound", "check_sharp33", "check_wee",
    "check_young", "conformal_chart_s4", "conformal_invariance_check",
    "conformal_schouten", "decompose",
    "from_spec", "g2_monitor", "g_k", "gap_check", "global_report",
    "integral_evolution_check", "integrate", "integrate_flow",
    "kulkarni_nomizu", "modified_quotient", "pinch_suite",
    "pointwise_evolution_check", "random_conformal_exponent", "reduced_rhs",
    "run_campaign", "sample_curvature", "scalars", "schouten",
    "singer_thorpe_blocks", "yamabe_quotient",
]
