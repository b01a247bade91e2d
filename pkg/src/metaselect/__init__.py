"""Per-instance algorithm selection and meta-algorithm selection with an
ASlib-style evaluation harness."""

from .aslib import load_scenario, validate_scenario, write_scenario
from .arff import MISSING, RelationTable, parse_arff
from .baselines import PerformanceMatrix, oracle_assignment, single_best
from .evaluation import EvalReport, PoolFlags, evaluate, win_tie_loss, wtl_table
from .meta import (
    CostPolicy,
    MetaScenario,
    SelectorPool,
    add_constant_selectors,
    build_meta_scenario,
    meta_select,
    realized_performance_matrix,
    train_meta_selector,
)
from .protocol import Protocol, cropped_mean, make_folds
from .report import emit_report
from .scenario import RunRecord, RunStatus, Scenario
from .scoring import npar10, par10
from .selectors import FAMILIES, SelectorSpec, TrainedSelector, predict_scores, select, train_selector
from .synth import SynthConfig, generate_scenario

__version__ = "0.1.0"
