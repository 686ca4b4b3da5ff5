"""Histogram gradient boosting for multi-class classification.

MART, Robust LogitBoost, and adaptive-base-class (ABC) boosting with a fast
base-class selector controlled by search width ``s``, gap ``g`` and warm-up
``w``.
"""
from .boost import (
    BoostConfig,
    ConfigError,
    IterationRecord,
    SelectorState,
    expected_tree_count,
    loss_trace,
    select_candidates,
    train,
    train_abc,
    train_plain,
)
from .data import (
    BinMap,
    BinnedDataset,
    DataFormatError,
    RawDataset,
    apply_bins,
    fit_bins,
    load_dataset,
)
from .logit import (
    abc_derivs,
    class_losses,
    classical_derivs,
    hessian_det,
    softmax,
    softmax_probs,
)
from .model import (
    EnsembleModel,
    EvalReport,
    ModelFormatError,
    evaluate,
    load_model,
    predict,
    save_model,
)
from .tree import RegressionTree, SplitCriterion, grow_tree, predict_tree, scan_gain

__version__ = "0.1.0"
