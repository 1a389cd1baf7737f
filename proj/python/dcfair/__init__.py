"""Partially fair linear classifiers via DC-constrained training.

Thin wrapper over the compiled extension; see the C++ library for the
full API (CLI: the `dcfair` binary).
"""

try:
    from ._dcfair import *  # noqa: F401,F403  (installed layout)
    from ._dcfair import __doc__ as _doc
except ImportError:  # pragma: no cover - build-tree layout
    from _dcfair import *  # noqa: F401,F403
    from _dcfair import __doc__ as _doc

__doc__ = _doc
__all__ = [
    "Dataset",
    "dataset_from_arrays",
    "load_libsvm",
    "load_csv",
    "split",
    "featurize",
    "score",
    "hinge_surrogate",
    "sigmoid_surrogate",
    "dp_metric",
    "pdp_metric",
    "wdp_metric",
    "wpdp_metric",
    "fairness_report",
    "accuracy",
    "select_interval",
    "theoretical_schedule",
    "train",
]
