"""Consumer-side loader for pulse train files in ML pipelines.

Exposes three operations: `load` a train file into columnar arrays,
`iter_windows` over it by count or duration, and `save_predictions`
to emit a file the benchmark evaluator accepts. The binary layout is
decoded independently here; see `load` for the byte map.
"""

from .loader import LoadedTrain, TrainFormatError, iter_windows, load, save_predictions

__all__ = ["LoadedTrain", "TrainFormatError", "load", "iter_windows",
           "save_predictions"]

__version__ = "0.1.0"
