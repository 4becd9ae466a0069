"""Two-party gradient boosting on vertically partitioned data.

Both parties run in one process here; use the ``anongbdt`` command-line tool for
separate processes over TCP.

    d0, d1, common = gen_synthetic(500, 400, 3, 3, overlap=0.6, seed=1)
    run = train(d0, d1, TrainConfig(T=2, D=3))
    p = infer(d0, d1, *run["models"])
"""

from ._core import (
    CsvError,
    Dataset,
    ProtocolError,
    TrainConfig,
    f1_score,
    gen_synthetic,
    infer,
    load_csv,
    plain_reference,
    save_csv,
    sigmoid_approx,
    train,
)

__all__ = [
    "CsvError",
    "Dataset",
    "ProtocolError",
    "TrainConfig",
    "f1_score",
    "gen_synthetic",
    "infer",
    "load_csv",
    "plain_reference",
    "save_csv",
    "sigmoid_approx",
    "train",
]
