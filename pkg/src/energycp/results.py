"""Serializable detection results.

Documents are written as JSON with a fixed field order and every float
rounded to 12 significant digits, so reading a document and writing it
again reproduces the same bytes.
"""

from __future__ import annotations

import json
import time
from dataclasses import asdict, dataclass, field, fields
from typing import Any, Dict, List, Optional

from .agglo import MergeTrace, e_agglo, equal_width_init
from .divisive import DivisiveConfig, DivisiveResult, e_divisive
from .energy import as_series, check_alpha
from .errors import InvalidInputError
from .partition import Partition

SIG_DIGITS = 12


@dataclass
class ResultDocument:
    """Outcome of one detection run.

    ``change_points`` follow the left-cluster convention: ``tau`` is the
    1-based index of the last observation before the change.
    """

    method: str
    T: int
    d: int
    change_points: List[int]
    estimates: Optional[List[Dict[str, Any]]] = None
    gof: Optional[List[float]] = None
    best_k: Optional[int] = None
    config: Dict[str, Any] = field(default_factory=dict)
    seed: Optional[int] = None
    duration_s: Optional[float] = None

    def __post_init__(self):
        if self.method not in ("divisive", "agglo"):
            raise InvalidInputError(f"unknown method {self.method!r}")
        Partition(tuple(self.change_points), self.T)

    def to_json(self) -> str:
        return json.dumps(_canonical(asdict(self)), indent=2) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "ResultDocument":
        raw = json.loads(text)
        known = {f.name for f in fields(cls)}
        unknown = set(raw) - known
        if unknown:
            raise InvalidInputError(f"unknown result fields: {sorted(unknown)}")
        return cls(**raw)

    @property
    def partition(self) -> Partition:
        return Partition(tuple(self.change_points), self.T)


def _canonical(obj):
    if isinstance(obj, bool) or obj is None or isinstance(obj, (int, str)):
        return obj
    if isinstance(obj, float):
        if obj != obj or obj in (float("inf"), float("-inf")):
            raise InvalidInputError("result documents cannot hold non-finite numbers")
        return float(f"{obj:.{SIG_DIGITS}g}")
    if isinstance(obj, dict):
        return {k: _canonical(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_canonical(v) for v in obj]
    if hasattr(obj, "item"):
        return _canonical(obj.item())
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def divisive_document(result: DivisiveResult, d: int,
                      duration: Optional[float] = None) -> ResultDocument:
    return ResultDocument(
        method="divisive",
        T=result.final_partition.T,
        d=d,
        change_points=result.change_points,
        estimates=[asdict(s) for s in result.estimates],
        config=asdict(result.config),
        seed=result.config.seed,
        duration_s=duration,
    )


def agglo_document(trace: MergeTrace, d: int, alpha: float, init_width: Optional[int],
                   duration: Optional[float] = None) -> ResultDocument:
    return ResultDocument(
        method="agglo",
        T=trace.initial.T,
        d=d,
        change_points=trace.change_points,
        gof=list(trace.gof),
        best_k=trace.best_k,
        config={
            "alpha": alpha,
            "init_width": init_width,
            "initial_change_points": list(trace.initial.boundaries),
        },
        duration_s=duration,
    )


def detect(series, method: str = "divisive", cfg: Optional[DivisiveConfig] = None,
           init=None, alpha: float = 1.0, threads: Optional[int] = None,
           timing: bool = True) -> ResultDocument:
    """Run one detection procedure and package its outcome.

    For ``method="agglo"``, ``init`` is either a :class:`Partition` or an
    integer block width for :func:`equal_width_init`. ``cfg`` applies to
    the divisive method only. With ``timing=False`` the duration is left
    out, which makes the document a pure function of the inputs.
    """
    X = as_series(series)
    t0 = time.perf_counter()
    if method == "divisive":
        res = e_divisive(X, cfg or DivisiveConfig(), threads=threads)
        duration = time.perf_counter() - t0 if timing else None
        return divisive_document(res, X.shape[1], duration)
    if method == "agglo":
        alpha = check_alpha(alpha)
        width = None
        if init is None:
            raise InvalidInputError("agglomerative detection needs an initial clustering")
        if not isinstance(init, Partition):
            width = int(init)
            init = equal_width_init(X.shape[0], width)
        trace = e_agglo(X, init, alpha)
        duration = time.perf_counter() - t0 if timing else None
        return agglo_document(trace, X.shape[1], alpha, width, duration)
    raise InvalidInputError(f"unknown method {method!r}")
