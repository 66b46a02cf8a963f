"""Simulated three-segment series and the Monte Carlo study runner.

Every scenario draws ``T`` observations in three equal clusters: the
outer two from a standard normal base (``N_d(0, I)`` when multivariate),
the middle one from an altered distribution ``G``.

Random numbers come from numpy's PCG64 bit generator. Normals use
``Generator.standard_normal`` (ziggurat); chi-square uses
``Generator.chisquare``. This is recorded as :data:`RNG_IDENTITY`.
"""

from __future__ import annotations

import csv
import io
import json
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

from .divisive import DivisiveConfig, default_threads, e_divisive
from .errors import InvalidInputError
from .evaluation import adjusted_rand, rand_index
from .partition import Partition

RNG_IDENTITY = (
    f"numpy {np.__version__} PCG64(SeedSequence); normals: Generator.standard_normal "
    "(ziggurat); Student t: normal / sqrt(chisquare(nu) / nu)"
)

KINDS = (
    "uni-mean",
    "uni-variance",
    "uni-tail",
    "bi-mean",
    "bi-correlation",
    "dim-correlation",
)


@dataclass(frozen=True)
class Scenario:
    """A simulation design.

    ``param`` is the size of the change: the mean shift for ``*-mean``,
    the variance for ``uni-variance``, the degrees of freedom for
    ``uni-tail``, and the correlation for ``bi-correlation``. The
    ``dim-correlation`` design uses ``dim`` coordinates with correlation
    ``param`` (0.9 in the published grid) between all of them, or, with
    ``noise``, between the first two only.
    """

    kind: str
    param: float
    T: int
    seed: int = 0
    dim: int = 2
    noise: bool = False

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InvalidInputError(f"unknown scenario {self.kind!r}; choose from {', '.join(KINDS)}")
        if self.T < 3 or self.T % 3:
            raise InvalidInputError(f"T must be a positive multiple of 3, got {self.T}")
        if not 0 <= int(self.seed) < 2**64:
            raise InvalidInputError(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        p = float(self.param)
        if not math.isfinite(p):
            raise InvalidInputError("param must be finite")
        if self.kind == "uni-variance" and p <= 0:
            raise InvalidInputError(f"variance must be > 0, got {p}")
        if self.kind == "uni-tail" and p <= 0:
            raise InvalidInputError(f"degrees of freedom must be > 0, got {p}")
        if self.kind in ("bi-correlation", "dim-correlation") and not abs(p) < 1:
            raise InvalidInputError(f"correlation must satisfy |rho| < 1, got {p}")
        if self.kind.startswith("dim-") and self.dim < 2:
            raise InvalidInputError(f"dim must be >= 2, got {self.dim}")

    @property
    def d(self) -> int:
        if self.kind.startswith("uni-"):
            return 1
        if self.kind.startswith("bi-"):
            return 2
        return self.dim

    def truth(self) -> Partition:
        return Partition((self.T // 3, 2 * self.T // 3), self.T)

    def label(self) -> str:
        if self.kind == "dim-correlation":
            noise = ", noise" if self.noise else ""
            return f"{self.kind}(d={self.dim}, rho={self.param:g}{noise})"
        return f"{self.kind}({self.param:g})"


def make_scenario(kind: str, param: Optional[float], T: int, seed: int = 0,
                  dim: int = 2, noise: bool = False) -> Scenario:
    """Scenario with the default correlation 0.9 for the dimension design."""
    if param is None:
        if kind != "dim-correlation":
            raise InvalidInputError(f"scenario {kind!r} needs a parameter")
        param = 0.9
    return Scenario(kind, float(param), int(T), int(seed), int(dim), bool(noise))


def _rng(seed, *key) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, *key])))


def _equicorrelated(d, rho):
    S = np.full((d, d), rho)
    np.fill_diagonal(S, 1.0)
    return S


def _middle_cov(scn: Scenario) -> np.ndarray:
    d, rho = scn.d, scn.param
    if scn.kind == "bi-correlation" or not scn.noise:
        return _equicorrelated(d, rho)
    S = np.eye(d)
    S[0, 1] = S[1, 0] = rho
    return S


def generate(scn: Scenario) -> Tuple[np.ndarray, Partition]:
    """Draw one series and its true segmentation.

    Returns
    -------
    series : ndarray, shape (T, d)
    truth : Partition
        Change points at ``T/3`` and ``2T/3``.
    """
    rng = _rng(scn.seed, 0)
    n = scn.T // 3
    d = scn.d
    Z = rng.standard_normal((scn.T, d))
    mid = Z[n:2 * n]
    p = scn.param
    if scn.kind in ("uni-mean", "bi-mean"):
        mid += p
    elif scn.kind == "uni-variance":
        mid *= math.sqrt(p)
    elif scn.kind == "uni-tail":
        chi = rng.chisquare(p, size=(n, 1))
        mid /= np.sqrt(chi / p)
    else:
        L = np.linalg.cholesky(_middle_cov(scn))
        Z[n:2 * n] = mid @ L.T
    return Z, scn.truth()


@dataclass
class StudyReport:
    scenario: str
    kind: str
    param: float
    T: int
    d: int
    noise: bool
    replications: int
    mean_rand: float
    se_rand: float
    mean_adjusted_rand: float
    mean_change_points: float
    mean_runtime: float
    seed: int
    num_permutations: int
    sig_level: float
    min_size: int
    alpha: float
    rng: str = RNG_IDENTITY
    rand: List[float] = field(default_factory=list, repr=False)

    def row(self) -> Dict[str, object]:
        out = asdict(self)
        out.pop("rand")
        return out


REPORT_COLUMNS = [f for f in StudyReport.__dataclass_fields__ if f != "rand"]


def replicate_seeds(seed: int, replications: int) -> List[Tuple[int, int]]:
    """(data seed, permutation seed) for each replicate."""
    out = []
    for r in range(replications):
        s = np.random.SeedSequence([seed, r]).generate_state(4, dtype=np.uint64)
        out.append((int(s[0]), int(s[1])))
    return out


def run_study(scn: Scenario, replications: int = 100,
              cfg: Optional[DivisiveConfig] = None, threads: Optional[int] = None,
              keep_results: bool = False):
    """Run E-Divisive on ``replications`` fresh draws of ``scn``.

    Replicate ``r`` draws its data and permutations from streams derived
    from ``(scn.seed, r)``, so the report does not depend on ``threads``.
    ``cfg.seed`` is ignored.

    Returns
    -------
    StudyReport
        With ``keep_results`` the per-replicate ``DivisiveResult`` list is
        returned as a second value.
    """
    if replications < 1:
        raise InvalidInputError(f"replications must be >= 1, got {replications}")
    cfg = cfg or DivisiveConfig(num_permutations=199)
    seeds = replicate_seeds(scn.seed, replications)

    def one(pair):
        data_seed, perm_seed = pair
        x, truth = generate(Scenario(scn.kind, scn.param, scn.T, data_seed, scn.dim, scn.noise))
        rcfg = DivisiveConfig(cfg.alpha, cfg.min_size, cfg.num_permutations,
                              cfg.sig_level, cfg.max_change_points, perm_seed)
        t0 = time.perf_counter()
        res = e_divisive(x, rcfg, threads=1)
        elapsed = time.perf_counter() - t0
        return res, truth, elapsed

    threads = default_threads() if threads is None else max(1, int(threads))
    if threads == 1:
        outcomes = [one(p) for p in seeds]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            outcomes = list(pool.map(one, seeds))

    rand = [rand_index(truth, res.final_partition) for res, truth, _ in outcomes]
    arand = [adjusted_rand(truth, res.final_partition) for res, truth, _ in outcomes]
    se = float(np.std(rand, ddof=1) / math.sqrt(replications)) if replications > 1 else 0.0
    report = StudyReport(
        scenario=scn.label(),
        kind=scn.kind,
        param=scn.param,
        T=scn.T,
        d=scn.d,
        noise=scn.noise,
        replications=replications,
        mean_rand=float(np.mean(rand)),
        se_rand=se,
        mean_adjusted_rand=float(np.mean(arand)),
        mean_change_points=float(np.mean([len(r.change_points) for r, _, _ in outcomes])),
        mean_runtime=float(np.mean([e for _, _, e in outcomes])),
        seed=scn.seed,
        num_permutations=cfg.num_permutations,
        sig_level=cfg.sig_level,
        min_size=cfg.min_size,
        alpha=cfg.alpha,
        rand=rand,
    )
    if keep_results:
        return report, [res for res, _, _ in outcomes]
    return report


def reports_to_csv(reports: List[StudyReport]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=REPORT_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for rep in reports:
        writer.writerow(rep.row())
    return buf.getvalue()


def reports_to_json(reports: List[StudyReport]) -> str:
    return json.dumps([rep.row() for rep in reports], indent=2) + "\n"
