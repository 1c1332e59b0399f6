"""Deterministic Monte-Carlo BLER sweeps.

Trials are grouped in fixed-size blocks.  Block ``b`` of grid point ``i``
draws from a Philox stream keyed by ``(seed, i, b)``, and blocks are reduced
in index order, so the worker count never changes any output.  All protocols
of a point share the same channel realizations.

With the ``conditional`` sampler the direct-link noise is drawn conditioned
on more than t hard-decision errors; counts are then conditional and the
reported BLER and interval are scaled by the exact probability of that event.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from functools import lru_cache
from itertools import product
from statistics import NormalDist

import numpy as np

from .channel import NetworkParams
from .codes import make_code
from .protocols import CASES, PROTOCOLS, SimOptions, direct_link_weight, simulate_block

from . import __version__

CSV_HEADER = (
    "protocol,code,eb_n0_db,h,h1,h2,trials,errors,bler,ci_low,ci_high,"
    "case_I,case_IIa,case_IIb,case_IIc,case_III"
).split(",")

Z95 = NormalDist().inv_cdf(0.975)


def estimate_interval(errors: int, trials: int, z: float = Z95) -> tuple[float, float]:
    """Wilson score interval (95% by default)."""
    if trials <= 0:
        raise ValueError("trials must be positive")
    if not 0 <= errors <= trials:
        raise ValueError("errors must lie in [0, trials]")
    n, k = trials, errors
    denom = n + z * z
    centre = (k + z * z / 2) / denom
    half = z / denom * math.sqrt(k * (n - k) / n + z * z / 4)
    lo = 0.0 if k == 0 else max(0.0, centre - half)
    hi = 1.0 if k == n else min(1.0, centre + half)
    return lo, hi


@dataclass(frozen=True)
class SweepConfig:
    code: str = "hamming-15-11"
    protocols: tuple[str, ...] = PROTOCOLS
    decoder: str = "bm"
    ebn0_db: tuple[float, ...] = (4.0, 5.0, 6.0, 7.0, 8.0)
    h: tuple[float, ...] = (1.0,)
    h1: float = 1.0
    h2: float = 1.0
    er_ratio: float = 1.0
    trials: int | None = None  # fixed trial count; None selects target-error mode
    target_errors: int = 200
    max_trials: int = 10**8
    seed: int = 0
    block_size: int = 4096
    sampler: str = "conditional"
    crc_checks: bool = True
    genie_case_ii: bool = True
    random_messages: bool = True

    def __post_init__(self):
        if not self.ebn0_db or not self.h:
            raise ValueError("the Eb/N0 and h grids must be non-empty")
        for p in self.protocols:
            if p not in PROTOCOLS:
                raise ValueError(f"unknown protocol {p!r}")
        if not self.protocols:
            raise ValueError("at least one protocol is required")
        budget = self.trials if self.trials is not None else self.max_trials
        if budget < 1000:
            raise ValueError("at least 1000 trials per point are required")
        if self.target_errors < 1:
            raise ValueError("target_errors must be positive")
        if self.block_size < 1:
            raise ValueError("block_size must be positive")
        if self.seed < 0 or self.seed >= 2**64:
            raise ValueError("seed must be an unsigned 64-bit integer")
        self.options()  # validates sampler settings

    def options(self) -> SimOptions:
        return SimOptions(
            decoder=self.decoder,
            crc_checks=self.crc_checks,
            genie_case_ii=self.genie_case_ii,
            random_messages=self.random_messages,
            sampler=self.sampler,
        )

    def points(self) -> list[tuple[float, float]]:
        """Grid of (Eb/N0 dB, h), Eb/N0 varying fastest within each h."""
        return [(db, h) for h, db in product(self.h, self.ebn0_db)]

    def digest(self) -> str:
        blob = json.dumps(asdict(self), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


@dataclass
class BlerEstimate:
    trials: int
    errors: int
    bler: float
    ci_low: float
    ci_high: float
    case_counts: dict[str, int]  # case labels of the erroneous trials
    case_occurrences: dict[str, int] = field(default_factory=dict)  # case labels of all trials
    weight: float = 1.0  # probability mass represented by the sampled trials
    stop_reason: str = "fixed"


@dataclass
class SweepRow:
    protocol: str
    code: str
    eb_n0_db: float
    h: float
    h1: float
    h2: float
    estimate: BlerEstimate


@lru_cache(maxsize=8)
def _code(name: str):
    return make_code(name)


def _block_rng(seed: int, point: int, block: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, point, block])))


def _params(cfg: SweepConfig, db: float, h: float) -> NetworkParams:
    code = _code(cfg.code)
    return NetworkParams.from_ebn0(db, code.rate, h=h, h1=cfg.h1, h2=cfg.h2, er_ratio=cfg.er_ratio)


def _run_block(cfg: SweepConfig, point: int, block: int, size: int):
    db, h = cfg.points()[point]
    code = _code(cfg.code)
    res = simulate_block(code, _params(cfg, db, h), cfg.protocols, _block_rng(cfg.seed, point, block), size, cfg.options())
    ncase = len(CASES)
    occ = np.bincount(res.case, minlength=ncase)
    errs = np.array([[res.errors[p].sum()] + np.bincount(res.case[res.errors[p]], minlength=ncase).tolist()
                     for p in cfg.protocols], dtype=np.int64)
    return occ.astype(np.int64), errs


def _block_sizes(cfg: SweepConfig) -> list[int]:
    total = cfg.trials if cfg.trials is not None else cfg.max_trials
    full, rest = divmod(total, cfg.block_size)
    return [cfg.block_size] * full + ([rest] if rest else [])


def _simulate_point(cfg: SweepConfig, point: int, pool):
    """Accumulate blocks in order until the stopping rule fires."""
    ncase = len(CASES)
    occ = np.zeros(ncase, dtype=np.int64)
    errs = np.zeros((len(cfg.protocols), ncase + 1), dtype=np.int64)
    trials = 0
    sizes = _block_sizes(cfg)
    reason = "fixed" if cfg.trials is not None else "cap"
    wave = max(1, getattr(pool, "_max_workers", 1)) * 2 if pool is not None else 1
    b = 0
    done = False
    while b < len(sizes) and not done:
        idx = range(b, min(b + wave, len(sizes)))
        if pool is None:
            results = [_run_block(cfg, point, i, sizes[i]) for i in idx]
        else:
            results = list(pool.map(_run_block, [cfg] * len(idx), [point] * len(idx), idx, [sizes[i] for i in idx]))
        for i, (o, e) in zip(idx, results):
            occ += o
            errs += e
            trials += sizes[i]
            b = i + 1
            if cfg.trials is None and errs[:, 0].min() >= cfg.target_errors:
                reason = "target"
                done = True
                break
    return trials, occ, errs, reason


def run_sweep(cfg: SweepConfig, workers: int = 1) -> list[SweepRow]:
    """Simulate every grid point and protocol; identical results for any ``workers``."""
    code = _code(cfg.code)
    pool = ProcessPoolExecutor(max_workers=workers) if workers > 1 else None
    rows = []
    try:
        for point, (db, h) in enumerate(cfg.points()):
            params = _params(cfg, db, h)
            weight = direct_link_weight(code, params) if cfg.sampler == "conditional" else 1.0
            trials, occ, errs, reason = _simulate_point(cfg, point, pool)
            for j, proto in enumerate(cfg.protocols):
                k = int(errs[j, 0])
                lo, hi = estimate_interval(k, trials)
                est = BlerEstimate(
                    trials=trials,
                    errors=k,
                    bler=weight * k / trials,
                    ci_low=weight * lo,
                    ci_high=weight * hi,
                    case_counts={c: int(errs[j, 1 + i]) for i, c in enumerate(CASES)},
                    case_occurrences={c: int(occ[i]) for i, c in enumerate(CASES)},
                    weight=weight,
                    stop_reason=reason,
                )
                rows.append(SweepRow(proto, code.name, db, h, cfg.h1, cfg.h2, est))
    finally:
        if pool is not None:
            pool.shutdown()
    return rows


def default_workers() -> int:
    return max(1, min(8, os.cpu_count() or 1))


def sweep_csv(cfg: SweepConfig, rows: list[SweepRow], extra_meta: dict[str, object] | None = None) -> str:
    """CSV with '#' metadata lines; contains nothing that depends on the worker count."""
    buf = io.StringIO()
    meta = {"tool": f"tworelay {__version__}", "seed": cfg.seed, "config_digest": cfg.digest(),
            "decoder": cfg.decoder, "sampler": cfg.sampler, "block_size": cfg.block_size,
            "target_errors": cfg.target_errors if cfg.trials is None else "", "max_trials": cfg.max_trials}
    meta.update(extra_meta or {})
    for key, value in meta.items():
        buf.write(f"# {key}={value}\n")
    for i, r in enumerate(rows):
        e = r.estimate
        occ = ";".join(f"{c}:{e.case_occurrences[c]}" for c in CASES)
        buf.write(f"# row {i}: protocol={r.protocol} weight={e.weight!r} stop={e.stop_reason} occurrences={occ}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for r in rows:
        e = r.estimate
        writer.writerow([r.protocol, r.code, repr(float(r.eb_n0_db)), repr(float(r.h)), repr(float(r.h1)),
                         repr(float(r.h2)), e.trials, e.errors, repr(float(e.bler)), repr(float(e.ci_low)),
                         repr(float(e.ci_high))] + [e.case_counts[c] for c in CASES[1:]])
    return buf.getvalue()


def read_sweep_csv(text: str) -> list[dict[str, str]]:
    lines = [ln for ln in text.splitlines() if ln and not ln.startswith("#")]
    if not lines:
        raise ValueError("CSV has no header or data")
    reader = csv.DictReader(lines)
    return list(reader)


# ----------------------------------------------------------------------
# horizontal SNR gain


def crossing_snr(snr_db, bler, level: float) -> float:
    """SNR where the curve crosses ``level``, interpolating log10(BLER) linearly in dB."""
    snr = np.asarray(snr_db, dtype=float)
    y = np.asarray(bler, dtype=float)
    order = np.argsort(snr)
    snr, y = snr[order], y[order]
    if np.any(y <= 0):
        keep = y > 0
        snr, y = snr[keep], y[keep]
    ly = np.log10(y)
    target = math.log10(level)
    for a in range(len(snr) - 1):
        y0, y1 = ly[a], ly[a + 1]
        if (y0 - target) * (y1 - target) <= 0 and y0 != y1:
            return float(snr[a] + (target - y0) * (snr[a + 1] - snr[a]) / (y1 - y0))
    raise ValueError(f"curve does not cross BLER {level:g}")


def horizontal_gain(snr_db, bler_ref, bler_new, levels) -> dict[float, float]:
    """SNR saving of ``bler_new`` relative to ``bler_ref`` at each BLER level."""
    return {lv: crossing_snr(snr_db, bler_ref, lv) - crossing_snr(snr_db, bler_new, lv) for lv in levels}
