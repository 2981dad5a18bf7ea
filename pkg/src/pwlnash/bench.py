﻿# encoding: utf-8-sig

"""
Benchmark harness: solve runs, the results CSV, performance profiles and
per-subset statistics.
"""

import math
import os
import time
from concurrent.futures import ProcessPoolExecutor, as_completed
from enum import StrEnum
from pathlib import Path
from typing import Iterable

import numpy as np
import pandas as pd
from filelock import FileLock, Timeout
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from .errors import ParameterError
from .game import CostKind, GciInstance, MixedProfile, generate_instance, load_instance, save_instance
from .logutil import get_logger
from .sgm import (
    DEFAULT_DELTA_0,
    DEFAULT_DELTA_F,
    DEFAULT_MU,
    DEFAULT_TIME_LIMIT,
    SgmConfig,
    SgmStatus,
    certify_equilibrium,
    default_delta_gap,
    direct_procedure,
    run_sgm,
    two_level_procedure,
)

SIGNIFICANT_DIGITS = 9
CERTIFY_SLACK = 1e-9
LOCK_TIMEOUT = 10
ERROR_STATUS = "Error"
UNCERTIFIED_STATUS = "Uncertified"

# ----------------------------------------------------------------------------
class Method(StrEnum):
    SGM = "sgm"
    DIRECT = "direct"
    TWOLEVEL = "twolevel"


def _round_significant(x: float) -> float:
    return float(f"{x:.{SIGNIFICANT_DIGITS}g}")


# ----------------------------------------------------------------------------
class RunRecord(BaseModel):
    """One (instance, method) outcome; floats carry 9 significant digits."""
    model_config = ConfigDict(frozen=True)

    instance_id: str
    m: int = Field(ge=1)
    n: int = Field(ge=1)
    cost_kind: CostKind
    method: Method
    status: str
    wall_time_s: float = Field(ge=0)
    iterations_stage1: int = Field(default=0, ge=0)
    iterations_stage2: int = Field(default=0, ge=0)
    certified_regret: float = math.nan

    @field_validator("wall_time_s", "certified_regret")
    @classmethod
    def _round(cls, v: float) -> float:
        return _round_significant(v) if math.isfinite(v) else v

    @property
    def key(self) -> tuple[str, str]:
        return (self.instance_id, self.method.value)

    @property
    def solved(self) -> bool:
        return self.status == SgmStatus.SOLVED.value

    def to_row(self) -> dict[str, str]:
        row = {}
        for name, value in self.model_dump().items():
            row[name] = f"{value:.{SIGNIFICANT_DIGITS}g}" if isinstance(value, float) else str(value)
        return row


RESULT_COLUMNS = tuple(RunRecord.model_fields)


# ----------------------------------------------------------------------------
def records_to_frame(records: Iterable[RunRecord]) -> pd.DataFrame:
    rows = [r.to_row() for r in records]
    return pd.DataFrame(rows, columns=list(RESULT_COLUMNS))

# ----------------------------------------------------------------------------
def frame_to_records(df: pd.DataFrame) -> list[RunRecord]:
    missing = set(RESULT_COLUMNS) - set(df.columns)
    if missing:
        get_logger().error(f"results table lacks columns {sorted(missing)}")
        raise ValueError(f"Results table lacks columns {sorted(missing)}")
    out = []
    for row in df[list(RESULT_COLUMNS)].to_dict(orient="records"):
        for name in ("instance_id", "status", "cost_kind", "method"):
            row[name] = str(row[name])
        for name in ("m", "n", "iterations_stage1", "iterations_stage2"):
            row[name] = int(row[name])
        for name in ("wall_time_s", "certified_regret"):
            row[name] = float(row[name])
        out.append(RunRecord.model_validate(row))
    return out

# ----------------------------------------------------------------------------
def read_records(results_file: str | os.PathLike) -> list[RunRecord]:
    """
    Raises:
        FileNotFoundError: if the file does not exist.
        ValueError: if columns are missing.
    """
    path = Path(results_file)
    if not path.is_file():
        get_logger().error(f"Results file not found: {path}")
        raise FileNotFoundError(f"Results file not found: {path}")
    df = pd.read_csv(path, dtype={"instance_id": str, "status": str})
    return frame_to_records(df)


# ----------------------------------------------------------------------------
class ResultsSink:
    """
    Results CSV guarded by a file lock. Rows are keyed by (instance_id, method);
    saving goes through a temporary file and keeps the previous file as .bak.
    """

    # ----------------------------------------------------------------------------
    def __init__(self, results_file: str | os.PathLike = None):
        self.records: dict[tuple[str, str], RunRecord] = {}
        self.lock: FileLock = None
        if results_file is None or str(results_file) == '':
            results_file = Path.cwd() / "results.csv"
        self.results_file = Path(results_file)
        self.lock_file = self.results_file.with_suffix('.lock')

    # ----------------------------------------------------------------------------
    def __enter__(self):
        self.lock_file.parent.mkdir(parents=True, exist_ok=True)
        self.lock = FileLock(self.lock_file, timeout=LOCK_TIMEOUT)
        try:
            self.lock.acquire()
        except Timeout as e:
            get_logger().error(f"Failed to acquire lock for results file {self.results_file}: timeout after {LOCK_TIMEOUT} seconds")
            raise RuntimeError("Could not acquire lock for results file. Another process may be using it.") from e
        return self

    # ----------------------------------------------------------------------------
    def __exit__(self, exc_type, exc_value, traceback):
        try:
            if self.lock and self.lock.is_locked:
                self.lock.release()
        except Exception as e:
            get_logger().warning(f"Failed to release lock on exit: {e}")

    # ----------------------------------------------------------------------------
    def load(self) -> None:
        """
        Load existing rows; a missing file means no rows yet.
        """
        if not self.results_file.is_file():
            return
        for rec in read_records(self.results_file):
            self.records[rec.key] = rec
        get_logger().info(f"Loaded {len(self.records)} rows from {self.results_file}")

    # ----------------------------------------------------------------------------
    def __contains__(self, key: tuple[str, str]) -> bool:
        return key in self.records

    # ----------------------------------------------------------------------------
    def add(self, record: RunRecord) -> None:
        self.records[record.key] = record

    # ----------------------------------------------------------------------------
    def save(self) -> None:
        """
        Raises:
            IOError: if the file cannot be written.
        """
        try:
            self.results_file.parent.mkdir(parents=True, exist_ok=True)
            work_path = self.results_file.with_suffix('.tmp')
            records_to_frame(self.records.values()).to_csv(work_path, index=False)
            if self.results_file.is_file():
                backup_path = self.results_file.with_suffix('.bak')
                if backup_path.is_file():
                    backup_path.unlink()
                self.results_file.rename(backup_path)
            work_path.rename(self.results_file)
            get_logger().debug(f"{len(self.records)} rows saved to {self.results_file}")
        except IOError as e:
            get_logger().error(f"Error saving results to file: {e}")
            raise IOError(f"Error saving results to file: {e}")


# ----------------------------------------------------------------------------
def run_method(inst: GciInstance,
               method: Method,
               *,
               delta_f: float = DEFAULT_DELTA_F,
               mu: float = DEFAULT_MU,
               delta_0: float = DEFAULT_DELTA_0,
               time_limit_s: float = DEFAULT_TIME_LIMIT,
               workers: int = 1) -> tuple[MixedProfile, RunRecord]:
    """
    Solve with one method and certify the result in the exact game.

    Wall time covers the solve call only. A run whose certified regret
    exceeds delta_f + delta_gap is reported as Uncertified.

    Raises:
        ParameterError: on invalid tolerances.
    """
    method = Method(method)
    iterations2 = 0
    started = time.perf_counter()
    if method is Method.SGM:
        config = SgmConfig.for_target(delta_f, mu=mu, delta_f=delta_f, time_limit_s=time_limit_s, workers=workers)
        outcome = run_sgm(inst, config)
        profile, status, iterations1 = outcome.profile, outcome.status, outcome.iterations
    elif method is Method.DIRECT:
        profile, outcome = direct_procedure(inst, delta_f, mu, time_limit_s=time_limit_s, workers=workers)
        status, iterations1 = outcome.status, outcome.iterations
    else:
        profile, (stage1, stage2) = two_level_procedure(inst, delta_f, delta_0, mu,
                                                        time_limit_s=time_limit_s, workers=workers)
        iterations1 = stage1.iterations
        iterations2 = stage2.iterations if stage2 is not None else 0
        status = stage2.status if stage2 is not None else stage1.status
    wall_time = time.perf_counter() - started

    gap = default_delta_gap(delta_f, mu)
    certified = certify_equilibrium(inst, profile, delta_f, delta_gap=gap)
    status = status.value
    if status == SgmStatus.SOLVED.value and certified > delta_f + gap + CERTIFY_SLACK:
        get_logger().warning(f"{inst.instance_id}/{method.value}: certified regret {certified:.3e} above tolerance")
        status = UNCERTIFIED_STATUS

    record = RunRecord(
        instance_id=inst.instance_id or "instance",
        m=inst.m,
        n=inst.n,
        cost_kind=inst.cost_kind,
        method=method,
        status=status,
        wall_time_s=wall_time,
        iterations_stage1=iterations1,
        iterations_stage2=iterations2,
        certified_regret=certified,
    )
    get_logger().info(f"{record.instance_id}/{method.value}: {status} in {wall_time:.3f}s, regret {certified:.3e}")
    return profile, record


# ----------------------------------------------------------------------------
class BenchPlan(BaseModel):
    """Cartesian run matrix of a benchmark batch."""
    model_config = ConfigDict(frozen=True)

    ms: tuple[int, ...] = Field(min_length=1)
    ns: tuple[int, ...] = Field(min_length=1)
    kinds: tuple[CostKind, ...] = Field(default=tuple(CostKind), min_length=1)
    instances_per_cell: int = Field(default=10, ge=1)
    methods: tuple[Method, ...] = Field(default=tuple(Method), min_length=1)
    seed: int = 0
    delta_f: float = Field(default=DEFAULT_DELTA_F, gt=0)
    mu: float = Field(default=DEFAULT_MU, gt=0, lt=1)
    delta_0: float = Field(default=DEFAULT_DELTA_0, gt=0)
    time_limit_s: float = Field(default=DEFAULT_TIME_LIMIT, gt=0)
    jobs: int = Field(default=1, ge=1)

    @model_validator(mode="after")
    def _check_sizes(self):
        if any(m < 2 for m in self.ms) or any(n < 1 for n in self.ns):
            raise ValueError("need m >= 2 and n >= 1")
        return self

    def instances(self) -> list[tuple[int, int, CostKind, int]]:
        """(m, n, kind, seed) of every instance in the batch."""
        return [(m, n, kind, self.seed + k)
                for m in self.ms for n in self.ns for kind in self.kinds
                for k in range(self.instances_per_cell)]


# ----------------------------------------------------------------------------
def _bench_task(instance_file: str, method: str, plan: dict, cell: dict) -> RunRecord:
    """
    One run of the batch. Any failure, a broken instance file included,
    becomes an Error row built from `cell` (instance_id, m, n, cost_kind).
    """
    try:
        inst = load_instance(instance_file)
        _, record = run_method(inst, Method(method), delta_f=plan["delta_f"], mu=plan["mu"],
                               delta_0=plan["delta_0"], time_limit_s=plan["time_limit_s"])
    except Exception as e:
        get_logger().error(f"{cell['instance_id']}/{method} failed: {e}")
        record = RunRecord(**cell, method=Method(method), status=ERROR_STATUS, wall_time_s=0.0)
    return record

# ----------------------------------------------------------------------------
def run_bench(plan: BenchPlan, results_file: str | os.PathLike) -> list[RunRecord]:
    """
    Run every (instance, method) cell of the plan missing from the results
    file and append its record. Instances are written to an `instances`
    folder beside the results file.

    Returns:
        list[RunRecord]: all records of the results file after the batch.
    """
    results_file = Path(results_file)
    instance_dir = results_file.parent / "instances"
    plan_dict = plan.model_dump(mode="json")

    with ResultsSink(results_file) as sink:
        sink.load()
        tasks = []
        for m, n, kind, seed in plan.instances():
            inst_id = f"gci_m{m}_n{n}_{kind.value}_s{seed}"
            pending = [meth for meth in plan.methods if (inst_id, meth.value) not in sink]
            if len(pending) < len(plan.methods):
                get_logger().warning(f"{inst_id}: skipping {len(plan.methods) - len(pending)} finished runs")
            if not pending:
                continue
            inst_file = instance_dir / f"{inst_id}.json"
            if not inst_file.is_file():
                save_instance(generate_instance(m, n, kind, seed), inst_file)
            cell = dict(instance_id=inst_id, m=m, n=n, cost_kind=kind)
            tasks.extend((str(inst_file), meth.value, cell) for meth in pending)

        get_logger().info(f"bench: {len(tasks)} runs to do, {len(sink.records)} already recorded")
        if plan.jobs > 1 and len(tasks) > 1:
            with ProcessPoolExecutor(max_workers=plan.jobs) as pool:
                futures = [pool.submit(_bench_task, f, meth, plan_dict, cell) for f, meth, cell in tasks]
                for fut in as_completed(futures):
                    sink.add(fut.result())
                    sink.save()
        else:
            for f, meth, cell in tasks:
                sink.add(_bench_task(f, meth, plan_dict, cell))
                sink.save()
        return list(sink.records.values())


# ----------------------------------------------------------------------------
class ProfileCurve(BaseModel):
    """Fraction of instances solved within ratio tau of the best method."""
    model_config = ConfigDict(frozen=True)

    method: str
    points: tuple[tuple[float, float], ...]

    @model_validator(mode="after")
    def _check_monotone(self):
        fractions = [f for _, f in self.points]
        if any(not (0.0 <= f <= 1.0) for f in fractions):
            raise ValueError("fractions must lie in [0, 1]")
        if any(b < a for a, b in zip(fractions, fractions[1:])):
            raise ValueError("fractions must be nondecreasing in tau")
        return self

    def fraction_at(self, tau: float) -> float:
        frac = 0.0
        for t, f in self.points:
            if t <= tau:
                frac = f
        return frac


# ----------------------------------------------------------------------------
def _time_table(records: Iterable[RunRecord]) -> pd.DataFrame:
    df = pd.DataFrame([{"instance_id": r.instance_id, "method": r.method.value,
                        "time": r.wall_time_s if r.solved else math.inf} for r in records])
    if df.empty:
        get_logger().error("performance profiles need at least one record")
        raise ParameterError("No records to profile")
    table = df.pivot_table(index="instance_id", columns="method", values="time", aggfunc="min")
    if table.isna().any().any():
        get_logger().error("methods were run on different instance sets")
        raise ParameterError("Every instance must be attempted by every compared method")
    return table

# ----------------------------------------------------------------------------
def performance_profiles(records: Iterable[RunRecord]) -> dict[str, ProfileCurve]:
    """
    Performance profile per method: for each tau, the fraction of instances
    whose time ratio t / min over methods is <= tau. Unsolved runs have
    ratio +inf.

    Raises:
        ParameterError: if there are no records or instance sets differ.
    """
    table = _time_table(records)
    times = table.to_numpy(dtype=float)
    best = times.min(axis=1, keepdims=True)
    with np.errstate(invalid="ignore", divide="ignore"):
        ratios = np.where(np.isfinite(times), times / np.maximum(best, np.finfo(float).tiny), np.inf)
    ratios = np.where(np.isfinite(times) & (times == best), 1.0, ratios)

    taus = np.unique(ratios[np.isfinite(ratios)])
    curves = {}
    for col, method in enumerate(table.columns):
        points = tuple((float(t), float(np.mean(ratios[:, col] <= t))) for t in taus)
        curves[method] = ProfileCurve(method=method, points=points)
    return curves

# ----------------------------------------------------------------------------
def write_profiles(curves: dict[str, ProfileCurve], out: str | os.PathLike) -> list[Path]:
    """
    Write the curves as CSV (method, tau, fraction) and as a step plot with a
    logarithmic tau axis. The plot format follows the suffix of `out`
    (.svg by default, .png accepted); the CSV sits beside it.

    Returns:
        list[Path]: files written.
    """
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    out = Path(out)
    if out.suffix.lower() not in (".svg", ".png"):
        out = out.with_suffix(".svg")
    out.parent.mkdir(parents=True, exist_ok=True)
    csv_path = out.with_suffix(".csv")

    rows = [{"method": name, "tau": t, "fraction": f} for name, c in curves.items() for t, f in c.points]
    pd.DataFrame(rows, columns=["method", "tau", "fraction"]).to_csv(csv_path, index=False,
                                                                     float_format=f"%.{SIGNIFICANT_DIGITS}g")

    fig, ax = plt.subplots(figsize=(6, 4))
    tau_max = max((t for c in curves.values() for t, _ in c.points), default=1.0)
    for name, c in curves.items():
        taus = [1.0] + [t for t, _ in c.points] + [max(tau_max, 1.0) * 2.0]
        fracs = [0.0] + [f for _, f in c.points] + [c.points[-1][1] if c.points else 0.0]
        ax.step(taus, fracs, where="post", label=name)
    ax.set_xscale("log")
    ax.set_xlabel("performance ratio tau")
    ax.set_ylabel("fraction of instances")
    ax.set_ylim(0.0, 1.05)
    ax.legend(loc="lower right")
    fig.savefig(out, bbox_inches="tight")
    plt.close(fig)
    get_logger().info(f"Performance profiles written to {out} and {csv_path}")
    return [out, csv_path]


# ----------------------------------------------------------------------------
KIND_LABELS = {CostKind.LOG: "log", CostKind.ISR: "root", CostKind.NCF: "nonconvex"}

def subset_label(kind: CostKind, m: int) -> str:
    """log234, root567, nonconvex234, ... ; other player counts get <kind><m>."""
    prefix = KIND_LABELS[CostKind(kind)]
    if 2 <= m <= 4:
        return f"{prefix}234"
    if 5 <= m <= 7:
        return f"{prefix}567"
    return f"{prefix}{m}"

# ----------------------------------------------------------------------------
def geometric_mean(values: Iterable[float]) -> float:
    arr = np.asarray(list(values), dtype=float)
    if arr.size == 0:
        return math.nan
    return float(np.exp(np.mean(np.log(arr))))

# ----------------------------------------------------------------------------
def stats_summary(records: Iterable[RunRecord]) -> pd.DataFrame:
    """
    Per (subset, method): number of runs, % solved over all runs, geometric
    mean time and mean iterations over solved runs. Iterations are those of
    the first stage for the two-level method.
    """
    df = pd.DataFrame([{
        "subset": subset_label(r.cost_kind, r.m),
        "method": r.method.value,
        "solved": r.solved,
        "time": r.wall_time_s,
        "iterations": r.iterations_stage1,
    } for r in records])
    columns = ["subset", "method", "runs", "solved_pct", "geo_mean_time", "mean_iterations"]
    if df.empty:
        return pd.DataFrame(columns=columns)

    rows = []
    for (subset, method), grp in df.groupby(["subset", "method"], sort=True):
        solved = grp[grp["solved"]]
        rows.append({
            "subset": subset,
            "method": method,
            "runs": len(grp),
            "solved_pct": 100.0 * len(solved) / len(grp),
            "geo_mean_time": geometric_mean(solved["time"]),
            "mean_iterations": float(solved["iterations"].mean()) if len(solved) else math.nan,
        })
    return pd.DataFrame(rows, columns=columns)


__all__ = [
    "Method",
    "RunRecord",
    "RESULT_COLUMNS",
    "records_to_frame",
    "frame_to_records",
    "read_records",
    "ResultsSink",
    "run_method",
    "BenchPlan",
    "run_bench",
    "ProfileCurve",
    "performance_profiles",
    "write_profiles",
    "subset_label",
    "geometric_mean",
    "stats_summary",
]
