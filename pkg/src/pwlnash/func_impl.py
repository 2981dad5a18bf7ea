﻿# encoding: utf-8-sig
import os
import json
from pathlib import Path

import pandas as pd

from .bench import (
    BenchPlan,
    Method,
    ProfileCurve,
    ResultsSink,
    RunRecord,
    performance_profiles,
    read_records,
    run_bench,
    run_method,
    stats_summary,
    write_profiles,
)
from .game import (
    CostKind,
    GciInstance,
    MixedProfile,
    MixedStrategy,
    PureStrategy,
    generate_instance,
    load_instance,
    save_instance,
)
from .logutil import get_logger
from .sgm import certify_equilibrium

# ----------------------------------------------------------------------------
def generate_instance_file(m: int,
                           n: int,
                           kind: CostKind,
                           seed: int,
                           out_file: str | os.PathLike) -> GciInstance:
    """
    Generate a random instance and write it as JSON.

    Args:
        m (int): number of players.
        n (int): number of markets.
        kind (CostKind): cybersecurity cost family.
        seed (int): generator seed.
        out_file (str | os.PathLike): destination JSON file.
    Returns:
        GciInstance: the generated instance.
    """
    inst = generate_instance(m, n, kind, seed)
    save_instance(inst, out_file)
    return inst

# ----------------------------------------------------------------------------
def profile_to_json(profile: MixedProfile) -> list[dict]:
    return [
        {
            "player": p,
            "support": [{"prob": pr, "Q": list(st.Q), "b": list(st.b), "s": st.s}
                        for st, pr in zip(sigma.support, sigma.probs)],
        }
        for p, sigma in enumerate(profile.strategies)
    ]

# ----------------------------------------------------------------------------
def profile_from_json(entries: list[dict]) -> MixedProfile:
    strategies = []
    for entry in sorted(entries, key=lambda e: e["player"]):
        support = tuple(PureStrategy(Q=tuple(x["Q"]), b=tuple(x["b"]), s=x["s"]) for x in entry["support"])
        probs = tuple(float(x["prob"]) for x in entry["support"])
        strategies.append(MixedStrategy(support=support, probs=probs))
    return MixedProfile(strategies=tuple(strategies))

# ----------------------------------------------------------------------------
def save_solution(out_file: str | os.PathLike,
                  profile: MixedProfile,
                  record: RunRecord,
                  delta_f: float) -> None:
    """
    Write {instance_id, method, status, delta_f, profile, record} as JSON.
    """
    out_file = Path(out_file)
    out_file.parent.mkdir(parents=True, exist_ok=True)
    data = {
        "instance_id": record.instance_id,
        "method": record.method.value,
        "status": record.status,
        "delta_f": delta_f,
        "profile": profile_to_json(profile),
        "record": record.to_row(),
    }
    work_path = out_file.with_suffix('.tmp')
    with open(work_path, 'w', encoding='utf-8') as file:
        json.dump(data, file, indent=2)
    work_path.replace(out_file)
    get_logger().info(f"Solution saved to {out_file}")

# ----------------------------------------------------------------------------
def load_solution(solution_file: str | os.PathLike) -> tuple[MixedProfile, dict]:
    """
    Read a solution file.

    Returns:
        tuple[MixedProfile, dict]: the profile and the raw JSON content.
    Raises:
        FileNotFoundError: If the file does not exist.
        json.JSONDecodeError: If the file is not valid JSON.
        ValueError: If the content has no profile.
    """
    path = Path(solution_file)
    try:
        with open(path, 'r', encoding='utf-8') as file:
            raw = json.load(file)
    except FileNotFoundError:
        get_logger().error(f"Solution file not found: {path}")
        raise
    except json.JSONDecodeError:
        get_logger().error(f"Error decoding JSON from solution file: {path}")
        raise
    if not isinstance(raw, dict) or not isinstance(raw.get("profile"), list):
        get_logger().error(f"Invalid data format in {path}")
        raise ValueError(f"Invalid data format in solution file {path}")
    return profile_from_json(raw["profile"]), raw

# ----------------------------------------------------------------------------
def solve_instance_file(instance: GciInstance | str | os.PathLike,
                        method: Method,
                        solution_file: str | os.PathLike,
                        *,
                        delta_f: float,
                        mu: float,
                        delta_0: float,
                        time_limit_s: float,
                        workers: int = 1,
                        results_file: str | os.PathLike | None = None) -> RunRecord:
    """
    Solve an instance with one method, write the solution file and, if
    requested, add the record to a results CSV.

    Args:
        instance (GciInstance | str | os.PathLike): instance or its JSON file.
        method (Method): sgm, direct or twolevel.
        solution_file (str | os.PathLike): destination of the solution JSON.
    Returns:
        RunRecord: the run's record.
    """
    inst = instance if isinstance(instance, GciInstance) else load_instance(instance)
    profile, record = run_method(inst, method, delta_f=delta_f, mu=mu, delta_0=delta_0,
                                 time_limit_s=time_limit_s, workers=workers)
    save_solution(solution_file, profile, record, delta_f)
    if results_file:
        with ResultsSink(results_file) as sink:
            sink.load()
            sink.add(record)
            sink.save()
    return record

# ----------------------------------------------------------------------------
def certify_solution_file(instance_file: str | os.PathLike,
                          solution_file: str | os.PathLike,
                          delta_f: float | None = None) -> float:
    """
    Recompute the certified regret of a stored solution in the exact game.

    Args:
        delta_f (float | None): tolerance; the solution's own delta_f if None.
    Returns:
        float: max certified regret over players.
    """
    inst = load_instance(instance_file)
    profile, raw = load_solution(solution_file)
    delta = float(delta_f if delta_f is not None else raw.get("delta_f"))
    return certify_equilibrium(inst, profile, delta)

# ----------------------------------------------------------------------------
def bench_to_csv(plan: BenchPlan, results_file: str | os.PathLike) -> list[RunRecord]:
    return run_bench(plan, results_file)

# ----------------------------------------------------------------------------
def profiles_from_csv(results_file: str | os.PathLike,
                      out_file: str | os.PathLike) -> tuple[dict[str, ProfileCurve], list[Path]]:
    """
    Performance profiles of a results CSV, written as plot and CSV.
    """
    curves = performance_profiles(read_records(results_file))
    paths = write_profiles(curves, out_file)
    return curves, paths

# ----------------------------------------------------------------------------
def stats_from_csv(results_file: str | os.PathLike,
                   out_file: str | os.PathLike | None = None) -> pd.DataFrame:
    """
    Per-subset statistics of a results CSV, optionally written to CSV.
    """
    table = stats_summary(read_records(results_file))
    if out_file:
        Path(out_file).parent.mkdir(parents=True, exist_ok=True)
        table.to_csv(out_file, index=False, float_format="%.9g")
        get_logger().info(f"Statistics written to {out_file}")
    return table


__all__ = [
    "generate_instance_file",
    "profile_to_json",
    "profile_from_json",
    "save_solution",
    "load_solution",
    "solve_instance_file",
    "certify_solution_file",
    "bench_to_csv",
    "profiles_from_csv",
    "stats_from_csv",
]
