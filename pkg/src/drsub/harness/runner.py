"""Turn an :class:`ExperimentConfig` into CSV rows."""
from __future__ import annotations

import csv
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import astuple, dataclass, fields
from pathlib import Path

import numpy as np

from .. import adversarial
from ..discrete import EmpiricalSetObjective, greedy, lift_and_round
from ..errors import CapabilityError, ConfigError, DrsubError
from ..geometry import ConstraintSet, MirrorMap, diameter
from ..objectives import (
    Coverage,
    ListFamily,
    MultilinearObjective,
    RatingsFamily,
    SetFunctionFamily,
    sample_sets,
    smoothness_bound_l1,
)
from ..solvers import StepSchedule, estimate_sigma, frank_wolfe, sample_index, sga, sma
from .config import ExperimentConfig, derive_seed
from .data import load_coverage_file, load_ratings, synthetic_ratings

CSV_HEADER = "config_id,solver,k,t,B,seed,value_continuous,value_rounded,evals,ms"
EXACT_VALUE_MAX_N = 20


@dataclass
class RunRecord:
    config_id: str
    solver: str
    k: int
    t: int
    B: int
    seed: int
    value_continuous: float
    value_rounded: float
    evals: int
    ms: float


@dataclass
class Problem:
    family: SetFunctionFamily
    fixed_body: ConstraintSet | None = None
    x_loc: np.ndarray | None = None

    @property
    def n(self) -> int:
        return self.family.n


def build_problem(cfg: ExperimentConfig) -> Problem:
    obj = cfg.objective
    if obj in ("facility-location", "concave-over-modular"):
        if cfg.ratings is not None:
            R, _ = load_ratings(cfg.resolve(cfg.ratings), cfg.ratings_format)
        else:
            R = synthetic_ratings(
                cfg.synthetic_users, cfg.synthetic_items, cfg.synthetic_density, cfg.synthetic_r_max, cfg.synthetic_seed
            )
        kind = "facility" if obj == "facility-location" else "concave"
        return Problem(RatingsFamily(R, kind, cfg.power))
    if obj == "coverage-file":
        sets, universe = load_coverage_file(cfg.resolve(cfg.coverage_file))
        return Problem(ListFamily([Coverage(sets, universe)]))
    if obj == "stationary-trap":
        inst = adversarial.stationary_trap_instance(cfg.trap_k)
        return Problem(ListFamily([inst.f]), inst.K, inst.x_loc)
    inst = adversarial.frank_wolfe_trap_instance(cfg.trap_n)
    return Problem(ListFamily(inst.fs), inst.K)


def _body(cfg: ExperimentConfig, problem: Problem, solver: str, k: int) -> ConstraintSet:
    if problem.fixed_body is not None:
        return problem.fixed_body
    if cfg.constraint == "box":
        return ConstraintSet.box(problem.n)
    if solver == "sm" or cfg.constraint == "simplex":
        # entropy mirror ascent lives on the scaled simplex; for monotone objectives
        # the cardinality body has the same optimal value
        return ConstraintSet.simplex(problem.n, k)
    return ConstraintSet.cardinality(problem.n, k)


def _schedule(cfg, solver, F, K, mirror, x1, pilot_rng, mean) -> StepSchedule:
    if cfg.schedule == "inverse-sqrt":
        return StepSchedule.inverse_sqrt(cfg.c_for(solver))
    if cfg.schedule == "constant":
        return StepSchedule.constant(cfg.mu)
    m_f = smoothness_bound_l1(mean)
    L = cfg.L if cfg.L is not None else (m_f if mirror.kind == "entropy" else F.n * m_f)
    if cfg.exact:
        sigma = 0.0
    else:
        sigma = cfg.sigma if cfg.sigma is not None else estimate_sigma(F, x1, pilot_rng)
    R = cfg.R if cfg.R is not None else math.sqrt(diameter(K, mirror))
    return StepSchedule.theoretical(L, sigma, R)


def _start(cfg, problem, K, mirror) -> np.ndarray:
    if cfg.start == "x_loc":
        return problem.x_loc.copy()
    if cfg.start == "zero":
        return np.zeros(K.n)
    if cfg.start == "argmin":
        return mirror.argmin(K)
    return K.center()


def _round(x, K: ConstraintSet, rng) -> np.ndarray:
    if K.kind == "box":
        return sample_sets(x, 1, rng)[0]
    mask = np.zeros(K.n, dtype=bool)
    mask[lift_and_round(x, int(round(K.k)), rng)] = True
    return mask


def _continuous_value(F: MultilinearObjective, x, rng) -> float:
    if F.n <= EXACT_VALUE_MAX_N:
        return F.value(x)
    return F.value_sample(x, rng)


def run_point(cfg: ExperimentConfig, problem: Problem, index: int) -> list[RunRecord]:
    solver, k, T = cfg.sweep()[index]
    seed = derive_seed(cfg.seed, index)
    solver_ss, eval_ss, pilot_ss = np.random.SeedSequence(seed).spawn(3)
    solver_rng = np.random.default_rng(solver_ss)
    eval_rng = np.random.default_rng(eval_ss)
    B = cfg.batch_for(solver)
    mean = MultilinearObjective(problem.family, batch_size=1).mean
    ms = (lambda s: s * 1e3) if cfg.timing else (lambda s: 0.0)

    if solver == "greedy":
        start = time.perf_counter()
        emp = EmpiricalSetObjective.sample(problem.family, B, solver_rng)
        chosen = greedy(emp, k)
        elapsed = time.perf_counter() - start
        value = mean(chosen)
        return [RunRecord(cfg.config_id, solver, k, 0, B, cfg.seed, value, value, emp.evals, ms(elapsed))]

    if k == 0:
        raise ConfigError("continuous solvers need k >= 1")
    K = _body(cfg, problem, solver, k)
    F = MultilinearObjective(problem.family, batch_size=B, value_batch=cfg.value_samples)
    mirror = MirrorMap.entropy(K.k) if solver == "sm" else MirrorMap.euclidean()
    x1 = _start(cfg, problem, K, mirror)
    try:
        if solver == "fw":
            traj = frank_wolfe(F, K, T, solver_rng, exact=cfg.exact)
        else:
            schedule = _schedule(cfg, solver, F, K, mirror, x1, np.random.default_rng(pilot_ss), mean)
            if solver == "sg":
                traj = sga(F, K, T, schedule, x1, solver_rng, exact=cfg.exact)
            else:
                traj = sma(F, K, T, schedule, mirror, solver_rng, x1=x1, exact=cfg.exact)
    except CapabilityError as exc:
        raise CapabilityError(f"[{cfg.config_id}: solver={solver}, k={k}] {exc}") from exc

    checkpoints = sorted({t for t in (cfg.t_checkpoints or [T]) if t <= T}) or [T]
    records = []
    for t in checkpoints:
        if solver == "fw" or cfg.output_rule == "last":
            x = traj.x(t + 1)
        else:
            x = traj.x(sample_index(t, cfg.output_rule, eval_rng))
        value_c = _continuous_value(F, x, eval_rng)
        value_r = mean.value(_round(x, K, eval_rng))
        records.append(
            RunRecord(cfg.config_id, solver, k, t, B, cfg.seed, value_c, value_r, int(traj.evals[t]), ms(float(traj.times[t])))
        )
    return records


_WORKER_CACHE: dict = {}


def _worker(args):
    cfg, index = args
    key = id(cfg)
    if key not in _WORKER_CACHE:
        _WORKER_CACHE.clear()
        _WORKER_CACHE[key] = build_problem(cfg)
    return run_point(cfg, _WORKER_CACHE[key], index)


def run_experiment(cfg: ExperimentConfig) -> list[RunRecord]:
    """Run every sweep point; rows come back in sweep order, then by t."""
    points = range(len(cfg.sweep()))
    if cfg.workers > 1:
        with ProcessPoolExecutor(cfg.workers) as pool:
            chunks = list(pool.map(_worker, [(cfg, i) for i in points]))
    else:
        problem = build_problem(cfg)
        chunks = [run_point(cfg, problem, i) for i in points]
    return [r for chunk in chunks for r in chunk]


def _fmt(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)


def emit_csv(records: list[RunRecord], path) -> Path:
    if not records:
        raise DrsubError("no records to write")
    path = Path(path)
    try:
        with open(path, "w", newline="") as fh:
            fh.write(CSV_HEADER + "\n")
            for r in records:
                fh.write(",".join(_fmt(v) for v in astuple(r)) + "\n")
    except OSError as exc:
        raise DrsubError(f"cannot write {path}: {exc}") from exc
    return path


def read_csv(path) -> list[RunRecord]:
    """Parse a file written by :func:`emit_csv` back into records."""
    types = {f.name: f.type for f in fields(RunRecord)}
    out = []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            vals = {}
            for name, typ in types.items():
                raw = row[name]
                vals[name] = int(raw) if typ == "int" else float(raw) if typ == "float" else raw
            out.append(RunRecord(**vals))
    return out
