"""Discrete-event M/G/1 oracle for the trust policies and blind baselines.

A single server preemptively runs the lowest-rank job, breaking ties by
arrival time.  Only the in-service job accrues age, so rank changes can
only happen to it; waiting jobs keep a frozen rank inside one heap keyed by
(rank, arrival time).  Event order at identical timestamps: completions,
then arrivals, then rank crossings.

Honest jobs declare their internal estimate.  Sparse probe jobs declare a
uniformly random class instead, estimating the deviation response times
E[U_ik] without materially perturbing the honest equilibrium.
"""

from __future__ import annotations

import csv
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from heapq import heappop, heappush

import numpy as np
from scipy import stats

from .model import Policy, PolicySpec, SystemConfig

_M64 = (1 << 64) - 1


def mix64(x: int) -> int:
    """splitmix64 finalizer; derives independent per-replication seeds."""
    x &= _M64
    x = (x + 0x9E3779B97F4A7C15) & _M64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _M64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _M64
    return (x ^ (x >> 31)) & _M64


@dataclass(frozen=True)
class SimConfig:
    job_count: int
    seed: int = 12345
    replications: int = 10
    warmup_fraction: float = 0.1
    probe_probability: float = 0.005

    def __post_init__(self):
        if self.job_count <= 0 or self.replications <= 0:
            raise ValueError("job_count and replications must be positive")
        if not (0.0 <= self.warmup_fraction < 1.0):
            raise ValueError("warmup_fraction must be in [0, 1)")
        if not (0.0 <= self.probe_probability < 1.0):
            raise ValueError("probe_probability must be in [0, 1)")


@dataclass(frozen=True)
class SimEstimate:
    mean: float
    half_width95: float
    count: int

    def contains(self, value: float) -> bool:
        return abs(value - self.mean) <= self.half_width95


@dataclass(frozen=True)
class SimResult:
    overall: SimEstimate
    per_cell: dict            # (i, k) -> SimEstimate over probe jobs
    per_class: dict           # j -> SimEstimate over honest jobs
    time_avg_in_system: SimEstimate
    arrival_rate_measured: float


def initial_rank(policy: PolicySpec, k: int) -> int:
    """Rank at age zero: the declared class for trust policies, else 1."""
    return k + 1 if policy.kind.uses_estimates else 1


def rank_boundaries(policy: PolicySpec, sizes, k: int, punished: bool) -> list[tuple[float, int]]:
    """Ages at which a job's rank changes, with the rank after each crossing.

    Crossings at ages >= z_n can only fire for the punishment jump of a
    job declaring class n, which never happens to a live job (it would
    complete first); the entry is kept for uniformity.
    """
    z = np.asarray(sizes, dtype=float)
    n = len(z)
    kind = policy.kind
    if kind == Policy.FCFS:
        return []
    if kind == Policy.SCF:
        return [(float(z[m]), m + 2) for m in range(n - 1)]
    if punished:
        return [(float(z[k]), n + 1)]
    if kind == Policy.BLIND_TRUST:
        return []
    return [(float(z[m]), m + 2) for m in range(k, n - 1)]


def _run_replication(args):
    (z, M, lam, kind_value, b, job_count, warm_frac, probe_p, seed, capture) = args
    policy = PolicySpec(Policy(kind_value), b)
    n = len(z)
    rng = np.random.default_rng(mix64(seed))

    arrivals_np = np.cumsum(rng.exponential(1.0 / lam, job_count))
    flat = (M / M.sum()).ravel()
    cells = rng.choice(n * n, size=job_count, p=flat)
    i_np = cells // n
    j_np = cells % n
    coin_np = rng.random(job_count) < b
    probe_np = rng.random(job_count) < probe_p
    k_np = np.where(probe_np, rng.integers(0, n, job_count), j_np)

    arrivals = arrivals_np.tolist()
    sizes = z[i_np].tolist()
    i_list = i_np.tolist()
    j_list = j_np.tolist()
    k_list = k_np.tolist()
    coin_list = coin_np.tolist()
    probe_list = probe_np.tolist()

    bounds = {
        (kk, pun): tuple(zip(*bl)) if (bl := rank_boundaries(policy, z, kk, pun)) else ((), ())
        for kk in range(n) for pun in (False, True)
    }
    init_ranks = [initial_rank(policy, kk) for kk in range(n)]

    warm_n = int(job_count * warm_frac)
    age = [0.0] * job_count     # frozen state while waiting
    bpos = [0] * job_count

    heap = []
    t = 0.0
    next_id = 0
    done = 0
    sid = -1                    # serving job id, -1 if idle
    s_rank = 0
    s_arr = s_age = s_size = 0.0
    s_bages: tuple = ()
    s_branks: tuple = ()
    s_bpos = 0

    in_system = 0
    area = 0.0
    t_start = None              # recording window opens at arrival of job warm_n
    sum_resp = 0.0
    n_resp = 0
    class_sum = [0.0] * n
    class_cnt = [0] * n
    cell_sum = [[0.0] * n for _ in range(n)]
    cell_cnt = [[0] * n for _ in range(n)]
    trace = [] if capture else None

    INF = float("inf")
    while done < job_count:
        t_arr = arrivals[next_id] if next_id < job_count else INF
        if sid >= 0:
            t_done = t + (s_size - s_age)
            t_cross = t + (s_bages[s_bpos] - s_age) if s_bpos < len(s_bages) else INF
        else:
            t_done = t_cross = INF

        if t_done <= t_arr and t_done <= t_cross:
            new_t = t_done
            event = 0
        elif t_arr <= t_cross:
            new_t = t_arr
            event = 1
        else:
            new_t = t_cross
            event = 2
        dt = new_t - t
        if t_start is not None:
            area += in_system * dt
        if sid >= 0:
            s_age += dt
        t = new_t

        if event == 0:
            jid = sid
            in_system -= 1
            done += 1
            if jid >= warm_n:
                resp = t - arrivals[jid]
                if probe_list[jid]:
                    cell_sum[i_list[jid]][k_list[jid]] += resp
                    cell_cnt[i_list[jid]][k_list[jid]] += 1
                else:
                    sum_resp += resp
                    n_resp += 1
                    class_sum[j_list[jid]] += resp
                    class_cnt[j_list[jid]] += 1
                if trace is not None:
                    trace.append((arrivals[jid], i_list[jid], j_list[jid], k_list[jid],
                                  coin_list[jid], probe_list[jid], resp))
            if heap:
                s_rank, s_arr, sid = heappop(heap)
                s_age = age[sid]
                s_size = sizes[sid]
                s_bpos = bpos[sid]
                s_bages, s_branks = bounds[(k_list[sid], coin_list[sid])]
            else:
                sid = -1
        elif event == 1:
            jid = next_id
            next_id += 1
            in_system += 1
            if jid == warm_n and t_start is None:
                t_start = t
            rank0 = init_ranks[k_list[jid]]
            if sid < 0:
                assert not heap, "server idle with jobs waiting"
                sid = jid
                s_rank = rank0
                s_arr = t
                s_age = 0.0
                s_size = sizes[jid]
                s_bpos = 0
                s_bages, s_branks = bounds[(k_list[jid], coin_list[jid])]
            elif rank0 < s_rank:
                age[sid] = s_age
                bpos[sid] = s_bpos
                heappush(heap, (s_rank, s_arr, sid))
                sid = jid
                s_rank = rank0
                s_arr = t
                s_age = 0.0
                s_size = sizes[jid]
                s_bpos = 0
                s_bages, s_branks = bounds[(k_list[jid], coin_list[jid])]
            else:
                heappush(heap, (rank0, t, jid))
        else:
            s_rank = s_branks[s_bpos]
            s_bpos += 1
            if heap and (heap[0][0], heap[0][1]) < (s_rank, s_arr):
                age[sid] = s_age
                bpos[sid] = s_bpos
                heappush(heap, (s_rank, s_arr, sid))
                s_rank, s_arr, sid = heappop(heap)
                s_age = age[sid]
                s_size = sizes[sid]
                s_bpos = bpos[sid]
                s_bages, s_branks = bounds[(k_list[sid], coin_list[sid])]

    window = t - t_start if t_start is not None else 0.0
    return {
        "sum_resp": sum_resp,
        "n_resp": n_resp,
        "class_sum": class_sum,
        "class_cnt": class_cnt,
        "cell_sum": cell_sum,
        "cell_cnt": cell_cnt,
        "area": area,
        "window": window,
        "arrived_in_window": job_count - warm_n,
        "trace": trace,
    }


def _combine(values) -> SimEstimate:
    arr = np.asarray(list(values), dtype=float)
    r = len(arr)
    mean = float(arr.mean())
    if r < 2:
        return SimEstimate(mean, float("inf"), r)
    half = float(stats.t.ppf(0.975, r - 1) * arr.std(ddof=1) / np.sqrt(r))
    return SimEstimate(mean, half, r)


def simulate(config: SystemConfig, policy: PolicySpec, sim: SimConfig,
             workers: int = 1, trace_path=None) -> SimResult:
    """Run independent replications and combine them into 95% CI estimates."""
    if config.load >= 0.98 and sim.job_count < 100_000:
        warnings.warn(
            f"load {config.load:.3f} >= 0.98 with only {sim.job_count} jobs; "
            "estimates may not have stabilized", RuntimeWarning)
    if trace_path is not None and sim.replications != 1:
        raise ValueError("per-job traces are only written for single-replication runs")

    n = config.n
    args = [
        (config.sizes, config.matrix.entries, config.lam, policy.kind.value, policy.b,
         sim.job_count, sim.warmup_fraction, sim.probe_probability, sim.seed + rep,
         trace_path is not None)
        for rep in range(sim.replications)
    ]
    if workers > 1 and sim.replications > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            reps = list(pool.map(_run_replication, args))
    else:
        reps = [_run_replication(a) for a in args]

    overall = _combine(r["sum_resp"] / r["n_resp"] for r in reps)
    per_class = {}
    for j in range(n):
        means = [r["class_sum"][j] / r["class_cnt"][j] for r in reps if r["class_cnt"][j] > 0]
        if len(means) == len(reps):
            est = _combine(means)
            per_class[j] = SimEstimate(est.mean, est.half_width95,
                                       sum(r["class_cnt"][j] for r in reps))
    per_cell = {}
    for i in range(n):
        for k in range(n):
            means = [r["cell_sum"][i][k] / r["cell_cnt"][i][k]
                     for r in reps if r["cell_cnt"][i][k] > 0]
            if len(means) == len(reps):
                est = _combine(means)
                per_cell[(i, k)] = SimEstimate(est.mean, est.half_width95,
                                               sum(r["cell_cnt"][i][k] for r in reps))
    time_avg = _combine(r["area"] / r["window"] for r in reps if r["window"] > 0)
    rate = float(np.mean([r["arrived_in_window"] / r["window"] for r in reps if r["window"] > 0]))

    if trace_path is not None:
        with open(trace_path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["arrival_time", "size_index", "estimate_index", "declared_index",
                        "punish_coin", "is_probe", "response_time"])
            for row in reps[0]["trace"]:
                w.writerow([f"{row[0]:.9g}", row[1], row[2], row[3],
                            int(row[4]), int(row[5]), f"{row[6]:.9g}"])
    return SimResult(overall=overall, per_cell=per_cell, per_class=per_class,
                     time_avg_in_system=time_avg, arrival_rate_measured=rate)
