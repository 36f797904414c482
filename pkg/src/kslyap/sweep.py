"""Sweep the Lyapunov-spectrum computation over a grid of domain sizes.

Results are durable: every completed grid point is appended to the output CSV
immediately, a sidecar ``<output>.meta.json`` pins the configuration
fingerprint, and re-running the same plan resumes from what is already on
disk.  Failed grid points are recorded with a ``failed`` flag instead of
aborting the sweep.

CSV schema: header ``L,bc,seed,flag,dky,j,lambda_1,...,lambda_m``; reals are
written with 17 significant digits so they round-trip exactly.
"""

import hashlib
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import dataclass, field, replace

import numpy as np

from . import analysis
from .errors import FingerprintMismatch
from .ks import DomainSpec, make_ks, DEFAULT_K_MAX, PERIODIC
from .lyapunov import LyapunovConfig, compute_spectrum

#: Records with leading exponent below this are flagged non-chaotic.
NONCHAOTIC_THRESHOLD = 0.005

FLAG_OK = "ok"
FLAGS = ("nonchaotic", "unsaturated", "failed")


@dataclass
class SpectrumRecord:
    """One sweep row: the spectrum and derived dimension at a single (bc, L)."""

    L: float
    bc: str
    seed: int
    exponents: np.ndarray
    dky: float
    j: int
    flags: frozenset = frozenset()

    @property
    def flag(self):
        return "|".join(sorted(self.flags)) if self.flags else FLAG_OK


@dataclass
class SweepPlan:
    L_start: float
    L_end: float
    bc: str = PERIODIC
    dL: float = 0.1
    k_max: float = DEFAULT_K_MAX
    lyap: LyapunovConfig = field(default_factory=LyapunovConfig)
    output_path: str = "sweep.csv"
    workers: int = 1

    def __post_init__(self):
        if self.L_start > self.L_end:
            raise ValueError("L_start must be <= L_end")
        if not self.dL > 0 or self.workers < 1:
            raise ValueError("dL must be positive and workers >= 1")

    def grid(self):
        n = int(math.floor((self.L_end - self.L_start) / self.dL + 0.5)) + 1
        values = self.L_start + self.dL * np.arange(n)
        values = values[values <= self.L_end + 1e-6 * self.dL]
        return np.round(values, 10)

    def point_seed(self, index):
        """Deterministic per-point seed: hash of (base seed, bc, grid index)."""
        digest = hashlib.sha256(
            f"{self.lyap.seed}|{self.bc}|{index}".encode()).digest()
        return int.from_bytes(digest[:8], "little")

    def fingerprint(self):
        payload = {
            "bc": self.bc, "dL": self.dL, "k_max": self.k_max,
            "base_seed": self.lyap.seed,
            "m": self.lyap.m, "tau": self.lyap.tau, "T": self.lyap.T,
            "N": self.lyap.N, "epsilon": self.lyap.epsilon,
            "dt": self.lyap.integrator.dt, "scheme": self.lyap.integrator.scheme,
        }
        return hashlib.sha256(
            json.dumps(payload, sort_keys=True).encode()).hexdigest()

    def echo(self):
        return {
            "L_start": self.L_start, "L_end": self.L_end, "bc": self.bc,
            "dL": self.dL, "k_max": self.k_max, "base_seed": self.lyap.seed,
            "m": self.lyap.m, "tau": self.lyap.tau, "T": self.lyap.T,
            "N": self.lyap.N, "epsilon": self.lyap.epsilon,
            "dt": self.lyap.integrator.dt, "scheme": self.lyap.integrator.scheme,
        }


def _g17(x):
    return f"{x:.17g}"


def record_to_row(rec):
    cells = [_g17(rec.L), rec.bc, str(rec.seed), rec.flag,
             _g17(rec.dky), str(rec.j)]
    cells += [_g17(v) for v in rec.exponents]
    return ",".join(cells)


def header_row(m):
    return "L,bc,seed,flag,dky,j," + ",".join(f"lambda_{i}" for i in range(1, m + 1))


def row_to_record(line):
    cells = line.strip().split(",")
    flags = frozenset() if cells[3] == FLAG_OK else frozenset(cells[3].split("|"))
    return SpectrumRecord(
        L=float(cells[0]), bc=cells[1], seed=int(cells[2]), flags=flags,
        dky=float(cells[4]), j=int(cells[5]),
        exponents=np.array([float(v) for v in cells[6:]]))


def read_records(path, check_dky=True):
    """Load a sweep CSV; optionally re-derive D_KY from the stored exponents
    and verify consistency to 1e-9."""
    records = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#") or line.startswith("L,"):
                continue
            rec = row_to_record(line)
            if check_dky and "failed" not in rec.flags:
                ky = analysis.kaplan_yorke(rec.exponents)
                if abs(ky.dimension - rec.dky) > 1e-9:
                    raise ValueError(
                        f"stored D_KY {rec.dky!r} inconsistent with exponents at L={rec.L:g}")
            records.append(rec)
    return records


def compute_point(bc, L, k_max, lyap, seed):
    """Compute one SpectrumRecord; failures are captured in the flags."""
    cfg = replace(lyap, seed=seed)
    try:
        system = make_ks(DomainSpec(L=L, bc=bc, k_max_target=k_max))
        result = compute_spectrum(system, cfg)
    except Exception:
        return SpectrumRecord(L=L, bc=bc, seed=seed,
                              exponents=np.full(lyap.m, np.nan),
                              dky=float("nan"), j=0, flags=frozenset({"failed"}))
    ky = analysis.kaplan_yorke(result.exponents)
    flags = set()
    if result.exponents[0] < NONCHAOTIC_THRESHOLD:
        flags.add("nonchaotic")
    if ky.unsaturated:
        flags.add("unsaturated")
    return SpectrumRecord(L=L, bc=bc, seed=seed, exponents=result.exponents,
                          dky=ky.dimension, j=ky.j, flags=frozenset(flags))


def _load_existing(plan, path):
    meta_path = path + ".meta.json"
    if not os.path.exists(meta_path):
        raise FingerprintMismatch(f"missing sidecar {meta_path}")
    with open(meta_path) as fh:
        meta = json.load(fh)
    if meta.get("fingerprint") != plan.fingerprint():
        raise FingerprintMismatch(
            "existing output was produced with a different configuration")
    return {rec.L: rec for rec in read_records(path, check_dky=False)}


def _write_sorted(plan, path, records):
    lines = [f"# fingerprint={plan.fingerprint()}",
             header_row(plan.lyap.m)]
    for L in sorted(records):
        lines.append(record_to_row(records[L]))
    tmp = path + ".tmp"
    with open(tmp, "w") as fh:
        fh.write("\n".join(lines) + "\n")
    os.replace(tmp, path)


def run_sweep(plan, log=None):
    """Run (or resume) the sweep; returns the records sorted by L.

    Completed points are appended to the output immediately; on normal
    completion the file is rewritten sorted by L, so the on-disk result is
    independent of worker count and completion order.
    """
    path = plan.output_path
    if os.path.exists(path):
        done = _load_existing(plan, path)
    else:
        done = {}
        with open(path + ".meta.json", "w") as fh:
            json.dump({"fingerprint": plan.fingerprint(), "plan": plan.echo()},
                      fh, indent=2, sort_keys=True)
            fh.write("\n")
        with open(path, "w") as fh:
            fh.write(f"# fingerprint={plan.fingerprint()}\n")
            fh.write(header_row(plan.lyap.m) + "\n")

    grid = plan.grid()
    todo = [(idx, L) for idx, L in enumerate(grid) if float(L) not in done]
    if todo:
        with open(path, "a") as sink:
            for L, rec in _compute_many(plan, todo, log):
                done[float(L)] = rec
                sink.write(record_to_row(rec) + "\n")
                sink.flush()
        _write_sorted(plan, path, done)
    records = [done[float(L)] for L in grid]
    return records


def _compute_many(plan, todo, log):
    args = [(plan.bc, float(L), plan.k_max, plan.lyap, plan.point_seed(idx))
            for idx, L in todo]
    if plan.workers == 1 or len(args) == 1:
        for a in args:
            rec = compute_point(*a)
            if log:
                log(rec)
            yield a[1], rec
    else:
        with ProcessPoolExecutor(max_workers=plan.workers) as pool:
            futures = {pool.submit(compute_point, *a): a[1] for a in args}
            for fut in as_completed(futures):
                rec = fut.result()
                if log:
                    log(rec)
                yield futures[fut], rec


def resume_sweep(plan, existing_path):
    """Resume a sweep against an explicit existing output file."""
    if not os.path.exists(existing_path):
        raise FileNotFoundError(existing_path)
    plan = replace(plan, output_path=existing_path)
    return run_sweep(plan)
