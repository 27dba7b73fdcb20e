"""Inclusion-frequency estimation by resampling the observed sample network.

The field sample's own network is treated as a population and resampled T
times with a design that mirrors the field design. The fraction of resamples
containing unit i estimates that unit's relative inclusion probability,

    f_i = max(floor, (1/T) * sum_t Z_it),

with Z_it membership of i in resample t and a small floor keeping downstream
weights positive.

PROCESS mode runs one long Markov chain over member subsets: each step drops
random members and traces random boundary links back in, with a small reseed
rate so the chain never gets locked out of a component. Every post-burn-in
state is counted. REPEATED mode simply draws T independent inner snowball
samples.
"""

from __future__ import annotations

import csv
import enum
from dataclasses import dataclass

import numpy as np

from .design import DesignConfig, ObservedData, _draw_core


class ResampleError(ValueError):
    pass


class ResampleMode(enum.Enum):
    PROCESS = "process"
    REPEATED = "repeated"


@dataclass(frozen=True)
class ResampleConfig:
    """Resampling parameters.

    burn_in and frequency_floor default to 10*m and 1/(2T) when left None.
    inner_design is only read in REPEATED mode; default_inner_design builds
    the conventional one from the field design.
    """

    mode: ResampleMode
    T: int
    resample_size: int
    burn_in: int | None = None
    step_trace_count: int = 1
    step_remove_count: int = 1
    reseed_rate: float = 0.05
    frequency_floor: float | None = None
    inner_design: DesignConfig | None = None

    def resolved_burn_in(self) -> int:
        return 10 * self.resample_size if self.burn_in is None else self.burn_in

    def resolved_floor(self) -> float:
        return 1.0 / (2.0 * self.T) if self.frequency_floor is None else self.frequency_floor

    def validate(self, unit_count: int):
        if self.T < 1:
            raise ResampleError(f"T must be >= 1, got {self.T}")
        if not 1 <= self.resample_size <= unit_count:
            raise ResampleError(
                f"resample_size must be in [1, {unit_count}], got {self.resample_size}")
        if not 0.0 <= self.reseed_rate <= 1.0:
            raise ResampleError(f"reseed_rate must be in [0, 1], got {self.reseed_rate}")
        if self.resolved_burn_in() < 0:
            raise ResampleError("burn_in must be >= 0")
        if self.resolved_floor() <= 0.0:
            raise ResampleError("frequency_floor must be > 0")
        if self.mode is ResampleMode.PROCESS:
            if self.step_trace_count != self.step_remove_count:
                raise ResampleError(
                    "process steps must trace and remove the same count")
            if self.step_trace_count < 1:
                raise ResampleError("step counts must be >= 1")
        else:
            if self.inner_design is None:
                raise ResampleError("REPEATED mode needs an inner_design")
            self.inner_design.validate(unit_count)


def default_inner_design(field_design: DesignConfig, resample_size: int) -> DesignConfig:
    """Inner design mirroring the field design at the resample size."""
    return DesignConfig(
        kind=field_design.kind,
        seed_count=1,
        q=field_design.q,
        target_size=resample_size,
        max_waves=None,
        reseed_on_exhaustion=True,
    )


@dataclass
class FrequencyTable:
    """Per-unit resampled inclusion frequencies.

    raw holds the unfloored averages; f applies the floor; floored marks
    exactly the units whose raw value fell below it.
    """

    labels: tuple
    f: np.ndarray
    raw: np.ndarray
    floored: np.ndarray
    T_used: int
    mode: ResampleMode


def estimate_frequencies(obs: ObservedData, cfg: ResampleConfig,
                         rng: np.random.Generator) -> FrequencyTable:
    """Resample the observed network T times and tabulate frequencies."""
    net = obs.sample_net
    n = net.node_count
    cfg.validate(n)

    if cfg.mode is ResampleMode.REPEATED:
        counts = _repeated_counts(net, cfg, rng)
    else:
        counts = _process_counts(net, cfg, rng)

    raw = counts / float(cfg.T)
    floor = cfg.resolved_floor()
    floored = raw < floor
    f = np.maximum(raw, floor)
    return FrequencyTable(labels=net.labels, f=f, raw=raw, floored=floored,
                          T_used=cfg.T, mode=cfg.mode)


def _repeated_counts(net, cfg, rng) -> np.ndarray:
    inner = cfg.inner_design
    inner.validate(net.node_count)
    counts = [0] * net.node_count
    for _ in range(cfg.T):
        rec = _draw_core(net, inner, rng)
        for u in rec.distinct_units:
            counts[u] += 1
    return np.asarray(counts, dtype=np.int64)


def _process_counts(net, cfg, rng) -> np.ndarray:
    n = net.node_count
    m = cfg.resample_size
    eps = cfg.reseed_rate
    trace_count = cfg.step_trace_count
    remove_count = cfg.step_remove_count

    in_s = np.zeros(n, dtype=bool)
    members: list = []
    counts = np.zeros(n, dtype=np.int64)

    def add(v: int):
        in_s[v] = True
        members.append(v)

    def reseed():
        outside = np.flatnonzero(~in_s)
        add(int(outside[rng.integers(outside.size)]))

    def step():
        # Removal happens first so end-of-step states sit at exactly m
        # once ramped, and |S| never exceeds m even mid step.
        if len(members) >= m:
            for _ in range(remove_count):
                if len(members) <= 1:
                    break
                j = int(rng.integers(len(members)))
                v = members[j]
                members[j] = members[-1]
                members.pop()
                in_s[v] = False
        for _ in range(trace_count):
            if len(members) >= m or len(members) == n:
                break
            if eps > 0.0 and rng.random() < eps:
                reseed()
                continue
            _, dsts = net.neighbors_of_many(np.asarray(members, dtype=np.int64))
            boundary = dsts[~in_s[dsts]] if dsts.size else dsts
            if boundary.size == 0:
                reseed()
            else:
                add(int(boundary[rng.integers(boundary.size)]))

    add(int(rng.integers(n)))           # ramp-up from one uniform seed
    while len(members) < m:
        step()
    for _ in range(cfg.resolved_burn_in()):
        step()
    for _ in range(cfg.T):
        step()
        counts[np.asarray(members, dtype=np.int64)] += 1
    return counts


# ---------------------------------------------------------------------------
# serialization


def write_frequencies_csv(table: FrequencyTable, path):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["unit_label", "f", "floored_flag"])
        for lab, f, fl in zip(table.labels, table.f, table.floored):
            writer.writerow([lab, repr(float(f)), int(fl)])


def read_frequencies_csv(path):
    """Read back (labels, f, floored) from write_frequencies_csv output."""
    labels: list = []
    f: list = []
    floored: list = []
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        next(reader, None)
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 3:
                raise ResampleError(f"{path}:{lineno}: expected 3 columns")
            labels.append(row[0])
            try:
                f.append(float(row[1]))
                floored.append(bool(int(row[2])))
            except ValueError:
                raise ResampleError(f"{path}:{lineno}: bad row") from None
    if not labels:
        raise ResampleError(f"{path}: no rows")
    return tuple(labels), np.asarray(f), np.asarray(floored, dtype=bool)
