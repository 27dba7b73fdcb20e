"""Snowball sampling designs and the observation step.

A draw starts from uniformly chosen seeds (wave 0) and traces out-links with
probability q per link, wave by wave. REGULAR never re-recruits a sampled
unit, so the recruitment events form a forest. RE_RECRUIT also records
recruitments of units already in the sample, with two field rules: the same
ordered (recruiter, recruitee) pair never repeats, and nobody recruits the
person who first recruited them.
"""

from __future__ import annotations

import csv
import enum
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .graph import AttributeTable, Network, induced_subgraph

SEED = -1  # recruiter id marking a seed event


class DesignError(ValueError):
    pass


class DesignKind(enum.Enum):
    REGULAR = "regular"
    RE_RECRUIT = "re_recruit"


@dataclass(frozen=True)
class DesignConfig:
    """Field design parameters.

    q is the per-link tracing probability in [0, 1]; q = 0 degenerates to
    seeds only. target_size caps distinct units, max_waves caps recruitment
    depth (None for unlimited). With reseed_on_exhaustion, a stalled draw
    adds a fresh uniform seed instead of stopping short.
    """

    kind: DesignKind
    seed_count: int
    q: float
    target_size: int
    max_waves: int | None = None
    reseed_on_exhaustion: bool = True

    def validate(self, node_count: int):
        if not 1 <= self.seed_count <= self.target_size <= node_count:
            raise DesignError(
                f"need 1 <= seed_count <= target_size <= node_count, got "
                f"{self.seed_count}, {self.target_size}, {node_count}")
        if not 0.0 <= self.q <= 1.0:
            raise DesignError(f"q must be in [0, 1], got {self.q}")
        if self.max_waves is not None and self.max_waves < 1:
            raise DesignError("max_waves must be positive or None")


class Event(NamedTuple):
    recruiter: int  # node id, or SEED
    recruitee: int
    wave: int


@dataclass
class SampleRecord:
    """Full trace of one field draw.

    distinct_units is in admission order; wave is recruitment depth (seeds
    and reseeds are wave 0). reseed_points holds indices into events. short
    means the draw ended with fewer than target_size distinct units.
    """

    seeds: tuple
    events: list
    distinct_units: tuple
    reseed_points: tuple
    short: bool

    @property
    def unit_count(self) -> int:
        return len(self.distinct_units)


def draw_sample(net: Network, cfg: DesignConfig, rng: np.random.Generator) -> SampleRecord:
    """Run one snowball draw on `net`.

    Every random choice comes from `rng`, so a draw is a pure function of
    (net, cfg, rng state). Within a wave the successful traces are admitted
    in uniformly random order; admission stops the moment target_size
    distinct units are in.
    """
    cfg.validate(net.node_count)
    return _draw_core(net, cfg, rng)


def _draw_core(net: Network, cfg: DesignConfig, rng: np.random.Generator) -> SampleRecord:
    # Validation is the caller's job; resamplers hoist it out of their loops.
    n = net.node_count
    target = cfg.target_size
    regular = cfg.kind is DesignKind.REGULAR

    in_sample = np.zeros(n, dtype=bool)
    first_rec = np.full(n, SEED, dtype=np.int64)
    order: list = []
    events: list = []
    reseed_points: list = []

    if cfg.seed_count == 1:
        seeds = (int(rng.integers(n)),)
    else:
        seeds = tuple(int(s) for s in rng.choice(n, size=cfg.seed_count,
                                                 replace=False))
    for s in seeds:
        in_sample[s] = True
        order.append(s)
        events.append(Event(SEED, s, 0))

    frontier = list(order)
    depth = 0
    while len(order) < target:
        new_units: list = []
        if frontier and (cfg.max_waves is None or depth < cfg.max_waves):
            srcs, dsts = net.neighbors_of_many(np.asarray(frontier, dtype=np.int64))
            if srcs.size:
                # Eligibility at wave start; REGULAR is re-checked on
                # admission because same-wave traces can collide.
                elig = ~in_sample[dsts] if regular else dsts != first_rec[srcs]
                srcs, dsts = srcs[elig], dsts[elig]
            if srcs.size and cfg.q < 1.0:
                hit = rng.random(srcs.size) < cfg.q
                srcs, dsts = srcs[hit], dsts[hit]
            if srcs.size:
                wave = depth + 1
                for k in rng.permutation(srcs.size):
                    u, v = int(srcs[k]), int(dsts[k])
                    if in_sample[v]:
                        if regular:
                            continue
                        events.append(Event(u, v, wave))  # re-recruitment
                        continue
                    events.append(Event(u, v, wave))
                    in_sample[v] = True
                    first_rec[v] = u
                    order.append(v)
                    new_units.append(v)
                    if len(order) == target:
                        break
        if len(order) >= target:
            break
        if new_units:
            frontier = new_units
            depth += 1
            continue
        # Stalled: no recruits arrived.
        if not cfg.reseed_on_exhaustion:
            break
        outside = np.flatnonzero(~in_sample)
        if outside.size == 0:
            break
        s = int(outside[rng.integers(outside.size)])
        reseed_points.append(len(events))
        events.append(Event(SEED, s, 0))
        in_sample[s] = True
        order.append(s)
        frontier = [s]
        depth = 0

    return SampleRecord(
        seeds=seeds,
        events=events,
        distinct_units=tuple(order),
        reseed_points=tuple(reseed_points),
        short=len(order) < target,
    )


# ---------------------------------------------------------------------------
# observation


@dataclass
class ObservedData:
    """What the survey actually sees: the induced sample network, each
    unit's reported (population) degree, attribute values, and the draw
    record. Field data loaded from disk has record None.

    Sample node ids are 0..k-1 in ascending population id order; the
    original ids sit in sample_net.back_map when known.
    """

    sample_net: Network
    reported_degree: np.ndarray
    values: AttributeTable
    record: SampleRecord | None = None

    @property
    def unit_count(self) -> int:
        return self.sample_net.node_count

    @property
    def labels(self) -> tuple:
        return self.sample_net.labels


def observe(net: Network, attrs: AttributeTable | None, record: SampleRecord) -> ObservedData:
    """Restrict the population to a draw's distinct units."""
    units = np.asarray(record.distinct_units, dtype=np.int64)
    if units.size == 0:
        raise DesignError("record has no units")
    if units.min() < 0 or units.max() >= net.node_count:
        raise DesignError("record does not match network")
    units = np.unique(units)
    sample_net = induced_subgraph(net, units)
    reported = net.degrees()[units].astype(np.float64)
    values = attrs.subset(units) if attrs is not None else AttributeTable.empty(units.size)
    return ObservedData(sample_net, reported, values, record)


# ---------------------------------------------------------------------------
# serialization


def write_events_csv(record: SampleRecord, net: Network, path):
    """Events as (recruiter, recruitee, wave); seeds and reseeds say SEED."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["recruiter", "recruitee", "wave"])
        for ev in record.events:
            rec = "SEED" if ev.recruiter == SEED else net.label(ev.recruiter)
            writer.writerow([rec, net.label(ev.recruitee), ev.wave])


def write_degrees_csv(obs: ObservedData, path):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["node", "degree"])
        for lab, d in zip(obs.labels, obs.reported_degree):
            writer.writerow([lab, repr(float(d))])


def write_observed(obs: ObservedData, out_dir) -> dict:
    """Write the observed-data bundle; returns the paths written.

    The bundle (edge list, attribute CSV, degree CSV) is the on-disk input
    contract for resampling and estimation on field data.
    """
    import os

    paths = {
        "edges": os.path.join(out_dir, "sample_edges.txt"),
        "attrs": os.path.join(out_dir, "sample_attrs.csv"),
        "degrees": os.path.join(out_dir, "sample_degrees.csv"),
    }
    with open(paths["edges"], "w", encoding="utf-8") as fh:
        fh.write(obs.sample_net.to_edge_list_text())
    from .graph import write_attributes_csv

    write_attributes_csv(obs.values, obs.labels, paths["attrs"])
    write_degrees_csv(obs, paths["degrees"])
    return paths


def read_observed(edges_path, degrees_path, attrs_path=None,
                  missing_policy=None) -> ObservedData:
    """Load an observed-data bundle written by write_observed (or by hand).

    The degree CSV defines the unit universe (isolated units never show up
    in an edge list); the edge file may only mention labels from it.
    """
    from .graph import MissingPolicy, load_attributes, read_edge_pairs

    labels: list = []
    degrees: list = []
    seen: set = set()
    with open(degrees_path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        next(reader, None)  # header
        for lineno, row in enumerate(reader, start=2):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            if len(row) != 2:
                raise DesignError(f"{degrees_path}:{lineno}: expected label,degree")
            lab = row[0].strip()
            if lab in seen:
                raise DesignError(f"{degrees_path}:{lineno}: duplicate node {lab!r}")
            seen.add(lab)
            labels.append(lab)
            try:
                degrees.append(float(row[1]))
            except ValueError:
                raise DesignError(
                    f"{degrees_path}:{lineno}: bad degree {row[1]!r}") from None
    if not labels:
        raise DesignError(f"{degrees_path}: no units")

    edge_labels, raw_pairs = read_edge_pairs(edges_path, directed=True)
    ids = {lab: i for i, lab in enumerate(labels)}
    remap = []
    for lab in edge_labels:
        if lab not in ids:
            raise DesignError(
                f"{edges_path}: node {lab!r} missing from {degrees_path}")
        remap.append(ids[lab])
    pairs = [(remap[a], remap[b]) for a, b in raw_pairs]
    net = Network(labels, pairs)

    if attrs_path is not None:
        values = load_attributes(attrs_path, net,
                                 missing_policy or MissingPolicy.ZERO)
    else:
        values = AttributeTable.empty(net.node_count)
    return ObservedData(net, np.asarray(degrees), values, record=None)
