"""Running learners, collecting statistics and writing benchmark tables."""

import csv
import json
import math
import time
from dataclasses import dataclass, field, fields

from . import ads as adsmod
from . import kernels
from .adt import collect_leaves, collect_reset_nodes, effective_reset_count
from .baseline import DTLearner
from .equiv import (CacheConsistencyOracle, ChainOracle, ExactOracle, ExpandedOracle,
                    RandomWordOracle, WpOracle)
from .learner import ADTLearner, LearnerConfig, twin_verifier
from .mealy import load_dot, random_mealy, separating_word, with_self_loops
from .oracle import CachingOracle, SimulatedSUL

BASELINE = "DT"

COLUMNS = ("R", "SQ", "CE", "ADT_RN", "ADT_RR", "ADT_PR", "ADT_PRAN", "ADT_PRS", "ADT_ARS",
           "ADT_ARR", "ADT_ARP", "ADT_ARA", "OT_E", "OT_S", "SIZ", "DUR")

SIDECAR_COLUMNS = ("kind", "config", "seed", "converged", "longest_ce", "ads_budget_hits", "error")


@dataclass
class RunStats:
    """One learning run.  The first sixteen fields are the table columns."""

    R: int = 0
    SQ: int = 0
    CE: int = 0
    ADT_RN: int = 0
    ADT_RR: float = 0.0
    ADT_PR: int = 0
    ADT_PRAN: int = 0
    ADT_PRS: int = 0
    ADT_ARS: int = 0
    ADT_ARR: int = 0
    ADT_ARP: int = 0
    ADT_ARA: int = 0
    OT_E: int = 0
    OT_S: int = 0
    SIZ: int = 0
    DUR: float = 0.0
    longest_ce: int = 0
    converged: bool = False
    ads_budget_hits: int = 0
    events: dict = field(default_factory=dict, repr=False)

    def row(self):
        return [getattr(self, c) for c in COLUMNS]

    def as_dict(self):
        d = {c: getattr(self, c) for c in COLUMNS}
        d["longest_ce"] = self.longest_ce
        d["converged"] = self.converged
        d["ads_budget_hits"] = self.ads_budget_hits
        return d


@dataclass
class BenchmarkConfig:
    """Seeds x learner configurations on random or fixed machines.

    ``machine`` is an ``(n, k, o)`` triple (a fresh random machine per seed)
    or a DOT path.  ``configs`` holds learner spec strings or
    :class:`LearnerConfig` objects; ``"DT"`` selects the baseline learner.
    """

    machine: object
    seeds: list
    configs: list
    oracle: str = "exact"
    budget: int = None

    def __post_init__(self):
        if not self.seeds:
            raise ValueError("no seeds")
        if not self.configs:
            raise ValueError("no learner configurations")

    @classmethod
    def from_dict(cls, d):
        machine = d["machine"]
        if isinstance(machine, list):
            machine = tuple(machine)
        seeds = d["seeds"]
        if isinstance(seeds, int):
            seeds = list(range(seeds))
        return cls(machine, list(seeds), list(d["configs"]), d.get("oracle", "exact"), d.get("budget"))

    @classmethod
    def load(cls, path):
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


class RunError(Exception):
    pass


def resolve_config(config, budget=None):
    if isinstance(config, LearnerConfig):
        cfg = config
    elif config == BASELINE:
        return BASELINE
    else:
        cfg = LearnerConfig.parse(config)
    if budget is not None and budget != cfg.budget:
        cfg = LearnerConfig(cfg.extend, cfg.immediate, cfg.subtree, cfg.subtree_profile,
                            cfg.observation_tree, budget)
    return cfg


def config_name(config):
    return config if isinstance(config, str) else config.name


def make_equivalence_oracle(spec, machine, cache, seed=0):
    """Build an equivalence oracle from a short spec string.

    ``exact``, ``expanded``, ``random[:queries:min:max]``, ``wp[:depth]``,
    ``cache``, or several of those joined with ``,`` (tried in order).
    """
    parts = [p.strip() for p in spec.split(",") if p.strip()]
    if len(parts) > 1:
        return ChainOracle([make_equivalence_oracle(p, machine, cache, seed) for p in parts])
    name, _, args = spec.strip().partition(":")
    nums = [int(x) for x in args.split(":")] if args else []
    if name == "exact":
        return ExactOracle(machine)
    if name == "expanded":
        return ExpandedOracle(machine, *nums)
    if name == "random":
        q, lo, hi = (nums + [200, 20, 400][len(nums):])[:3]
        return RandomWordOracle(cache, machine.num_inputs, q, lo, hi, seed)
    if name == "wp":
        return WpOracle(cache, nums[0] if nums else 1)
    if name == "cache":
        return CacheConsistencyOracle(cache.tree)
    raise ValueError(f"unknown oracle {spec!r}")


class _Events:
    def __init__(self):
        self.counts = {}

    def __call__(self, event, data):
        self.counts[event] = self.counts.get(event, 0) + 1


def run_learning(config, machine, seed=0, oracle="exact", debug=False, budget=None, on_learner=None):
    """Learn ``machine`` with one learner configuration.

    Returns ``(hypothesis, RunStats)``.  ``DUR`` counts learner time only, not
    kernel compilation.  With ``debug`` the ADT is checked against an
    uncounted copy of the system after every change.  ``on_learner`` is called with the learner
    object before learning starts.  An ``expanded`` oracle spec first turns
    ``machine`` into its self-loop variant, which is then the system learned.
    """
    cfg = resolve_config(config, budget)
    kernels.warm_up()  # keep JIT compilation out of DUR
    if isinstance(oracle, str) and "expanded" in oracle:
        machine = with_self_loops(machine)
    sul = SimulatedSUL(machine)
    cache = CachingOracle(sul)
    events = _Events()
    if cfg == BASELINE:
        learner = DTLearner(cache, machine.inputs, machine.outputs)
    else:
        verifier = twin_verifier(SimulatedSUL(machine)) if debug else None
        learner = ADTLearner(cache, machine.inputs, machine.outputs, cfg, events, verifier)
    if on_learner is not None:
        on_learner(learner)
    stats = RunStats()
    hits = adsmod.counters["budget_hits"]
    spent = 0.0
    try:
        eq = make_equivalence_oracle(oracle, machine, cache, seed) if isinstance(oracle, str) else oracle
        t0 = time.perf_counter()
        learner.initialize()
        spent += time.perf_counter() - t0
        while True:
            hyp = learner.hypothesis()
            stats.CE += 1
            ce = eq.find_counterexample(hyp)
            if ce is None:
                break
            stats.longest_ce = max(stats.longest_ce, len(ce[0]))
            t0 = time.perf_counter()
            changed = learner.refine(*ce)
            spent += time.perf_counter() - t0
            if not changed:
                raise RunError(f"equivalence oracle returned a stale counterexample {ce[0]!r}")
    except Exception as exc:
        raise RunError(f"{config_name(cfg)} on seed {seed}: {exc}") from exc
    stats.DUR = spent * 1000.0
    stats.R = cache.counters.resets
    stats.SQ = cache.counters.symbols
    stats.SIZ = hyp.num_states
    stats.converged = separating_word(machine, hyp) is None
    stats.events = dict(events.counts)
    stats.ads_budget_hits = adsmod.counters["budget_hits"] - hits
    if cfg != BASELINE:
        root = learner.adt.root
        leaves = len(collect_leaves(root))
        st = learner.stats
        stats.ADT_RN = len(collect_reset_nodes(root))
        stats.ADT_RR = effective_reset_count(root) / leaves if leaves else 0.0
        stats.ADT_PR = st.proposed
        stats.ADT_PRAN = st.proposed_states
        stats.ADT_PRS = st.proposed_symbols
        stats.ADT_ARS = st.accepted_symbols
        stats.ADT_ARR = st.accepted_resets
        stats.ADT_ARP = st.accepted_perfect
        stats.ADT_ARA = st.accepted
        stats.OT_E = st.ot_extend
        stats.OT_S = st.ot_shorter
    return hyp, stats


def _machine_for(spec, seed):
    if isinstance(spec, (tuple, list)):
        n, k, o = spec
        return random_mealy(n, k, o, seed)
    return load_dot(spec)


def summarize(rows):
    """Column-wise mean and (population) standard deviation."""
    means = []
    stds = []
    for j in range(len(COLUMNS)):
        vals = [float(r[j]) for r in rows]
        mu = sum(vals) / len(vals)
        means.append(mu)
        stds.append(math.sqrt(sum((v - mu) ** 2 for v in vals) / len(vals)))
    return means, stds


def run_benchmark(cfg, out, sidecar=None, progress=None, debug=False):
    """Run every (seed, config) cell and write the table to ``out``.

    ``out`` receives exactly the sixteen statistic columns: one row per
    cell, then a mean row and a standard-deviation row per configuration.
    ``sidecar`` (default ``out + ".runs.csv"``) labels each of those rows.
    Returns a list of ``(config, seed, RunStats or None, error)`` tuples.
    """
    if sidecar is None and isinstance(out, str):
        sidecar = out + ".runs.csv"
    configs = [resolve_config(c, cfg.budget) for c in cfg.configs]
    results = []
    per_config = {config_name(c): [] for c in configs}
    for seed in cfg.seeds:
        machine = _machine_for(cfg.machine, seed)
        for c in configs:
            name = config_name(c)
            try:
                _, stats = run_learning(c, machine, seed, cfg.oracle, debug=debug)
                results.append((name, seed, stats, None))
                per_config[name].append(stats.row())
            except RunError as exc:
                results.append((name, seed, None, str(exc)))
            if progress is not None:
                progress(name, seed, results[-1])
    table = []
    labels = []
    for name, seed, stats, err in results:
        if stats is None:
            table.append([""] * len(COLUMNS))
            labels.append(("error", name, seed, "", "", "", err))
        else:
            table.append(stats.row())
            labels.append(("run", name, seed, stats.converged, stats.longest_ce, stats.ads_budget_hits, ""))
    for name, rows in per_config.items():
        if not rows:
            continue
        means, stds = summarize(rows)
        table.append(means)
        labels.append(("mean", name, "", "", "", "", ""))
        table.append(stds)
        labels.append(("std", name, "", "", "", "", ""))
    _write_csv(out, COLUMNS, table)
    if sidecar is not None:
        _write_csv(sidecar, SIDECAR_COLUMNS, labels)
    return results


def _write_csv(out, header, rows):
    if isinstance(out, str):
        with open(out, "w", newline="", encoding="utf-8") as fh:
            _write_csv(fh, header, rows)
        return
    w = csv.writer(out)
    w.writerow(header)
    for r in rows:
        w.writerow([_fmt(x) for x in r])


def _fmt(x):
    if isinstance(x, float):
        return f"{x:.6g}"
    return x


def stats_fields():
    return [f.name for f in fields(RunStats)]
