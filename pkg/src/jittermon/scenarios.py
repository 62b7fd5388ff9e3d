"""Built-in experiment scenarios and the batch runner behind the CLI."""

from __future__ import annotations

import csv
import io
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from jittermon.analysis import DtwScore, GroundTruthConfig, TrendReport, dtw_report, ground_truth_series, trend_report
from jittermon.config import (
    ControllerConfig,
    CrossConfig,
    DataplaneConfig,
    ScenarioConfig,
    TaggedConfig,
)
from jittermon.core import NS_PER_US, JitterSeries, SimTime
from jittermon.ctrl_estimator import controller_estimate
from jittermon.dp_estimator import dataplane_series
from jittermon.simnet import (
    FlowSpec,
    OnOffBurst,
    SimulationOutput,
    Taps,
    Topology,
    cross_flow,
    linear_topology,
    run_scenario,
)

log = logging.getLogger(__name__)

TAGGED_FLOW = "tagged"

# Controller runs: light cross traffic plus sender scheduling noise.
_CTRL_CROSS = CrossConfig(rate_bps=(0.5e6, 3e6))
_CTRL = dict(duration_s=200.0, cross=_CTRL_CROSS, controller=ControllerConfig(1.0))
# Data-plane runs: a slower flow and heavier cross traffic at every inter-switch link.
_DP_CROSS = CrossConfig(rate_bps=(10e6, 40e6))
_DP_TAGGED = TaggedConfig(12_000_000, 1500, send_jitter_us=200)


def _ctrl(name: str, mbps: int, interval_s: float = 1.0) -> ScenarioConfig:
    return ScenarioConfig(
        name=name,
        tagged=TaggedConfig(mbps * 1_000_000, 1500, send_jitter_us=200),
        **{**_CTRL, "controller": ControllerConfig(interval_s)},
    )


def _dp(name: str, kind: str, m: int) -> ScenarioConfig:
    return ScenarioConfig(
        name=name,
        duration_s=60.0,
        tagged=_DP_TAGGED,
        cross=_DP_CROSS,
        dataplane=DataplaneConfig(m=m, kinds=(kind,), switches=("S2", "S3")),
    )


BUILTINS: dict[str, ScenarioConfig] = {
    s.name: s
    for s in (
        _ctrl("single-flow-50", 50),
        _ctrl("single-flow-90", 90),
        _ctrl("single-flow-100", 100),
        _ctrl("poll-3s", 90, interval_s=3.0),
        _dp("dp-euclid-17", "euclid", 4),
        _dp("dp-euclid-33", "euclid", 5),
        _dp("dp-manhattan-17", "manhattan", 4),
        _dp("dp-manhattan-33", "manhattan", 5),
        ScenarioConfig(
            name="zero-jitter",
            duration_s=5.0,
            tagged=TaggedConfig(12_000_000, 1500),
            cross=CrossConfig(enabled=False),
            controller=ControllerConfig(1.0),
            dataplane=DataplaneConfig(m=4, kinds=("euclid", "manhattan"), switches=("S1", "S2", "S3"), ewma="15/16"),
        ),
    )
}


@dataclass(frozen=True)
class Family:
    scenarios: tuple[str, ...]
    orderings: tuple[str, ...]


FAMILIES: dict[str, Family] = {
    "utilization": Family(
        ("single-flow-50", "single-flow-90", "single-flow-100"),
        ("single-flow-50/ctrl < single-flow-90/ctrl < single-flow-100/ctrl",),
    ),
    "hop-position": Family(
        ("dp-euclid-17", "dp-manhattan-17"),
        (
            "dp-euclid-17/euclid@S3 <= dp-euclid-17/euclid@S2",
            "dp-manhattan-17/manhattan@S3 <= dp-manhattan-17/manhattan@S2",
        ),
    ),
    "window-size": Family(
        ("dp-euclid-17", "dp-euclid-33", "dp-manhattan-17", "dp-manhattan-33"),
        tuple(
            f"dp-{k}-33/{k}@{sw} <= dp-{k}-17/{k}@{sw}"
            for k in ("euclid", "manhattan")
            for sw in ("S2", "S3")
        ),
    ),
}


def resolve(names: str) -> list[ScenarioConfig]:
    """Comma-separated built-in scenario and family names, deduplicated in order."""
    out: list[ScenarioConfig] = []
    for name in (n.strip() for n in names.split(",") if n.strip()):
        if name in FAMILIES:
            members = FAMILIES[name].scenarios
        elif name in BUILTINS:
            members = (name,)
        else:
            known = ", ".join(sorted(BUILTINS) + sorted(FAMILIES))
            raise KeyError(f"unknown scenario {name!r}; known: {known}")
        for m in members:
            if all(c.name != m for c in out):
                out.append(BUILTINS[m])
    return out


def orderings_for(names: Iterable[str]) -> list[str]:
    present = set(names)
    return [o for fam in FAMILIES.values() if set(fam.scenarios) <= present for o in fam.orderings]


# -- building and running -----------------------------------------------------------


def build_topology(cfg: ScenarioConfig) -> Topology:
    t = cfg.topology
    return linear_topology(t.switches, t.switch_link_bps, t.host_link_bps, t.propagation, t.queue_capacity)


def build_flows(cfg: ScenarioConfig) -> list[FlowSpec]:
    k = cfg.topology.switches
    flows = [
        FlowSpec(
            TAGGED_FLOW,
            "h1",
            f"h{k}",
            cfg.tagged.rate_bps,
            cfg.tagged.packet_size_bytes,
            send_jitter=cfg.tagged.send_jitter_us * NS_PER_US,
        )
    ]
    c = cfg.cross
    if c.enabled:
        burst = OnOffBurst(c.on_s, c.off_s, c.rate_bps, c.arrivals)  # type: ignore[arg-type]
        for i in range(1, k):
            flows.append(cross_flow(f"x{i}", f"c{i}", f"c{i + 1}", burst, c.packet_size_bytes))
    return flows


def _sim_key(cfg: ScenarioConfig) -> tuple:
    return (cfg.topology, cfg.tagged, cfg.cross, cfg.duration_s)


def _poll_times(cfg: ScenarioConfig) -> set[SimTime]:
    if cfg.controller is None:
        return set()
    return set(range(0, cfg.duration + 1, cfg.controller.interval))


def simulate(configs: Sequence[ScenarioConfig], seed: int, events: bool = False) -> SimulationOutput:
    """One simulation serving every config in ``configs`` (they must share a sim key)."""
    first = configs[0]
    if any(_sim_key(c) != _sim_key(first) for c in configs):
        raise ValueError("configs do not describe the same simulation")
    times: set[SimTime] = set()
    for c in configs:
        times |= _poll_times(c)
    taps = Taps(
        counter_times=sorted(times),
        delay_streams=any(c.dataplane is not None for c in configs),
        events=events,
    )
    return run_scenario(build_topology(first), build_flows(first), seed, first.duration, taps)


@dataclass
class RunResult:
    scenario: str
    seed: int
    series: dict[str, JitterSeries]
    scores: dict[str, DtwScore]
    pairs: dict[str, tuple[str, str]]
    sent: dict[str, int]
    received: dict[str, int]
    dropped: dict[str, int]
    violations: list[str]
    events: list[str] = field(default_factory=list)

    @property
    def tagged_dropped(self) -> int:
        return self.dropped[TAGGED_FLOW]


_TRUTH_FOR_KIND = {"euclid": "sq_std_dev", "manhattan": "std_dev", "ewma": "mean_abs_consecutive"}


def evaluate(cfg: ScenarioConfig, out: SimulationOutput) -> RunResult:
    """Estimate, build ground truth and score one scenario on a finished run."""
    rlog = out.receiver_logs[TAGGED_FLOW]
    series: dict[str, JitterSeries] = {}
    scores: dict[str, DtwScore] = {}
    pairs: dict[str, tuple[str, str]] = {}

    truths_needed: list[tuple[str, GroundTruthConfig]] = []
    if cfg.controller is not None:
        counters = cfg.controller.counters
        est, _ = controller_estimate(out, TAGGED_FLOW, cfg.controller.interval, per_flow=counters == "flow")
        series["ctrl_estimate"] = est
        gt = GroundTruthConfig("interval", cfg.ground_truth.interval_statistic, interval=cfg.controller.interval)  # type: ignore[arg-type]
        truths_needed.append(("ctrl", gt))
    dp = cfg.dataplane
    if dp is not None:
        kinds = list(dp.kinds) + (["ewma"] if dp.ewma is not None else [])
        for kind in kinds:
            truths_needed.append((kind, GroundTruthConfig("window", _TRUTH_FOR_KIND[kind], n=dp.window)))  # type: ignore[arg-type]

    # name truth files after the statistic only when one run needs several
    distinct = {(g.mode, g.statistic) for _, g in truths_needed}
    truth_name: dict[str, str] = {}
    for key, gt in truths_needed:
        name = "truth" if len(distinct) == 1 else f"truth_{gt.mode}_{gt.statistic}"
        truth_name[key] = name
        if name not in series:
            horizon = out.duration if gt.mode == "interval" else None
            series[name] = ground_truth_series(rlog, gt, horizon=horizon, label=name)

    if cfg.controller is not None:
        _score(series, scores, pairs, "ctrl", "ctrl_estimate", truth_name["ctrl"])
    if dp is not None:
        for sw in dp.switches:
            per_switch = dataplane_series(out.switch_delay_stream(sw, TAGGED_FLOW), dp.m, dp.ewma_shift)
            for kind in kinds:
                name = f"dp_{kind}_{sw}"
                series[name] = replace_label(per_switch[kind], name)
                _score(series, scores, pairs, f"{kind}@{sw}", name, truth_name[kind])

    return RunResult(
        scenario=cfg.name,
        seed=out.seed,
        series=series,
        scores=scores,
        pairs=pairs,
        sent=dict(out.sent),
        received=dict(out.received),
        dropped=dict(out.dropped),
        violations=out.check_invariants(),
        events=list(out.event_lines()),
    )


def replace_label(s: JitterSeries, label: str) -> JitterSeries:
    return JitterSeries(label, s.at, s.values, s.unit)


def _score(series, scores, pairs, key: str, est_name: str, truth: str) -> None:
    est, tr = series[est_name], series[truth]
    if len(est) and len(tr):
        scores[key] = dtw_report(est, tr)
    else:
        log.warning("%s: empty series, no DTW score (est=%d truth=%d)", key, len(est), len(tr))
    pairs[key] = (est_name, truth)


def _run_group(configs: tuple[ScenarioConfig, ...], seed: int, events: bool) -> list[RunResult]:
    out = simulate(configs, seed, events)
    return [evaluate(c, out) for c in configs]


def run_batch(
    configs: Sequence[ScenarioConfig], seeds: Sequence[int], jobs: int = 1, events: bool = False
) -> list[RunResult]:
    """Run every config for every seed; configs sharing a simulation share one run."""
    groups: dict[tuple, list[ScenarioConfig]] = {}
    for c in configs:
        groups.setdefault(_sim_key(c), []).append(c)
    tasks = [(tuple(g), seed) for g in groups.values() for seed in seeds]
    results: list[RunResult] = []
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            futures = [pool.submit(_run_group, g, s, events) for g, s in tasks]
            for f in futures:
                results.extend(f.result())
    else:
        for g, s in tasks:
            log.info("running %s seed %d", ",".join(c.name for c in g), s)
            results.extend(_run_group(g, s, events))
    order = {c.name: i for i, c in enumerate(configs)}
    results.sort(key=lambda r: (order[r.scenario], r.seed))
    return results


def mean_scores(results: Iterable[RunResult]) -> dict[str, float]:
    """Seed-mean DTW distance per '<scenario>/<estimator>' label."""
    acc: dict[str, list[float]] = {}
    for r in results:
        for key, score in r.scores.items():
            acc.setdefault(f"{r.scenario}/{key}", []).append(score.distance)
    return {label: float(np.mean(v)) for label, v in acc.items()}


def batch_trend_report(results: Sequence[RunResult], orderings: Sequence[str] | None = None) -> TrendReport:
    """Seed-mean DTW per label, checked against ``orderings`` (default: every
    family fully present in ``results``)."""
    means = sorted(mean_scores(results).items())
    if orderings is None:
        orderings = orderings_for({r.scenario for r in results})
    if len(means) < 2 and not orderings:
        return TrendReport(tuple(means), ())
    return trend_report(means, orderings)


# -- output files -----------------------------------------------------------------------


def series_csv(s: JitterSeries) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["time_ns", "value", "unit", "label"])
    for t, v in zip(s.at.tolist(), s.values.tolist()):
        w.writerow([t, repr(float(v)), s.unit, s.label])
    return buf.getvalue()


def dtw_report_text(r: RunResult) -> str:
    lines = [
        f"# scenario {r.scenario} seed {r.seed}",
        f"# tagged sent {r.sent[TAGGED_FLOW]} received {r.received[TAGGED_FLOW]} dropped {r.dropped[TAGGED_FLOW]}",
        "estimator estimate_series truth_series dtw_distance per_point len_estimate len_truth",
    ]
    for key, (est, truth) in r.pairs.items():
        s = r.scores.get(key)
        if s is None:
            lines.append(f"{key} {est} {truth} nan nan {len(r.series[est])} {len(r.series[truth])}")
        else:
            lines.append(f"{key} {est} {truth} {s.distance!r} {s.per_point!r} {s.len_a} {s.len_b}")
    if r.violations:
        lines += [f"# INVARIANT VIOLATION: {v}" for v in r.violations]
    return "\n".join(lines) + "\n"


def write_run(r: RunResult, out_dir: Path) -> Path:
    d = Path(out_dir) / r.scenario / f"seed-{r.seed}"
    d.mkdir(parents=True, exist_ok=True)
    for name, s in r.series.items():
        (d / f"{name}.csv").write_text(series_csv(s))
    (d / "dtw_report.txt").write_text(dtw_report_text(r))
    if r.events:
        (d / "events.txt").write_text("\n".join(r.events) + "\n")
    return d
