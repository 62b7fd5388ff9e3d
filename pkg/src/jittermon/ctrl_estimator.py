"""Controller-side jitter estimate from polled port counters.

Each poll round turns counter deltas into an average per-packet load (rx)
or offload (tx) time per port and sums them along the flow path. The
estimate is the magnitude of the change in that sum between consecutive
rounds: constant link latencies cancel, only the variable port times
remain.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from jittermon.core import NS_PER_S, JitterSeries, SimTime
from jittermon.simnet import Direction, PortCounterSample, SimulationOutput

PortKey = tuple[str, int, Direction]


class CounterIntegrityError(ValueError):
    """A cumulative counter went backwards, or samples are mismatched."""


def _check_pair(prev: PortCounterSample, curr: PortCounterSample) -> tuple[float, int]:
    if (prev.switch_id, prev.port, prev.direction) != (curr.switch_id, curr.port, curr.direction):
        raise CounterIntegrityError("samples are from different counters")
    if curr.sampled_at <= prev.sampled_at:
        raise CounterIntegrityError("samples must be strictly ordered in time")
    delta = curr.cumulative_packets - prev.cumulative_packets
    if delta < 0:
        raise CounterIntegrityError(
            f"{curr.switch_id}:{curr.port}/{curr.direction} counter decreased "
            f"({prev.cumulative_packets} -> {curr.cumulative_packets})"
        )
    return (curr.sampled_at - prev.sampled_at) / NS_PER_S, delta


def per_packet_time(prev: PortCounterSample, curr: PortCounterSample) -> float | None:
    """Average seconds per packet between two samples, None if no packets moved."""
    interval, delta = _check_pair(prev, curr)
    if delta == 0:
        return None
    return interval / delta


def rate(prev: PortCounterSample, curr: PortCounterSample) -> float:
    """Packets per second between two samples."""
    interval, delta = _check_pair(prev, curr)
    return delta / interval


@dataclass(frozen=True)
class PollConfig:
    """What the controller polls: ``flow_id`` selects per-flow port counters,
    None reads whole-port counters."""

    interval: SimTime
    path_ports: tuple[PortKey, ...]
    flow_id: str | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "path_ports", tuple(self.path_ports))
        if self.interval <= 0:
            raise ValueError("poll interval must be > 0")
        if not self.path_ports:
            raise ValueError("path_ports must not be empty")
        if len(set(self.path_ports)) != len(self.path_ports):
            raise ValueError("path_ports entries must be unique")


@dataclass(frozen=True)
class PollRound:
    round_index: int
    at: SimTime
    samples: tuple[PortCounterSample, ...]
    per_port_time: tuple[float | None, ...]

    @property
    def degraded(self) -> bool:
        return any(t is None for t in self.per_port_time)

    @property
    def sum(self) -> float:
        return poll_round_sum(self)


def poll_round_sum(round: PollRound) -> float:
    """Sum of per-port times in seconds; ports without traffic add 0."""
    return float(sum(t for t in round.per_port_time if t is not None))


def jitter_estimate_step(prev_sum: float, curr_sum: float) -> float:
    return abs(curr_sum - prev_sum)


def build_rounds(samples_by_time: Sequence[Sequence[PortCounterSample]]) -> list[PollRound]:
    """Pair consecutive sample sets into rounds (round k spans samples k-1..k)."""
    rounds = []
    for k in range(1, len(samples_by_time)):
        prev, curr = samples_by_time[k - 1], samples_by_time[k]
        if len(prev) != len(curr):
            raise CounterIntegrityError("sample sets differ in size")
        times = tuple(per_packet_time(p, c) for p, c in zip(prev, curr))
        rounds.append(PollRound(k, curr[0].sampled_at, tuple(curr), times))
    return rounds


def estimate_series(rounds: Iterable[PollRound], label: str = "ctrl_estimate") -> JitterSeries:
    """Jitter estimate in microseconds, one point per pair of healthy rounds.

    A degraded round (some port saw no packets) leaves a gap on both sides.
    """
    points = []
    prev: PollRound | None = None
    for rnd in rounds:
        if prev is not None and not prev.degraded and not rnd.degraded:
            step = jitter_estimate_step(poll_round_sum(prev), poll_round_sum(rnd))
            points.append((rnd.at, step * 1e6))
        prev = rnd
    return JitterSeries.from_points(label, points, unit="us")


def poll_times(interval: SimTime, horizon: SimTime) -> list[SimTime]:
    """0, T, 2T, ... up to and including ``horizon``."""
    return list(range(0, horizon + 1, interval))


def poll_simulation(output: SimulationOutput, config: PollConfig, horizon: SimTime | None = None) -> list[PollRound]:
    """Poll ``config.path_ports`` of a finished run every ``config.interval``.

    The run must have snapshotted counters at those instants (see
    ``Taps.counter_times``) or kept exact counters.
    """
    horizon = output.duration if horizon is None else horizon
    sets = [
        [output.sample_counters(sw, port, d, t, config.flow_id) for sw, port, d in config.path_ports]
        for t in poll_times(config.interval, horizon)
    ]
    return build_rounds(sets)


def controller_estimate(
    output: SimulationOutput, flow_id: str, interval: SimTime, per_flow: bool = True
) -> tuple[JitterSeries, list[PollRound]]:
    config = PollConfig(interval, tuple(output.path_ports(flow_id)), flow_id if per_flow else None)
    rounds = poll_simulation(output, config)
    return estimate_series(rounds), rounds
