"""Controller-side round-trip delay measurement and per-sample estimation.

The controller can only bound the network delay from its own clock: it
remembers when each of its frames left (on_send) and subtracts that from
the arrival time of the frame that answers it (on_receive). Matching is
FIFO, oldest pending first; the closed-loop runner tags frames with unique
sequence ids while the bundled loopback capture uses the echoed byte values
themselves.

The per-sample estimate t_m follows four regimes, keyed by what arrived
during the last sampling period:

  no arrival       vacant sample: the previous estimate grows by one period
                   (the outstanding frame is at least that late)
  one arrival      t_m = its RTT (normal when RTT < period, delayed otherwise)
  many arrivals    message rejection: only the newest frame's RTT is kept
  unmatched data   arrival with nothing outstanding (startup): estimate
                   unchanged, classified normal

Two bookkeeping streams run side by side. RTTs come from id matching as
above. Separately, every arrival EVENT, including ones carrying no data,
consumes the oldest unpaired send time into a diff history; across a vacant
run these diffs telescope so their sum equals the first arrival's RTT,
which is the cross-check replay_capture's tests pin down.

All times are integer milliseconds; estimates deliberately keep millisecond
resolution rather than rounding to sampling periods, because the adaptive
compensator consumes them directly.
"""

from __future__ import annotations

import csv
from collections import deque

from .netchan import Event, classify

__all__ = [
    "EstimatorState",
    "LOOPBACK_CAPTURE",
    "replay_capture",
    "write_log_csv",
]


class EstimatorState:
    """Delay-estimator bookkeeping for one controller node."""

    def __init__(self):
        self.pending = {}  # frame id -> send time, insertion = send order
        self.diff_queue = deque()  # send times not yet paired with an arrival event
        self.diffs = []  # per-event arrival-minus-send history
        self.last_rtt = None
        self.last_estimate = 0
        self.vacant_count = 0
        self.log = []  # (sample_ms, Event, rtt_ms or None, tm_ms)
        self._started = False
        self._arrivals_since_sample = 0
        self._rtt_this_period = None

    def oldest_pending(self):
        """Id of the oldest outstanding frame, or None."""
        return next(iter(self.pending), None)

    def on_send(self, frame_id, t1_ms):
        """Record a transmission at controller time t1_ms."""
        if frame_id in self.pending:
            raise ValueError(f"frame id {frame_id!r} is already pending")
        self.pending[frame_id] = t1_ms
        self.diff_queue.append(t1_ms)
        self._started = True

    def on_receive(self, frame_id, t2_ms):
        """Record a data arrival at t2_ms answering frame_id; returns its RTT."""
        if frame_id not in self.pending:
            raise ValueError(f"arrival for unknown frame id {frame_id!r}")
        t1 = self.pending.pop(frame_id)
        rtt = t2_ms - t1
        if rtt < 0:
            raise ValueError(f"frame id {frame_id!r} arrived before it was sent")
        if self.diff_queue:
            self.diffs.append(t2_ms - self.diff_queue.popleft())
        self.last_rtt = rtt
        self._rtt_this_period = rtt
        self._arrivals_since_sample += 1
        self._started = True
        return rtt

    def on_empty_receive(self, t2_ms):
        """Arrival event carrying no data (the peer had nothing fresh).

        Pairs with the oldest unpaired send for the diff history but does
        not count as a data arrival for the estimate.
        """
        if self.diff_queue:
            self.diffs.append(t2_ms - self.diff_queue.popleft())

    def on_unmatched_receive(self, t2_ms):
        """Data arrival with nothing outstanding (startup frames)."""
        self._arrivals_since_sample += 1
        self._started = True

    def estimate_at_sample(self, now_ms, period_ms):
        """Close the sampling period ending at now_ms; returns (t_m, event)."""
        if period_ms <= 0:
            raise ValueError("period must be positive")
        arrivals = self._arrivals_since_sample
        rtt = self._rtt_this_period
        if arrivals == 0:
            if self._started:
                tm = self.last_estimate + period_ms
                self.vacant_count += 1
            else:
                tm = self.last_estimate  # no traffic yet: stays 0
            event = Event.VACANT
        else:
            self.vacant_count = 0
            tm = rtt if rtt is not None else self.last_estimate
            event = classify(rtt, arrivals, period_ms)
        self.last_estimate = tm
        self.log.append((now_ms, event, rtt, tm))
        self._arrivals_since_sample = 0
        self._rtt_this_period = None
        return tm, event


# Loopback capture bundled for the estimator demo: the controller transmits
# a fresh byte each time its peer answers, the peer echoes every 20 ms
# whether or not it has fresh data ("empty" rows). Times are milliseconds.
LOOPBACK_CAPTURE = (
    ("send", 50, 0),
    ("empty", None, 23),
    ("send", 60, 23),
    ("empty", None, 45),
    ("send", 70, 45),
    ("data", 50, 74),
    ("send", 80, 74),
    ("data", 60, 83),
    ("send", 90, 83),
    ("data", 70, 108),
    ("send", 100, 108),
    ("data", 80, 124),
    ("send", 110, 124),
    ("data", 90, 143),
    ("send", 120, 143),
    ("data", 100, 167),
    ("send", 130, 167),
    ("data", 110, 184),
)


def _apply_capture_event(state, event):
    kind, value, t = event
    if kind == "send":
        state.on_send(value, t)
    elif kind == "data":
        if value in state.pending:
            state.on_receive(value, t)
        else:
            state.on_unmatched_receive(t)
    elif kind == "empty":
        state.on_empty_receive(t)
    else:
        raise ValueError(f"unknown capture event kind {kind!r}")


def replay_capture(events=LOOPBACK_CAPTURE, period_ms=20, samples=9):
    """Replay a capture against the sampling clock; returns the final state.

    Events strictly before a sampling instant, and arrivals landing exactly
    on it, are applied before that sample's estimate; a send stamped exactly
    on the instant happens just after (the controller estimates first, then
    transmits). Events past the last sample are still applied so the diff
    and RTT histories cover the whole capture.
    """
    state = EstimatorState()
    ev = sorted(events, key=lambda e: e[2])
    i = 0
    for s in range(samples):
        now = s * period_ms
        while i < len(ev) and (
            ev[i][2] < now or (ev[i][2] == now and ev[i][0] != "send")
        ):
            _apply_capture_event(state, ev[i])
            i += 1
        state.estimate_at_sample(now, period_ms)
        while i < len(ev) and ev[i][2] == now and ev[i][0] == "send":
            _apply_capture_event(state, ev[i])
            i += 1
    while i < len(ev):
        _apply_capture_event(state, ev[i])
        i += 1
    return state


def write_log_csv(log, path):
    """Write estimator log rows as sample_ms,event,rtt_ms,tm_ms."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["sample_ms", "event", "rtt_ms", "tm_ms"])
        for sample_ms, event, rtt, tm in log:
            writer.writerow([sample_ms, event.value, "" if rtt is None else rtt, tm])
