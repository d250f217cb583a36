"""Circuit breaker state machine: Closed / Open / HalfOpen.

The pure transition and admission functions are total and side-effect free;
``CircuitBreaker`` wraps them with a lock and an injectable monotonic clock.
Outcomes fed to the machine are final, post-retry outcomes of a request, not
per-attempt results.
"""

from __future__ import annotations

import enum
import threading
import time
from dataclasses import dataclass
from typing import Callable

from .policies import CircuitBreakerPolicy


class Outcome(enum.Enum):
    SUCCESS = "success"
    FAILURE = "failure"


class Decision(enum.Enum):
    ADMIT = "admit"
    PROBE = "probe"
    REJECT = "reject"


@dataclass(frozen=True)
class Closed:
    consecutive_failures: int = 0


@dataclass(frozen=True)
class Open:
    opened_at: float


@dataclass(frozen=True)
class HalfOpen:
    probes_in_flight: int = 0


CircuitState = Closed | Open | HalfOpen


def cb_transition(state: CircuitState, outcome: Outcome, now: float,
                  policy: CircuitBreakerPolicy) -> CircuitState:
    """Apply a final request outcome to the breaker state.

    Closed accumulates consecutive failures and opens at the threshold.
    Open ignores outcomes. HalfOpen closes on success and reopens on
    failure with a fresh opened_at.
    """
    if isinstance(state, Closed):
        if outcome is Outcome.SUCCESS:
            return Closed(0)
        failures = state.consecutive_failures + 1
        if failures >= policy.failure_threshold:
            return Open(opened_at=now)
        return Closed(failures)
    if isinstance(state, Open):
        return state
    # HalfOpen: a probe result settles the circuit either way.
    if outcome is Outcome.SUCCESS:
        return Closed(0)
    return Open(opened_at=now)


def cb_admit(state: CircuitState, now: float,
             policy: CircuitBreakerPolicy) -> tuple[Decision, CircuitState]:
    """Decide whether a request may proceed, returning the successor state."""
    if isinstance(state, Closed):
        return Decision.ADMIT, state
    if isinstance(state, Open):
        if (now - state.opened_at) * 1000.0 >= policy.open_duration_ms:
            return Decision.PROBE, HalfOpen(probes_in_flight=1)
        return Decision.REJECT, state
    if state.probes_in_flight < policy.half_open_max_probes:
        return Decision.PROBE, HalfOpen(state.probes_in_flight + 1)
    return Decision.REJECT, state


class CircuitBreaker:
    """Thread-safe breaker over the pure state machine."""

    def __init__(self, policy: CircuitBreakerPolicy,
                 clock: Callable[[], float] = time.monotonic):
        self.policy = policy
        self._clock = clock
        self._lock = threading.Lock()
        self._state: CircuitState = Closed(0)

    @property
    def state(self) -> CircuitState:
        with self._lock:
            return self._state

    def try_admit(self) -> Decision:
        with self._lock:
            decision, self._state = cb_admit(self._state, self._clock(), self.policy)
            return decision

    def record(self, outcome: Outcome) -> None:
        with self._lock:
            self._state = cb_transition(self._state, outcome, self._clock(), self.policy)
