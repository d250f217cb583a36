"""Step-ramp workload profiles.

The named profiles low/medium/high add 10/20/40 concurrent users per step,
stepping every 30 seconds, and differ in nothing else. Load is closed-loop:
a virtual user issues its next request only after the previous response.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

STEP_USERS = {"low": 10, "medium": 20, "high": 40}
DEFAULT_STEP_INTERVAL_S = 30


@dataclass(frozen=True)
class RequestTemplate:
    method: str = "GET"
    path: str = "/"
    headers: tuple[tuple[str, str], ...] = ()
    body: bytes = b""


@dataclass(frozen=True)
class WorkloadProfile:
    name: str
    step_users: int
    step_interval_s: int = DEFAULT_STEP_INTERVAL_S
    duration_s: int = 90
    targets: tuple[str, ...] = ()
    request: RequestTemplate = field(default_factory=RequestTemplate)

    def __post_init__(self):
        if self.step_users <= 0:
            raise ValueError("step_users must be positive")
        if self.step_interval_s <= 0:
            raise ValueError("step_interval_s must be positive")
        if self.duration_s < 0:
            raise ValueError("duration_s must be non-negative")
        expected = STEP_USERS.get(self.name)
        if expected is not None and self.step_users != expected:
            raise ValueError(
                f"profile {self.name!r} fixes step_users to {expected}")


def named_profile(name: str, duration_s: int, targets: tuple[str, ...] = (),
                  request: RequestTemplate | None = None,
                  step_interval_s: int = DEFAULT_STEP_INTERVAL_S) -> WorkloadProfile:
    if name not in STEP_USERS:
        raise ValueError(f"unknown profile {name!r}; expected one of {sorted(STEP_USERS)}")
    return WorkloadProfile(
        name=name,
        step_users=STEP_USERS[name],
        step_interval_s=step_interval_s,
        duration_s=duration_s,
        targets=tuple(targets),
        request=request or RequestTemplate(),
    )


def concurrency_at(profile: WorkloadProfile, t_s: float) -> int:
    """Virtual users scheduled at elapsed time t_s.

    Starts at step_users, adds step_users at every step_interval multiple,
    and drops to 0 once the run duration is reached. Nondecreasing on
    [0, duration).
    """
    if t_s < 0:
        raise ValueError("t_s must be >= 0")
    if t_s >= profile.duration_s:
        return 0
    return profile.step_users * (math.floor(t_s / profile.step_interval_s) + 1)
