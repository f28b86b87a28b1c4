"""Per-iteration fit traces shared by the iterative solvers."""

from __future__ import annotations

from dataclasses import dataclass, field


@dataclass
class FitReport:
    """Objective or likelihood trace of an iterative fit.

    ``trace[i]`` is the tracked value after outer iteration ``i + 1``;
    ``seconds[i]`` is the cumulative wall time at that point.
    """

    metric: str
    trace: list[float] = field(default_factory=list)
    seconds: list[float] = field(default_factory=list)
    converged: bool = False
    iterations: int = 0
    wall_time: float = 0.0
    notes: list[str] = field(default_factory=list)

    def record(self, value: float, elapsed: float) -> None:
        self.trace.append(float(value))
        self.seconds.append(float(elapsed))
        self.iterations = len(self.trace)
        self.wall_time = float(elapsed)
