"""Global work counters.

The efficiency comparison between the exact alignment and the kernel
surrogate is made on operation counts, not wall time alone, so the hot
paths report how much work they did:

* ``cost_evals``   -- local cost-function evaluations, which equals the
  number of dynamic-programming cells filled,
* ``kernel_ops``   -- arithmetic operations spent in RBF-kernel distance
  evaluations,
* ``objective_evals`` -- black-box objective evaluations made by the
  window optimizer.

Counters are process-global and guarded by a lock so threaded fan-out
(feature-map workers, per-cell identification jobs) stays accurate.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field


@dataclass
class Counters:
    cost_evals: int = 0
    kernel_ops: int = 0
    objective_evals: int = 0
    _lock: threading.Lock = field(
        default_factory=threading.Lock, repr=False, compare=False
    )

    def add_cost(self, n: int) -> None:
        with self._lock:
            self.cost_evals += int(n)

    def add_kernel_ops(self, n: int) -> None:
        with self._lock:
            self.kernel_ops += int(n)

    def add_objective(self, n: int = 1) -> None:
        with self._lock:
            self.objective_evals += int(n)

    def reset(self) -> None:
        with self._lock:
            self.cost_evals = 0
            self.kernel_ops = 0
            self.objective_evals = 0

    def snapshot(self) -> dict[str, int]:
        with self._lock:
            return {
                "cost_evals": self.cost_evals,
                "kernel_ops": self.kernel_ops,
                "objective_evals": self.objective_evals,
            }


counters = Counters()
