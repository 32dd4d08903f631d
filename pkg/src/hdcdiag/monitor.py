"""Sliding-window accuracy monitor that raises the diagnosis trigger.

Calibration sweeps a stride-1 window over an in-distribution correctness
stream to estimate the window-accuracy mean and (population) standard
deviation; deployment steps push one correctness bit at a time and flag a
drop whenever the full window's accuracy falls strictly below
mean - 3 * std. No triggering happens until the first full window.
"""

from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError


@dataclass
class MonitorState:
    window_size: int
    mu_id: float
    sigma_id: float
    threshold: float
    window: deque = field(default_factory=deque)
    window_sum: int = 0
    triggered: bool = False

    @property
    def window_accuracy(self) -> float | None:
        """Accuracy of the current window, or None while still warming up."""
        if len(self.window) < self.window_size:
            return None
        return self.window_sum / self.window_size


def calibrate(correctness_stream, window_size: int = 100) -> MonitorState:
    """Estimate the in-distribution window-accuracy statistics and the threshold.

    The windows overlap (stride 1), matching the deployment-time sliding
    window rather than an independent-samples idealization.
    """
    bits = np.asarray(list(correctness_stream), dtype=np.int64)
    if window_size < 1:
        raise ValidationError("window_size must be >= 1")
    if not np.isin(bits, (0, 1)).all():
        raise ValidationError("correctness stream must contain only 0/1")
    if bits.size < window_size:
        raise ValidationError(
            f"calibration stream length {bits.size} is shorter than window {window_size}"
        )
    csum = np.concatenate([[0], np.cumsum(bits)])
    accs = (csum[window_size:] - csum[:-window_size]) / window_size
    mu = float(accs.mean())
    sigma = float(accs.std())
    return MonitorState(window_size, mu, sigma, mu - 3.0 * sigma)


def step(state: MonitorState, correct: int) -> MonitorState:
    """Push one correctness bit and re-evaluate the trigger (in place)."""
    if correct not in (0, 1):
        raise ValidationError(f"correct must be 0 or 1, got {correct!r}")
    state.window.append(correct)
    state.window_sum += correct
    if len(state.window) > state.window_size:
        state.window_sum -= state.window.popleft()
    acc = state.window_accuracy
    state.triggered = acc is not None and acc < state.threshold
    return state
