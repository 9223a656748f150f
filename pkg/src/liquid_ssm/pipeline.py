"""End-to-end forward path: main kernel convolution plus liquid contribution."""

from __future__ import annotations

import numpy as np

from .conv import causal_conv_fft
from .errors import DimensionError
from .kernel import kernel_genfn
from .liquid import apply_liquid, build_liquid_kernels, default_window
from .ssm import DplrSystem, StepSizeSchedule, init_dt_schedule, nplr_decompose, with_output_map

MODES = ("kb", "pb", "none")


def forward_liquid_s4(
    sys: DplrSystem,
    dt: float,
    u: np.ndarray,
    mode: str = "none",
    max_order: int = 2,
    window: int | None = None,
) -> np.ndarray:
    """Run one single-feature sequence through the convolutional path.

    y = (main kernel) * u, plus the per-order liquid contribution when
    ``mode`` is ``'kb'`` or ``'pb'``. With ``mode='none'`` this must agree
    with the recurrent reference to 1e-8.
    """
    if mode not in MODES:
        raise DimensionError(f"unknown mode {mode!r}")
    u = np.asarray(u, dtype=float)
    l = u.shape[0]
    y = causal_conv_fft(kernel_genfn(sys, dt, l).taps, u)
    if mode != "none":
        if max_order < 2:
            raise DimensionError("liquid modes need max_order >= 2")
        window = default_window(l) if window is None else window
        y = y + apply_liquid(build_liquid_kernels(sys, dt, mode, max_order, window), u)
    return y


def feature_systems(
    n: int, h: int, seed: int, schedule: StepSizeSchedule | None = None, seq_length: int | None = None
) -> list[tuple[DplrSystem, float]]:
    """One SISO system per feature: shared LegS core, per-feature output map and step.

    The h systems share the decomposed diagonal-plus-low-rank core; feature i
    gets output-map seed ``seed + i`` and the i-th entry of the step schedule.
    """
    base = nplr_decompose(n, seed=seed)
    if schedule is None:
        schedule = init_dt_schedule(h, seed=seed, seq_length=seq_length)
    if schedule.per_feature_dt.shape[0] != h:
        raise DimensionError("schedule does not cover every feature")
    return [
        (with_output_map(base, seed + i), float(schedule.per_feature_dt[i]))
        for i in range(h)
    ]
