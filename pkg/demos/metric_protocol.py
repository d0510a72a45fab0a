"""Measure the quantum metric with leaky counterdiabatic ramps and rebuild Q_T from it.

A gain λ ≠ 1 lets a controlled amount of population leak out of the band;
the leakage grows as v² with a slope proportional to the metric.  Readout
noise shrinks the slope and drags the reconstructed charge below one.
"""

import numpy as np

from tensormonopole import Family, HyperPoint, ModelSpec
from tensormonopole.protocol import (
    ReadoutNoise,
    calibrate,
    direct_trace_metric,
    extract_metric_tensor,
    protocol_qt,
)

spec = ModelSpec(Family.CONTINUUM_4D, 0.0)
constant = calibrate(spec)
print(f"calibration constant C = {constant:.6f}")

point = np.array(HyperPoint(1.0, 0.7, 1.1, 2.3, 0.0))
measured = extract_metric_tensor(spec, point[None], constant)[0]
direct = direct_trace_metric(spec, point, 1)[1:, 1:]
np.set_printoptions(precision=4, suppress=True)
print("measured G (γ, θ, φ):\n", measured)
print("direct G:\n", direct)

for floor in (0.0, 0.01, 0.03):
    noise = ReadoutNoise(floor) if floor else None
    print(f"noise floor {floor:.2f}: Q_T = {protocol_qt(spec, noise=noise, constant=constant).value:.4f}")
