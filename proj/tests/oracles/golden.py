"""Independent evaluations used as golden values by the unit tests.

Run: python3 tests/oracles/golden.py > tests/oracles/golden_values.hpp
"""
import math

import numpy as np
from scipy.stats import qmc


def environmental(x):
    M, D, L, tau = 10.0, 0.07, 1.505, 30.1525
    s = 3.0 * x[0]
    t = 1.0 + 59.0 * x[1]
    a = M / math.sqrt(4 * math.pi * D * t) * math.exp(-s * s / (4 * D * t))
    b = 0.0
    if t > tau:
        b = M / math.sqrt(4 * math.pi * D * (t - tau)) * math.exp(-(s - L) ** 2 / (4 * D * (t - tau)))
    return math.sqrt(4 * math.pi) * (a + b)


def piston(x):
    M = 30 + 30 * x[0]
    S = 0.005 + 0.015 * x[1]
    V0 = 0.002 + 0.008 * x[2]
    k = 1000 + 4000 * x[3]
    P0, Ta, T0 = 1e5, 293.0, 350.0
    A = P0 * S + 19.62 * M - k * V0 / S
    V = S / (2 * k) * (math.sqrt(A * A + 4 * k * P0 * V0 * Ta / T0) - A)
    return 2 * math.pi * math.sqrt(M / (k + S * S * P0 * V0 * Ta / (T0 * V * V)))


ENV_X = [(0.5, 0.5), (0.1, 0.9), (0.8, 0.3), (0.03, 0.01), (0.55, 0.6)]
PISTON_X = [(0.5, 0.5, 0.5, 0.5), (0.1, 0.2, 0.3, 0.4), (0.9, 0.8, 0.05, 0.7)]


def arr(name, rows):
    body = ",\n    ".join("{" + ", ".join(repr(float(v)) for v in r) + "}" for r in rows)
    return f"inline const std::vector<std::vector<double>> {name} = {{\n    {body}}};\n"


def main():
    out = ["#pragma once", "", "#include <vector>", "", "namespace golden {", ""]
    out.append(arr("env_points", ENV_X))
    out.append(arr("env_values", [[environmental(x)] for x in ENV_X]))
    out.append(arr("piston_points", PISTON_X))
    out.append(arr("piston_values", [[piston(x)] for x in PISTON_X]))
    sob = qmc.Sobol(d=4, scramble=False).random(16)
    out.append(arr("sobol4_first16", sob))
    sup = qmc.Sobol(d=2, scramble=False).random(4096)
    f = np.array([environmental(p) for p in sup])
    out.append(arr("env_support_stats", [[f.min(), f.max(), f.mean()]]))
    out.append("}  // namespace golden")
    print("\n".join(out))


if __name__ == "__main__":
    main()
