"""Independent evaluation of the musculotendon force formula.

Writes crates/core/tests/data/mtu_oracle.csv: 10^4 random inputs and the
force f = f_max * cos(alpha) * (a * g_al * g_v + g_p) evaluated with Python's
math module from the curve definitions (default curve parameters).
"""
import math
import random
from pathlib import Path

GAMMA, V_MAX, N_ECC, K_CURV, K_PE, EPS0 = 0.45, 10.0, 1.5, 0.25, 4.0, 0.6
K_ECC = (N_ECC - 1.0) * K_CURV / (K_CURV + 1.0)


def g_al(l):
    return math.exp(-((l - 1.0) ** 2) / GAMMA)


def g_v(v):
    if v <= -1.0:
        return 0.0
    if v <= 0.0:
        return (1.0 + v) / (1.0 - v / K_CURV)
    return N_ECC - (N_ECC - 1.0) / (1.0 + v / K_ECC)


def g_p(l):
    if l <= 1.0:
        return 0.0
    return (math.exp(K_PE * (l - 1.0) / EPS0) - 1.0) / (math.exp(K_PE) - 1.0)


def main():
    rng = random.Random(20240601)
    out = Path(__file__).resolve().parent.parent / "crates/core/tests/data/mtu_oracle.csv"
    rows = ["f_max_n,pennation_rad,l_opt_m,a,l_m,l_m_dot,force_n"]
    for _ in range(10_000):
        f_max = rng.uniform(50.0, 5000.0)
        alpha = rng.uniform(0.0, 0.5)
        l_opt = rng.uniform(0.03, 0.3)
        a = rng.uniform(0.0, 1.0)
        l_m = rng.uniform(0.3, 1.9) * l_opt
        l_m_dot = rng.uniform(-1.5, 1.5) * l_opt * V_MAX
        lt = l_m / l_opt
        vt = l_m_dot / (l_opt * V_MAX)
        f = f_max * math.cos(alpha) * (a * g_al(lt) * g_v(vt) + g_p(lt))
        rows.append(",".join(repr(x) for x in (f_max, alpha, l_opt, a, l_m, l_m_dot, f)))
    out.write_text("\n".join(rows) + "\n")
    print(f"wrote {out}")


if __name__ == "__main__":
    main()
