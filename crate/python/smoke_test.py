#!/usr/bin/env python3
"""Smoke test for the infospec_py extension module.

Build and run:

    cargo build -p infospec-py --release
    cp target/release/libinfospec_py.so python/infospec_py.so
    python3 python/smoke_test.py
"""

import math
import pathlib
import sys

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parent))

import infospec_py as ips


def check(name, condition):
    assert condition, name
    print(f"ok {name}")


def kl(p, q):
    return sum(x * math.log(x / y) for x, y in zip(p, q) if x > 0)


# Gaussian mean shift: the error exponent follows (sqrt(r) - sqrt(a))^2
gauss = ips.Problem.gaussian(0.0, 2.0, 1.0)
res = gauss.exponent("error", 0.5)
check("gaussian error exponent", abs(res["value"] - 0.5) < 1e-9)
check("gaussian resolved method", res["method"] == "dual-parameter")
check("gaussian above threshold", gauss.exponent("error", 3.0)["value"] < 1e-9)
check(
    "gaussian correct exponent",
    abs(gauss.exponent("correct", 8.0)["value"] - 2.0) < 1e-9,
)
check("gaussian divergence", abs(gauss.spectral_inf_divergence() - 2.0) < 1e-12)

# Staircase spectrum in bits: values and the interior minimizer are exact
step = ips.Problem.step(0.1)
check("step log base", step.log_base == 2.0)
check("step value at the jump", step.exponent("error", 0.1)["value"] == 1.0)
flat = step.exponent("error", 0.5)
check("step flat value", abs(flat["value"] - 0.9) < 1e-12)
check("step interior minimizer", abs(flat["minimizing_R"] - 0.8) < 1e-12)

# Memoryless pair: zero error exponent beyond the reversed divergence
binary = ips.Problem.iid([0.5, 0.5], [0.7, 0.3])
reversed_div = kl([0.7, 0.3], [0.5, 0.5])
check(
    "iid threshold",
    binary.exponent("error", reversed_div + 1e-3)["value"] < 1e-6
    and binary.exponent("error", reversed_div - 1e-3)["value"] > 1e-6,
)
check(
    "iid divergence",
    abs(binary.spectral_inf_divergence() - kl([0.5, 0.5], [0.7, 0.3])) < 1e-12,
)
check("iid tail exponent", binary.eta(-0.1) > 0 and binary.eta(0.5) == 0.0)

# Correct-exponent support gating
singular = ips.Problem.iid([1.0, 0.0], [0.5, 0.5])
report = singular.check_assumptions()
check(
    "assumption report", report["passed"] is False and "letter 1" in report["witness"]
)
try:
    singular.exponent("correct", 0.1)
    raise SystemExit("correct exponent must refuse singular support")
except RuntimeError as e:
    check("correct exponent refusal", "letter 1" in str(e))

# Source-coding reduction
uniform = ips.Problem.iid_vs_counting([0.5, 0.5])
check(
    "uniform codes at full rate",
    abs(ips.coding_exponent(uniform, 0.1)["value"] - math.log(2)) < 1e-9,
)
bits = uniform.with_log_base(2.0)
check(
    "coding exponent in bits",
    abs(ips.coding_exponent(bits, 0.1 / math.log(2))["value"] - 1.0) < 1e-9,
)
check(
    "sigma staircase",
    ips.coding_sigma(uniform, 0.5) == 0.0
    and ips.coding_sigma(uniform, 0.8) == math.inf,
)

# Finite-blocklength oracles
np_pair = ips.Problem.iid([0.5, 0.5], [0.9, 0.1])
tradeoff = ips.np_tradeoff(np_pair, 8)
check("np frontier start", tradeoff["frontier"][0] == (1.0, 0.0))
mus = [mu for mu, _ in tradeoff["frontier"]]
check("np frontier monotone", all(a >= b for a, b in zip(mus, mus[1:])))
fin = ips.finite_n_exponents(np_pair, 8, 0.1)
check(
    "finite-n operating point",
    fin["lambda"] <= 1.0 and fin["error_exponent"] > 0 and fin["mu_budget"] > 0,
)
skewed = ips.Problem.iid_vs_counting([0.11, 0.89])
code = ips.best_code(skewed, 8, 5)
check(
    "best code shape", len(code["words"]) == 5 and 0.0 <= code["error"] <= 1.0
)

# Monte Carlo spectrum: seeded runs are reproducible and bands bracket
points = [1.0, 1.4]
first = ips.mc_spectrum(gauss, 30, 20000, 7, points)
second = ips.mc_spectrum(gauss, 30, 20000, 7, points)
check("mc reproducibility", first == second)
check(
    "mc bands bracket",
    all(row["band_lo"] <= row["eta_hat"] <= row["band_hi"] for row in first),
)

# Config-schema parity with the command-line tool
config = """{"version": 1,
    "null": {"type": "gaussian", "mean": 0.0, "sigma": 1.0},
    "alternative": {"type": "gaussian", "mean": 2.0}}"""
from_config = ips.Problem.from_config(config)
check(
    "config parity",
    from_config.exponent("error", 0.5) == gauss.exponent("error", 0.5),
)

# Sweep rows agree with the scalar entry point
rows = binary.sweep("error", [0.01, 0.05, 0.1])
check(
    "sweep matches scalar calls",
    all(
        row["value"] == binary.exponent("error", row["r"])["value"] for row in rows
    ),
)

# Mixture null: the small-rate limit is the weaker component's divergence
mixed = ips.Problem.mixed([0.8, 0.2], [0.3, 0.7], 0.5, 0.5, [0.5, 0.5])
expected = min(kl([0.8, 0.2], [0.5, 0.5]), kl([0.3, 0.7], [0.5, 0.5]))
check(
    "mixture small-rate limit",
    abs(mixed.exponent("error", 1e-9)["value"] - expected) < 1e-3,
)

# Markov pair: the small-rate limit is the stationary conditional divergence
markov = ips.Problem.markov(
    [[0.9, 0.1], [0.2, 0.8]], [[0.5, 0.5], [0.5, 0.5]]
)
stationary = [2.0 / 3.0, 1.0 / 3.0]
conditional = stationary[0] * kl([0.9, 0.1], [0.5, 0.5]) + stationary[1] * kl(
    [0.2, 0.8], [0.5, 0.5]
)
check(
    "markov small-rate limit",
    abs(markov.exponent("error", 1e-9)["value"] - conditional) < 1e-3,
)

print("all smoke checks passed")
