#!/usr/bin/env python3
"""Generate aggregation fixtures for `fedpid verify` with exact rational arithmetic.

Every input value is a dyadic rational so it is exactly representable as a
binary64; expectations are computed with fractions.Fraction and rounded to
the nearest double only when written out.

    python3 tools/make_fixtures.py tests/fixtures
"""

import json
import random
import sys
from fractions import Fraction
from pathlib import Path

DEGENERATE_SCALE = Fraction(1e-12)


def fedavg(clients):
    total = sum(Fraction(c["size"]) for c in clients)
    return [Fraction(c["size"]) / total for c in clients], "none"


def fedcostwavg(clients, alpha):
    alpha = Fraction(alpha)
    total = sum(Fraction(c["size"]) for c in clients)
    ratios = [Fraction(c["cost_history"][-2]) / Fraction(c["cost_history"][-1]) for c in clients]
    ratio_sum = sum(ratios)
    return [alpha * Fraction(c["size"]) / total + (1 - alpha) * r / ratio_sum
            for c, r in zip(clients, ratios)], "none"


def fedpidavg(clients, alpha, beta, gamma, window, k_abs):
    a, b, g = Fraction(alpha), Fraction(beta), Fraction(gamma)
    total = sum(Fraction(c["size"]) for c in clients)
    drops, sums, prevs = [], [], []
    for c in clients:
        hist = [Fraction(x) for x in c["cost_history"]]
        d = hist[-2] - hist[-1]
        drops.append(abs(d) if k_abs else d)
        sums.append(sum(hist[-window:]))
        prevs.append(abs(hist[-2]))
    drop_sum, int_sum = sum(drops), sum(sums)
    fallback = "none"
    if abs(drop_sum) <= DEGENERATE_SCALE * max(prevs):
        a, b, fallback = a + b, Fraction(0), "degenerate_normalizer"
    if abs(int_sum) <= DEGENERATE_SCALE * max(sums):
        a, g, fallback = a + g, Fraction(0), "degenerate_normalizer"
    weights = []
    for c, d, m in zip(clients, drops, sums):
        w = a * Fraction(c["size"]) / total
        if b:
            w += b * d / drop_sum
        if g:
            w += g * m / int_sum
        weights.append(w)
    return weights, fallback


def expected(fx):
    p = fx.get("params", {})
    clients = fx["clients"]
    if fx["strategy"] != "fedavg" and any(len(c["cost_history"]) < 2 for c in clients):
        return {"error": "MissingHistory"}
    if fx["strategy"] == "fedavg":
        weights, fb = fedavg(clients)
    elif fx["strategy"] == "fedcostwavg":
        weights, fb = fedcostwavg(clients, p.get("cw_alpha", 0.5))
    else:
        weights, fb = fedpidavg(clients, p.get("alpha", 0.45), p.get("beta", 0.45),
                                p.get("gamma", 0.1), p.get("window", 6), p.get("k_abs", True))
    dim = len(clients[0]["model"])
    model = [sum(w * Fraction(c["model"][d]) for w, c in zip(weights, clients)) for d in range(dim)]
    return {"weights": [float(w) for w in weights], "model": [float(x) for x in model],
            "fallback": fb}


def dyadic(rng, lo, hi, denom=8):
    return rng.randint(lo * denom, hi * denom) / denom


def random_case(rng, idx, strategy):
    n = rng.randint(1, 5)
    dim = rng.randint(1, 4)
    length = rng.randint(2, 8)
    clients = []
    for j in range(n):
        clients.append({
            "id": j,
            "size": rng.randint(1, 40),
            "model": [dyadic(rng, -4, 4) for _ in range(dim)],
            "cost_history": [dyadic(rng, 1, 6) for _ in range(length)],
        })
    params = {"cw_alpha": 0.5, "alpha": 0.45, "beta": 0.45, "gamma": 0.1, "window": 6,
              "k_abs": rng.random() < 0.25}
    return {"name": f"random_{strategy}_{idx:03d}", "strategy": strategy, "params": params,
            "clients": clients, "tolerance": 1e-10}


def worked_cases():
    return [
        {"name": "fedavg_sizes_1_3", "strategy": "fedavg",
         "clients": [{"id": 0, "size": 1, "model": [0.0], "cost_history": [1.0]},
                     {"id": 1, "size": 3, "model": [1.0], "cost_history": [1.0]}],
         "tolerance": 1e-12},
        {"name": "fedcostwavg_two_clients", "strategy": "fedcostwavg", "params": {"cw_alpha": 0.5},
         "clients": [{"id": 0, "size": 1, "model": [0.0], "cost_history": [2.0, 1.0]},
                     {"id": 1, "size": 3, "model": [1.0], "cost_history": [2.0, 2.0]}],
         "tolerance": 1e-12},
        {"name": "fedpidavg_two_clients", "strategy": "fedpidavg",
         "params": {"alpha": 0.45, "beta": 0.45, "gamma": 0.1, "window": 6},
         "clients": [{"id": 0, "size": 1, "model": [0.0, 1.0],
                      "cost_history": [1.0, 1.0, 1.0, 1.0, 1.0, 0.5]},
                     {"id": 1, "size": 1, "model": [1.0, -1.0],
                      "cost_history": [2.0, 2.0, 2.0, 2.0, 2.0, 2.0]}],
         "tolerance": 1e-12},
        {"name": "fedpidavg_flat_histories", "strategy": "fedpidavg",
         "params": {"alpha": 0.45, "beta": 0.45, "gamma": 0.1, "window": 6},
         "clients": [{"id": 0, "size": 2, "model": [1.0], "cost_history": [3.0, 3.0, 3.0]},
                     {"id": 1, "size": 6, "model": [5.0], "cost_history": [1.0, 1.0, 1.0]}],
         "tolerance": 1e-12},
        {"name": "fedpidavg_round_zero", "strategy": "fedpidavg",
         "clients": [{"id": 0, "size": 2, "model": [1.0], "cost_history": [3.0]}]},
    ]


def main():
    out = Path(sys.argv[1] if len(sys.argv) > 1 else "tests/fixtures")
    out.mkdir(parents=True, exist_ok=True)
    rng = random.Random(2022)
    cases = worked_cases()
    for strategy in ("fedavg", "fedcostwavg", "fedpidavg"):
        cases += [random_case(rng, i, strategy) for i in range(20)]
    for fx in cases:
        fx["expected"] = expected(fx)
    groups = {"worked_examples.json": cases[:5], "random_fedavg.json": cases[5:25],
              "random_fedcostwavg.json": cases[25:45], "random_fedpidavg.json": cases[45:65]}
    for name, group in groups.items():
        (out / name).write_text(json.dumps(group, indent=1) + "\n")


if __name__ == "__main__":
    main()
