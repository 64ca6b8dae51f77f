"""Smoke test for the `rough_laplace` Python extension.

Build the extension first:

    cargo build --release -p rough-laplace-py --features extension-module

The script loads `target/release/librough_laplace_py.so` directly, or the
path in `ROUGH_LAPLACE_LIB` if set.
"""

import importlib.machinery
import importlib.util
import json
import math
import os
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent


def load():
    candidates = [os.environ.get("ROUGH_LAPLACE_LIB")] + [
        str(ROOT / "target" / profile / "librough_laplace_py.so") for profile in ("release", "debug")
    ]
    for path in filter(None, candidates):
        if Path(path).exists():
            loader = importlib.machinery.ExtensionFileLoader("rough_laplace", path)
            spec = importlib.util.spec_from_loader("rough_laplace", loader)
            module = importlib.util.module_from_spec(spec)
            loader.exec_module(module)
            return module
    sys.exit("extension not found; build it with --features extension-module")


def close(a, b, tol):
    return abs(a - b) <= tol * max(1.0, abs(b))


def main():
    rl = load()
    checks = []

    params = rl.HurstParams(0.4)
    checks.append(("default exponents", close(1 / params.p, 0.36, 1e-12) and close(1 / params.q, 0.88, 1e-12)))
    try:
        rl.HurstParams(0.6)
        checks.append(("hurst outside (1/4, 1/2) rejected", False))
    except ValueError:
        checks.append(("hurst outside (1/4, 1/2) rejected", True))

    # cos(nπt) sampled at its extrema has 2-variation norm (n·2²)^{1/2}.
    n = 5
    times = [k / n for k in range(n + 1)]
    cosine = rl.Path(times, [[math.cos(n * math.pi * t)] for t in times])
    value, partition = cosine.pvar(2.0)
    checks.append(("p-variation of a cosine", close(value, 2 * math.sqrt(n), 1e-12) and partition == list(range(n + 1))))

    x = rl.sample_fbm(64, 0.4, 2, seed=7)
    y = rl.sample_fbm(64, 0.4, 2, seed=7)
    checks.append(("seeded sampling is reproducible", x.values == y.values and len(x) == 65 and x.dim == 2))

    lifted = rl.lift(x, 2)
    checks.append(("Chen identity", lifted.chen_residual() < 1e-8))
    checks.append(("first level matches increments", close(lifted.x1(0, 64)[0], x.values[64][0] - x.values[0][0], 1e-12)))

    field = json.dumps({"kind": "tanh_standard"})
    sol = rl.solve_ode(field, x, [0.1, -0.1])
    checks.append(("ODE solution shape", len(sol) == 65 and sol.dim == 2))

    ladder = [v for v, _, _ in rl.kappa_ladder(0.4, 9)]
    checks.append(("kappa ladder", all(close(a, b, 1e-12) for a, b in zip(ladder, [0, 1, 2, 2.5, 3, 3.5, 4, 4.5, 5]))))

    eig = [0.3, -0.1, 0.05]
    exact = math.exp(-0.5 * rl.log_det2(eig, 2.0))
    mean, se = rl.det2_mc(eig, 20000, 3)
    checks.append(("det2 Monte Carlo within 4 SE", abs(mean - exact) < 4 * se))

    constant = json.dumps({"kind": "constant", "n": 2, "d": 2, "s": [1, 0, 0, 1]})
    f = json.dumps({"kind": "endpoint_quadratic", "v": [0.5, 0.2], "q": [0.8, 0.2, 0.2, 0.4]})
    g = json.dumps({"kind": "constant", "value": 1.0})
    matrix, eigenvalues = rl.hessian(constant, f, [0.0, 0.0], [0.0] * 4, grid_steps=32)
    symmetric = all(close(matrix[i][j], matrix[j][i], 1e-10) for i in range(4) for j in range(4))
    checks.append(("Hessian symmetric with sorted spectrum", symmetric and eigenvalues == sorted(eigenvalues)))

    report = rl.laplace(constant, f, g, [0.0, 0.0], [0.5, 0.35, 0.25], grid_steps=32, truncation=4, samples=2000, seed=1)
    checks.append(("Laplace report", report["first_order_residual"] < 1e-6 and report["alpha0"] > 0 and len(report["mc"]) == 3))

    width = max(len(name) for name, _ in checks)
    for name, ok in checks:
        print(f"{'PASS' if ok else 'FAIL'}  {name:<{width}}")
    failed = sum(not ok for _, ok in checks)
    print(f"{len(checks) - failed}/{len(checks)} checks passed")
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
