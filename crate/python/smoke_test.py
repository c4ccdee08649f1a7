"""Smoke test for the fracbound_py extension.

Build first:  pip install --no-build-isolation -e crates/py
Run:          python python/smoke_test.py
"""

import math

import fracbound_py as fb

SQRT2 = math.sqrt(2.0)


def check(name, ok, detail=""):
    print(f"[{'PASS' if ok else 'FAIL'}] {name} {detail}")
    return ok


def main():
    results = []

    g, branch = fb.greens_eval(1.0, 2.0)
    results.append(check("alpha=2 closed form", abs(g - math.exp(-1) / 2) < 1e-15 and branch == "closed"))

    small, _ = fb.greens_eval(1.0, SQRT2)
    results.append(check("series vs frozen oracle", abs(small - 0.1444066014988204528) < 1e-13, f"{small:.16e}"))

    oracle = fb.greens_oracle(1.0, SQRT2)
    results.append(check("oracle", abs(oracle / small - 1) < 1e-10))

    sing, const, reg = fb.greens_decompose(0.7, SQRT2, 1.0, 0.3)
    full, _ = fb.greens_eval(0.7, SQRT2, 1.0, 0.3)
    results.append(check("decomposition", abs((sing + const + reg) / full - 1) < 1e-12))

    results.append(check("resonance", fb.resonance_check(1.5) and not fb.resonance_check(SQRT2)))

    err = abs(fb.mellin_exp_partial_sum(2.0, SQRT2) - math.exp(-(2.0 ** SQRT2)))
    results.append(check("mellin sum", err < 1e-12, f"{err:.2e}"))

    full_m, fin_m, sing_m, lam = fb.kernel("gaussian:1:1", SQRT2, kappa=0.2, n=41)
    symmetric = all(abs(full_m[i][j] - full_m[j][i]) < 1e-14 for i in range(41) for j in range(41))
    results.append(check("kernel", symmetric and lam > 0))

    solver = fb.GroundStateSolver("gaussian:1:1", SQRT2)
    sol = solver.solve(0.05)
    dual = solver.kappa_full_kernel(0.05)
    results.append(check("dual route", abs(dual / sol["kappa_star"] - 1) < 1e-6))
    results.append(check("E = kappa^2", sol["E"] == sol["kappa_star"] ** 2))

    first, second, total = fb.weak_coupling_expansion(0.01, "gaussian:1:1", SQRT2)
    results.append(check("g^2 term negative", second < 0 < first))

    try:
        fb.GroundStateSolver("gaussian:1:1", 2.5)
        results.append(check("alpha range rejected", False))
    except ValueError:
        results.append(check("alpha range rejected", True))

    reports = fb.validate(["series"])
    results.append(check("validate series", len(reports) == 1 and reports[0][2]))

    failed = results.count(False)
    print(f"{len(results) - failed} passed, {failed} failed")
    raise SystemExit(1 if failed else 0)


if __name__ == "__main__":
    main()
