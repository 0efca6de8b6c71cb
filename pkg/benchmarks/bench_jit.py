"""Compare the compiled kernels against the pure-python fallbacks.

The backend is chosen at import time from IWLINDLEY_DISABLE_JIT, so the
comparison needs two interpreter processes.  Run without arguments to get
the side-by-side table; ``--worker`` is the internal single-backend mode.

    python3 benchmarks/bench_jit.py

Timings are medians over repeated calls, taken after a warmup pass so the
compiled numbers exclude compilation.  Both backends produce bit-identical
results; the table is about speed only.
"""

import argparse
import json
import os
import statistics
import subprocess
import sys
import time


def _time(fn, repeats):
    out = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        out.append(time.perf_counter() - t0)
    return statistics.median(out)


def run_worker():
    import numpy as np

    import iwlindley as iwl
    from iwlindley import _accel

    th = iwl.IwlParams(2.0, 4.0)
    rng = np.random.default_rng(42)

    big = iwl.sample(th, 10**5, np.random.default_rng(1))
    complete = iwl.LifetimeData.complete(iwl.sample(th, 500, np.random.default_rng(2)))
    cens = iwl.gen_censored_sample(th, 500, 0.3, np.random.default_rng(3))
    boot_data = iwl.LifetimeData.complete(iwl.sample(th, 100, np.random.default_rng(4)))

    # warmup: touch every kernel once before timing
    iwl.sample(th, 1000, rng)
    iwl.fit_mle(complete)
    iwl.fit_mle_censored(cens)
    iwl.loglik_censored(th, cens)

    cfg = iwl.ExperimentConfig(
        theta_true=iwl.IwlParams(0.5, 2.0), n_grid=(50,), reps=200,
        methods=("MLE", "CMLE"), master_seed=11)

    results = {
        "sample n=1e5": _time(lambda: iwl.sample(th, 10**5, rng), 7),
        "cdf n=1e5": _time(lambda: iwl.cdf(th, big), 7),
        "loglik_censored n=500": _time(lambda: iwl.loglik_censored(th, cens), 30),
        "fit_mle n=500": _time(lambda: iwl.fit_mle(complete), 7),
        "fit_mle_censored n=500": _time(lambda: iwl.fit_mle_censored(cens), 7),
        "fit_boot n=100 B=200": _time(
            lambda: iwl.fit_boot(boot_data, B=200, rng=np.random.default_rng(9)), 3),
        "experiment 200x(MLE+CMLE)": _time(lambda: iwl.run_experiment(cfg), 3),
    }
    json.dump({"backend": "numba" if _accel.JIT_ENABLED else "python", "timings": results}, sys.stdout)


def run_compare():
    here = os.path.abspath(__file__)
    reports = {}
    for label, disable in (("jit", "0"), ("fallback", "1")):
        env = dict(os.environ, IWLINDLEY_DISABLE_JIT=disable)
        proc = subprocess.run(
            [sys.executable, here, "--worker"],
            env=env, capture_output=True, text=True, check=True)
        reports[label] = json.loads(proc.stdout)
        print(f"{label}: backend={reports[label]['backend']}", file=sys.stderr)

    jit = reports["jit"]["timings"]
    fb = reports["fallback"]["timings"]
    width = max(len(k) for k in jit)
    print(f"{'operation':<{width}}  {'jit':>10}  {'fallback':>10}  {'speedup':>8}")
    for k in jit:
        ratio = fb[k] / jit[k]
        print(f"{k:<{width}}  {jit[k] * 1e3:>8.2f}ms  {fb[k] * 1e3:>8.2f}ms  {ratio:>7.1f}x")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--worker", action="store_true",
                    help="time the current backend and emit JSON (internal)")
    args = ap.parse_args()
    if args.worker:
        run_worker()
    else:
        run_compare()


if __name__ == "__main__":
    main()
