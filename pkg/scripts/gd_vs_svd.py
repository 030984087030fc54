"""Compare the three solvers on seeded planted instances.

For each seed prints objective and wall time of the orthogonal fit, the
Adam fit and the closed-form least squares fit, plus the Adam epoch count.
"""
import argparse
import time

from clbt.evaluation import SynthSpec, evaluate, generate_synthetic
from clbt.fit import FitConfig, fit


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--d", type=int, default=32)
    p.add_argument("--n", type=int, default=2000)
    p.add_argument("--noise", type=float, default=0.05)
    p.add_argument("--planted", choices=("orthogonal", "linear"), default="orthogonal")
    p.add_argument("--seeds", type=int, default=5)
    p.add_argument("--epochs", type=int, default=5000)
    args = p.parse_args(argv)

    print(f"{'seed':>4} {'method':>6} {'objective':>12} {'P@1':>6} {'seconds':>8} {'epochs':>6}")
    for seed in range(args.seeds):
        spec = SynthSpec(n=args.n, d=args.d, noise_sigma=args.noise, seed=seed, planted=args.planted)
        train, test, _ = generate_synthetic(spec)
        for method in ("svd", "gd", "lsq"):
            started = time.perf_counter()
            w, trace = fit(train, FitConfig(method=method, max_epochs=args.epochs, seed=seed))
            seconds = time.perf_counter() - started
            p1 = evaluate(w, test).precision_at_k[1]
            epochs = trace.epochs if trace else "-"
            print(f"{seed:>4} {method:>6} {w.objective:>12.6g} {p1:>6.3f} {seconds:>8.3f} {epochs:>6}")


if __name__ == "__main__":
    main()
