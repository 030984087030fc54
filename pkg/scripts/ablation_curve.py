"""Training-size curve on planted synthetic data.

Fits a map on growing prefixes of one synthetic training set and writes
one CSV row per (noise level, pair count) for plotting.

    python3 scripts/ablation_curve.py --d 64 --noise 0,0.05,0.2 --out curve.csv
"""
import argparse
import csv
import sys

from clbt.evaluation import SynthSpec, ablate, fmt, generate_synthetic
from clbt.fit import METHODS, FitConfig


def floats(text):
    return [float(x) for x in text.split(",")]


def ints(text):
    return [int(x) for x in text.split(",")]


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--d", type=int, default=64)
    p.add_argument("--noise", type=floats, default=[0.0, 0.05, 0.2])
    p.add_argument("--counts", type=ints, default=[25, 50, 100, 500, 1000, 5000, 10000])
    p.add_argument("--n-test", type=int, default=1000)
    p.add_argument("--method", choices=METHODS, default="svd")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="-")
    args = p.parse_args(argv)

    out = sys.stdout if args.out == "-" else open(args.out, "w", newline="")
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["noise_sigma", "pair_count", "p_at_1", "p_at_10", "test_objective"])
    config = FitConfig(method=args.method, seed=args.seed)
    for sigma in args.noise:
        spec = SynthSpec(n=max(args.counts), d=args.d, noise_sigma=sigma, seed=args.seed, n_test=args.n_test)
        train, test, _ = generate_synthetic(spec)
        for row in ablate(train, args.counts, config, test).rows:
            p = row.report.precision_at_k
            writer.writerow([fmt(sigma), row.pair_count, fmt(p[1]), fmt(p[10]), fmt(row.test_objective)])
            out.flush()
    if out is not sys.stdout:
        out.close()


if __name__ == "__main__":
    main()
