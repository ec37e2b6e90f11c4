"""Gate counts of the decomposed program over path count n and iteration count K.

Every weight is 1, so every path is selected each iteration and the per-iteration cost is
the worst case.  Prints the fitted count = K*c1 + c0 per n.
"""
import argparse

from qaco.cli import BENCH_HEADER, bench_rows


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--d", type=int, default=4)
    ap.add_argument("--n", default="2,4,8,16")
    ap.add_argument("--k", default="1,2,4,8")
    args = ap.parse_args()
    ns = [int(v) for v in args.n.split(",")]
    ks = [int(v) for v in args.k.split(",")]
    rows = bench_rows(args.d, ns, ks)
    print(",".join(BENCH_HEADER))
    for r in rows:
        print(",".join(map(str, r)))
    for n in ns:
        r = next(r for r in rows if r[0] == n)
        exact = all(row[-1] for row in rows if row[0] == n)
        print(f"n={n}: count = {r[5]}*K + {r[6]} ({'exact' if exact else 'NOT linear'})")


if __name__ == "__main__":
    main()
