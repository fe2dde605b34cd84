"""Build D_alpha for a list of ordinals and report certified orders and probes."""
import argparse
import time

from transdiff.construct import build_D, tree_depth, verify_order_probes
from transdiff.ordinal import parse_ordinal
from transdiff.order import ordinal_order

DEFAULT = ["0", "1", "2", "w", "w + 3", "w*2", "w^2", "w^2 + w + 1", "w^3", "w^w", "w^(w+1) + w^2*3"]


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("ordinals", nargs="*", default=DEFAULT)
    ap.add_argument("--budget", type=int, default=6, help="number of probes per node")
    args = ap.parse_args()
    print(f"{'alpha':>18s}  {'order':>26s}  {'depth':>5s}  {'probes':>10s}  {'ms':>8s}")
    for text in args.ordinals:
        a = parse_ordinal(text)
        t0 = time.perf_counter()
        D = build_D(a)
        v = ordinal_order(D)
        probes = verify_order_probes(D, a, args.budget)
        ms = (time.perf_counter() - t0) * 1000
        print(f"{text:>18s}  {str(v):>26s}  {tree_depth(D):5d}  {str(probes)[:10]:>10s}  {ms:8.1f}")


if __name__ == "__main__":
    main()
