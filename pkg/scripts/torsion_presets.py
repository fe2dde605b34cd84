"""Classify every torsion preset and run the generator-sequence adversaries."""
import argparse

from transdiff.ring import monomial, var
from transdiff.torsion import PRESETS, STRATEGIES, adversary, classify_module, quite_rank, strong_level


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--length", type=int, default=16, help="adversary sequence length")
    args = ap.parse_args()
    for name, setup in PRESETS.items():
        print(f"{name}: {classify_module(setup).summary()}")
        for i in range(1, 5):
            m = monomial({var(i): 1})
            try:
                print(f"  x{i}: rank {quite_rank(m, setup)}, level {strong_level(m, setup)}")
            except ValueError as exc:
                print(f"  x{i}: {type(exc).__name__}")
        for strategy in STRATEGIES:
            moves, dead = adversary(setup, (), strategy, args.length)
            outcome = f"zero after {len(moves)} moves" if dead else f"alive after {len(moves)} moves"
            print(f"  adversary {strategy}: {outcome}")


if __name__ == "__main__":
    main()
