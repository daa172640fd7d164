"""Mean exact vs estimated reverse pairs for CDF-ORBGRAND with fine-tuning."""

import argparse

from grandlab import sim_harness as sh
from grandlab.metrics import write_rows


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--ebn0", default="4,5,6,7")
    ap.add_argument("--samples", type=int, default=10_000)
    ap.add_argument("--d", type=int, default=1)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", default="inversions.csv")
    args = ap.parse_args()
    ebn0 = [float(x) for x in args.ebn0.split(",")]
    rows = sh.run_inversion_validation(ebn0, args.samples, args.d, args.seed)
    print(write_rows(rows, sh.INVERSION_COLUMNS, args.out), end="")


if __name__ == "__main__":
    main()
