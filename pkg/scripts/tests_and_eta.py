"""Mean tests, mean eta and adjustment loops per variant across Eb/N0."""

import argparse

from grandlab import sim_harness as sh
from grandlab.metrics import summary_csv


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--ebn0", default="4,5,6,7")
    ap.add_argument("--frames", type=int, default=20_000)
    ap.add_argument("--eta-every", type=int, default=30)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", default="tests_eta.csv")
    args = ap.parse_args()
    cfg = sh.make_config(variants="orb,cdf,ft-cdf,sgrand", ebn0=args.ebn0, frames=args.frames,
                         eta_every=args.eta_every, workers=args.workers, seed=args.seed, timing=True)
    text = summary_csv(sh.run_sweep(cfg))
    with open(args.out, "w") as fh:
        fh.write(text)
    print(text, end="")


if __name__ == "__main__":
    main()
