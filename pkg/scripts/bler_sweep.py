"""BLER of every variant with common random numbers."""

import argparse

from grandlab import sim_harness as sh
from grandlab.metrics import summary_csv


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--config", default=None, help="INI file with a [simulate] section")
    ap.add_argument("--ebn0", default=None)
    ap.add_argument("--frames", type=int, default=None)
    ap.add_argument("--workers", type=int, default=None)
    ap.add_argument("--out", default="bler.csv")
    args = ap.parse_args()
    file_opts = sh.read_config_file(args.config, "simulate") if args.config else {}
    cfg = sh.make_config(file_opts, ebn0=args.ebn0, frames=args.frames, workers=args.workers)
    text = summary_csv(sh.run_sweep(cfg))
    with open(args.out, "w") as fh:
        fh.write(text)
    print(text, end="")


if __name__ == "__main__":
    main()
