"""Block coding trace on Zipf samples.

CSV columns: iter, H_m, H_b, accepted, H_whole.
"""

import argparse
import csv
import sys
import tempfile
from pathlib import Path

from common import run, run_json

parser = argparse.ArgumentParser()
parser.add_argument("--samples", type=int, default=1_000_000)
parser.add_argument("--bits", type=int, default=24)
parser.add_argument("--s", type=float, default=1.4)
parser.add_argument("--blocks", type=int, default=4)
parser.add_argument("--iters", type=int, default=100)
parser.add_argument("--k", type=int, default=8)
parser.add_argument("--seed", type=int, default=1)
args = parser.parse_args()

with tempfile.TemporaryDirectory() as tmp:
    data = Path(tmp) / "zipf.txt"
    trace = Path(tmp) / "trace.csv"
    run(["gen", "zipf", "--bits", str(args.bits), "--s", str(args.s), "--samples", str(args.samples),
         "--seed", str(args.seed), "--out", str(data)])
    r = run_json(["app", "block-coding", "--samples", str(data), "--blocks", str(args.blocks),
                  "--iters", str(args.iters), "--k", str(args.k), "--seed", str(args.seed),
                  "--emit-trace", str(trace)])
    out = csv.writer(sys.stdout)
    out.writerow(["iter", "H_m", "H_b", "accepted", "H_whole"])
    with open(trace) as f:
        for row in csv.DictReader(f):
            out.writerow([row["iter"], row["H_m"], row["H_b"], row["accepted"], r["H_whole"]])
