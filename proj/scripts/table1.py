"""Block coding against a naive partition search for several block counts.

CSV columns: B, block_bits, naive_H_b, naive_total, H_b_min, best_I0, best_total, single_block_cost.
"""

import argparse
import csv
import math
import sys
import tempfile
from pathlib import Path

from common import run, run_json

parser = argparse.ArgumentParser()
parser.add_argument("--samples", type=int, default=1_000_000)
parser.add_argument("--bits", type=int, default=24)
parser.add_argument("--s", type=float, default=1.4)
parser.add_argument("--blocks", type=int, nargs="+", default=[3, 4, 6])
parser.add_argument("--iters", type=int, default=100)
parser.add_argument("--k", type=int, default=8)
parser.add_argument("--naive-trials", type=int, default=1000)
parser.add_argument("--seed", type=int, default=1)
args = parser.parse_args()

out = csv.writer(sys.stdout)
out.writerow(["B", "block_bits", "naive_H_b", "naive_total", "H_b_min", "best_I0", "best_total", "single_block_cost"])
with tempfile.TemporaryDirectory() as tmp:
    data = Path(tmp) / "zipf.txt"
    run(["gen", "zipf", "--bits", str(args.bits), "--s", str(args.s), "--samples", str(args.samples),
         "--seed", str(args.seed), "--out", str(data)])
    for B in args.blocks:
        r = run_json(["app", "block-coding", "--samples", str(data), "--blocks", str(B), "--iters", str(args.iters),
                      "--k", str(args.k), "--seed", str(args.seed), "--naive-trials", str(args.naive_trials)])
        b = args.bits // B
        N = r["N"]
        naive_total = N * r["naive_best"] + B * (2**b - 1) / 2 * math.log2(N / 2**b)
        out.writerow([B, b, r["naive_best"], naive_total, r["H_b_min"], r["best_I0"], r["best_total_cost"],
                      r["single_block_cost"]])
