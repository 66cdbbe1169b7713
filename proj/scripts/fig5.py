"""Modular mixture separation over alphabet sizes.

CSV columns: q, method, joint_entropy, sum_marginals_input, sum_marginals_found, gap.
"""

import argparse
import csv
import sys

from common import run_json

parser = argparse.ArgumentParser()
parser.add_argument("--s", type=float, default=1.6)
parser.add_argument("--max-q", type=int, default=8)
parser.add_argument("--k", type=int, default=8)
parser.add_argument("--inits", type=int, default=100)
parser.add_argument("--seed", type=int, default=1)
args = parser.parse_args()

out = csv.writer(sys.stdout)
out.writerow(["q", "method", "joint_entropy", "sum_marginals_input", "sum_marginals_found", "gap"])
for q in range(2, args.max_q + 1):
    for method in ("exhaustive", "descent"):
        r = run_json(["app", "bss", "--q", str(q), "--s", str(args.s), "--k", str(args.k), "--method", method,
                      "--inits", str(args.inits), "--seed", str(args.seed)])
        out.writerow([q, method, r["joint_entropy"], r["sum_marginals_input"], r["sum_marginals_found"], r["gap"]])
