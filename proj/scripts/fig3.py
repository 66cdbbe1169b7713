"""Relaxation curve on scrambled 10-component products.

CSV columns: seed, k, ub_value, true_objective, joint_entropy.
"""

import argparse
import csv
import sys
import tempfile
from pathlib import Path

from common import run

parser = argparse.ArgumentParser()
parser.add_argument("--n", type=int, default=10)
parser.add_argument("--max-k", type=int, default=10)
parser.add_argument("--seeds", type=int, default=20)
args = parser.parse_args()

out = csv.writer(sys.stdout)
out.writerow(["seed", "k", "ub_value", "true_objective", "joint_entropy"])
with tempfile.TemporaryDirectory() as tmp:
    curve = Path(tmp) / "curve.csv"
    for seed in range(1, args.seeds + 1):
        joint = run(["gen", "scrambled-product", "--n", str(args.n), "--seed", str(seed)])
        run(["solve", "plr", "--k", str(args.max_k), "--emit-curve", str(curve)], stdin=joint)
        with open(curve) as f:
            for row in csv.DictReader(f):
                out.writerow([seed, row["k"], row["ub_value"], row["true_objective"], row["joint_entropy"]])
