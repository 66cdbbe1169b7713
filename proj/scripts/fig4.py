"""Objective descent on scrambled products of i.i.d. q-ary components.

CSV columns: n, seed, joint_entropy, sum_marginals_initial, sum_marginals_final.
"""

import argparse
import csv
import itertools
import json
import random
import sys

from common import run_json

parser = argparse.ArgumentParser()
parser.add_argument("--q", type=int, default=4)
parser.add_argument("--min-n", type=int, default=2)
parser.add_argument("--max-n", type=int, default=6)
parser.add_argument("--k", type=int, default=8)
parser.add_argument("--inits", type=int, default=1000)
parser.add_argument("--seeds", type=int, default=5)
args = parser.parse_args()


def scrambled_iid(n, q, seed):
    rng = random.Random(seed)
    weights = [rng.expovariate(1.0) for _ in range(q)]
    total = sum(weights)
    law = [w / total for w in weights]
    # Word index is sum of digit_i * q^i; component 0 is the low digit.
    probs = []
    for digits in itertools.product(range(q), repeat=n):
        p = 1.0
        for d in digits:
            p *= law[d]
        probs.append(p)
    order = list(range(len(probs)))
    rng.shuffle(order)
    return json.dumps({"n": n, "q": q, "probs": [probs[i] for i in order]})


out = csv.writer(sys.stdout)
out.writerow(["n", "seed", "joint_entropy", "sum_marginals_initial", "sum_marginals_final"])
for n in range(args.min_n, args.max_n + 1):
    for seed in range(1, args.seeds + 1):
        result = run_json(
            ["solve", "qary", "--renormalize", "--k", str(args.k), "--inits", str(args.inits), "--seed", str(seed)],
            stdin=scrambled_iid(n, args.q, seed),
        )
        r = result["report"]
        out.writerow([n, seed, r["joint_entropy"], r["sum_marginals_initial"], r["sum_marginals_final"]])
