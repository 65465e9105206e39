"""Time each kernel under numba and under the numpy fallback.

Each backend runs in its own interpreter because the backend is chosen at
import time. Usage: ``python benchmarks/bench_kernels.py [--repeat N]``.
"""
import argparse
import json
import os
import subprocess
import sys

CHILD = r"""
import json, sys, time, warnings
import numpy as np
from railrescue import backend_name, kernels
from railrescue.builder import build_cmhse, build_lchse, to_binary_program
from railrescue.merge import build_merged_instance
from railrescue.network import Parameters, all_pairs_shortest, load_network_file
from railrescue.solver import _options, solve_bruteforce
from railrescue.synth import random_network

repeat = int(sys.argv[1])
data = sys.argv[2]

def best_of(fn):
    fn()  # warm-up, includes jit compilation
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)

big = random_network(1, 250, extra_edges=120)
sp = all_pairs_shortest(big)
n = len(big.station_ids)
dist0 = np.full((n, n), np.inf)
np.fill_diagonal(dist0, 0.0)
for e in big.edges:
    a, b = big.index[e.a], big.index[e.b]
    dist0[a, b] = dist0[b, a] = e.length_km
excl_args = (np.ascontiguousarray(sp.predecessor),) + big.csr()

net16 = load_network_file(data + "/synthetic16.json")
loc16 = load_network_file(data + "/synthetic16_location.json")
with warnings.catch_warnings():
    warnings.simplefilter("ignore")
    cov = build_cmhse(build_merged_instance(net16), net16)
    loc = build_lchse(build_merged_instance(loc16), loc16)
cov_opts, loc_opts = _options(cov), _options(loc)

small = random_network(3, 7, n_depots=3, parameters=Parameters(network_mileage_km=1e6))
prog = to_binary_program(build_cmhse(build_merged_instance(small), small))

out = {
    "backend": backend_name(),
    "floyd_warshall n=250": best_of(lambda: kernels.floyd_warshall(dist0.copy())),
    "exclusion_max n=250": best_of(lambda: kernels.exclusion_max(*excl_args)),
    "bnb coverage 16x4": best_of(lambda: kernels.bnb_search(*cov_opts, True, 1e-9)),
    "bnb location 16x8": best_of(lambda: kernels.bnb_search(*loc_opts, True, 1e-9)),
    "bruteforce %d vars" % prog.n_vars: best_of(lambda: solve_bruteforce(prog)),
}
print(json.dumps(out))
"""


def run_backend(disable, repeat):
    env = dict(os.environ)
    env.pop("RAILRESCUE_DISABLE_NUMBA", None)
    if disable:
        env["RAILRESCUE_DISABLE_NUMBA"] = "1"
    data = os.path.join(os.path.dirname(os.path.abspath(__file__)), os.pardir, "data")
    res = subprocess.run([sys.executable, "-c", CHILD, str(repeat), os.path.normpath(data)],
                         env=env, capture_output=True, text=True, check=True)
    return json.loads(res.stdout.strip().splitlines()[-1])


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()
    fast = run_backend(False, args.repeat)
    slow = run_backend(True, args.repeat)
    if fast["backend"] != "numba":
        print("numba is not installed; both columns use the fallback")
    print(f"{'kernel':<24}{'numba ms':>12}{'fallback ms':>14}{'speedup':>10}")
    for key in fast:
        if key == "backend":
            continue
        a, b = fast[key] * 1e3, slow[key] * 1e3
        print(f"{key:<24}{a:>12.3f}{b:>14.3f}{b / a:>9.1f}x")


if __name__ == "__main__":
    main()
