"""Benchmark the compiled slot kernel against the numpy fallback.

Two measurements: kernel-only throughput on pre-generated uniforms (pure
inner-loop cost, no RNG), and end-to-end run_simulation wall time
(includes RNG, reduction, and the test-subset draw).  Both backends are
also checked for bit-identical output on the benchmark workload, which
is the property that lets the package pick a backend silently.

Usage:
    python benchmarks/bench_backends.py [--slots N] [--repeats R] [--seed S]
"""

import argparse
import time

import numpy as np

from tfqss import ChannelParams, SimConfig, SourceParams
from tfqss.simulator import compiled_kernel_available, run_simulation
from tfqss import _slotkernel_np

CHANNEL = ChannelParams(l_a=50.0, l_b=50.0)
SOURCE = SourceParams(mu_a=0.05, mu_b=0.05)
CHUNK = 1 << 20


def best_of(repeats, fn):
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def bench_kernel(kernel, blocks, q_correct, q_wrong, e_d, repeats):
    def run():
        for slot0, u in blocks:
            kernel(u, q_correct, q_wrong, e_d, slot0)
    return best_of(repeats, run)


def detections_equal(a, b):
    fields = ("slot", "detector", "double", "alice", "bob", "charlie",
              "test_index")
    return all(np.array_equal(getattr(a, f), getattr(b, f)) for f in fields)


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--slots", type=int, default=4 * CHUNK,
                        help="slots per measurement (default 4 chunks)")
    parser.add_argument("--repeats", type=int, default=5,
                        help="repetitions; best time is reported")
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args(argv)

    if not compiled_kernel_available():
        parser.error("compiled kernel is not built; nothing to compare")
    from tfqss import _slotkernel

    # Same click probabilities run_simulation would derive.
    from tfqss.model import _click_values, _port_values
    d_corr, d_wrong = _port_values(SOURCE.mu_a * CHANNEL.eta_a,
                                   SOURCE.mu_b * CHANNEL.eta_b, 1.0)
    q_correct = float(_click_values(d_corr, CHANNEL.p_d))
    q_wrong = float(_click_values(d_wrong, CHANNEL.p_d))

    rng = np.random.default_rng(args.seed)
    blocks = []
    start = 0
    while start < args.slots:
        size = min(CHUNK, args.slots - start)
        blocks.append((start, rng.random((6, size))))
        start += size

    n = sum(u.shape[1] for _, u in blocks)
    print(f"kernel-only, {n} slots, best of {args.repeats}:")
    results = {}
    for name, kernel in (("compiled", _slotkernel.simulate_chunk),
                         ("numpy", _slotkernel_np.simulate_chunk)):
        dt = bench_kernel(kernel, blocks, q_correct, q_wrong, CHANNEL.e_d,
                          args.repeats)
        results[name] = dt
        print(f"  {name:9s} {dt * 1e3:8.1f} ms   {n / dt / 1e6:7.1f} Mslot/s")
    print(f"  speedup   {results['numpy'] / results['compiled']:.2f}x")

    cfg = SimConfig(channel=CHANNEL, source=SOURCE, n_slots=args.slots,
                    rng_seed=args.seed, backend="compiled")
    print(f"end-to-end run_simulation, {args.slots} slots, "
          f"best of {args.repeats}:")
    end_results = {}
    for name in ("compiled", "numpy"):
        c = SimConfig(channel=CHANNEL, source=SOURCE, n_slots=args.slots,
                      rng_seed=args.seed, backend=name)
        dt = best_of(args.repeats, lambda c=c: run_simulation(c))
        end_results[name] = dt
        print(f"  {name:9s} {dt * 1e3:8.1f} ms")
    print(f"  speedup   {end_results['numpy'] / end_results['compiled']:.2f}x")

    a = run_simulation(cfg, keep_detections=True)
    b = run_simulation(SimConfig(channel=CHANNEL, source=SOURCE,
                                 n_slots=args.slots, rng_seed=args.seed,
                                 backend="numpy"), keep_detections=True)
    same = a.tally == b.tally and detections_equal(a.detections, b.detections)
    print(f"outputs bit-identical: {'yes' if same else 'NO'}")
    return 0 if same else 1


if __name__ == "__main__":
    raise SystemExit(main())
