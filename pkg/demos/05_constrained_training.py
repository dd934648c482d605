"""Constrained-training walkthrough: a shortened desk-scale run of one
algorithm, its greedy evaluation, and a comparison against the SPF baseline.

The full desk protocol (three seeds, all algorithms, six training epochs) is
what tests/test_acceptance.py runs; this demo trims it to a couple of
minutes. Pass an algorithm name to switch:

Run:  python3 demos/05_constrained_training.py [primal-avg|primal-cvar|madqn]
"""

import sys
from dataclasses import replace

from leoroute.harness import compare, run_eval, run_train
from leoroute.scenario import desk_scenario

algo = sys.argv[1] if len(sys.argv) > 1 else "primal-avg"
scenario = desk_scenario()
scenario = replace(scenario, run=replace(scenario.run, epochs=2))

print(f"training {algo} for {scenario.run.epochs} epochs of "
      f"{scenario.run.epoch_s:.0f}s (one gradient step every "
      f"{1e3 * scenario.run.train_interval_s:.0f} ms)...")
result = run_train(scenario, algo, seed=1)
for row in result.diagnostics[::3]:
    print(f"  epoch {row['epoch']} t={row['t_s']:5.1f}s "
          f"drop={row['drop_rate']:.3f} queue={1e3 * row['mean_queue_s']:7.2f} ms "
          f"lambda={row.get('lambda', [0.0])[0]:.3f} "
          f"alpha={row.get('alpha', 0.0):.3f} H={row.get('entropy', 0.0):.3f}")

print("\ngreedy evaluation vs the SPF baseline (seed 101):")
learned = run_eval(None, result, seeds=[101])
spf = run_eval(scenario, "spf", seeds=[101])
table = compare([{"algo": algo, **learned.aggregate.to_dict()},
                 {"algo": "spf", **spf.aggregate.to_dict()}])
print(table)
print("\n(a longer run drives the drop rate below 1%; see the acceptance suite)")
