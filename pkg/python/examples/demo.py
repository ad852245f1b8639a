#!/usr/bin/env python3
"""
conflab examples: a tour of the library

This script walks the one-review worked example through the closed forms,
the Markov-chain oracle, the pricing optimizers and a short simulation, then
sweeps the display size on the limited-attention family.
"""

import sys
import time
from dataclasses import replace
from pathlib import Path


def check_imports():
    """Import the conflab package and handle import errors"""
    try:
        import conflab

        version = getattr(conflab, "__version__", "unknown")
        print(f"[OK] Imported conflab (version: {version})")
        return conflab
    except ImportError as e:
        print(f"[FAIL] Error importing conflab: {e}")
        print("INFO: Install the package first, e.g. pip install -e .")
        sys.exit(1)


def setup_file_paths():
    """Locate the sample documents"""
    data_dir = Path("data")
    worked = data_dir / "worked_example.json"
    if not worked.exists():
        print(f"Sample document not found: {worked}")
        print("Run this script from the repository root.")
        sys.exit(1)
    return data_dir, worked


def demonstrate_closed_forms(inst):
    """Revenues and CoNF at price 1"""
    from conflab import conf_static, stationary_newest_counts

    print("\n1. Closed-form revenues at p = 1")
    print("--------------------------------")
    report = conf_static(inst, 1.0)
    print(f"  Random revenue:       {report.rev_random:.6f}")
    print(f"  Newest-First revenue: {report.rev_newest:.6f}")
    print(f"  CoNF chi:             {report.chi:.6f} (beta = {report.beta:.3f})")
    law = stationary_newest_counts(inst, 1.0)
    print(f"  Newest-First positive-count law: {[round(x, 6) for x in law]}")


def demonstrate_chain_oracle(inst):
    """Compare the closed form against the explicit Markov chain"""
    from conflab import Static, markov, rev_newest_static

    print("\n2. Markov-chain oracle")
    print("----------------------")
    wide = inst.with_(c=3)
    chain = markov.build_newest_chain(wide, Static(1.0))
    start = time.time()
    dist = markov.stationary_solve(chain)
    elapsed = time.time() - start
    q = markov.state_purchase_probs(wide, Static(1.0))
    chain_revenue = float(dist.probs @ q)
    exact = rev_newest_static(wide, 1.0)
    print(f"  {chain.size} states solved in {elapsed:.6f} seconds")
    print(f"  chain revenue {chain_revenue:.9f} vs closed form {exact:.9f}")


def demonstrate_pricing(inst):
    """Optimal static and dynamic prices"""
    from conflab import (
        Ordering,
        conf_class,
        optimal_dynamic_newest,
        optimal_dynamic_random,
        optimal_static,
    )

    print("\n3. Optimal prices")
    print("-----------------")
    for ordering in Ordering:
        best = optimal_static(inst, ordering)
        print(
            f"  static {ordering.value:>6}: p = {best.policy.p:.6f}, "
            f"revenue {best.revenue:.6f}"
        )
    newest = optimal_dynamic_newest(inst)
    random = optimal_dynamic_random(inst)
    print(f"  dynamic newest prices: {[round(p, 6) for p in newest.policy.prices]}")
    print(f"  dynamic random prices: {[round(p, 6) for p in random.policy.prices]}")
    for cls in ("static", "dynamic"):
        print(f"  CoNF of {cls} pricing: {conf_class(inst, cls).chi:.6f}")


def demonstrate_simulation(conflab, worked):
    """A short seeded simulation of both orderings"""
    from conflab.config import load_document, parse_simulation

    print("\n4. Simulation (20000 rounds, 4 replications)")
    print("--------------------------------------------")
    config = parse_simulation(load_document(worked), rounds=20_000, replications=4)
    for kind in ("newest", "random_iid"):
        start = time.time()
        result = conflab.run(replace(config, ordering=conflab.SimOrdering(kind)))
        elapsed = time.time() - start
        print(
            f"  {kind:>10}: {result.avg_revenue_per_round:.4f} "
            f"+/- {result.stderr:.4f} ({elapsed:.2f} s)"
        )


def demonstrate_sweep(data_dir):
    """Newest-First revenue as the display grows"""
    from conflab.config import ExperimentSpec, load_document
    from conflab.experiments import run_sweep

    print("\n5. Display-size sweep")
    print("---------------------")
    doc = load_document(data_dir / "limited_attention.json")
    values = (1.0, 2.0, 5.0, 10.0, 20.0, 50.0)
    frame = run_sweep(ExperimentSpec("demo", "sweep", doc, "c", values))
    print(frame[["c", "rev_random", "rev_newest", "chi"]].to_string(index=False))


def main():
    """Run the examples"""
    print("conflab - Examples")
    print("==================\n")

    conflab = check_imports()
    data_dir, worked = setup_file_paths()

    from conflab.config import load_document, parse_instance

    inst = parse_instance(load_document(worked)["instance"])
    print(f"Worked example: {inst.to_record()}")

    demonstrate_closed_forms(inst)
    demonstrate_chain_oracle(inst)
    demonstrate_pricing(inst)
    demonstrate_simulation(conflab, worked)
    demonstrate_sweep(data_dir)

    print("\n[OK] conflab examples completed successfully!")
    print("\nNext steps:")
    print("- Edit the documents under data/ and rerun them with the conflab command")
    print("- Try conflab verify --config data/worked_example.json")


if __name__ == "__main__":
    main()
