#!/usr/bin/env python3
"""
Example demonstrating logging with conflab.

The library logs under the "conflab" logger and installs only a NullHandler,
so nothing is printed until the application configures logging.
"""

import logging


def setup_logging(level=logging.INFO):
    """Configure logging with a nice format."""
    logging.basicConfig(
        level=level,
        format="%(asctime)s [%(name)s] %(levelname)s: %(message)s",
        datefmt="%Y-%m-%d %H:%M:%S",
    )

    logger = logging.getLogger("conflab")
    logger.setLevel(level)

    return logger


def main():
    print("conflab Logging Example")
    print("=" * 50)

    logger = setup_logging(logging.INFO)
    logger.info("Starting conflab logging example")

    try:
        from conflab import BetaMean, Instance, Ordering, Uniform, optimal_static
        from conflab.config import ExperimentSpec
        from conflab.experiments import run_sweep

        inst = Instance(0.5, Uniform(0.0, 1.0), 1, BetaMean(1.0, 1.0))

        # Optimizers report their result at INFO
        print("\n1. Optimal static price...")
        best = optimal_static(inst, Ordering.RANDOM)
        print(f"   p = {best.policy.p:.4f}, revenue {best.revenue:.4f}")

        # An absorbing price leaves empty columns and logs a WARNING
        print("\n2. Sweeping prices past the absorbing threshold...")
        doc = {"instance": inst.to_record(), "price": 1.0}
        frame = run_sweep(ExperimentSpec("prices", "sweep", doc, "price", (1.0, 1.5)))
        print(frame[["price", "chi"]].to_string(index=False))

        # DEBUG adds per-point and per-chain detail
        print("\n3. Enabling DEBUG logging for more detailed output...")
        logging.getLogger("conflab").setLevel(logging.DEBUG)
        print("   Notice the DEBUG messages below:")
        run_sweep(ExperimentSpec("display", "sweep", doc, "c", (1.0, 2.0)))

        logger.info("conflab logging example completed successfully")

    except ImportError:
        print("Error: conflab not found. Install it first with pip install -e .")
    except Exception as e:
        logger.error(f"Error during example: {e}")
        raise


if __name__ == "__main__":
    main()
