"""Retail machine-learning benchmark: data generator, learners, workloads and harness."""

__version__ = "0.1.0"
