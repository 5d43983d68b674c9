"""Experiment harness: test functions, configs, runner and command line."""
