"""BGP-poisoning traceback: flow-graph model, route simulator, traceback
engines, and a Monte Carlo experiment harness."""

__version__ = "0.1.0"
