"""Regularity obstructions and constructions for group actions on the interval.

Modules:
    exact_pl      exact piecewise-linear homeomorphisms, Thompson's F, words
    dynamics      two-chains, crossed pairs, support classification, nesting extraction
    regularity    Hölder estimates, displacement bound, nesting verification
    tsuboi        the three-level block construction of a, b, t
    feasibility   the parameter inequalities and the golden-ratio threshold
    stochastic    Monte Carlo summability checks
    cli           command-line entry point
"""

__version__ = "0.1.0"
