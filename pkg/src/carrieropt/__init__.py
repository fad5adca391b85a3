"""carrieropt: multi-carrier energy system expansion and dispatch optimization.

Builds hourly-resolution linear (and mixed-integer) programs for coupled
electricity / hydrogen / natural-gas systems -- brownfield capacity expansion
of grids, storage and hydrogen assets on top of an existing fleet -- and
solves them with a built-in simplex / branch-and-bound kernel. Scenario gates
restrict which asset classes may expand, and emission-cap sweeps trace
cost-emission frontiers and abatement curves.
"""

__version__ = "0.1.0"
