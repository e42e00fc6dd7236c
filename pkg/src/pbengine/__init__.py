"""Participatory-budgeting engine: graphical vote elicitation, synthetic
electorates, formal aggregation rules, and dashboard analytics."""

__version__ = "0.1.0"
