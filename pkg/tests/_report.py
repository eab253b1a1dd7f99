"""Shared log of acceptance outcomes, printed in the terminal summary."""

ACCEPTANCE_LINES = []
