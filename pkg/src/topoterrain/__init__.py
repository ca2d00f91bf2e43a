"""Topographic cell-automaton morphology on gray images."""
