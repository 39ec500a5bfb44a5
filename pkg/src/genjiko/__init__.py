"""Genji-ko olfactory matching game with an AI co-smelling partner."""

__version__ = "0.1.0"
