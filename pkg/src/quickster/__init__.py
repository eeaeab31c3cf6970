"""ALIP step-adjustment walking control on a reduced-order biped."""
__version__ = "0.1.0"
