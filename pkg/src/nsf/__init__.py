"""Toolkit for the 1D compressible heat-conducting gas with a temperature lower bound."""

__version__ = "0.1.0"
