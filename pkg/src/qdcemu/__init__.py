"""Emulator for optically interconnected quantum data-center topologies."""
