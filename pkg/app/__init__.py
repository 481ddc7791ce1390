"""
Power production at risk: county water scarcity (WAACI) and stream
temperature stress (WTSI) for thermoelectric plants under climate ensembles.

The command line lives in `cli.py`; the FastAPI report application in `main.py`.
"""

__version__ = "0.1.0"
