"""Neural reference adapters for the scorer/1 and judge/1 wire protocols.

These servers wrap causal-LM checkpoints behind the same NDJSON contracts
the experiment toolkit's stub servers speak; the toolkit never imports
this package, it only talks to the processes.
"""

__version__ = "0.1.0"

from .config import AdapterConfig
