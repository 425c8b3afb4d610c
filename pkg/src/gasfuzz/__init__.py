"""gasfuzz: search for inputs that maximize smart-contract gas consumption.

Pipeline: disassemble bytecode, build a gas-weighted CFG, execute on a
metered interpreter, and drive a feedback-directed mutational search over
a flat byte genome of function arguments and environment variables.
"""

from .evm import BACKEND

__version__ = "0.1.0"
__all__ = ["BACKEND", "__version__"]
