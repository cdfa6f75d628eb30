"""Push-button testing of epsilon-differential privacy claims."""

import sys

# symbolic evaluation recurses over deep bind chains
if sys.getrecursionlimit() < 20000:
    sys.setrecursionlimit(20000)

__version__ = "0.1.0"
