"""Three-player nonlocal game built on coherent embezzlement: simulation and bounds."""
__version__ = "0.1.0"
