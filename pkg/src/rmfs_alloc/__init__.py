"""Order and rack allocation for robotic mobile fulfilment systems."""

__version__ = "0.1.0"
