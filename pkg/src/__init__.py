"""chainforge - VNF chain specification, expansion and placement."""

__version__ = "1.0.0"
