"""Classification of multigerms of parametrized curves up to right-left equivalence."""

__version__ = "0.1.0"
