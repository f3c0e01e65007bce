"""horolab: exact arithmetic and equidistribution experiments on
expanding horospheres over real quadratic fields and the modular surface."""

__version__ = "0.1.0"
