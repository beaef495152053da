from . import verbose

__version__ = '0.1.0'
