__version__ = '1.0.0'
VERSION = (1, 0, 0)
