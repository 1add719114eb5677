"""Grid-house object-approaching simulator and learning stack"""

__version__ = '0.1.0'
