"""
Pronoun bias audit toolkit for machine translation
"""
__version__ = "1.0.0"
