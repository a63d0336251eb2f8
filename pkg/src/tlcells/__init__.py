"""Kazhdan-Lusztig cells and generalized Temperley-Lieb quotients of finite Coxeter groups."""

__version__ = "0.1.0"
