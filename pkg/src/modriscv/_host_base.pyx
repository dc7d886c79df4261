# cython: language_level=3
include "_host.pxi"
