# Recombination Lab - word-pair novelty, knowledge differentiation and collaboration matching
__version__ = "1.0.0"
